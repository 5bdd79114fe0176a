#pragma once

#include <span>
#include <vector>

#include "asmb/collision.hpp"
#include "asmb/physics.hpp"
#include "asmb/scene.hpp"

namespace asmb {

struct StepReport {
    CollisionStats stats;
    std::vector<ContactReport> contacts;
};

// One fixed step of the scene's physics mode. Integrable set: grabbed objects
// (pose, off) or everything (full). Groups and crystal chains move as rigid
// units led by the grabbed member; grabbing a chain's base or second copy
// reshapes it instead. Wrenches accumulate in object id order, then connector
// id order. Throws non_finite_state without touching the scene.
StepReport step(SceneDoc& doc, std::span<const GrabCoupling> grabs, double dt);
inline StepReport step(SceneDoc& doc, std::span<const GrabCoupling> grabs) { return step(doc, grabs, doc.physics.dt); }

struct RelaxReport {
    bool converged = false;
    std::uint64_t steps_used = 0;
    double residual = 0; // max ||d| - L0| over active springs, nm
};

// max ||d| - L0| over active springs, divided by max(L0, 1) when relative.
double spring_residual(const SceneDoc& doc, bool relative);

// Steps every object under spring (and optionally contact) wrenches with
// relax_damping until every active spring is within tol * max(L0, 1 nm).
RelaxReport relax_springs(SceneDoc& doc, std::uint64_t max_steps, double tol, bool collisions);

} // namespace asmb
