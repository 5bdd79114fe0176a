#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "asmb/collision.hpp"
#include "asmb/geometry.hpp"
#include "asmb/transforms.hpp"

namespace asmb {

using ConnectorId = std::uint64_t;

// Gains are per unit mass; every body has mass 1.
struct PhysicsConfig {
    double k_lin = 60;   // 1/s^2
    double c_lin = 12;   // 1/s
    double k_rot = 40;
    double c_rot = 10;
    double k_contact = 600;
    double dt = 1.0 / 60.0;
    double velocity_damping = 0.02; // fraction removed per step
    double relax_damping = 0.1;     // used by relax_springs instead of velocity_damping
    bool contact_torque = true;

    bool operator==(const PhysicsConfig&) const = default;
};

// Parses the [physics] section of a flat key=value file. Unknown keys in that
// section are errors; other sections are ignored.
PhysicsConfig parse_physics_config(std::string_view text, PhysicsConfig base = {});

struct BodyState {
    ObjectId object_id = 0;
    RigidTransform transform;
    Vec3 linear_velocity;  // nm/s, of the center of mass
    Vec3 angular_velocity; // rad/s, world frame
    double mass = 1;
    Vec3 inertia{1, 1, 1}; // principal moments, local frame
    Vec3 com_local;        // center of mass, local frame

    Vec3 com() const { return transform.apply(com_local); }
};

// Solid cuboid of unit mass filling the box, centered at the box center.
BodyState make_body(ObjectId id, const RigidTransform& t, const LocalBox& box);

struct GrabCoupling {
    ObjectId object_id = 0;
    RigidTransform target;
    double k_lin = 60, k_rot = 40, c_lin = 12, c_rot = 10;

    static GrabCoupling with_gains(ObjectId id, const RigidTransform& target, const PhysicsConfig& cfg) {
        return {id, target, cfg.k_lin, cfg.k_rot, cfg.c_lin, cfg.c_rot};
    }
};

struct SpringEnd {
    ObjectId object_id = 0;
    Vec3 anchor; // local frame

    bool operator==(const SpringEnd&) const = default;
};

struct SpringConnector {
    ConnectorId id = 0;
    SpringEnd end_a;
    SpringEnd end_b;
    double rest_length = 0;
    double stiffness = 10;
    bool display_only = false;

    bool operator==(const SpringConnector&) const = default;
};

struct Wrench {
    Vec3 force;
    Vec3 torque; // about the body's center of mass, world frame

    Wrench& operator+=(const Wrench& o) {
        force += o.force;
        torque += o.torque;
        return *this;
    }
};

Wrench coupling_wrench(const BodyState& body, const GrabCoupling& grab);

struct SpringWrenches {
    Wrench on_a;
    Wrench on_b;
};

// Bodies are the states of end_a's and end_b's objects; ids must match.
SpringWrenches spring_wrenches(const SpringConnector& conn, const BodyState& a, const BodyState& b);
// |anchor_b - anchor_a| in world space.
double spring_length(const SpringConnector& conn, const BodyState& a, const BodyState& b);

// Penalty force at the contact point on `responder` (one side of the pair).
Wrench contact_wrench(const ContactReport& report, const BodyState& responder, double k_contact,
                      bool with_torque = true);

// Semi-implicit Euler: velocities first, then pose; quaternion renormalized.
void integrate_body(BodyState& body, const Wrench& w, double dt, double velocity_damping);

enum class TerminusEnd { a, b };
enum class Terminus { n, c };

SpringConnector snap_connector_to_terminus(SpringConnector conn, TerminusEnd end, Terminus which,
                                           const std::optional<MoleculeMeta>& meta);

} // namespace asmb
