#include "asmb/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "asmb/error.hpp"

namespace asmb {

namespace {

struct unit {
    ObjectId leader = 0;
    std::vector<ObjectId> followers; // group members carried rigidly
    std::optional<ChainId> rigid_chain;
    std::size_t chain_index = 0;
    const GrabCoupling* grab = nullptr;
    BodyState body;
    Wrench wrench;
};

struct step_options {
    PhysicsMode mode = PhysicsMode::pose;
    bool collisions = true;
    bool springs = true;
    double damping = 0;
};

BodyState body_of(const SceneDoc& doc, ObjectId id) {
    const auto& o = doc.object(id);
    auto b = make_body(id, o.transform, doc.asset_of(id).box);
    b.linear_velocity = o.linear_velocity;
    b.angular_velocity = o.angular_velocity;
    return b;
}

// Moves a wrench acting on `member` to the unit leader's center of mass.
void add_to_unit(unit& u, const Wrench& w, const Vec3& member_com) {
    u.wrench.force += w.force;
    u.wrench.torque += w.torque + cross(member_com - u.body.com(), w.force);
}

bool finite(const BodyState& b) {
    return is_finite(b.transform.translation) && is_finite(b.linear_velocity) && is_finite(b.angular_velocity) &&
           std::isfinite(b.transform.rotation.w) && std::isfinite(b.transform.rotation.x) &&
           std::isfinite(b.transform.rotation.y) && std::isfinite(b.transform.rotation.z);
}

StepReport step_impl(SceneDoc& doc, std::span<const GrabCoupling> grabs, double dt, const step_options& opt) {
    if (!(dt > 0) || !std::isfinite(dt)) throw error(errc::invalid_argument, "dt must be positive");

    std::map<ObjectId, const GrabCoupling*> grabbed;
    for (const auto& g : grabs) {
        doc.object(g.object_id);
        grabbed.emplace(g.object_id, &g);
    }
    auto is_grabbed = [&](ObjectId id) { return grabbed.count(id) > 0; };

    std::vector<ObjectId> candidates;
    if (opt.mode == PhysicsMode::full) {
        for (const auto& [id, o] : doc.objects) candidates.push_back(id);
    } else {
        for (const auto& [id, g] : grabbed) candidates.push_back(id);
    }

    std::vector<unit> units;
    std::map<ObjectId, std::size_t> owner;
    std::set<ObjectId> assigned;
    std::set<ChainId> reshaping;
    auto new_unit = [&](ObjectId leader) -> unit& {
        unit u;
        u.leader = leader;
        const auto it = grabbed.find(leader);
        if (it != grabbed.end()) u.grab = it->second;
        owner[leader] = units.size();
        assigned.insert(leader);
        units.push_back(std::move(u));
        return units.back();
    };

    for (auto id : candidates) {
        if (assigned.count(id)) continue;
        const auto& o = doc.object(id);
        if (o.chain) {
            const auto& c = doc.chains.at(*o.chain);
            const bool reshape = is_grabbed(c.base()) || is_grabbed(c.second());
            if (reshape) {
                reshaping.insert(c.id);
                for (auto m : {c.base(), c.second()}) {
                    if (!assigned.count(m) && (opt.mode == PhysicsMode::full || is_grabbed(m))) new_unit(m);
                }
                for (auto m : c.members) assigned.insert(m);
            } else {
                ObjectId leader = id;
                std::size_t index = o.chain_index;
                for (std::size_t i = 0; i < c.members.size(); ++i) {
                    if (is_grabbed(c.members[i])) {
                        leader = c.members[i];
                        index = i;
                        break;
                    }
                }
                auto& u = new_unit(leader);
                u.rigid_chain = c.id;
                u.chain_index = index;
                const std::size_t ui = owner[leader];
                for (auto m : c.members) {
                    owner[m] = ui;
                    assigned.insert(m);
                }
            }
        } else if (o.group) {
            const auto members = group_members(doc, *o.group);
            ObjectId leader = id;
            for (auto m : members) {
                if (is_grabbed(m)) {
                    leader = m;
                    break;
                }
            }
            auto& u = new_unit(leader);
            const std::size_t ui = owner[leader];
            for (auto m : members) {
                if (m != leader) u.followers.push_back(m);
                owner[m] = ui;
                assigned.insert(m);
            }
        } else {
            new_unit(id);
        }
    }
    for (auto& u : units) u.body = body_of(doc, u.leader);

    StepReport report;
    std::vector<ObjectId> moving(assigned.begin(), assigned.end());
    report.stats.n_objects = doc.objects.size();
    report.stats.n_moving = moving.size();

    if (opt.collisions && opt.mode != PhysicsMode::off) {
        std::vector<CollisionBody> bodies;
        bodies.reserve(doc.objects.size());
        for (const auto& [id, o] : doc.objects) bodies.push_back({id, &doc.asset_of(id), o.transform});
        std::vector<ChainGroup> chains;
        for (const auto& [cid, c] : doc.chains) chains.push_back({c.members, reshaping.count(cid) > 0});
        auto res = collide_scene(bodies, chains, opt.mode, moving);
        report.stats = res.stats;
        report.contacts = std::move(res.contacts);
    }

    // Coupling, in leader id order.
    std::vector<std::size_t> order(units.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return units[a].leader < units[b].leader; });
    for (auto i : order) {
        if (units[i].grab) units[i].wrench += coupling_wrench(units[i].body, *units[i].grab);
    }

    // Contact response, in canonical pair order.
    for (const auto& rep : report.contacts) {
        const auto oa = owner.find(rep.pair.a);
        const auto ob = owner.find(rep.pair.b);
        if (oa != owner.end() && ob != owner.end() && oa->second == ob->second) continue;
        for (auto side : {rep.pair.a, rep.pair.b}) {
            const auto it = owner.find(side);
            if (it == owner.end()) continue;
            auto& u = units[it->second];
            if (rep.chain_offset && u.leader != side) continue;
            const auto body = body_of(doc, side);
            add_to_unit(u, contact_wrench(rep, body, doc.physics.k_contact, doc.physics.contact_torque), body.com());
        }
    }

    if (opt.springs) {
        for (const auto& [cid, conn] : doc.connectors) {
            if (conn.display_only) continue;
            const auto ia = owner.find(conn.end_a.object_id);
            const auto ib = owner.find(conn.end_b.object_id);
            if (ia == owner.end() && ib == owner.end()) continue;
            if (!doc.objects.count(conn.end_a.object_id) || !doc.objects.count(conn.end_b.object_id)) {
                throw error(errc::dangling_endpoint, "connector " + std::to_string(cid) + " has a missing endpoint");
            }
            const auto a = body_of(doc, conn.end_a.object_id);
            const auto b = body_of(doc, conn.end_b.object_id);
            const auto w = spring_wrenches(conn, a, b);
            if (ia != owner.end()) add_to_unit(units[ia->second], w.on_a, a.com());
            if (ib != owner.end()) add_to_unit(units[ib->second], w.on_b, b.com());
        }
    }

    for (auto i : order) {
        auto& u = units[i];
        integrate_body(u.body, u.wrench, dt, opt.damping);
        if (!finite(u.body)) {
            throw error(errc::non_finite_state, "integration diverged for object " + std::to_string(u.leader), std::nullopt,
                        std::to_string(u.leader));
        }
    }

    for (auto i : order) {
        auto& u = units[i];
        auto& leader = doc.object(u.leader);
        const RigidTransform before = leader.transform;
        leader.linear_velocity = u.body.linear_velocity;
        leader.angular_velocity = u.body.angular_velocity;
        if (u.rigid_chain) {
            chain_move_rigid(doc, *u.rigid_chain, u.chain_index, u.body.transform);
            continue;
        }
        leader.transform = u.body.transform;
        if (!u.followers.empty()) {
            const RigidTransform delta = compose(u.body.transform, inverse(before));
            for (auto f : u.followers) {
                auto& fo = doc.object(f);
                fo.transform = compose(delta, fo.transform);
            }
        }
    }
    for (auto cid : reshaping) chain_update(doc, cid);
    return report;
}

} // namespace

StepReport step(SceneDoc& doc, std::span<const GrabCoupling> grabs, double dt) {
    step_options opt;
    opt.mode = doc.physics_mode;
    opt.collisions = doc.collisions_enabled;
    opt.springs = doc.springs_enabled;
    opt.damping = doc.physics.velocity_damping;
    return step_impl(doc, grabs, dt, opt);
}

double spring_residual(const SceneDoc& doc, bool relative) {
    double worst = 0;
    for (const auto& [cid, conn] : doc.connectors) {
        if (conn.display_only) continue;
        const auto a = body_of(doc, conn.end_a.object_id);
        const auto b = body_of(doc, conn.end_b.object_id);
        double r = std::abs(spring_length(conn, a, b) - conn.rest_length);
        if (relative) r /= std::max(conn.rest_length, 1.0);
        worst = std::max(worst, r);
    }
    return worst;
}

RelaxReport relax_springs(SceneDoc& doc, std::uint64_t max_steps, double tol, bool collisions) {
    const bool any = std::any_of(doc.connectors.begin(), doc.connectors.end(),
                                 [](const auto& kv) { return !kv.second.display_only; });
    if (!any) throw error(errc::invalid_argument, "relax needs at least one active spring");
    if (!(tol > 0)) throw error(errc::invalid_argument, "tolerance must be positive");

    step_options opt;
    opt.mode = PhysicsMode::full;
    opt.collisions = collisions;
    opt.springs = true;
    opt.damping = doc.physics.relax_damping;

    RelaxReport out;
    while (true) {
        if (spring_residual(doc, true) <= tol) {
            out.converged = true;
            break;
        }
        if (out.steps_used >= max_steps) break;
        step_impl(doc, {}, doc.physics.dt, opt);
        ++out.steps_used;
    }
    for (auto& [id, o] : doc.objects) {
        o.linear_velocity = {};
        o.angular_velocity = {};
    }
    out.residual = spring_residual(doc, false);
    return out;
}

} // namespace asmb
