#include "asmb/physics.hpp"

#include <algorithm>

#include "asmb/error.hpp"
#include "asmb/text.hpp"

namespace asmb {

PhysicsConfig parse_physics_config(std::string_view content, PhysicsConfig cfg) {
    bool in_physics = false;
    const auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = lines[i];
        if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = text::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw error(errc::malformed_line, "bad section header", i + 1);
            in_physics = text::trim(line.substr(1, line.size() - 2)) == "physics";
            continue;
        }
        if (!in_physics) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw error(errc::malformed_line, "expected key=value", i + 1);
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        if (key == "contact_torque") {
            if (value == "true" || value == "1" || value == "on") cfg.contact_torque = true;
            else if (value == "false" || value == "0" || value == "off") cfg.contact_torque = false;
            else throw error(errc::malformed_line, "contact_torque expects a boolean", i + 1);
            continue;
        }
        const auto v = text::parse_double(value);
        if (!v) throw error(errc::malformed_line, "bad number for '" + std::string(key) + "'", i + 1);
        if (key == "k_lin") cfg.k_lin = *v;
        else if (key == "c_lin") cfg.c_lin = *v;
        else if (key == "k_rot") cfg.k_rot = *v;
        else if (key == "c_rot") cfg.c_rot = *v;
        else if (key == "k_contact" || key == "k_c") cfg.k_contact = *v;
        else if (key == "dt") cfg.dt = *v;
        else if (key == "velocity_damping") cfg.velocity_damping = *v;
        else if (key == "relax_damping") cfg.relax_damping = *v;
        else throw error(errc::malformed_line, "unknown physics key '" + std::string(key) + "'", i + 1);
    }
    if (!(cfg.dt > 0)) throw error(errc::invalid_argument, "dt must be positive");
    for (double g : {cfg.k_lin, cfg.c_lin, cfg.k_rot, cfg.c_rot, cfg.k_contact}) {
        if (g < 0) throw error(errc::invalid_argument, "gains must be non-negative");
    }
    return cfg;
}

BodyState make_body(ObjectId id, const RigidTransform& t, const LocalBox& box) {
    BodyState b;
    b.object_id = id;
    b.transform = t;
    b.com_local = box.center();
    const Vec3 e = box.extent();
    // Flat or point-like meshes still need a positive inertia.
    const double floor = 1e-6;
    const double ex = std::max(e.x, floor), ey = std::max(e.y, floor), ez = std::max(e.z, floor);
    b.inertia = {b.mass * (ey * ey + ez * ez) / 12.0, b.mass * (ex * ex + ez * ez) / 12.0,
                 b.mass * (ex * ex + ey * ey) / 12.0};
    return b;
}

Wrench coupling_wrench(const BodyState& body, const GrabCoupling& grab) {
    Wrench w;
    const Vec3 target_com = grab.target.apply(body.com_local);
    w.force = (target_com - body.com()) * grab.k_lin - body.linear_velocity * grab.c_lin;
    const UnitQuat err = grab.target.rotation * body.transform.rotation.conjugate();
    Vec3 axis;
    double angle = 0;
    err.to_axis_angle(axis, angle);
    w.torque = axis * (grab.k_rot * angle) - body.angular_velocity * grab.c_rot;
    return w;
}

double spring_length(const SpringConnector& conn, const BodyState& a, const BodyState& b) {
    return norm(b.transform.apply(conn.end_b.anchor) - a.transform.apply(conn.end_a.anchor));
}

SpringWrenches spring_wrenches(const SpringConnector& conn, const BodyState& a, const BodyState& b) {
    if (a.object_id != conn.end_a.object_id || b.object_id != conn.end_b.object_id) {
        throw error(errc::dangling_endpoint, "connector endpoints do not match the supplied bodies");
    }
    SpringWrenches out;
    if (conn.display_only) return out;
    const Vec3 pa = a.transform.apply(conn.end_a.anchor);
    const Vec3 pb = b.transform.apply(conn.end_b.anchor);
    const Vec3 d = pb - pa;
    const double len = norm(d);
    if (len < 1e-9) return out;
    const Vec3 f = d * (conn.stiffness * (len - conn.rest_length) / len);
    out.on_a.force = f;
    out.on_b.force = -f;
    out.on_a.torque = cross(pa - a.com(), f);
    out.on_b.torque = cross(pb - b.com(), -f);
    return out;
}

Wrench contact_wrench(const ContactReport& report, const BodyState& responder, double k_contact, bool with_torque) {
    Wrench w;
    if (report.penetration_estimate <= 0) return w;
    double sign = 1;
    if (responder.object_id == report.pair.b) sign = -1;
    else if (responder.object_id != report.pair.a) throw error(errc::invalid_argument, "responder is not part of the contact");
    w.force = report.contact_normal * (sign * k_contact * report.penetration_estimate);
    if (with_torque) w.torque = cross(report.contact_point - responder.com(), w.force);
    return w;
}

void integrate_body(BodyState& body, const Wrench& w, double dt, double velocity_damping) {
    body.linear_velocity += w.force * (dt / body.mass);
    const UnitQuat& q = body.transform.rotation;
    const Vec3 torque_local = q.conjugate().rotate(w.torque);
    const Vec3 alpha_local{torque_local.x / body.inertia.x, torque_local.y / body.inertia.y,
                           torque_local.z / body.inertia.z};
    body.angular_velocity += q.rotate(alpha_local) * dt;
    if (velocity_damping != 0) {
        body.linear_velocity *= 1.0 - velocity_damping;
        body.angular_velocity *= 1.0 - velocity_damping;
    }

    const Vec3 com = body.com() + body.linear_velocity * dt;
    const double speed = norm(body.angular_velocity);
    UnitQuat rot = q;
    if (speed > 0) rot = UnitQuat::from_axis_angle(body.angular_velocity, speed * dt) * q;
    body.transform.rotation = rot;
    body.transform.translation = com - rot.rotate(body.com_local);
}

SpringConnector snap_connector_to_terminus(SpringConnector conn, TerminusEnd end, Terminus which,
                                           const std::optional<MoleculeMeta>& meta) {
    if (!meta) throw error(errc::no_terminus_data, "object has no terminus data");
    const Vec3 p = which == Terminus::n ? meta->n_terminus : meta->c_terminus;
    (end == TerminusEnd::a ? conn.end_a : conn.end_b).anchor = p;
    return conn;
}

} // namespace asmb
