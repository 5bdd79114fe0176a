#include "asmb/scene.hpp"

#include <algorithm>
#include <cmath>

#include "asmb/error.hpp"

namespace asmb {

bool is_known_colormap(std::string_view name) { return name == "rainbow" || name == "blue-white-red"; }

std::array<double, 3> colormap_rgb(std::string_view name, double s) {
    s = std::clamp(s, 0.0, 1.0);
    if (name == "blue-white-red") {
        if (s < 0.5) {
            const double u = s * 2;
            return {u, u, 1.0};
        }
        const double u = (s - 0.5) * 2;
        return {1.0, 1.0 - u, 1.0 - u};
    }
    if (name != "rainbow") throw error(errc::invalid_argument, "unknown colormap '" + std::string(name) + "'");
    // Hue sweep blue (0) -> red (1) at full saturation and value.
    const double h = (1.0 - s) * 4.0; // sextant units, 0 = red, 4 = blue
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    if (h < 1) return {1, x, 0};
    if (h < 2) return {x, 1, 0};
    if (h < 3) return {0, 1, x};
    return {0, x, 1};
}

const SceneObject& SceneDoc::object(ObjectId id) const {
    const auto it = objects.find(id);
    if (it == objects.end()) throw error(errc::unknown_id, "unknown object " + std::to_string(id), std::nullopt, std::to_string(id));
    return it->second;
}

SceneObject& SceneDoc::object(ObjectId id) {
    return const_cast<SceneObject&>(static_cast<const SceneDoc&>(*this).object(id));
}

const MeshAsset& SceneDoc::asset_of(ObjectId id) const {
    const auto& o = object(id);
    const auto it = meshes.find(o.mesh_ref);
    if (it == meshes.end()) throw error(errc::dangling_reference, "object " + std::to_string(id) + " references missing mesh", std::nullopt, o.mesh_ref);
    return *it->second;
}

bool same_state(const SceneDoc& a, const SceneDoc& b) {
    if (a.meshes.size() != b.meshes.size()) return false;
    for (auto ia = a.meshes.begin(), ib = b.meshes.begin(); ia != a.meshes.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
    }
    auto canon = [](const SceneDoc& d) {
        auto objects = d.objects;
        for (auto& [id, o] : objects) {
            o.transform.rotation = o.transform.rotation.canonical();
            for (auto& k : o.keyframes) k.transform.rotation = k.transform.rotation.canonical();
        }
        auto chains = d.chains;
        for (auto& [id, c] : chains) c.t_ab.rotation = c.t_ab.rotation.canonical();
        return std::pair{std::move(objects), std::move(chains)};
    };
    // Quaternion sign is not state.
    if (canon(a) != canon(b)) return false;
    return a.groups == b.groups && a.connectors == b.connectors &&
           a.duration == b.duration && a.current_time == b.current_time && a.physics_mode == b.physics_mode &&
           a.collisions_enabled == b.collisions_enabled && a.springs_enabled == b.springs_enabled &&
           a.physics == b.physics && a.next_id == b.next_id;
}

void check_invariants(const SceneDoc& doc) {
    auto fail = [](errc code, const std::string& msg, std::uint64_t id) {
        throw error(code, msg, std::nullopt, std::to_string(id));
    };
    if (!(doc.duration >= 0) || !(doc.current_time >= 0) || doc.current_time > doc.duration) {
        throw error(errc::range_error, "current_time must lie in [0, duration]");
    }
    for (const auto& [id, o] : doc.objects) {
        if (id != o.id) fail(errc::schema_violation, "object key/id mismatch", id);
        if (id >= doc.next_id) fail(errc::schema_violation, "object id beyond next_id", id);
        if (!doc.meshes.count(o.mesh_ref)) fail(errc::dangling_reference, "missing mesh " + o.mesh_ref, id);
        if (o.group && !doc.groups.count(*o.group)) fail(errc::dangling_reference, "missing group", *o.group);
        if (o.chain) {
            const auto it = doc.chains.find(*o.chain);
            if (it == doc.chains.end()) fail(errc::dangling_reference, "missing chain", *o.chain);
            if (o.chain_index >= it->second.members.size() || it->second.members[o.chain_index] != id) {
                fail(errc::schema_violation, "chain index mismatch", id);
            }
        }
        for (std::size_t k = 0; k < o.keyframes.size(); ++k) {
            const auto& kf = o.keyframes[k];
            if (kf.time < 0 || kf.time > doc.duration) fail(errc::range_error, "keyframe time out of range", id);
            if (k > 0 && !(o.keyframes[k - 1].time < kf.time)) fail(errc::schema_violation, "keyframe times not increasing", id);
            if (kf.group && !doc.groups.count(*kf.group)) fail(errc::dangling_reference, "keyframe references missing group", *kf.group);
        }
        if (!o.color.scalar_channel.empty() && !is_known_colormap(o.color.colormap)) {
            fail(errc::schema_violation, "unknown colormap", id);
        }
    }
    for (const auto& [id, c] : doc.chains) {
        if (c.id != id || c.members.size() < 2) fail(errc::schema_violation, "chain needs at least two members", id);
        for (std::size_t i = 0; i < c.members.size(); ++i) {
            const auto it = doc.objects.find(c.members[i]);
            if (it == doc.objects.end()) fail(errc::dangling_reference, "missing chain member", c.members[i]);
            if (it->second.chain != id || it->second.chain_index != i) fail(errc::schema_violation, "member chain link mismatch", c.members[i]);
            if (it->second.mesh_ref != doc.object(c.base()).mesh_ref) fail(errc::schema_violation, "chain members must share a mesh", c.members[i]);
        }
    }
    for (const auto& [id, conn] : doc.connectors) {
        if (conn.id != id) fail(errc::schema_violation, "connector key/id mismatch", id);
        if (!doc.objects.count(conn.end_a.object_id) || !doc.objects.count(conn.end_b.object_id)) {
            fail(errc::dangling_reference, "connector endpoint missing", id);
        }
        if (conn.rest_length < 0 || conn.stiffness < 0) fail(errc::schema_violation, "negative connector parameter", id);
    }
    for (const auto& [id, g] : doc.groups) {
        if (g.id != id) fail(errc::schema_violation, "group key/id mismatch", id);
    }
}

std::string add_mesh(SceneDoc& doc, AssetPtr asset) {
    auto hash = asset->hash;
    doc.meshes.emplace(hash, std::move(asset));
    return hash;
}

ObjectId spawn(SceneDoc& doc, const std::string& mesh_ref, const RigidTransform& transform, std::string name) {
    if (!doc.meshes.count(mesh_ref)) throw error(errc::unknown_id, "unknown mesh " + mesh_ref, std::nullopt, mesh_ref);
    SceneObject o;
    o.id = doc.next_id++;
    o.name = name.empty() ? "object-" + std::to_string(o.id) : std::move(name);
    o.mesh_ref = mesh_ref;
    o.transform = transform;
    const auto id = o.id;
    doc.objects.emplace(id, std::move(o));
    return id;
}

std::vector<ObjectId> duplicate(SceneDoc& doc, const std::vector<ObjectId>& ids) {
    for (auto id : ids) doc.object(id);
    std::map<GroupId, GroupId> group_map;
    for (auto id : ids) {
        const auto& o = doc.object(id);
        if (o.group && !group_map.count(*o.group)) {
            const GroupId g = doc.next_id++;
            doc.groups.emplace(g, Group{g});
            group_map.emplace(*o.group, g);
        }
    }
    auto remap = [&](std::optional<GroupId> g) -> std::optional<GroupId> {
        if (!g) return g;
        const auto it = group_map.find(*g);
        return it == group_map.end() ? g : std::optional<GroupId>(it->second);
    };
    std::vector<ObjectId> out;
    for (auto id : ids) {
        SceneObject copy = doc.object(id);
        copy.id = doc.next_id++;
        copy.group = remap(copy.group);
        copy.chain.reset();
        copy.chain_index = 0;
        for (auto& kf : copy.keyframes) kf.group = remap(kf.group);
        out.push_back(copy.id);
        doc.objects.emplace(copy.id, std::move(copy));
    }
    return out;
}

namespace {

void dissolve_chain(SceneDoc& doc, ChainId id) {
    const auto it = doc.chains.find(id);
    if (it == doc.chains.end()) return;
    for (auto m : it->second.members) {
        if (auto o = doc.objects.find(m); o != doc.objects.end()) {
            o->second.chain.reset();
            o->second.chain_index = 0;
        }
    }
    doc.chains.erase(it);
}

bool group_referenced(const SceneDoc& doc, GroupId g) {
    for (const auto& [id, o] : doc.objects) {
        if (o.group == g) return true;
        for (const auto& kf : o.keyframes) {
            if (kf.group == g) return true;
        }
    }
    return false;
}

void regenerate(SceneDoc& doc, const CrystalChain& c, std::size_t from) {
    const auto transforms = crystal_chain(doc.object(c.base()).transform, c.t_ab, c.members.size());
    for (std::size_t i = from; i < c.members.size(); ++i) doc.object(c.members[i]).transform = transforms[i];
}

CrystalChain& chain_ref(SceneDoc& doc, ChainId id) {
    const auto it = doc.chains.find(id);
    if (it == doc.chains.end()) throw error(errc::unknown_id, "unknown chain " + std::to_string(id), std::nullopt, std::to_string(id));
    return it->second;
}

void check_time(const SceneDoc& doc, double time) {
    if (!(time >= 0) || time > doc.duration) {
        throw error(errc::time_out_of_range, "time " + std::to_string(time) + " outside [0, duration]");
    }
}

} // namespace

void remove_object(SceneDoc& doc, ObjectId id) {
    const auto& o = doc.object(id);
    if (o.chain) dissolve_chain(doc, *o.chain);
    const auto g = doc.object(id).group;
    doc.objects.erase(id);
    for (auto it = doc.connectors.begin(); it != doc.connectors.end();) {
        if (it->second.end_a.object_id == id || it->second.end_b.object_id == id) it = doc.connectors.erase(it);
        else ++it;
    }
    if (g && !group_referenced(doc, *g)) doc.groups.erase(*g);
}

GroupId group(SceneDoc& doc, const std::vector<ObjectId>& ids) {
    if (ids.empty()) throw error(errc::invalid_argument, "group needs at least one member");
    for (auto id : ids) {
        const auto& o = doc.object(id);
        if (o.group) throw error(errc::conflicting_membership, "object " + std::to_string(id) + " is already grouped", std::nullopt, std::to_string(id));
        if (o.chain) throw error(errc::conflicting_membership, "object " + std::to_string(id) + " belongs to a chain", std::nullopt, std::to_string(id));
    }
    const GroupId g = doc.next_id++;
    doc.groups.emplace(g, Group{g});
    for (auto id : ids) doc.object(id).group = g;
    return g;
}

void ungroup(SceneDoc& doc, GroupId id) {
    if (!doc.groups.count(id)) throw error(errc::unknown_id, "unknown group " + std::to_string(id), std::nullopt, std::to_string(id));
    for (auto& [oid, o] : doc.objects) {
        if (o.group == id) o.group.reset();
        for (auto& kf : o.keyframes) {
            if (kf.group == id) kf.group.reset();
        }
    }
    doc.groups.erase(id);
}

std::vector<ObjectId> group_members(const SceneDoc& doc, GroupId id) {
    std::vector<ObjectId> out;
    for (const auto& [oid, o] : doc.objects) {
        if (o.group == id) out.push_back(oid);
    }
    return out;
}

void set_membership_keyframe(SceneDoc& doc, ObjectId object, double time, std::optional<GroupId> g) {
    check_time(doc, time);
    if (g && !doc.groups.count(*g)) throw error(errc::unknown_id, "unknown group " + std::to_string(*g), std::nullopt, std::to_string(*g));
    auto& o = doc.object(object);
    if (g && o.chain) throw error(errc::conflicting_membership, "chain members cannot be grouped");
    const bool has_earlier = std::any_of(o.keyframes.begin(), o.keyframes.end(), [&](const Keyframe& k) { return k.time < time; });
    if (!has_earlier && time > 0) {
        const auto s = evaluate_object(o, 0);
        o.keyframes.insert(o.keyframes.begin(), Keyframe{0, s.transform, s.color, s.group, s.visible});
    }
    const auto it = std::lower_bound(o.keyframes.begin(), o.keyframes.end(), time,
                                     [](const Keyframe& k, double t) { return k.time < t; });
    if (it != o.keyframes.end() && it->time == time) {
        it->group = g;
    } else {
        const auto s = evaluate_object(o, time);
        o.keyframes.insert(it, Keyframe{time, s.transform, s.color, g, s.visible});
    }
    o.group = evaluate_object(o, doc.current_time).group;
}

std::set<ObjectId> membership(const SceneDoc& doc, GroupId id, double time) {
    std::set<ObjectId> out;
    for (const auto& [oid, o] : doc.objects) {
        if (evaluate_object(o, time).group == id) out.insert(oid);
    }
    return out;
}

ChainId chain_create(SceneDoc& doc, ObjectId base, ObjectId second, std::size_t count) {
    if (count < 2) throw error(errc::invalid_argument, "chain needs at least two members");
    if (base == second) throw error(errc::invalid_argument, "base and second must differ");
    const auto& b = doc.object(base);
    const auto& s = doc.object(second);
    if (b.mesh_ref != s.mesh_ref) throw error(errc::mesh_mismatch, "base and second copies use different meshes");
    for (const auto* o : {&b, &s}) {
        if (o->chain) throw error(errc::conflicting_membership, "object " + std::to_string(o->id) + " already belongs to a chain");
        if (o->group) throw error(errc::conflicting_membership, "object " + std::to_string(o->id) + " is grouped");
    }
    CrystalChain c;
    c.id = doc.next_id++;
    c.t_ab = relative_transform(b.transform, s.transform);
    c.members = {base, second};
    const std::string base_name = b.name;
    const std::string mesh = b.mesh_ref;
    const Color color = b.color;
    for (std::size_t i = 2; i < count; ++i) {
        const auto id = spawn(doc, mesh, RigidTransform{}, base_name + "#" + std::to_string(i + 1));
        doc.object(id).color = color;
        c.members.push_back(id);
    }
    for (std::size_t i = 0; i < c.members.size(); ++i) {
        auto& o = doc.object(c.members[i]);
        o.chain = c.id;
        o.chain_index = static_cast<std::uint32_t>(i);
    }
    const auto id = c.id;
    doc.chains.emplace(id, c);
    regenerate(doc, doc.chains.at(id), 2);
    return id;
}

void chain_update(SceneDoc& doc, ChainId id) {
    auto& c = chain_ref(doc, id);
    c.t_ab = relative_transform(doc.object(c.base()).transform, doc.object(c.second()).transform);
    regenerate(doc, c, 2);
}

void chain_set_tab(SceneDoc& doc, ChainId id, const RigidTransform& t_ab) {
    auto& c = chain_ref(doc, id);
    c.t_ab = t_ab;
    regenerate(doc, c, 1);
}

void chain_move_rigid(SceneDoc& doc, ChainId id, std::size_t index, const RigidTransform& t) {
    auto& c = chain_ref(doc, id);
    if (index >= c.members.size()) throw error(errc::invalid_argument, "chain index out of range");
    doc.object(c.base()).transform = compose(t, inverse(transform_power(c.t_ab, static_cast<unsigned>(index))));
    regenerate(doc, c, 1);
}

ConnectorId add_connector(SceneDoc& doc, SpringConnector conn) {
    doc.object(conn.end_a.object_id);
    doc.object(conn.end_b.object_id);
    if (conn.rest_length < 0 || conn.stiffness < 0) throw error(errc::invalid_argument, "rest length and stiffness must be >= 0");
    conn.id = doc.next_id++;
    const auto id = conn.id;
    doc.connectors.emplace(id, conn);
    return id;
}

const Keyframe& set_keyframe(SceneDoc& doc, ObjectId object, double time) {
    check_time(doc, time);
    auto& o = doc.object(object);
    Keyframe k{time, o.transform, o.color, o.group, o.visible};
    const auto it = std::lower_bound(o.keyframes.begin(), o.keyframes.end(), time,
                                     [](const Keyframe& kf, double t) { return kf.time < t; });
    if (it != o.keyframes.end() && it->time == time) {
        *it = k;
        return *it;
    }
    return *o.keyframes.insert(it, k);
}

bool has_keyframe_at(const SceneObject& obj, double time) {
    return std::any_of(obj.keyframes.begin(), obj.keyframes.end(), [&](const Keyframe& k) { return k.time == time; });
}

Vec3 catmull_rom_centripetal(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, double u) {
    const double s0 = 0;
    const double s1 = s0 + std::sqrt(norm(p1 - p0));
    const double s2 = s1 + std::sqrt(norm(p2 - p1));
    const double s3 = s2 + std::sqrt(norm(p3 - p2));
    if (s2 == s1) return p1;
    const double s = s1 + u * (s2 - s1);
    auto lerp = [&](const Vec3& a, const Vec3& b, double sa, double sb) {
        return a * ((sb - s) / (sb - sa)) + b * ((s - sa) / (sb - sa));
    };
    // Phantom endpoints duplicate their neighbor; the zero-length knot span
    // collapses to the shared point.
    const Vec3 a1 = s1 == s0 ? p1 : lerp(p0, p1, s0, s1);
    const Vec3 a2 = lerp(p1, p2, s1, s2);
    const Vec3 a3 = s3 == s2 ? p2 : lerp(p2, p3, s2, s3);
    const Vec3 b1 = lerp(a1, a2, s0, s2);
    const Vec3 b2 = lerp(a2, a3, s1, s3);
    return lerp(b1, b2, s1, s2);
}

EvaluatedState evaluate_object(const SceneObject& obj, double time) {
    const auto& kf = obj.keyframes;
    auto from_key = [](const Keyframe& k) { return EvaluatedState{k.transform, k.color, k.group, k.visible}; };
    if (kf.empty()) return {obj.transform, obj.color, obj.group, obj.visible};
    if (time <= kf.front().time) return from_key(kf.front());
    if (time >= kf.back().time) return from_key(kf.back());

    const auto next = std::upper_bound(kf.begin(), kf.end(), time, [](double t, const Keyframe& k) { return t < k.time; });
    const std::size_t k = static_cast<std::size_t>(next - kf.begin()) - 1;
    const Keyframe& a = kf[k];
    const Keyframe& b = kf[k + 1];
    if (time == a.time) return from_key(a);
    const double u = (time - a.time) / (b.time - a.time);

    const Vec3& p0 = k > 0 ? kf[k - 1].transform.translation : a.transform.translation;
    const Vec3& p3 = k + 2 < kf.size() ? kf[k + 2].transform.translation : b.transform.translation;
    EvaluatedState s;
    s.transform.translation = catmull_rom_centripetal(p0, a.transform.translation, b.transform.translation, p3, u);
    s.transform.rotation = slerp(a.transform.rotation, b.transform.rotation, u);
    s.color = a.color;
    for (std::size_t c = 0; c < 3; ++c) s.color.rgb[c] = a.color.rgb[c] + (b.color.rgb[c] - a.color.rgb[c]) * u;
    s.group = a.group;
    s.visible = a.visible;
    return s;
}

std::map<ObjectId, EvaluatedState> evaluate(const SceneDoc& doc, double time) {
    std::map<ObjectId, EvaluatedState> out;
    for (const auto& [id, o] : doc.objects) out.emplace(id, evaluate_object(o, time));
    return out;
}

void apply_time(SceneDoc& doc, double time) {
    check_time(doc, time);
    doc.current_time = time;
    bool touched_chain = false;
    for (auto& [id, o] : doc.objects) {
        if (o.keyframes.empty()) continue;
        const auto s = evaluate_object(o, time);
        o.transform = s.transform;
        o.color = s.color;
        o.group = s.group;
        o.visible = s.visible;
        o.linear_velocity = {};
        o.angular_velocity = {};
        touched_chain = touched_chain || o.chain.has_value();
    }
    if (touched_chain) {
        for (auto& [cid, c] : doc.chains) chain_update(doc, cid);
    }
}

std::vector<Segment> box_edges(const LocalBox& box, const RigidTransform& t) {
    const auto c = box.corners();
    // Corner index bits: 1 = x, 2 = y, 4 = z.
    static constexpr int edges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                         {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
    std::vector<Segment> out;
    out.reserve(12);
    for (const auto& e : edges) out.push_back({t.apply(c[static_cast<std::size_t>(e[0])]), t.apply(c[static_cast<std::size_t>(e[1])])});
    return out;
}

OverlaySpec selection_overlay(const SceneDoc& doc, const Selection& sel) {
    OverlaySpec out;
    if (sel.kind == Selection::Kind::object) {
        const auto& o = doc.object(sel.id);
        out.tag = "single";
        out.edges = box_edges(doc.asset_of(o.id).box, o.transform);
        out.ribbons[o.id] = has_keyframe_at(o, doc.current_time);
        return out;
    }
    if (!doc.groups.count(sel.id)) throw error(errc::unknown_id, "unknown group " + std::to_string(sel.id), std::nullopt, std::to_string(sel.id));
    const auto members = group_members(doc, sel.id);
    if (members.empty()) throw error(errc::unknown_id, "group " + std::to_string(sel.id) + " has no live members");
    out.tag = "group";
    std::optional<LocalBox> all;
    for (auto id : members) {
        const auto& o = doc.object(id);
        const LocalBox w = world_aabb(doc.asset_of(id).box, o.transform);
        all = all ? LocalBox{min(all->min, w.min), max(all->max, w.max)} : w;
        out.ribbons[id] = has_keyframe_at(o, doc.current_time);
    }
    out.edges = box_edges(*all, RigidTransform{});
    return out;
}

} // namespace asmb
