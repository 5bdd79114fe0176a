#include "asmb/project_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "asmb/error.hpp"

namespace asmb {

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
    throw error(errc::schema_violation, msg + " at " + (path.empty() ? "/" : path), std::nullopt, path.empty() ? "/" : path);
}

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) schema(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) schema(path + "/" + key, "missing field");
    return *it;
}

const json* optional_field(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) schema(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema(path, "expected a finite number");
    return v;
}

std::uint64_t uint_id(const json& j, const std::string& path) {
    if (!is_nonnegative_integer(j)) schema(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

bool boolean(const json& j, const std::string& path) {
    if (!j.is_boolean()) schema(path, "expected a boolean");
    return j.get<bool>();
}

std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) schema(path, "expected a string");
    return j.get<std::string>();
}

const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) schema(path, "expected an array");
    return j;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) schema(path, "expected [x, y, z]");
    return {number(j[0], path + "/0"), number(j[1], path + "/1"), number(j[2], path + "/2")};
}

json opt_id(const std::optional<std::uint64_t>& id) { return id ? json(*id) : json(nullptr); }

std::optional<std::uint64_t> opt_id_from(const json& j, const std::string& path) {
    if (j.is_null()) return std::nullopt;
    return uint_id(j, path);
}

json color_json(const Color& c) {
    json j = {{"rgb", json::array({c.rgb[0], c.rgb[1], c.rgb[2]})}};
    if (!c.scalar_channel.empty()) {
        j["scalar_channel"] = c.scalar_channel;
        j["colormap"] = c.colormap;
    }
    return j;
}

Color color_from(const json& j, const std::string& path) {
    Color c;
    const auto& rgb = field(j, "rgb", path);
    if (!rgb.is_array() || rgb.size() != 3) schema(path + "/rgb", "expected [r, g, b]");
    for (std::size_t i = 0; i < 3; ++i) c.rgb[i] = number(rgb[i], path + "/rgb/" + std::to_string(i));
    if (const auto* s = optional_field(j, "scalar_channel")) {
        c.scalar_channel = string(*s, path + "/scalar_channel");
        c.colormap = string(field(j, "colormap", path), path + "/colormap");
        if (!is_known_colormap(c.colormap)) schema(path + "/colormap", "unknown colormap");
    }
    return c;
}

json keyframe_json(const Keyframe& k) {
    return {{"time", k.time}, {"transform", transform_to_json(k.transform)}, {"color", color_json(k.color)},
            {"group", opt_id(k.group)}, {"visible", k.visible}};
}

Keyframe keyframe_from(const json& j, const std::string& path) {
    Keyframe k;
    k.time = number(field(j, "time", path), path + "/time");
    k.transform = transform_from_json(field(j, "transform", path), path + "/transform");
    k.color = color_from(field(j, "color", path), path + "/color");
    k.group = opt_id_from(field(j, "group", path), path + "/group");
    k.visible = boolean(field(j, "visible", path), path + "/visible");
    return k;
}

json object_json(const SceneObject& o, bool with_chain) {
    json j = {{"id", o.id},
              {"name", o.name},
              {"mesh", o.mesh_ref},
              {"transform", transform_to_json(o.transform)},
              {"linear_velocity", vec_json(o.linear_velocity)},
              {"angular_velocity", vec_json(o.angular_velocity)},
              {"color", color_json(o.color)},
              {"group", opt_id(o.group)},
              {"visible", o.visible},
              {"keyframes", json::array()}};
    if (with_chain) {
        j["chain"] = opt_id(o.chain);
        j["chain_index"] = o.chain_index;
    }
    for (const auto& k : o.keyframes) j["keyframes"].push_back(keyframe_json(k));
    return j;
}

SceneObject object_from(const json& j, const std::string& path) {
    SceneObject o;
    o.id = uint_id(field(j, "id", path), path + "/id");
    o.name = string(field(j, "name", path), path + "/name");
    o.mesh_ref = string(field(j, "mesh", path), path + "/mesh");
    o.transform = transform_from_json(field(j, "transform", path), path + "/transform");
    o.linear_velocity = vec_from(field(j, "linear_velocity", path), path + "/linear_velocity");
    o.angular_velocity = vec_from(field(j, "angular_velocity", path), path + "/angular_velocity");
    o.color = color_from(field(j, "color", path), path + "/color");
    o.group = opt_id_from(field(j, "group", path), path + "/group");
    o.visible = boolean(field(j, "visible", path), path + "/visible");
    if (const auto* c = optional_field(j, "chain")) {
        o.chain = opt_id_from(*c, path + "/chain");
        const auto& idx = field(j, "chain_index", path);
        const auto v = uint_id(idx, path + "/chain_index");
        if (v > UINT32_MAX) schema(path + "/chain_index", "chain index too large");
        o.chain_index = static_cast<std::uint32_t>(v);
    }
    const auto& kfs = array(field(j, "keyframes", path), path + "/keyframes");
    for (std::size_t i = 0; i < kfs.size(); ++i) o.keyframes.push_back(keyframe_from(kfs[i], path + "/keyframes/" + std::to_string(i)));
    return o;
}

json connector_json(const SpringConnector& c) {
    return {{"id", c.id},
            {"a", {{"object", c.end_a.object_id}, {"anchor", vec_json(c.end_a.anchor)}}},
            {"b", {{"object", c.end_b.object_id}, {"anchor", vec_json(c.end_b.anchor)}}},
            {"rest_length", c.rest_length},
            {"stiffness", c.stiffness},
            {"display_only", c.display_only}};
}

SpringConnector connector_from(const json& j, const std::string& path) {
    SpringConnector c;
    c.id = uint_id(field(j, "id", path), path + "/id");
    for (auto [key, end] : {std::pair{"a", &c.end_a}, std::pair{"b", &c.end_b}}) {
        const std::string p = path + "/" + key;
        const auto& e = field(j, key, path);
        end->object_id = uint_id(field(e, "object", p), p + "/object");
        end->anchor = vec_from(field(e, "anchor", p), p + "/anchor");
    }
    c.rest_length = number(field(j, "rest_length", path), path + "/rest_length");
    c.stiffness = number(field(j, "stiffness", path), path + "/stiffness");
    c.display_only = boolean(field(j, "display_only", path), path + "/display_only");
    return c;
}

json physics_json(const PhysicsConfig& p) {
    return {{"k_lin", p.k_lin},       {"c_lin", p.c_lin},
            {"k_rot", p.k_rot},       {"c_rot", p.c_rot},
            {"k_contact", p.k_contact}, {"dt", p.dt},
            {"velocity_damping", p.velocity_damping}, {"relax_damping", p.relax_damping},
            {"contact_torque", p.contact_torque}};
}

PhysicsConfig physics_from(const json& j, const std::string& path) {
    PhysicsConfig p;
    for (auto [key, dst] : {std::pair{"k_lin", &p.k_lin}, std::pair{"c_lin", &p.c_lin}, std::pair{"k_rot", &p.k_rot},
                            std::pair{"c_rot", &p.c_rot}, std::pair{"k_contact", &p.k_contact}, std::pair{"dt", &p.dt},
                            std::pair{"velocity_damping", &p.velocity_damping},
                            std::pair{"relax_damping", &p.relax_damping}}) {
        *dst = number(field(j, key, path), path + "/" + key);
    }
    p.contact_torque = boolean(field(j, "contact_torque", path), path + "/contact_torque");
    if (!(p.dt > 0)) schema(path + "/dt", "dt must be positive");
    return p;
}

json mesh_json(const MeshAsset& a, const std::string* external_path) {
    json rec = asset_record(a.mesh, a.meta);
    if (external_path) {
        rec.erase("obj");
        rec["path"] = *external_path;
    }
    return rec;
}

AssetPtr mesh_from(const std::string& hash, const json& j, const std::string& path,
                   const std::filesystem::path& base_dir) {
    TriMesh mesh;
    try {
        if (const auto* p = optional_field(j, "path")) {
            const auto file = base_dir / string(*p, path + "/path");
            mesh = load_obj(read_file(file));
        } else {
            mesh = load_obj(string(field(j, "obj", path), path + "/obj"));
        }
    } catch (const error& e) {
        if (e.code() == errc::schema_violation || e.code() == errc::io_error) throw;
        schema(path, std::string("bad mesh: ") + e.what());
    }
    if (const auto* s = optional_field(j, "scalars")) {
        if (!s->is_object()) schema(path + "/scalars", "expected an object");
        for (auto it = s->begin(); it != s->end(); ++it) {
            const std::string p = path + "/scalars/" + it.key();
            std::vector<double> values;
            for (std::size_t i = 0; i < array(it.value(), p).size(); ++i) values.push_back(number(it.value()[i], p + "/" + std::to_string(i)));
            mesh.scalars[it.key()] = std::move(values);
        }
    }
    std::optional<MoleculeMeta> meta;
    if (const auto* m = optional_field(j, "meta")) {
        MoleculeMeta mm;
        mm.n_terminus = vec_from(field(*m, "n_terminus", path + "/meta"), path + "/meta/n_terminus");
        mm.c_terminus = vec_from(field(*m, "c_terminus", path + "/meta"), path + "/meta/c_terminus");
        mm.source_id = string(field(*m, "source_id", path + "/meta"), path + "/meta/source_id");
        meta = mm;
    }
    AssetPtr asset;
    try {
        asset = make_asset(std::move(mesh), std::move(meta));
    } catch (const error& e) {
        schema(path, std::string("bad mesh: ") + e.what());
    }
    if (asset->hash != hash) {
        throw error(errc::hash_mismatch, "mesh content does not match hash " + hash, std::nullopt, hash);
    }
    return asset;
}

json parse_document(std::string_view bytes) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        schema("/", std::string("unparseable document: ") + e.what());
    }
}

void check_version(const json& root) {
    const auto& v = field(root, "format_version", "");
    if (!v.is_number_integer()) schema("/format_version", "expected an integer");
    if (v.get<long long>() != project_format_version) {
        throw error(errc::version_mismatch, "unsupported format_version " + v.dump(), std::nullopt, "/format_version");
    }
}

std::map<std::string, AssetPtr> meshes_from(const json& root, const std::filesystem::path& base_dir) {
    std::map<std::string, AssetPtr> out;
    const auto& meshes = field(root, "meshes", "");
    if (!meshes.is_object()) schema("/meshes", "expected an object");
    for (auto it = meshes.begin(); it != meshes.end(); ++it) {
        out.emplace(it.key(), mesh_from(it.key(), it.value(), "/meshes/" + it.key(), base_dir));
    }
    return out;
}

} // namespace

json transform_to_json(const RigidTransform& t) {
    const UnitQuat q = t.rotation.canonical();
    return {{"rotation", json::array({q.w, q.x, q.y, q.z})}, {"translation", vec_json(t.translation)}};
}

RigidTransform transform_from_json(const json& j, const std::string& path) {
    const auto& r = field(j, "rotation", path);
    if (!r.is_array() || r.size() != 4) schema(path + "/rotation", "expected [w, x, y, z]");
    double q[4];
    for (std::size_t i = 0; i < 4; ++i) q[i] = number(r[i], path + "/rotation/" + std::to_string(i));
    if (q[0] == 0 && q[1] == 0 && q[2] == 0 && q[3] == 0) schema(path + "/rotation", "zero quaternion");
    RigidTransform t;
    const double n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
    if (std::abs(n2 - 1) <= 1e-12) {
        // Already unit (as written by save): keep the exact doubles so reloads are byte-stable.
        t.rotation.w = q[0];
        t.rotation.x = q[1];
        t.rotation.y = q[2];
        t.rotation.z = q[3];
    } else {
        t.rotation = UnitQuat(q[0], q[1], q[2], q[3]);
    }
    t.translation = vec_from(field(j, "translation", path), path + "/translation");
    return t;
}

json project_to_json(const SceneDoc& doc, const SaveOptions& opts) {
    json root;
    root["format_version"] = project_format_version;
    root["meshes"] = json::object();
    for (const auto& [hash, asset] : doc.meshes) {
        const auto it = opts.external_paths.find(hash);
        root["meshes"][hash] = mesh_json(*asset, it == opts.external_paths.end() ? nullptr : &it->second);
    }
    root["physics"] = physics_json(doc.physics);

    json scene;
    scene["duration"] = doc.duration;
    scene["current_time"] = doc.current_time;
    scene["physics_mode"] = to_string(doc.physics_mode);
    scene["collisions_enabled"] = doc.collisions_enabled;
    scene["springs_enabled"] = doc.springs_enabled;
    scene["next_id"] = doc.next_id;
    scene["objects"] = json::array();
    for (const auto& [id, o] : doc.objects) scene["objects"].push_back(object_json(o, true));
    scene["groups"] = json::array();
    for (const auto& [id, g] : doc.groups) scene["groups"].push_back(id);
    scene["chains"] = json::array();
    for (const auto& [id, c] : doc.chains) {
        scene["chains"].push_back({{"id", id}, {"t_ab", transform_to_json(c.t_ab)}, {"members", c.members}});
    }
    scene["connectors"] = json::array();
    for (const auto& [id, c] : doc.connectors) scene["connectors"].push_back(connector_json(c));
    root["scene"] = std::move(scene);
    return root;
}

std::string save(const SceneDoc& doc, const SaveOptions& opts) { return canonical_dump(project_to_json(doc, opts)) + "\n"; }

SceneDoc load(std::string_view bytes, const std::filesystem::path& base_dir) {
    const json root = parse_document(bytes);
    if (!root.is_object()) schema("/", "expected an object");
    check_version(root);

    SceneDoc doc;
    doc.meshes = meshes_from(root, base_dir);
    doc.physics = physics_from(field(root, "physics", ""), "/physics");

    const auto& s = field(root, "scene", "");
    const std::string sp = "/scene";
    doc.duration = number(field(s, "duration", sp), sp + "/duration");
    doc.current_time = number(field(s, "current_time", sp), sp + "/current_time");
    try {
        doc.physics_mode = physics_mode_from_string(string(field(s, "physics_mode", sp), sp + "/physics_mode"));
    } catch (const error&) {
        schema(sp + "/physics_mode", "unknown physics mode");
    }
    doc.collisions_enabled = boolean(field(s, "collisions_enabled", sp), sp + "/collisions_enabled");
    doc.springs_enabled = boolean(field(s, "springs_enabled", sp), sp + "/springs_enabled");
    doc.next_id = uint_id(field(s, "next_id", sp), sp + "/next_id");

    auto check_id = [&](std::uint64_t id, const std::string& path) {
        if (id == 0 || id >= doc.next_id) schema(path, "id outside [1, next_id)");
    };
    const auto& objects = array(field(s, "objects", sp), sp + "/objects");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string p = sp + "/objects/" + std::to_string(i);
        auto o = object_from(objects[i], p);
        check_id(o.id, p + "/id");
        const auto id = o.id;
        if (!doc.objects.emplace(id, std::move(o)).second) schema(p + "/id", "duplicate id");
    }
    const auto& groups = array(field(s, "groups", sp), sp + "/groups");
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const std::string p = sp + "/groups/" + std::to_string(i);
        const auto id = uint_id(groups[i], p);
        check_id(id, p);
        if (!doc.groups.emplace(id, Group{id}).second) schema(p, "duplicate id");
    }
    const auto& chains = array(field(s, "chains", sp), sp + "/chains");
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const std::string p = sp + "/chains/" + std::to_string(i);
        CrystalChain c;
        c.id = uint_id(field(chains[i], "id", p), p + "/id");
        check_id(c.id, p + "/id");
        c.t_ab = transform_from_json(field(chains[i], "t_ab", p), p + "/t_ab");
        const auto& m = array(field(chains[i], "members", p), p + "/members");
        for (std::size_t k = 0; k < m.size(); ++k) c.members.push_back(uint_id(m[k], p + "/members/" + std::to_string(k)));
        const auto id = c.id;
        if (!doc.chains.emplace(id, std::move(c)).second) schema(p + "/id", "duplicate id");
    }
    const auto& conns = array(field(s, "connectors", sp), sp + "/connectors");
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const std::string p = sp + "/connectors/" + std::to_string(i);
        auto c = connector_from(conns[i], p);
        check_id(c.id, p + "/id");
        const auto id = c.id;
        if (!doc.connectors.emplace(id, c).second) schema(p + "/id", "duplicate id");
    }
    std::set<std::uint64_t> seen;
    for (const auto& [id, o] : doc.objects) seen.insert(id);
    for (const auto& [id, g] : doc.groups) {
        if (!seen.insert(id).second) schema(sp + "/groups", "id " + std::to_string(id) + " reused across kinds");
    }
    for (const auto& [id, c] : doc.chains) {
        if (!seen.insert(id).second) schema(sp + "/chains", "id " + std::to_string(id) + " reused across kinds");
    }
    for (const auto& [id, c] : doc.connectors) {
        if (!seen.insert(id).second) schema(sp + "/connectors", "id " + std::to_string(id) + " reused across kinds");
    }
    check_invariants(doc);
    return doc;
}

void write_external_meshes(const SceneDoc& doc, const SaveOptions& opts, const std::filesystem::path& base_dir) {
    for (const auto& [hash, path] : opts.external_paths) {
        const auto it = doc.meshes.find(hash);
        if (it == doc.meshes.end()) throw error(errc::unknown_id, "unknown mesh " + hash, std::nullopt, hash);
        write_file(base_dir / path, export_obj(it->second->mesh));
    }
}

std::string copy_fragment(const SceneDoc& doc, const std::vector<ObjectId>& ids) {
    std::set<ObjectId> chosen(ids.begin(), ids.end());
    json root;
    root["format_version"] = project_format_version;
    root["kind"] = "fragment";
    root["meshes"] = json::object();
    root["objects"] = json::array();
    std::set<GroupId> groups;
    for (auto id : chosen) {
        const auto& o = doc.object(id);
        root["meshes"][o.mesh_ref] = mesh_json(doc.asset_of(id), nullptr);
        root["objects"].push_back(object_json(o, false));
        if (o.group) groups.insert(*o.group);
        for (const auto& k : o.keyframes) {
            if (k.group) groups.insert(*k.group);
        }
    }
    root["groups"] = groups;
    root["connectors"] = json::array();
    for (const auto& [cid, c] : doc.connectors) {
        if (chosen.count(c.end_a.object_id) && chosen.count(c.end_b.object_id)) root["connectors"].push_back(connector_json(c));
    }
    return canonical_dump(root) + "\n";
}

std::vector<ObjectId> paste_fragment(SceneDoc& doc, std::string_view bytes) {
    const json root = parse_document(bytes);
    if (!root.is_object()) schema("/", "expected an object");
    check_version(root);
    if (string(field(root, "kind", ""), "/kind") != "fragment") schema("/kind", "expected a fragment");
    const auto meshes = meshes_from(root, {});

    SceneDoc out = doc;
    for (const auto& [hash, asset] : meshes) out.meshes.emplace(hash, asset);

    std::map<GroupId, GroupId> group_map;
    const auto& groups = array(field(root, "groups", ""), "/groups");
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto old = uint_id(groups[i], "/groups/" + std::to_string(i));
        if (group_map.count(old)) continue;
        const GroupId g = out.next_id++;
        out.groups.emplace(g, Group{g});
        group_map.emplace(old, g);
    }
    auto remap_group = [&](std::optional<GroupId> g) -> std::optional<GroupId> {
        if (!g) return g;
        const auto it = group_map.find(*g);
        return it == group_map.end() ? std::nullopt : std::optional<GroupId>(it->second);
    };

    std::map<ObjectId, ObjectId> object_map;
    std::vector<ObjectId> created;
    const auto& objects = array(field(root, "objects", ""), "/objects");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string p = "/objects/" + std::to_string(i);
        auto o = object_from(objects[i], p);
        if (!out.meshes.count(o.mesh_ref)) throw error(errc::dangling_reference, "fragment object references missing mesh", std::nullopt, o.mesh_ref);
        if (object_map.count(o.id)) schema(p + "/id", "duplicate id");
        const ObjectId fresh = out.next_id++;
        object_map.emplace(o.id, fresh);
        o.id = fresh;
        o.chain.reset();
        o.chain_index = 0;
        o.group = remap_group(o.group);
        for (auto& k : o.keyframes) k.group = remap_group(k.group);
        created.push_back(fresh);
        out.objects.emplace(fresh, std::move(o));
    }
    const auto& conns = array(field(root, "connectors", ""), "/connectors");
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const std::string p = "/connectors/" + std::to_string(i);
        auto c = connector_from(conns[i], p);
        const auto ia = object_map.find(c.end_a.object_id);
        const auto ib = object_map.find(c.end_b.object_id);
        if (ia == object_map.end() || ib == object_map.end()) {
            throw error(errc::dangling_reference, "fragment connector endpoint not in fragment", std::nullopt, p);
        }
        c.end_a.object_id = ia->second;
        c.end_b.object_id = ib->second;
        c.id = out.next_id++;
        const auto id = c.id;
        out.connectors.emplace(id, c);
    }
    // Groups whose every member stayed behind are not recreated.
    for (auto it = out.groups.begin(); it != out.groups.end();) {
        bool used = false;
        for (const auto& [oid, o] : out.objects) {
            if (o.group == it->first) used = true;
            for (const auto& k : o.keyframes) used = used || k.group == it->first;
            if (used) break;
        }
        const bool pasted = std::any_of(group_map.begin(), group_map.end(), [&](const auto& kv) { return kv.second == it->first; });
        if (pasted && !used) it = out.groups.erase(it);
        else ++it;
    }
    check_invariants(out);
    doc = std::move(out);
    return created;
}

std::uint64_t frame_count(double t0, double t1, double fps) {
    return static_cast<std::uint64_t>(std::floor((t1 - t0) * fps + 1e-9)) + 1;
}

double frame_time(double t0, double fps, std::uint64_t i) { return t0 + static_cast<double>(i) / fps; }

json export_animation_json(const SceneDoc& doc, const AnimOptions& opts) {
    if (!std::isfinite(opts.fps) || opts.fps < 1 || opts.fps > 240) throw error(errc::range_error, "fps must lie in [1, 240]");
    if (!(opts.t0 >= 0) || !(opts.t1 >= opts.t0) || opts.t1 > doc.duration) {
        throw error(errc::range_error, "frame range must satisfy 0 <= t0 <= t1 <= duration");
    }
    const auto count = frame_count(opts.t0, opts.t1, opts.fps);
    json root;
    root["format"] = "asmb-anim";
    root["format_version"] = anim_format_version;
    root["fps"] = opts.fps;
    root["t0"] = opts.t0;
    root["t1"] = opts.t1;
    root["frame_count"] = count;
    root["light_direction"] = vec_json(opts.light_direction);
    root["objects"] = json::array();
    for (const auto& [id, o] : doc.objects) root["objects"].push_back({{"id", id}, {"name", o.name}, {"mesh", o.mesh_ref}});
    root["frames"] = json::array();
    for (std::uint64_t i = 0; i < count; ++i) {
        const double t = frame_time(opts.t0, opts.fps, i);
        json states = json::array();
        for (const auto& [id, s] : evaluate(doc, t)) {
            json st = transform_to_json(s.transform);
            st["id"] = id;
            st["color"] = json::array({s.color.rgb[0], s.color.rgb[1], s.color.rgb[2]});
            if (!s.color.scalar_channel.empty()) {
                st["scalar_channel"] = s.color.scalar_channel;
                st["colormap"] = s.color.colormap;
            }
            st["visible"] = s.visible;
            states.push_back(std::move(st));
        }
        root["frames"].push_back({{"index", i}, {"time", t}, {"states", std::move(states)}});
    }
    return root;
}

std::string export_animation(const SceneDoc& doc, const AnimOptions& opts) {
    return canonical_dump(export_animation_json(doc, opts)) + "\n";
}

AssetPtr import_model_text(std::string_view text, const std::string& format, const ImportOptions& opts,
                           const std::string& source_id) {
    if (format == "obj") return make_asset(load_obj(text));
    if (format == "pdb") {
        if (opts.subdiv > 1) throw error(errc::invalid_argument, "subdiv must be 0 or 1");
        if (!(opts.sphere_scale > 0)) throw error(errc::invalid_argument, "sphere scale must be positive");
        auto imp = load_pdb_spheres(text, opts.sphere_scale, opts.subdiv, source_id);
        return make_asset(std::move(imp.mesh), std::move(imp.meta));
    }
    throw error(errc::invalid_argument, "unknown model format '" + format + "'");
}

AssetPtr import_model_file(const std::filesystem::path& path, const ImportOptions& opts) {
    std::string format = opts.format;
    if (format.empty()) {
        format = path.extension().string();
        if (!format.empty()) format.erase(0, 1);
        for (auto& ch : format) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (format == "ent") format = "pdb";
    }
    return import_model_text(read_file(path), format, opts, path.stem().string());
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + p.string(), std::nullopt, p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw error(errc::io_error, "cannot write " + p.string(), std::nullopt, p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw error(errc::io_error, "write failed for " + p.string(), std::nullopt, p.string());
}

} // namespace asmb
