#include "asmb/session.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "asmb/error.hpp"
#include "asmb/project_io.hpp"
#include "asmb/text.hpp"

namespace asmb {

namespace {

constexpr std::array<std::string_view, 21> kinds = {
    "load_model", "spawn",    "duplicate",   "grab_begin",   "grab_pose",     "grab_end", "set_mode",
    "toggle_collisions", "toggle_springs", "chain_create", "chain_set_tab", "add_spring", "snap_terminus",
    "set_keyframe", "set_time", "play", "pause", "export", "save", "load", "select"};

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
    throw error(errc::schema_violation, msg + " at " + path, std::nullopt, path);
}

const json& need(const json& p, const char* key) {
    if (!p.is_object()) bad("/payload", "expected an object");
    const auto it = p.find(key);
    if (it == p.end()) bad(std::string("/payload/") + key, "missing field");
    return *it;
}

std::uint64_t need_id(const json& p, const char* key) {
    const auto& v = need(p, key);
    if (!is_nonnegative_integer(v)) bad(std::string("/payload/") + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

double need_number(const json& p, const char* key) {
    const auto& v = need(p, key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) bad(std::string("/payload/") + key, "expected a number");
    return v.get<double>();
}

std::string need_string(const json& p, const char* key) {
    const auto& v = need(p, key);
    if (!v.is_string()) bad(std::string("/payload/") + key, "expected a string");
    return v.get<std::string>();
}

template <class T>
T get_or(const json& p, const char* key, T fallback) {
    const auto it = p.find(key);
    if (it == p.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        bad(std::string("/payload/") + key, "wrong type");
    }
}

Vec3 need_vec(const json& p, const char* key) {
    const auto& v = need(p, key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
        bad(std::string("/payload/") + key, "expected [x, y, z]");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::string cursor_of(const json& p) {
    const auto c = get_or<std::string>(p, "cursor", "right");
    if (c != "left" && c != "right") bad("/payload/cursor", "cursor must be left or right");
    return c;
}

json overlay_json(const OverlaySpec& o) {
    json edges = json::array();
    for (const auto& e : o.edges) edges.push_back({{e.p.x, e.p.y, e.p.z}, {e.q.x, e.q.y, e.q.z}});
    json ribbons = json::object();
    for (const auto& [id, r] : o.ribbons) ribbons[std::to_string(id)] = r;
    return {{"tag", o.tag}, {"edges", std::move(edges)}, {"ribbons", std::move(ribbons)}};
}

bool structural_kind(std::string_view k) {
    return !(k == "grab_begin" || k == "grab_pose" || k == "grab_end" || k == "play" || k == "pause" ||
             k == "export" || k == "save" || k == "select");
}

// Fields of an object's record that deltas carry.
json dynamic_fields(const json& object) {
    json out = json::object();
    for (const char* key : {"transform", "linear_velocity", "angular_velocity", "color", "group", "visible"}) {
        out[key] = object.at(key);
    }
    return out;
}

} // namespace

std::span<const std::string_view> command_kinds() { return kinds; }

bool is_command_kind(std::string_view kind) { return std::find(kinds.begin(), kinds.end(), kind) != kinds.end(); }

Command parse_command(const json& j) {
    if (!j.is_object()) bad("/", "command must be an object");
    Command c;
    const auto seq = j.find("seq");
    if (seq == j.end() || !is_nonnegative_integer(*seq)) bad("/seq", "expected a non-negative integer");
    c.seq = seq->get<std::uint64_t>();
    const auto kind = j.find("kind");
    if (kind == j.end() || !kind->is_string()) bad("/kind", "expected a string");
    c.kind = kind->get<std::string>();
    if (!is_command_kind(c.kind)) throw error(errc::unknown_command, "unknown command kind '" + c.kind + "'", std::nullopt, c.kind);
    const auto payload = j.find("payload");
    if (payload != j.end()) {
        if (!payload->is_object()) bad("/payload", "expected an object");
        c.payload = *payload;
    }
    return c;
}

json command_to_json(const Command& c) { return {{"seq", c.seq}, {"kind", c.kind}, {"payload", c.payload}}; }

json ok_reply(std::uint64_t seq, json detail) { return {{"seq", seq}, {"ok", true}, {"detail", std::move(detail)}}; }

json error_reply(std::uint64_t seq, errc code, const std::string& message, const std::string& where) {
    json detail = {{"message", message}};
    if (!where.empty()) detail["where"] = where;
    return {{"seq", seq}, {"ok", false}, {"error", std::string(to_string(code))}, {"detail", std::move(detail)}};
}

json stats_to_json(const CollisionStats& s) {
    return {{"n_objects", s.n_objects},
            {"n_moving", s.n_moving},
            {"pair_tests_executed", s.pair_tests_executed},
            {"pairs_colliding", s.pairs_colliding},
            {"broad_candidates", s.broad_candidates}};
}

void SeqGuard::check(std::uint64_t seq) {
    if (last_ && seq <= *last_) {
        throw error(errc::bad_sequence, "seq " + std::to_string(seq) + " does not exceed " + std::to_string(*last_));
    }
    last_ = seq;
}

std::string format_script(std::span<const LogEntry> entries) {
    std::string out;
    for (const auto& e : entries) out += "at " + std::to_string(e.step) + " " + canonical_dump(command_to_json(e.command)) + "\n";
    return out;
}

std::vector<LogEntry> parse_script(std::string_view content) {
    std::vector<LogEntry> out;
    const auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        if (line.substr(0, 3) != "at ") throw error(errc::malformed_line, "expected 'at <step> <command>'", i + 1);
        auto rest = text::trim(line.substr(3));
        const auto sp = rest.find_first_of(" \t");
        if (sp == std::string_view::npos) throw error(errc::malformed_line, "missing command", i + 1);
        const auto step = text::parse_int(rest.substr(0, sp));
        if (!step || *step < 0) throw error(errc::malformed_line, "bad step index", i + 1);
        json j;
        try {
            j = json::parse(rest.substr(sp + 1));
        } catch (const json::exception& e) {
            throw error(errc::malformed_line, std::string("bad command json: ") + e.what(), i + 1);
        }
        LogEntry e;
        e.step = static_cast<std::uint64_t>(*step);
        try {
            e.command = parse_command(j);
        } catch (const error& err) {
            throw error(err.code(), err.what(), i + 1, err.where());
        }
        if (!out.empty() && e.step < out.back().step) throw error(errc::malformed_line, "step indices must not decrease", i + 1);
        out.push_back(std::move(e));
    }
    return out;
}

Session::Session(SceneDoc doc, std::filesystem::path base_dir) : doc_(std::move(doc)), base_dir_(std::move(base_dir)) {
    check_invariants(doc_);
    remember_emitted();
}

std::filesystem::path Session::resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir_.empty() ? path : base_dir_ / path;
}

json Session::hello(std::string_view role) const {
    return {{"kind", "hello"},
            {"payload", {{"format_version", protocol_version}, {"dt", doc_.physics.dt}, {"role", std::string(role)}}}};
}

json Session::status() const {
    return {{"interaction", interaction_},
            {"physics_mode", to_string(doc_.physics_mode)},
            {"collisions", doc_.collisions_enabled},
            {"springs", doc_.springs_enabled},
            {"current_time", doc_.current_time},
            {"duration", doc_.duration},
            {"playing", playing_}};
}

json Session::snapshot() const {
    json grabs = json::object();
    for (const auto& [cursor, g] : grabs_) grabs[cursor] = {{"id", g.object_id}, {"target", transform_to_json(g.target)}};
    return {{"kind", "snapshot"},
            {"payload",
             {{"step", step_},
              {"project", project_to_json(doc_)},
              {"stats", stats_to_json(stats_)},
              {"status", status()},
              {"grabs", std::move(grabs)}}}};
}

void Session::remember_emitted() {
    emitted_.clear();
    const auto proj = project_to_json(doc_);
    for (const auto& o : proj["scene"]["objects"]) emitted_[o["id"].get<ObjectId>()] = dynamic_fields(o);
}

json Session::delta() {
    json objects = json::array();
    const auto proj = project_to_json(doc_);
    for (const auto& o : proj["scene"]["objects"]) {
        const auto id = o["id"].get<ObjectId>();
        json now = dynamic_fields(o);
        auto& prev = emitted_[id];
        json changed = json::object();
        for (auto it = now.begin(); it != now.end(); ++it) {
            if (!prev.is_object() || !prev.contains(it.key()) || prev[it.key()] != it.value()) changed[it.key()] = it.value();
        }
        if (!changed.empty()) {
            changed["id"] = id;
            objects.push_back(std::move(changed));
        }
        prev = std::move(now);
    }
    return {{"kind", "delta"},
            {"payload", {{"step", step_}, {"objects", std::move(objects)}, {"stats", stats_to_json(stats_)}, {"status", status()}}}};
}

void Session::release_all() {
    for (const auto& [cursor, g] : grabs_) {
        if (doc_.physics_mode != PhysicsMode::full && doc_.objects.count(g.object_id)) {
            auto& o = doc_.object(g.object_id);
            o.linear_velocity = {};
            o.angular_velocity = {};
        }
    }
    grabs_.clear();
}

json Session::apply(const Command& c, bool& structural) {
    const json& p = c.payload;
    const auto& k = c.kind;
    structural = structural_kind(k);

    if (k == "load_model") {
        ImportOptions opts;
        opts.format = get_or<std::string>(p, "format", "");
        opts.sphere_scale = get_or<double>(p, "scale", 1.0);
        opts.subdiv = p.contains("subdiv") ? static_cast<unsigned>(need_id(p, "subdiv")) : 0u;
        AssetPtr asset;
        if (p.contains("text")) {
            if (opts.format.empty()) bad("/payload/format", "format is required with inline text");
            asset = import_model_text(need_string(p, "text"), opts.format, opts, get_or<std::string>(p, "source_id", ""));
        } else {
            asset = import_model_file(resolve(need_string(p, "path")), opts);
        }
        const auto hash = add_mesh(doc_, asset);
        return {{"mesh", hash}, {"vertices", asset->mesh.vertices.size()}, {"triangles", asset->mesh.triangles.size()}};
    }
    if (k == "spawn") {
        const auto mesh = need_string(p, "mesh");
        const RigidTransform t = p.contains("transform") ? transform_from_json(p["transform"], "/payload/transform") : RigidTransform{};
        return {{"id", spawn(doc_, mesh, t, get_or<std::string>(p, "name", ""))}};
    }
    if (k == "duplicate") {
        const auto& ids = need(p, "ids");
        std::vector<ObjectId> v;
        try {
            v = ids.get<std::vector<ObjectId>>();
        } catch (const json::exception&) {
            bad("/payload/ids", "expected a list of ids");
        }
        return {{"ids", duplicate(doc_, v)}};
    }
    if (k == "grab_begin") {
        const auto cursor = cursor_of(p);
        const auto id = need_id(p, "id");
        const auto& o = doc_.object(id);
        if (grabs_.count(cursor)) throw error(errc::invalid_argument, "cursor " + cursor + " is already grabbing");
        for (const auto& [cur, g] : grabs_) {
            if (g.object_id == id) throw error(errc::invalid_argument, "object " + std::to_string(id) + " is already grabbed");
        }
        grabs_[cursor] = {id, o.transform};
        return {{"cursor", cursor}, {"id", id}};
    }
    if (k == "grab_pose") {
        const auto cursor = cursor_of(p);
        const auto it = grabs_.find(cursor);
        if (it == grabs_.end()) throw error(errc::not_grabbed, "cursor " + cursor + " is not grabbing anything");
        it->second.target = transform_from_json(need(p, "transform"), "/payload/transform");
        return json::object();
    }
    if (k == "grab_end") {
        const auto cursor = cursor_of(p);
        const auto it = grabs_.find(cursor);
        if (it == grabs_.end()) throw error(errc::not_grabbed, "cursor " + cursor + " is not grabbing anything");
        if (doc_.physics_mode != PhysicsMode::full) {
            auto& o = doc_.object(it->second.object_id);
            o.linear_velocity = {};
            o.angular_velocity = {};
        }
        const auto id = it->second.object_id;
        grabs_.erase(it);
        return {{"id", id}};
    }
    if (k == "set_mode") {
        if (!p.contains("interaction") && !p.contains("physics")) bad("/payload", "set_mode needs interaction or physics");
        std::string interaction = interaction_;
        PhysicsMode mode = doc_.physics_mode;
        if (p.contains("interaction")) {
            interaction = need_string(p, "interaction");
            if (interaction != "edit" && interaction != "animate" && interaction != "color") {
                throw error(errc::invalid_argument, "unknown interaction mode '" + interaction + "'");
            }
        }
        if (p.contains("physics")) mode = physics_mode_from_string(need_string(p, "physics"));
        interaction_ = interaction;
        doc_.physics_mode = mode;
        return status();
    }
    if (k == "toggle_collisions") {
        doc_.collisions_enabled = get_or<bool>(p, "enabled", !doc_.collisions_enabled);
        return {{"collisions", doc_.collisions_enabled}};
    }
    if (k == "toggle_springs") {
        doc_.springs_enabled = get_or<bool>(p, "enabled", !doc_.springs_enabled);
        return {{"springs", doc_.springs_enabled}};
    }
    if (k == "chain_create") {
        const auto count = need_id(p, "count");
        return {{"chain", chain_create(doc_, need_id(p, "base"), need_id(p, "second"), count)}};
    }
    if (k == "chain_set_tab") {
        chain_set_tab(doc_, need_id(p, "chain"), transform_from_json(need(p, "transform"), "/payload/transform"));
        return json::object();
    }
    if (k == "add_spring") {
        SpringConnector conn;
        for (auto [key, end] : {std::pair{"a", &conn.end_a}, std::pair{"b", &conn.end_b}}) {
            const auto& e = need(p, key);
            end->object_id = need_id(e, "object");
            end->anchor = e.contains("anchor") ? need_vec(e, "anchor") : Vec3{};
        }
        conn.rest_length = get_or<double>(p, "rest_length", 0.0);
        conn.stiffness = get_or<double>(p, "stiffness", conn.stiffness);
        conn.display_only = get_or<bool>(p, "display_only", false);
        return {{"id", add_connector(doc_, conn)}};
    }
    if (k == "snap_terminus") {
        const auto id = need_id(p, "connector");
        const auto it = doc_.connectors.find(id);
        if (it == doc_.connectors.end()) throw error(errc::unknown_id, "unknown connector " + std::to_string(id), std::nullopt, std::to_string(id));
        const auto end_s = need_string(p, "end");
        const auto which_s = need_string(p, "terminus");
        if (end_s != "a" && end_s != "b") bad("/payload/end", "end must be a or b");
        if (which_s != "n" && which_s != "c") bad("/payload/terminus", "terminus must be n or c");
        const auto end = end_s == "a" ? TerminusEnd::a : TerminusEnd::b;
        const ObjectId obj = end == TerminusEnd::a ? it->second.end_a.object_id : it->second.end_b.object_id;
        it->second = snap_connector_to_terminus(it->second, end, which_s == "n" ? Terminus::n : Terminus::c, doc_.asset_of(obj).meta);
        const auto& a = end == TerminusEnd::a ? it->second.end_a.anchor : it->second.end_b.anchor;
        return {{"anchor", {a.x, a.y, a.z}}};
    }
    if (k == "set_keyframe") {
        const auto& kf = set_keyframe(doc_, need_id(p, "id"), get_or<double>(p, "time", doc_.current_time));
        return {{"time", kf.time}};
    }
    if (k == "set_time") {
        apply_time(doc_, need_number(p, "time"));
        return {{"current_time", doc_.current_time}};
    }
    if (k == "play") {
        playing_ = true;
        return status();
    }
    if (k == "pause") {
        playing_ = false;
        return status();
    }
    if (k == "export") {
        AnimOptions opts;
        opts.fps = get_or<double>(p, "fps", 24.0);
        opts.t0 = get_or<double>(p, "from", 0.0);
        opts.t1 = get_or<double>(p, "to", doc_.duration);
        const auto bytes = export_animation(doc_, opts);
        json detail = {{"frames", frame_count(opts.t0, opts.t1, opts.fps)}};
        if (p.contains("path")) write_file(resolve(need_string(p, "path")), bytes);
        else detail["anim"] = json::parse(bytes);
        return detail;
    }
    if (k == "save") {
        const auto bytes = save(doc_);
        if (p.contains("path")) {
            write_file(resolve(need_string(p, "path")), bytes);
            return {{"bytes", bytes.size()}};
        }
        return {{"project", bytes}};
    }
    if (k == "load") {
        SceneDoc next = p.contains("project") ? load(need_string(p, "project"), base_dir_)
                                              : load(read_file(resolve(need_string(p, "path"))), base_dir_);
        grabs_.clear();
        playing_ = false;
        doc_ = std::move(next);
        return {{"objects", doc_.objects.size()}};
    }
    if (k == "select") {
        Selection sel;
        const auto kind = get_or<std::string>(p, "kind", "object");
        if (kind == "group") sel.kind = Selection::Kind::group;
        else if (kind != "object") bad("/payload/kind", "kind must be object or group");
        sel.id = need_id(p, "id");
        return overlay_json(selection_overlay(doc_, sel));
    }
    throw error(errc::unknown_command, "unknown command kind '" + k + "'", std::nullopt, k);
}

TickOutput Session::tick(std::span<const Command> commands) {
    TickOutput out;
    // Superseded grab_pose: a later grab_pose for the same cursor follows with
    // no grab_begin/grab_end on that cursor in between.
    std::vector<bool> superseded(commands.size(), false);
    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (commands[i].kind != "grab_pose" || !commands[i].payload.is_object()) continue;
        std::string cursor;
        try {
            cursor = cursor_of(commands[i].payload);
        } catch (const error&) {
            continue;
        }
        for (std::size_t j = i + 1; j < commands.size(); ++j) {
            const auto& cj = commands[j];
            std::string cur_j;
            try {
                cur_j = cursor_of(cj.payload);
            } catch (const error&) {
                continue;
            }
            if (cur_j != cursor) continue;
            if (cj.kind == "grab_begin" || cj.kind == "grab_end") break;
            if (cj.kind == "grab_pose") {
                superseded[i] = grabs_.count(cursor) > 0;
                break;
            }
        }
    }

    bool structural = false;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto& c = commands[i];
        if (superseded[i]) {
            out.replies.push_back(ok_reply(c.seq, {{"coalesced", true}}));
            continue;
        }
        // Commands apply atomically: a failure leaves the scene untouched.
        const SceneDoc before = doc_;
        const auto grabs_before = grabs_;
        const auto interaction_before = interaction_;
        const bool playing_before = playing_;
        try {
            bool s = false;
            json detail = apply(c, s);
            structural = structural || s;
            log_.push_back({step_, c});
            out.replies.push_back(ok_reply(c.seq, std::move(detail)));
        } catch (const error& e) {
            doc_ = before;
            grabs_ = grabs_before;
            interaction_ = interaction_before;
            playing_ = playing_before;
            out.replies.push_back(error_reply(c.seq, e.code(), e.what(), e.where()));
        } catch (const std::exception& e) {
            doc_ = before;
            grabs_ = grabs_before;
            interaction_ = interaction_before;
            playing_ = playing_before;
            out.replies.push_back(error_reply(c.seq, errc::invalid_argument, e.what()));
        }
    }

    std::vector<GrabCoupling> couplings;
    for (const auto& [cursor, g] : grabs_) couplings.push_back(GrabCoupling::with_gains(g.object_id, g.target, doc_.physics));
    std::sort(couplings.begin(), couplings.end(), [](const GrabCoupling& a, const GrabCoupling& b) { return a.object_id < b.object_id; });
    try {
        stats_ = step(doc_, couplings).stats;
    } catch (const error& e) {
        // Diverged integration leaves the scene as it was; grabs are dropped so
        // the next step starts from rest.
        release_all();
        out.fault = {{"kind", "fault"}, {"payload", {{"step", step_}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}}}};
    }

    if (playing_) {
        const double t = std::min(doc_.current_time + doc_.physics.dt, doc_.duration);
        apply_time(doc_, t);
        if (t >= doc_.duration) playing_ = false;
    }
    ++step_;

    if (structural || (snapshot_interval > 0 && step_ % snapshot_interval == 0)) {
        out.push = snapshot();
        remember_emitted();
    } else {
        out.push = delta();
    }
    return out;
}

} // namespace asmb
