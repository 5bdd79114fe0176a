#include "asmb/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "asmb/error.hpp"
#include "asmb/project_io.hpp"
#include "asmb/session.hpp"
#include "asmb/simulation.hpp"
#include "asmb/text.hpp"

namespace asmb {

namespace {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void report(std::ostream& err, const error& e) {
    json j = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    if (e.line()) j["line"] = *e.line();
    if (!e.where().empty()) j["where"] = e.where();
    err << canonical_dump(j) << "\n";
}

std::vector<double> parse_numbers(const std::string& s) {
    std::string t = s;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::vector<double> out;
    for (auto tok : text::split_ws(t)) {
        const auto v = text::parse_double(tok);
        if (!v) throw usage_error("bad number '" + std::string(tok) + "'");
        out.push_back(*v);
    }
    return out;
}

Vec3 parse_axis(const std::string& s) {
    if (s == "x") return {1, 0, 0};
    if (s == "y") return {0, 1, 0};
    if (s == "z") return {0, 0, 1};
    const auto v = parse_numbers(s);
    if (v.size() != 3 || norm(Vec3{v[0], v[1], v[2]}) == 0) throw usage_error("axis must be x, y, z or three numbers");
    return {v[0], v[1], v[2]};
}

// 12 numbers (3x4 row-major [R | t]) or 16 (4x4 with last row 0 0 0 1).
RigidTransform parse_matrix(const std::string& s) {
    const auto v = parse_numbers(s);
    if (v.size() != 12 && v.size() != 16) throw usage_error("--matrix expects 12 or 16 numbers");
    if (v.size() == 16 && (v[12] != 0 || v[13] != 0 || v[14] != 0 || v[15] != 1)) {
        throw usage_error("--matrix bottom row must be 0 0 0 1");
    }
    std::array<std::array<double, 3>, 3> r{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) r[i][j] = v[i * 4 + j];
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double d = 0;
            for (int k = 0; k < 3; ++k) d += r[i][k] * r[j][k];
            if (std::abs(d - (i == j ? 1.0 : 0.0)) > 1e-6) throw error(errc::invalid_argument, "--matrix rotation is not orthonormal");
        }
    }
    const double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                       r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
    if (det < 0) throw error(errc::invalid_argument, "--matrix rotation is a reflection");
    return {UnitQuat::from_matrix(r), {v[3], v[7], v[11]}};
}

struct pose_flags {
    double tx = 0, ty = 0, tz = 0;
    std::string axis = "z";
    double angle_deg = 0;
    std::string matrix;

    void add(CLI::App* app, const std::string& prefix) {
        app->add_option("--" + prefix + "tx", tx, "translation x (nm)");
        app->add_option("--" + prefix + "ty", ty, "translation y (nm)");
        app->add_option("--" + prefix + "tz", tz, "translation z (nm)");
        app->add_option("--" + prefix + "axis", axis, "rotation axis: x, y, z or ax,ay,az");
        app->add_option("--" + prefix + "angle-deg", angle_deg, "rotation angle in degrees");
        app->add_option("--" + prefix + "matrix", matrix, "3x4 or 4x4 row-major matrix, overrides the other flags");
    }

    RigidTransform get() const {
        if (!matrix.empty()) return parse_matrix(matrix);
        return {UnitQuat::from_axis_angle(parse_axis(axis), angle_deg * std::numbers::pi / 180.0), {tx, ty, tz}};
    }
};

SceneDoc load_project(const std::string& path) {
    const std::filesystem::path p(path);
    return load(read_file(p), p.parent_path());
}

void apply_config(SceneDoc& doc, const std::string& config) {
    if (!config.empty()) doc.physics = parse_physics_config(read_file(config), doc.physics);
}

void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
    if (path.empty() || path == "-") out << bytes;
    else write_file(path, bytes);
}

// Drives a Session through a script; returns the number of failed commands.
std::size_t run_script(Session& session, const std::vector<LogEntry>& script, std::uint64_t steps, std::ostream& stats_out,
                       std::ostream& err) {
    std::size_t failures = 0;
    std::size_t next = 0;
    for (std::uint64_t s = 0; s < steps; ++s) {
        std::vector<Command> batch;
        while (next < script.size() && script[next].step == s) batch.push_back(script[next++].command);
        const auto out = session.tick(batch);
        for (const auto& r : out.replies) {
            if (!r["ok"].get<bool>()) {
                ++failures;
                json rec = {{"error", r["error"]}, {"seq", r["seq"]}, {"step", s}, {"message", r["detail"]["message"]}};
                if (r["detail"].contains("where")) rec["where"] = r["detail"]["where"];
                err << canonical_dump(rec) << "\n";
            }
        }
        if (!out.fault.is_null()) {
            ++failures;
            err << canonical_dump({{"error", out.fault["payload"]["error"]}, {"message", out.fault["payload"]["message"]}, {"step", s}})
                << "\n";
        }
        stats_out << canonical_dump(stats_to_json(session.last_stats())) << "\n";
    }
    return failures;
}

std::uint64_t script_steps(const std::vector<LogEntry>& script, std::optional<std::uint64_t> steps) {
    if (steps) return *steps;
    return script.empty() ? 1 : script.back().step + 1;
}

} // namespace

std::atomic<bool>& cli_stop_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rigid-body scene assembly engine", "asmb"};
    app.require_subcommand(1);
    std::string config;
    app.add_option("--config", config, "key=value file with a [physics] section");

    // import
    auto* imp = app.add_subcommand("import", "import OBJ/PDB models into a new project");
    std::vector<std::string> imp_inputs;
    std::string imp_out, imp_format;
    double imp_scale = 1.0, imp_spacing = 0;
    unsigned imp_subdiv = 0;
    imp->add_option("inputs", imp_inputs, "model files")->required();
    imp->add_option("-o,--output", imp_out, "project path")->required();
    imp->add_option("--format", imp_format, "obj or pdb (default: by extension)");
    imp->add_option("--scale", imp_scale, "PDB sphere radius scale");
    imp->add_option("--subdiv", imp_subdiv, "PDB sphere subdivision (0 or 1)");
    imp->add_option("--spacing", imp_spacing, "place the k-th object at x = k * spacing");

    // chain
    auto* chn = app.add_subcommand("chain", "build a crystal-by-example chain");
    std::string chn_mesh, chn_out;
    std::size_t chn_n = 2;
    pose_flags tab, base;
    chn->add_option("--mesh", chn_mesh, "OBJ or PDB model")->required();
    chn->add_option("-n,--count", chn_n, "chain length (>= 2)")->required();
    chn->add_option("-o,--output", chn_out, "project path")->required();
    tab.add(chn, "");
    base.add(chn, "base-");

    // relax
    auto* rlx = app.add_subcommand("relax", "relax spring connectors toward their rest lengths");
    std::string rlx_in, rlx_out;
    std::uint64_t rlx_steps = 5000;
    double rlx_tol = 0.01;
    bool rlx_collisions = false;
    rlx->add_option("project", rlx_in)->required();
    rlx->add_option("-o,--output", rlx_out, "relaxed project path");
    rlx->add_option("--max-steps", rlx_steps);
    rlx->add_option("--tol", rlx_tol, "relative tolerance");
    rlx->add_flag("--collisions", rlx_collisions, "keep contact response on");

    // replay
    auto* rpl = app.add_subcommand("replay", "replay a session script headlessly");
    std::string rpl_in, rpl_script, rpl_out;
    std::optional<std::uint64_t> rpl_steps;
    rpl->add_option("project", rpl_in)->required();
    rpl->add_option("script", rpl_script)->required();
    rpl->add_option("-o,--output", rpl_out, "final project path")->required();
    rpl->add_option("--steps", rpl_steps, "total steps (default: last scripted step + 1)");

    // export
    auto* exp = app.add_subcommand("export", "sample the animation into an interchange file");
    std::string exp_in, exp_out;
    double exp_fps = 24, exp_from = 0;
    std::optional<double> exp_to;
    exp->add_option("project", exp_in)->required();
    exp->add_option("-o,--output", exp_out, ".anim path (default stdout)");
    exp->add_option("--fps", exp_fps);
    exp->add_option("--from", exp_from);
    exp->add_option("--to", exp_to, "end time (default: duration)");

    // stats
    auto* sts = app.add_subcommand("stats", "print collision statistics per step");
    std::string sts_in, sts_script;
    std::optional<std::uint64_t> sts_steps;
    sts->add_option("project", sts_in)->required();
    sts->add_option("--script", sts_script, "session script to drive the steps");
    sts->add_option("--steps", sts_steps, "number of steps");

    // serve
    auto* srv = app.add_subcommand("serve", "run the interactive session service");
    std::string srv_in, srv_host = "127.0.0.1", srv_autosave;
    std::uint16_t srv_port = 7450;
    std::optional<double> srv_dt;
    srv->add_option("project", srv_in, "initial project");
    srv->add_option("--host", srv_host);
    srv->add_option("--port", srv_port, "0 picks a free port");
    srv->add_option("--dt", srv_dt, "step length in seconds");
    srv->add_option("--autosave", srv_autosave, "project written on shutdown");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << canonical_dump({{"error", "Usage"}, {"message", e.what()}}) << "\n";
        return 2;
    }

    try {
        if (*imp) {
            SceneDoc doc;
            apply_config(doc, config);
            ImportOptions opts{imp_format, imp_scale, imp_subdiv};
            std::size_t k = 0;
            json ids = json::array();
            for (const auto& in : imp_inputs) {
                const auto hash = add_mesh(doc, import_model_file(in, opts));
                const auto id = spawn(doc, hash, RigidTransform::translate(imp_spacing * static_cast<double>(k++), 0, 0),
                                      std::filesystem::path(in).stem().string());
                ids.push_back(id);
            }
            write_file(imp_out, save(doc));
            out << canonical_dump({{"objects", ids}, {"output", imp_out}}) << "\n";
        } else if (*chn) {
            SceneDoc doc;
            apply_config(doc, config);
            const auto hash = add_mesh(doc, import_model_file(chn_mesh));
            const RigidTransform tb = base.get();
            const RigidTransform t_ab = tab.get();
            const auto a = spawn(doc, hash, tb, std::filesystem::path(chn_mesh).stem().string());
            const auto b = spawn(doc, hash, compose(tb, t_ab), std::filesystem::path(chn_mesh).stem().string() + "#2");
            const auto c = chain_create(doc, a, b, chn_n);
            chain_set_tab(doc, c, t_ab);
            write_file(chn_out, save(doc));
            out << canonical_dump({{"chain", c}, {"members", doc.chains.at(c).members}, {"output", chn_out}}) << "\n";
        } else if (*rlx) {
            auto doc = load_project(rlx_in);
            apply_config(doc, config);
            const auto r = relax_springs(doc, rlx_steps, rlx_tol, rlx_collisions);
            if (!rlx_out.empty()) write_file(rlx_out, save(doc));
            out << canonical_dump({{"converged", r.converged}, {"steps_used", r.steps_used}, {"residual", r.residual}}) << "\n";
        } else if (*rpl) {
            auto doc = load_project(rpl_in);
            apply_config(doc, config);
            const auto script = parse_script(read_file(rpl_script));
            Session session(std::move(doc), std::filesystem::path(rpl_in).parent_path());
            const auto failures = run_script(session, script, script_steps(script, rpl_steps), out, err);
            write_file(rpl_out, save(session.doc()));
            return failures ? 1 : 0;
        } else if (*exp) {
            auto doc = load_project(exp_in);
            AnimOptions opts;
            opts.fps = exp_fps;
            opts.t0 = exp_from;
            opts.t1 = exp_to.value_or(doc.duration);
            write_output(exp_out, export_animation(doc, opts), out);
        } else if (*sts) {
            auto doc = load_project(sts_in);
            apply_config(doc, config);
            std::vector<LogEntry> script;
            if (!sts_script.empty()) script = parse_script(read_file(sts_script));
            Session session(std::move(doc), std::filesystem::path(sts_in).parent_path());
            return run_script(session, script, script_steps(script, sts_steps), out, err) ? 1 : 0;
        } else if (*srv) {
            SceneDoc doc;
            if (!srv_in.empty()) doc = load_project(srv_in);
            apply_config(doc, config);
            if (srv_dt) {
                if (!(*srv_dt > 0)) throw error(errc::invalid_argument, "dt must be positive");
                doc.physics.dt = *srv_dt;
            }
            ServerConfig cfg;
            cfg.host = srv_host;
            cfg.port = srv_port;
            cfg.autosave = srv_autosave;
            cfg.base_dir = srv_in.empty() ? std::filesystem::path{} : std::filesystem::path(srv_in).parent_path();
            Session session(std::move(doc), cfg.base_dir);
            run_session(session, cfg, cli_stop_flag(), [&](std::uint16_t port) {
                out << canonical_dump({{"event", "listening"}, {"host", srv_host}, {"port", port}}) << std::endl;
            });
        }
    } catch (const error& e) {
        report(err, e);
        return 1;
    } catch (const usage_error& e) {
        err << canonical_dump({{"error", "Usage"}, {"message", e.what()}}) << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << canonical_dump({{"error", "Internal"}, {"message", e.what()}}) << "\n";
        return 1;
    }
    return 0;
}

} // namespace asmb
