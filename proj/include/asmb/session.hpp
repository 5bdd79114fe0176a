#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asmb/canonical_json.hpp"
#include "asmb/error.hpp"
#include "asmb/scene.hpp"
#include "asmb/simulation.hpp"

namespace asmb {

inline constexpr int protocol_version = 1;

struct Command {
    std::uint64_t seq = 0;
    std::string kind;
    json payload = json::object();
};

// Every accepted command kind, in documented order.
std::span<const std::string_view> command_kinds();
bool is_command_kind(std::string_view kind);

// Envelope {seq, kind, payload}. Throws schema_violation or unknown_command.
Command parse_command(const json& j);
json command_to_json(const Command& c);

json ok_reply(std::uint64_t seq, json detail = json::object());
json error_reply(std::uint64_t seq, errc code, const std::string& message, const std::string& where = {});

json stats_to_json(const CollisionStats& s);

// Rejects non-increasing seq numbers from one source.
class SeqGuard {
public:
    void check(std::uint64_t seq);

private:
    std::optional<std::uint64_t> last_;
};

struct LogEntry {
    std::uint64_t step = 0;
    Command command;
};

// "at <step> <command json>" per line; steps must not decrease.
std::string format_script(std::span<const LogEntry> entries);
std::vector<LogEntry> parse_script(std::string_view text);

struct TickOutput {
    std::vector<json> replies; // one per input command, same order
    json push;                 // delta or snapshot
    json fault;                // {kind: "fault", ...} when the physics step failed, else null
};

// Headless session state machine. The server and the CLI replay both drive
// it one tick at a time, so a recorded log reproduces a run exactly.
class Session {
public:
    explicit Session(SceneDoc doc = {}, std::filesystem::path base_dir = {});

    json hello(std::string_view role) const;
    json snapshot() const;

    // Applies `commands` in order, then one physics step, then advances the
    // playhead when playing. Consecutive grab_pose commands for one cursor
    // coalesce to the last; superseded ones are acknowledged but not logged.
    TickOutput tick(std::span<const Command> commands);

    // Ends every grab (used when the interactive client leaves).
    void release_all();

    const SceneDoc& doc() const { return doc_; }
    std::uint64_t step_index() const { return step_; }
    const std::vector<LogEntry>& log() const { return log_; }
    const CollisionStats& last_stats() const { return stats_; }
    const std::string& interaction_mode() const { return interaction_; }
    bool playing() const { return playing_; }

    std::uint64_t snapshot_interval = 120;

private:
    struct grab_state {
        ObjectId object_id;
        RigidTransform target;
    };

    json apply(const Command& c, bool& structural);
    json status() const;
    json delta();
    void remember_emitted();
    std::filesystem::path resolve(const std::string& p) const;

    SceneDoc doc_;
    std::filesystem::path base_dir_;
    std::uint64_t step_ = 0;
    std::vector<LogEntry> log_;
    CollisionStats stats_;
    std::string interaction_ = "edit";
    bool playing_ = false;
    std::map<std::string, grab_state> grabs_; // by cursor
    std::map<ObjectId, json> emitted_;
};

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7450; // 0 picks a free port
    std::filesystem::path autosave;
    std::filesystem::path base_dir;
};

// Length-prefixed framing: 4-byte big-endian byte count, then UTF-8 JSON.
std::string encode_frame(std::string_view body);
bool send_frame(int fd, std::string_view body);
// Returns false on orderly close or error.
bool recv_frame(int fd, std::string& body, std::size_t max_bytes = 64u << 20);

// Serves until `stop` becomes true. `on_listen` receives the bound port.
// Throws bind_failure when the socket cannot be bound.
void run_session(Session& session, const ServerConfig& cfg, const std::atomic<bool>& stop,
                 const std::function<void(std::uint16_t)>& on_listen = {});

} // namespace asmb
