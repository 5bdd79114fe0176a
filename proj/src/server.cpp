#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>

#include "asmb/error.hpp"
#include "asmb/project_io.hpp"
#include "asmb/session.hpp"

namespace asmb {

std::string encode_frame(std::string_view body) {
    const auto n = static_cast<std::uint32_t>(body.size());
    std::string out;
    out.reserve(body.size() + 4);
    out += static_cast<char>((n >> 24) & 0xff);
    out += static_cast<char>((n >> 16) & 0xff);
    out += static_cast<char>((n >> 8) & 0xff);
    out += static_cast<char>(n & 0xff);
    out += body;
    return out;
}

bool send_frame(int fd, std::string_view body) {
    const auto frame = encode_frame(body);
    std::size_t off = 0;
    while (off < frame.size()) {
        const auto n = ::send(fd, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

namespace {

bool read_exact(int fd, char* buf, std::size_t len) {
    std::size_t off = 0;
    while (off < len) {
        const auto n = ::recv(fd, buf + off, len - off, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

struct connection {
    int fd = -1;
    bool interactive = false;
    SeqGuard seq;
    std::mutex send_mutex;
    std::thread reader;

    void send(const json& j) {
        std::lock_guard lock(send_mutex);
        send_frame(fd, canonical_dump(j));
    }
};

using conn_ptr = std::shared_ptr<connection>;

struct event {
    enum class type { connect, disconnect, command, reply } kind;
    conn_ptr conn;
    Command command;
    json reply;
};

class event_queue {
public:
    void push(event e) {
        std::lock_guard lock(mutex_);
        events_.push_back(std::move(e));
    }
    std::deque<event> drain() {
        std::lock_guard lock(mutex_);
        std::deque<event> out;
        out.swap(events_);
        return out;
    }

private:
    std::mutex mutex_;
    std::deque<event> events_;
};

void reader_loop(const conn_ptr& conn, event_queue& queue) {
    std::string body;
    while (recv_frame(conn->fd, body)) {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::exception& e) {
            queue.push({event::type::reply, conn, {}, error_reply(0, errc::schema_violation, std::string("unparseable message: ") + e.what(), "/")});
            continue;
        }
        const std::uint64_t seq = j.is_object() && j.contains("seq") && is_nonnegative_integer(j["seq"]) ? j["seq"].get<std::uint64_t>() : 0;
        try {
            auto cmd = parse_command(j);
            conn->seq.check(cmd.seq);
            if (!conn->interactive && cmd.kind != "select") {
                throw error(errc::read_only_client, "observers may only send select");
            }
            queue.push({event::type::command, conn, std::move(cmd), {}});
        } catch (const error& e) {
            queue.push({event::type::reply, conn, {}, error_reply(seq, e.code(), e.what(), e.where())});
        }
    }
    queue.push({event::type::disconnect, conn, {}, {}});
}

} // namespace

bool recv_frame(int fd, std::string& body, std::size_t max_bytes) {
    unsigned char hdr[4];
    if (!read_exact(fd, reinterpret_cast<char*>(hdr), 4)) return false;
    const std::size_t n = (std::size_t{hdr[0]} << 24) | (std::size_t{hdr[1]} << 16) | (std::size_t{hdr[2]} << 8) | hdr[3];
    if (n > max_bytes) return false;
    body.resize(n);
    return n == 0 || read_exact(fd, body.data(), n);
}

void run_session(Session& session, const ServerConfig& cfg, const std::atomic<bool>& stop,
                 const std::function<void(std::uint16_t)>& on_listen) {
    const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (lfd < 0) throw error(errc::bind_failure, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(cfg.port);
    if (::inet_pton(AF_INET, cfg.host.c_str(), &addr.sin_addr) != 1) {
        ::close(lfd);
        throw error(errc::bind_failure, "bad listen address " + cfg.host);
    }
    if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(lfd, 8) != 0) {
        const std::string why = std::strerror(errno);
        ::close(lfd);
        throw error(errc::bind_failure, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listen) on_listen(ntohs(addr.sin_port));

    event_queue queue;
    std::mutex conns_mutex;
    std::vector<conn_ptr> conns;

    std::thread acceptor([&] {
        while (!stop.load()) {
            pollfd pfd{lfd, POLLIN, 0};
            if (::poll(&pfd, 1, 50) <= 0) continue;
            const int fd = ::accept(lfd, nullptr, nullptr);
            if (fd < 0) continue;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            auto conn = std::make_shared<connection>();
            conn->fd = fd;
            {
                std::lock_guard lock(conns_mutex);
                conns.push_back(conn);
            }
            queue.push({event::type::connect, conn, {}, {}});
        }
    });

    conn_ptr interactive;
    const auto dt = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(session.doc().physics.dt));
    auto next = std::chrono::steady_clock::now();
    while (!stop.load()) {
        next += dt;
        std::this_thread::sleep_until(next);
        if (std::chrono::steady_clock::now() - next > 10 * dt) next = std::chrono::steady_clock::now();

        std::vector<Command> commands;
        std::vector<conn_ptr> origins;
        for (auto& e : queue.drain()) {
            switch (e.kind) {
            case event::type::connect:
                // Role is fixed before the reader starts so it reads a stable flag.
                e.conn->interactive = !interactive;
                if (e.conn->interactive) interactive = e.conn;
                e.conn->send(session.hello(e.conn->interactive ? "interactive" : "observer"));
                e.conn->send(session.snapshot());
                e.conn->reader = std::thread(reader_loop, e.conn, std::ref(queue));
                break;
            case event::type::disconnect:
                if (e.conn == interactive) {
                    session.release_all();
                    interactive.reset();
                }
                {
                    std::lock_guard lock(conns_mutex);
                    std::erase(conns, e.conn);
                }
                ::shutdown(e.conn->fd, SHUT_RDWR);
                if (e.conn->reader.joinable()) e.conn->reader.join();
                ::close(e.conn->fd);
                break;
            case event::type::reply: e.conn->send(e.reply); break;
            case event::type::command:
                commands.push_back(std::move(e.command));
                origins.push_back(e.conn);
                break;
            }
        }

        auto out = session.tick(commands);
        for (std::size_t i = 0; i < origins.size(); ++i) origins[i]->send(out.replies[i]);
        std::vector<conn_ptr> live;
        {
            std::lock_guard lock(conns_mutex);
            live = conns;
        }
        for (const auto& c : live) {
            if (!c->reader.joinable()) continue; // hello not yet sent
            if (!out.fault.is_null()) c->send(out.fault);
            c->send(out.push);
        }
    }

    acceptor.join();
    ::close(lfd);
    std::vector<conn_ptr> remaining;
    {
        std::lock_guard lock(conns_mutex);
        remaining.swap(conns);
    }
    for (const auto& c : remaining) ::shutdown(c->fd, SHUT_RDWR);
    for (const auto& c : remaining) {
        if (c->reader.joinable()) c->reader.join();
        ::close(c->fd);
    }
    if (!cfg.autosave.empty()) write_file(cfg.autosave, save(session.doc()));
}

} // namespace asmb
