#include "baserace/play_service.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "baserace/notation.h"

namespace baserace {

using nlohmann::json;

std::string_view to_string(SessionPhase p) {
    switch (p) {
        case SessionPhase::BetweenGames: return "betweenGames";
        case SessionPhase::AwaitingHuman: return "awaitingHuman";
        case SessionPhase::ComputerThinking: return "computerThinking";
        case SessionPhase::GameOver: return "gameOver";
    }
    return "?";
}

json state_message(const GameState& s, SessionPhase phase) {
    json occupancy = json::array();
    for (Player p : {Player::White, Player::Black})
        for (const auto& c : s.pawns(p)) occupancy.push_back({{"cell", format_cell(c)}, {"player", to_string(p)}});
    json m = {{"type", "state"},
              {"version", kProtocolVersion},
              {"n", s.config().n},
              {"a", s.config().a},
              {"beta", s.config().beta},
              {"occupancy", occupancy},
              {"reserves", {{"white", s.reserve(Player::White)}, {"black", s.reserve(Player::Black)}}},
              {"sideToMove", to_string(s.side_to_move())},
              {"moveCount", s.move_count()},
              {"phase", to_string(phase)}};
    return m;
}

json error_message(std::string_view code, std::string_view detail) {
    return {{"type", "error"}, {"version", kProtocolVersion}, {"code", code}, {"message", detail}};
}

namespace {

json your_turn_message(const GameState& s) {
    json moves = json::array();
    for (const auto& m : s.legal_moves()) moves.push_back(format_move(m));
    return {{"type", "yourTurn"}, {"version", kProtocolVersion}, {"legalMoves", moves}};
}

}  // namespace

// ---------------------------------------------------------------------------

PlaySession::PlaySession(std::string session_id) : id_(std::move(session_id)) {}

SessionPhase PlaySession::phase() const {
    std::lock_guard lock(mu_);
    return phase_;
}

int PlaySession::aborted_games() const {
    std::lock_guard lock(mu_);
    return aborted_;
}

void PlaySession::send_locked(const json& m) {
    if (client_) client_->send(m);
}

json PlaySession::progress_locked() const {
    return {{"type", "progress"},
            {"version", kProtocolVersion},
            {"batchId", progress_.batch_id},
            {"stageIndex", progress_.stage_index},
            {"hcGameIndex", progress_.hc_game_index},
            {"hcGamesTotal", progress_.hc_games_total},
            {"abortedGames", aborted_},
            {"complete", complete_}};
}

bool PlaySession::attach(const std::shared_ptr<ClientLink>& client) {
    std::lock_guard lock(mu_);
    if (client_) {
        client->send(error_message("SessionConflict", "another client is attached to this session"));
        return false;
    }
    client_ = client;
    send_locked({{"type", "hello"}, {"version", kProtocolVersion}, {"sessionId", id_}});
    send_locked(progress_locked());
    if (state_ && !client_lost_) send_locked(state_message(*state_, phase_));
    if (phase_ == SessionPhase::AwaitingHuman && state_ && !pending_ && !client_lost_) send_locked(your_turn_message(*state_));
    return true;
}

void PlaySession::detach(const ClientLink* client) {
    std::lock_guard lock(mu_);
    if (client_.get() != client) return;
    client_.reset();
    if (phase_ == SessionPhase::AwaitingHuman || phase_ == SessionPhase::ComputerThinking) {
        // The game is abandoned; a new client waits for its replay.
        client_lost_ = true;
        phase_ = SessionPhase::BetweenGames;
        cv_.notify_all();
    }
}

void PlaySession::handle_line(const ClientLink* client, const std::string& line) {
    std::lock_guard lock(mu_);
    if (client_.get() != client) return;
    json m;
    try {
        m = json::parse(line);
    } catch (const json::exception&) {
        send_locked(error_message("BadMessage", "not a JSON object"));
        return;
    }
    if (!m.is_object() || !m.contains("version") || !m["version"].is_number_integer()) {
        send_locked(error_message("BadMessage", "version field is mandatory"));
        return;
    }
    if (m["version"].get<int>() != kProtocolVersion) {
        send_locked(error_message("UnsupportedVersion", "server speaks protocol version 1"));
        return;
    }
    const std::string type = m.value("type", "");
    if (type == "hello") {
        send_locked({{"type", "hello"}, {"version", kProtocolVersion}, {"sessionId", id_}});
        send_locked(progress_locked());
        if (state_ && !client_lost_) send_locked(state_message(*state_, phase_));
        if (phase_ == SessionPhase::AwaitingHuman && state_ && !pending_ && !client_lost_) send_locked(your_turn_message(*state_));
        return;
    }
    if (type != "move") {
        send_locked(error_message("BadMessage", "unknown message type '" + type + "'"));
        return;
    }
    if (phase_ != SessionPhase::AwaitingHuman || pending_) {
        send_locked(error_message("WrongPhase", "moves are accepted only while awaiting the human (phase " +
                                                    std::string(to_string(phase_)) + ")"));
        return;
    }
    const std::string text = m.value("move", "");
    try {
        parse_move(text);
    } catch (const MalformedMove& e) {
        send_locked(error_message("MalformedMove", e.what()));
        return;
    }
    pending_ = text;
    phase_ = SessionPhase::ComputerThinking;
    cv_.notify_all();
}

void PlaySession::game_starting(const StageProgress& progress, const GameState& state) {
    std::lock_guard lock(mu_);
    progress_ = progress;
    state_ = state;
    pending_.reset();
    client_lost_ = false;
    phase_ = SessionPhase::ComputerThinking;
    send_locked(progress_locked());
    send_locked(state_message(state, phase_));
}

std::optional<std::string> PlaySession::request_move(const GameState& state) {
    std::unique_lock lock(mu_);
    state_ = state;
    if (client_lost_) return std::nullopt;
    phase_ = SessionPhase::AwaitingHuman;
    send_locked(state_message(state, phase_));
    send_locked(your_turn_message(state));
    cv_.wait(lock, [&] { return pending_.has_value() || client_lost_; });
    if (!pending_) return std::nullopt;
    last_submission_ = *pending_;
    pending_.reset();
    phase_ = SessionPhase::ComputerThinking;
    return last_submission_;
}

void PlaySession::reject(const std::string& submitted, std::string_view reason) {
    std::lock_guard lock(mu_);
    if (client_lost_) return;
    send_locked({{"type", "moveResult"},
                 {"version", kProtocolVersion},
                 {"status", "rejected"},
                 {"move", submitted},
                 {"rule", reason}});
}

void PlaySession::ply(const GameState& before, const Move& move, const MoveOutcome& out) {
    std::lock_guard lock(mu_);
    state_ = out.next;
    if (client_lost_) return;
    if (before.side_to_move() == Player::White) {
        send_locked({{"type", "moveResult"},
                     {"version", kProtocolVersion},
                     {"status", "accepted"},
                     {"move", format_move(move)},
                     {"captures", {{"white", out.white_lost}, {"black", out.black_lost}}}});
    }
    json m = state_message(out.next, phase_);
    m["lastMove"] = format_move(move);
    m["lastMover"] = to_string(before.side_to_move());
    send_locked(m);
}

void PlaySession::game_finished(const GameOutcome& outcome) {
    std::lock_guard lock(mu_);
    phase_ = SessionPhase::GameOver;
    last_outcome_ = outcome;
    send_locked({{"type", "gameOver"},
                 {"version", kProtocolVersion},
                 {"winner", to_string(outcome.winner)},
                 {"reason", to_string(outcome.reason)},
                 {"moveCount", outcome.final_move_count}});
    progress_.hc_game_index += 1;
    send_locked(progress_locked());
}

void PlaySession::game_aborted() {
    std::lock_guard lock(mu_);
    phase_ = SessionPhase::BetweenGames;
    ++aborted_;
    send_locked(progress_locked());
}

void PlaySession::complete() {
    std::lock_guard lock(mu_);
    complete_ = true;
    phase_ = SessionPhase::BetweenGames;
    send_locked(progress_locked());
}

// ---------------------------------------------------------------------------

namespace {

void send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            return;
        }
        off += static_cast<std::size_t>(n);
    }
}

class SocketLink final : public ClientLink {
public:
    explicit SocketLink(int fd) : fd_(fd) {}
    void send(const json& message) override {
        std::lock_guard lock(mu_);
        send_all(fd_, message.dump() + "\n");
    }
    void close() override { ::shutdown(fd_, SHUT_RDWR); }

private:
    int fd_;
    std::mutex mu_;
};

std::pair<std::string, int> split_address(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw BindError("address must be host:port, got '" + bind + "'");
    try {
        return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
    } catch (const std::exception&) {
        throw BindError("bad port in '" + bind + "'");
    }
}

sockaddr_in make_address(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    const std::string h = host == "localhost" ? "127.0.0.1" : host;
    if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) throw BindError("bad IPv4 address '" + host + "'");
    return addr;
}

}  // namespace

PlayServer::PlayServer(const std::string& bind, PlaySession& session) : session_(session) {
    const auto [host, port] = split_address(bind);
    const sockaddr_in addr = make_address(host, port);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw BindError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 4) != 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        throw BindError("cannot listen on " + bind + ": " + why);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

PlayServer::~PlayServer() { stop(); }

void PlayServer::stop() {
    if (stopping_.exchange(true)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(threads_mu_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
        threads.swap(client_threads_);
    }
    for (auto& t : threads) t.join();
}

void PlayServer::accept_loop() {
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 100) <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard lock(threads_mu_);
        client_fds_.push_back(fd);
        client_threads_.emplace_back([this, fd] { serve_client(fd); });
    }
}

void PlayServer::serve_client(int fd) {
    auto link = std::make_shared<SocketLink>(fd);
    if (session_.attach(link)) {
        std::string buffer;
        char chunk[4096];
        for (;;) {
            const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t nl;
            while ((nl = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (!line.empty()) session_.handle_line(link.get(), line);
            }
        }
        session_.detach(link.get());
    }
    std::lock_guard lock(threads_mu_);
    std::erase(client_fds_, fd);
    ::close(fd);
}

PlanReport serve_plan(const ExperimentPlan& plan, const std::filesystem::path& out_root, const std::string& bind,
                      const std::function<void(int)>& on_listening, bool resume) {
    if (!plan.has_interactive()) throw NoInteractiveStages();
    PlaySession session;
    PlayServer server(bind, session);
    if (on_listening) on_listening(server.port());
    RunOptions options;
    options.resume = resume;
    options.host = &session;
    PlanReport report = run_plan(plan, out_root, options);
    session.complete();
    server.stop();
    return report;
}

// ---------------------------------------------------------------------------

LineClient::LineClient(const std::string& host, int port) {
    const sockaddr_in addr = make_address(host, port);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0 || ::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        const std::string why = std::strerror(errno);
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
        throw IoError("cannot connect to " + host + ":" + std::to_string(port) + ": " + why);
    }
}

LineClient::~LineClient() { close(); }

void LineClient::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void LineClient::send(const json& message) {
    if (fd_ >= 0) send_all(fd_, message.dump() + "\n");
}

std::optional<json> LineClient::receive(int timeout_ms) {
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            const std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (line.empty()) continue;
            return json::parse(line);
        }
        if (fd_ < 0) return std::nullopt;
        pollfd p{fd_, POLLIN, 0};
        if (::poll(&p, 1, timeout_ms) <= 0) return std::nullopt;
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n <= 0) return std::nullopt;
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::optional<json> LineClient::receive_type(const std::string& type, int timeout_ms, std::vector<json>* skipped) {
    for (;;) {
        auto m = receive(timeout_ms);
        if (!m) return std::nullopt;
        if (m->value("type", "") == type) return m;
        if (skipped) skipped->push_back(std::move(*m));
    }
}

}  // namespace baserace
