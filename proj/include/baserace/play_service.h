#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "baserace/orchestrator.h"

namespace baserace {

inline constexpr int kProtocolVersion = 1;

class NoInteractiveStages : public PlanError {
public:
    NoInteractiveStages() : PlanError("plan has no interactive HC stages") {}
};
class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SessionPhase : std::uint8_t { BetweenGames, AwaitingHuman, ComputerThinking, GameOver };
std::string_view to_string(SessionPhase p);

/// Protocol messages, one JSON object per line.
nlohmann::json state_message(const GameState& s, SessionPhase phase);
nlohmann::json error_message(std::string_view code, std::string_view detail);

/// A connected client as seen by the session.
class ClientLink {
public:
    virtual ~ClientLink() = default;
    virtual void send(const nlohmann::json& message) = 0;
    virtual void close() = 0;
};

/// Live HC game shared between the training thread (through the
/// InteractiveHost / MoveChannel side) and one client.
class PlaySession final : public InteractiveHost, public MoveChannel {
public:
    explicit PlaySession(std::string session_id = "session-1");

    // Client side.
    /// Returns false (after sending SessionConflict) when another client is attached.
    bool attach(const std::shared_ptr<ClientLink>& client);
    void detach(const ClientLink* client);
    /// Handles one inbound line from `client`.
    void handle_line(const ClientLink* client, const std::string& line);

    // Training side.
    MoveChannel& channel() override { return *this; }
    void game_starting(const StageProgress& progress, const GameState& state) override;
    void ply(const GameState& before, const Move& move, const MoveOutcome& out) override;
    void game_finished(const GameOutcome& outcome) override;
    void game_aborted() override;
    std::optional<std::string> request_move(const GameState& state) override;
    void reject(const std::string& submitted, std::string_view reason) override;

    /// Training finished: tell the client and stop accepting moves.
    void complete();

    SessionPhase phase() const;
    int aborted_games() const;

private:
    void send_locked(const nlohmann::json& m);
    nlohmann::json progress_locked() const;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::string id_;
    std::shared_ptr<ClientLink> client_;
    bool client_lost_ = false;  // the client of the current game went away
    SessionPhase phase_ = SessionPhase::BetweenGames;
    std::optional<GameState> state_;
    std::optional<std::string> pending_;
    std::string last_submission_;
    StageProgress progress_;
    std::optional<GameOutcome> last_outcome_;
    int aborted_ = 0;
    bool complete_ = false;
};

/// TCP listener speaking the line protocol on a local address.
class PlayServer {
public:
    /// `bind` is "host:port"; port 0 picks a free port.
    PlayServer(const std::string& bind, PlaySession& session);
    ~PlayServer();
    PlayServer(const PlayServer&) = delete;
    PlayServer& operator=(const PlayServer&) = delete;

    int port() const { return port_; }
    void stop();

private:
    void accept_loop();
    void serve_client(int fd);

    PlaySession& session_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex threads_mu_;
    std::vector<std::thread> client_threads_;
    std::vector<int> client_fds_;
};

/// Runs `plan`, hosting every interactive HC game on `bind`. Throws
/// NoInteractiveStages when there is nothing for a human to play.
/// `on_listening` receives the bound port once the socket is open.
PlanReport serve_plan(const ExperimentPlan& plan, const std::filesystem::path& out_root, const std::string& bind,
                      const std::function<void(int)>& on_listening = {}, bool resume = false);

/// Minimal blocking line client, used by the terminal front end and tests.
class LineClient {
public:
    LineClient(const std::string& host, int port);
    ~LineClient();
    LineClient(const LineClient&) = delete;
    LineClient& operator=(const LineClient&) = delete;

    void send(const nlohmann::json& message);
    /// Next message, or nullopt on EOF / timeout.
    std::optional<nlohmann::json> receive(int timeout_ms = 10000);
    /// Reads until a message of `type` arrives (earlier ones are returned through `skipped`).
    std::optional<nlohmann::json> receive_type(const std::string& type, int timeout_ms = 10000,
                                               std::vector<nlohmann::json>* skipped = nullptr);
    void close();

private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace baserace
