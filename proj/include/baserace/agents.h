#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "baserace/game.h"
#include "baserace/value_net.h"

namespace baserace {

using Rng = std::mt19937_64;

enum class AgentKind : std::uint8_t { Learner, ScriptedPolicy1, ScriptedPolicy2, InteractiveStdin, InteractiveService };

class NoLegalMove : public std::logic_error {
public:
    NoLegalMove() : std::logic_error("player has no legal move") {}
};

/// Raised when the human's input channel goes away mid-game.
class ChannelClosed : public std::runtime_error {
public:
    ChannelClosed() : std::runtime_error("interactive channel closed") {}
};

class LearnerAgent;

class Agent {
public:
    virtual ~Agent() = default;
    virtual AgentKind kind() const = 0;
    virtual Move select_move(const GameState& state, Rng& rng) = 0;
    /// Called before every game; `game_in_stage` is the 0-based index of
    /// the game inside its stage.
    virtual void begin_game(int game_in_stage) { (void)game_in_stage; }
    virtual LearnerAgent* as_learner() { return nullptr; }
};

// ---------------------------------------------------------------------------
// Learner

/// Win probability of an afterstate for `owner`. Terminal afterstates take
/// their exact value (1 win, 0 loss, 0.5 draw) instead of the network's.
double afterstate_probability(const ValueNetwork& net, const GameState& afterstate);

/// Epsilon-greedy afterstate selection. With probability `epsilon_greedy`
/// returns a best-valued move (ties broken uniformly), otherwise a uniformly
/// random legal move.
Move learner_select(const GameState& state, const ValueNetwork& net, double epsilon_greedy, Rng& rng);

class LearnerAgent final : public Agent {
public:
    LearnerAgent(std::shared_ptr<ValueNetwork> net, double epsilon_greedy, bool learning)
        : net_(std::move(net)), epsilon_(epsilon_greedy), learning_(learning) {}

    AgentKind kind() const override { return AgentKind::Learner; }
    Move select_move(const GameState& state, Rng& rng) override;
    LearnerAgent* as_learner() override { return this; }

    ValueNetwork& network() { return *net_; }
    const std::shared_ptr<ValueNetwork>& shared_network() const { return net_; }
    double epsilon_greedy() const { return epsilon_; }
    void set_epsilon_greedy(double e) { epsilon_ = e; }
    bool learning() const { return learning_; }
    void set_learning(bool on) { learning_ = on; }

private:
    std::shared_ptr<ValueNetwork> net_;
    double epsilon_;
    bool learning_;
};

// ---------------------------------------------------------------------------
// Scripted white policies

/// A scripted trajectory toward the black base.
struct Route {
    enum class Shape : std::uint8_t {
        NorthThenEast,  // north until `turn`'s rank, then east
        EastThenNorth,  // east until `turn`'s file, north to the top rank, then east
    };
    Shape shape = Shape::NorthThenEast;
    int turn = 0;
    CellCoord exit{};

    /// Scripted next cell for a pawn standing on `at`.
    CellCoord next(CellCoord at, const BoardConfig& cfg) const;
};

struct RoutePlan {
    int route_index = 0;  // 0..9 within an HC stage
    int pawns_out = 1;
    std::vector<CellCoord> waypoints;  // exit cell first, last cell inside the black base
    Route route;
};

Route policy1_route(const BoardConfig& cfg);
/// Routes 0..7 are parallel north-running lanes spread across the files;
/// 8 and 9 are the two-pawn central walks (their Route is unused).
RoutePlan policy2_plan(int route_index, const BoardConfig& cfg);

/// Consecutive blocked turns before policy 2 releases a second pawn.
inline constexpr int kBlockedTurnsBeforeSecondPawn = 3;

Move policy1_select(const GameState& state, Rng& rng);

/// Per-game memory of policy 2 (blocked-turn counter).
struct Policy2Memory {
    int blocked_turns = 0;
    int exits_made = 0;
};
Move policy2_select(const GameState& state, const RoutePlan& plan, Policy2Memory& memory, Rng& rng);

class Policy1Agent final : public Agent {
public:
    AgentKind kind() const override { return AgentKind::ScriptedPolicy1; }
    Move select_move(const GameState& state, Rng& rng) override { return policy1_select(state, rng); }
};

class Policy2Agent final : public Agent {
public:
    AgentKind kind() const override { return AgentKind::ScriptedPolicy2; }
    void begin_game(int game_in_stage) override;
    Move select_move(const GameState& state, Rng& rng) override;
    const std::optional<RoutePlan>& plan() const { return plan_; }

private:
    int route_index_ = 0;
    std::optional<RoutePlan> plan_;
    Policy2Memory memory_;
};

// ---------------------------------------------------------------------------
// Interactive

/// Source of human move text. `request_move` blocks; nullopt means the
/// channel has closed.
class MoveChannel {
public:
    virtual ~MoveChannel() = default;
    virtual std::optional<std::string> request_move(const GameState& state) = 0;
    virtual void reject(const std::string& submitted, std::string_view reason) = 0;
};

/// Outcome of validating one submission against a position.
struct Submission {
    std::optional<Move> move;
    std::string reason;  // rule name when rejected
};
Submission validate_submission(const GameState& state, std::string_view text);

/// Blocks on `channel` until a legal move arrives; never picks a move itself.
Move interactive_select(const GameState& state, MoveChannel& channel);

class InteractiveAgent final : public Agent {
public:
    InteractiveAgent(MoveChannel& channel, AgentKind kind) : channel_(&channel), kind_(kind) {}
    AgentKind kind() const override { return kind_; }
    Move select_move(const GameState& state, Rng&) override { return interactive_select(state, *channel_); }

private:
    MoveChannel* channel_;
    AgentKind kind_;
};

/// Terminal prompt channel.
class StreamChannel final : public MoveChannel {
public:
    StreamChannel(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    std::optional<std::string> request_move(const GameState& state) override;
    void reject(const std::string& submitted, std::string_view reason) override;

private:
    std::istream& in_;
    std::ostream& out_;
};

}  // namespace baserace
