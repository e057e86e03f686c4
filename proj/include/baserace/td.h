#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>

#include "baserace/agents.h"
#include "baserace/game.h"
#include "baserace/record.h"
#include "baserace/value_net.h"

namespace baserace {

struct TdParams {
    double lambda = 0.5;
    double alpha = 0.1;
    double gamma = 1.0;
    /// Probability of taking the best-valued move.
    double epsilon_greedy = 0.9;

    void validate() const;  // throws std::invalid_argument
};

/// Credits on the external +-100 scale. Internally every credit is divided
/// by `scale`, so rewards lie in [-1, 1] and match v = 2p - 1.
struct RewardScheme {
    double win_credit = 100.0;
    double loss_credit = -100.0;
    double scale = 100.0;

    /// Pawn-difference credit in [-100, 100]: diff * 100 / beta.
    double pawn_credit(int diff, int beta) const;
};

struct RewardEvent {
    enum class Kind : std::uint8_t { Win, Loss, PawnDelta };
    Kind kind = Kind::PawnDelta;
    int diff = 0;

    static RewardEvent win() { return {Kind::Win, 0}; }
    static RewardEvent loss() { return {Kind::Loss, 0}; }
    static RewardEvent pawn_delta(int d) { return {Kind::PawnDelta, d}; }
};

/// Win -> +1, Loss -> -1, PawnDelta(d) -> d / beta. Throws std::out_of_range
/// when |d| > beta.
double normalized_reward(const RewardEvent& event, int beta, const RewardScheme& scheme = {});

/// Accumulating-trace TD(lambda) over one network's afterstate sequence.
///
/// Each `observe` after the first performs
///   delta = r + gamma * v(x_t) - v(x_{t-1})
///   e     = gamma * lambda * e + grad v(x_{t-1})
///   w     = w + alpha * delta * e
/// and `finish` does the same with v(terminal) = 0.
class TdLearner {
public:
    TdLearner(ValueNetwork& net, const TdParams& params);

    void begin_episode();
    void observe(std::span<const double> afterstate, double reward);
    void finish(double reward);

    const Gradient& traces() const { return traces_; }
    int updates() const { return updates_; }

private:
    void update(double target);

    ValueNetwork* net_;
    TdParams params_;
    Gradient traces_;
    Gradient scratch_;
    std::optional<FeatureVector> previous_;
    int updates_ = 0;
};

class AgentFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EpisodeResult {
    GameOutcome outcome;
    GameRecord record;
    std::array<int, 2> updates{0, 0};                 // indexed by Player
    std::array<double, 2> reward_total{0.0, 0.0};     // terminal + pawn credits, internal scale
    std::array<double, 2> pawn_reward_total{0.0, 0.0};
};

/// Invoked after every applied ply (state before, move, outcome).
using PlyObserver = std::function<void(const GameState&, const Move&, const MoveOutcome&)>;

struct EpisodeOptions {
    TdParams params;
    RewardScheme scheme;
    bool train = true;
    PlyObserver observer;
};

/// Plays one game. Learner agents flagged as learning are updated after
/// each of their decisions when `options.train` is set; everything else is
/// left untouched.
EpisodeResult play_episode(Agent& white, Agent& black, const BoardConfig& board, std::uint64_t seed,
                           const EpisodeOptions& options);

EpisodeResult play_training_game(Agent& white, Agent& black, const BoardConfig& board, const TdParams& params,
                                 const RewardScheme& scheme, std::uint64_t seed);
EpisodeResult play_evaluation_game(Agent& white, Agent& black, const BoardConfig& board, std::uint64_t seed);

}  // namespace baserace
