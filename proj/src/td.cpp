#include "baserace/td.h"

#include <cmath>
#include <cstdlib>
#include <string>

#include "baserace/notation.h"

namespace baserace {

void TdParams::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0,1]");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0,1]");
    if (!(epsilon_greedy >= 0.0 && epsilon_greedy <= 1.0))
        throw std::invalid_argument("epsilonGreedy must be in [0,1]");
}

double RewardScheme::pawn_credit(int diff, int beta) const {
    return static_cast<double>(diff) * scale / static_cast<double>(beta);
}

double normalized_reward(const RewardEvent& event, int beta, const RewardScheme& scheme) {
    switch (event.kind) {
        case RewardEvent::Kind::Win: return scheme.win_credit / scheme.scale;
        case RewardEvent::Kind::Loss: return scheme.loss_credit / scheme.scale;
        case RewardEvent::Kind::PawnDelta:
            if (std::abs(event.diff) > beta)
                throw std::out_of_range("pawn difference " + std::to_string(event.diff) + " exceeds beta");
            return scheme.pawn_credit(event.diff, beta) / scheme.scale;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

TdLearner::TdLearner(ValueNetwork& net, const TdParams& params) : net_(&net), params_(params) {
    params_.validate();
    begin_episode();
}

void TdLearner::begin_episode() {
    traces_.input_to_hidden.assign(net_->input_to_hidden().size(), 0.0);
    traces_.hidden_to_output.assign(net_->hidden_to_output().size(), 0.0);
    previous_.reset();
}

void TdLearner::observe(std::span<const double> afterstate, double reward) {
    if (previous_) update(reward + params_.gamma * net_->value(afterstate));
    previous_.emplace(afterstate.begin(), afterstate.end());
}

void TdLearner::finish(double reward) {
    if (previous_) update(reward);
    previous_.reset();
}

void TdLearner::update(double target) {
    const double v_prev = net_->value_and_gradient(*previous_, scratch_);
    const double delta = target - v_prev;
    const double decay = params_.gamma * params_.lambda;
    const double step = params_.alpha * delta;

    auto apply = [&](std::vector<double>& trace, const std::vector<double>& grad, std::span<double> w) {
        for (std::size_t i = 0; i < trace.size(); ++i) {
            trace[i] = decay * trace[i] + grad[i];
            w[i] += step * trace[i];
        }
    };
    apply(traces_.input_to_hidden, scratch_.input_to_hidden, net_->input_to_hidden());
    apply(traces_.hidden_to_output, scratch_.hidden_to_output, net_->hidden_to_output());
    ++updates_;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t idx(Player p) { return p == Player::White ? 0 : 1; }

double terminal_credit(const GameOutcome& o, Player p, const RewardScheme& scheme) {
    if (o.winner == Winner::Draw) return 0.0;
    const bool won = (o.winner == Winner::White) == (p == Player::White);
    return normalized_reward(won ? RewardEvent::win() : RewardEvent::loss(), 1, scheme);
}

}  // namespace

EpisodeResult play_episode(Agent& white, Agent& black, const BoardConfig& board, std::uint64_t seed,
                           const EpisodeOptions& options) {
    options.params.validate();
    Rng rng(seed);
    GameState state = GameState::initial(board);

    std::array<Agent*, 2> agents{&white, &black};
    std::array<std::optional<TdLearner>, 2> learners;
    for (Player p : {Player::White, Player::Black}) {
        LearnerAgent* l = agents[idx(p)]->as_learner();
        if (options.train && l && l->learning()) learners[idx(p)].emplace(l->network(), options.params);
    }

    EpisodeResult result;
    GameRecord& rec = result.record;
    rec.board = board;
    rec.seed = seed;

    // Material excludes a pawn that walks into the enemy base, so shaping
    // only reacts to trapped pawns.
    std::array<int, 2> material{board.beta, board.beta};
    std::array<int, 2> credited_diff{0, 0};
    std::array<int, 2> decisions{0, 0};
    const double beta = board.beta;
    auto diff_of = [&](Player p) { return material[idx(p)] - material[idx(opponent(p))]; };
    auto take_pawn_reward = [&](Player p) {
        const int d = diff_of(p) - credited_diff[idx(p)];
        credited_diff[idx(p)] = diff_of(p);
        const double r = d / beta;
        result.pawn_reward_total[idx(p)] += r;
        return r;
    };

    while (!state.terminal()) {
        const Player mover = state.side_to_move();
        const Move move = agents[idx(mover)]->select_move(state, rng);
        if (auto rule = state.check(move))
            throw AgentFault(std::string(to_string(mover)) + " agent returned an illegal move " + format_move(move) +
                             " (" + std::string(rule_name(*rule)) + ")");
        MoveOutcome out = state.apply(move);
        if (options.observer) options.observer(state, move, out);

        rec.moves.push_back(format_move(move));
        rec.captures.push_back({out.white_lost, out.black_lost});
        material[0] -= out.white_lost;
        material[1] -= out.black_lost;
        state = std::move(out.next);
        if (state.terminal()) break;

        // The first decision has no predecessor to update, so its pawn
        // credit rolls into the next one.
        if (decisions[idx(mover)]++ == 0) {
            if (auto& l = learners[idx(mover)]) l->observe(encode_afterstate(state, mover), 0.0);
            continue;
        }
        const double r = take_pawn_reward(mover);
        result.reward_total[idx(mover)] += r;
        if (auto& l = learners[idx(mover)]) l->observe(encode_afterstate(state, mover), r);
    }

    const GameOutcome outcome = *state.outcome();
    for (Player p : {Player::White, Player::Black}) {
        const double r = terminal_credit(outcome, p, options.scheme) + take_pawn_reward(p);
        result.reward_total[idx(p)] += r;
        if (auto& l = learners[idx(p)]) {
            l->finish(r);
            result.updates[idx(p)] = l->updates();
        }
    }
    result.outcome = outcome;
    rec.outcome = outcome;
    rec.move_count = state.move_count();
    return result;
}

EpisodeResult play_training_game(Agent& white, Agent& black, const BoardConfig& board, const TdParams& params,
                                 const RewardScheme& scheme, std::uint64_t seed) {
    return play_episode(white, black, board, seed, EpisodeOptions{params, scheme, true, {}});
}

EpisodeResult play_evaluation_game(Agent& white, Agent& black, const BoardConfig& board, std::uint64_t seed) {
    return play_episode(white, black, board, seed, EpisodeOptions{TdParams{}, RewardScheme{}, false, {}});
}

}  // namespace baserace
