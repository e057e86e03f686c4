#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "baserace/td.h"

using namespace baserace;

namespace {

BoardConfig small() {
    BoardConfig c;
    c.n = 6;
    c.a = 1;
    c.beta = 3;
    return c;
}

std::vector<double> weights(const ValueNetwork& net) {
    std::vector<double> w(net.input_to_hidden().begin(), net.input_to_hidden().end());
    w.insert(w.end(), net.hidden_to_output().begin(), net.hidden_to_output().end());
    return w;
}

std::vector<double> flat(const Gradient& g) {
    auto v = g.input_to_hidden;
    v.insert(v.end(), g.hidden_to_output.begin(), g.hidden_to_output.end());
    return v;
}

std::vector<double> random_features(std::mt19937_64& rng, int size) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(size);
    for (auto& v : x) v = u(rng);
    return x;
}

class IllegalAgent final : public Agent {
public:
    AgentKind kind() const override { return AgentKind::ScriptedPolicy1; }
    Move select_move(const GameState&, Rng&) override { return Move::exit_to({4, 4}); }
};

}  // namespace

TEST(Reward, Normalization) {
    EXPECT_EQ(normalized_reward(RewardEvent::pawn_delta(0), 10), 0.0);
    EXPECT_EQ(normalized_reward(RewardEvent::pawn_delta(10), 10), 1.0);
    EXPECT_EQ(normalized_reward(RewardEvent::pawn_delta(-10), 10), -1.0);
    EXPECT_EQ(normalized_reward(RewardEvent::pawn_delta(3), 10), 0.3);
    EXPECT_EQ(normalized_reward(RewardEvent::win(), 10), 1.0);
    EXPECT_EQ(normalized_reward(RewardEvent::loss(), 10), -1.0);
    EXPECT_THROW(normalized_reward(RewardEvent::pawn_delta(11), 10), std::out_of_range);
    RewardScheme s;
    EXPECT_EQ(s.pawn_credit(10, 10), 100.0);
    EXPECT_EQ(s.pawn_credit(-5, 10), -50.0);
}

TEST(Params, Validation) {
    TdParams p;
    EXPECT_NO_THROW(p.validate());
    p.lambda = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.alpha = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.gamma = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(TdLearner, LambdaZeroIsOneStepTd) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto net = ValueNetwork::init(small(), Player::White, rng(), 0.5);
        auto ref = net;
        TdParams params;
        params.lambda = 0.0;
        params.alpha = 0.05;
        TdLearner learner(net, params);
        auto x0 = random_features(rng, 44);
        learner.observe(x0, 0.0);
        for (int step = 0; step < 5; ++step) {
            auto x1 = random_features(rng, 44);
            const double r = step * 0.1 - 0.2;

            Gradient g;
            const double v0 = ref.value_and_gradient(x0, g);
            const double delta = r + params.gamma * ref.value(x1) - v0;
            const double scale = params.alpha * delta;
            auto w1 = ref.input_to_hidden();
            for (std::size_t i = 0; i < w1.size(); ++i) w1[i] += scale * g.input_to_hidden[i];
            auto w2 = ref.hidden_to_output();
            for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += scale * g.hidden_to_output[i];

            learner.observe(x1, r);
            ASSERT_EQ(weights(net), weights(ref)) << "step " << step;
            x0 = x1;
        }
    }
}

TEST(TdLearner, AccumulatingTracesMatchReference) {
    std::mt19937_64 rng(9);
    auto net = ValueNetwork::init(small(), Player::Black, 5, 0.5);
    auto ref = net;
    TdParams params;  // lambda 0.5, alpha 0.1, gamma 1
    params.gamma = 0.9;
    TdLearner learner(net, params);

    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(random_features(rng, 44));
    std::vector<double> rs{0, 0.1, -0.2, 0, 0.3, 0, -0.1, 0};

    std::vector<double> trace(weights(ref).size(), 0.0);
    auto step_ref = [&](const std::vector<double>& prev, double target) {
        Gradient g;
        const double v = ref.value_and_gradient(prev, g);
        const auto grad = flat(g);
        auto w = weights(ref);
        for (std::size_t i = 0; i < w.size(); ++i) {
            trace[i] = params.gamma * params.lambda * trace[i] + grad[i];
            w[i] += params.alpha * (target - v) * trace[i];
        }
        const auto n1 = ref.input_to_hidden().size();
        std::copy(w.begin(), w.begin() + n1, ref.input_to_hidden().begin());
        std::copy(w.begin() + n1, w.end(), ref.hidden_to_output().begin());
    };

    learner.observe(xs[0], rs[0]);
    for (std::size_t t = 1; t < xs.size(); ++t) {
        step_ref(xs[t - 1], rs[t] + params.gamma * ref.value(xs[t]));
        learner.observe(xs[t], rs[t]);
    }
    step_ref(xs.back(), 1.0);
    learner.finish(1.0);
    EXPECT_EQ(learner.updates(), 8);

    const auto a = weights(net), b = weights(ref);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(TdLearner, TracesResetAndMatchShapes) {
    auto net = ValueNetwork::init(small(), Player::White, 3);
    TdLearner learner(net, TdParams{});
    std::mt19937_64 rng(2);
    learner.observe(random_features(rng, 44), 0);
    learner.observe(random_features(rng, 44), 0);
    EXPECT_EQ(learner.traces().input_to_hidden.size(), net.input_to_hidden().size());
    EXPECT_EQ(learner.traces().hidden_to_output.size(), net.hidden_to_output().size());
    bool nonzero = false;
    for (double e : learner.traces().input_to_hidden) nonzero |= e != 0.0;
    EXPECT_TRUE(nonzero);
    learner.begin_episode();
    for (double e : learner.traces().input_to_hidden) EXPECT_EQ(e, 0.0);
    for (double e : learner.traces().hidden_to_output) EXPECT_EQ(e, 0.0);
}

TEST(Episode, RewardsTelescopeAndAreZeroSum) {
    auto w = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::White, 1));
    auto b = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::Black, 2));
    LearnerAgent white(w, 0.9, true), black(b, 0.9, true);
    int captures_seen = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        auto r = play_training_game(white, black, small(), TdParams{}, RewardScheme{}, seed);
        int white_lost = 0, black_lost = 0;
        for (const auto& c : r.record.captures) {
            white_lost += c[0];
            black_lost += c[1];
        }
        captures_seen += white_lost + black_lost;
        const double final_diff = (black_lost - white_lost) / 3.0;
        EXPECT_NEAR(r.pawn_reward_total[0], final_diff, 1e-12);
        EXPECT_NEAR(r.pawn_reward_total[1], -final_diff, 1e-12);

        const double tw = r.reward_total[0] - r.pawn_reward_total[0];
        const double tb = r.reward_total[1] - r.pawn_reward_total[1];
        EXPECT_NEAR(tw, -tb, 1e-12);
        if (r.outcome.winner == Winner::Draw) EXPECT_NEAR(tw, 0.0, 1e-12);
        else EXPECT_NEAR(std::abs(tw), 1.0, 1e-12);
        if (r.outcome.winner == Winner::White && white_lost + black_lost == 0) {
            EXPECT_NEAR(r.reward_total[0], 1.0, 1e-12);
            EXPECT_NEAR(r.reward_total[1], -1.0, 1e-12);
        }
        EXPECT_GT(r.updates[0], 0);
        EXPECT_GT(r.updates[1], 0);
        EXPECT_TRUE(w->all_finite());
        EXPECT_TRUE(b->all_finite());
    }
    EXPECT_GT(captures_seen, 0);
}

TEST(Episode, FrozenAgentsNeverChange) {
    auto w = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::White, 1));
    auto b = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::Black, 2));
    const auto w0 = *w, b0 = *b;
    LearnerAgent white(w, 0.9, false), black(b, 0.9, true);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = play_training_game(white, black, small(), TdParams{}, RewardScheme{}, seed);
        EXPECT_EQ(r.updates[0], 0);
    }
    EXPECT_EQ(*w, w0);
    EXPECT_NE(*b, b0);

    const auto b1 = *b;
    black.set_learning(true);
    for (std::uint64_t seed = 0; seed < 20; ++seed) play_evaluation_game(white, black, small(), seed);
    EXPECT_EQ(*w, w0);
    EXPECT_EQ(*b, b1);
}

TEST(Episode, EvaluationIsDeterministicAndCapped) {
    BoardConfig c = small();
    c.move_cap = 40;
    auto w = std::make_shared<ValueNetwork>(ValueNetwork::init(c, Player::White, 1));
    auto b = std::make_shared<ValueNetwork>(ValueNetwork::init(c, Player::Black, 2));
    LearnerAgent white(w, 0.9, false), black(b, 0.9, false);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto r1 = play_evaluation_game(white, black, c, seed);
        auto r2 = play_evaluation_game(white, black, c, seed);
        EXPECT_EQ(r1.record, r2.record);
        EXPECT_LE(r1.record.move_count, 40);
        EXPECT_EQ(static_cast<int>(r1.record.moves.size()), r1.record.move_count);
    }
}

TEST(Episode, IllegalAgentMoveIsAFault) {
    IllegalAgent bad;
    auto b = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::Black, 2));
    LearnerAgent black(b, 0.9, true);
    EXPECT_THROW(play_training_game(bad, black, small(), TdParams{}, RewardScheme{}, 1), AgentFault);
}
