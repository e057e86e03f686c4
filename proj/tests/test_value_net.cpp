#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "baserace/value_net.h"

using namespace baserace;
namespace fs = std::filesystem;

namespace {

BoardConfig small() {
    BoardConfig c;
    c.n = 6;
    c.a = 1;
    c.beta = 3;
    return c;
}

CellCoord rotate(CellCoord c, int n) { return {n - 1 - c.x, n - 1 - c.y}; }

// Rotates the board 180 degrees and swaps colours.
GameState mirror(const GameState& s) {
    std::vector<std::pair<CellCoord, Player>> pawns;
    for (Player p : {Player::White, Player::Black})
        for (auto c : s.pawns(p)) pawns.push_back({rotate(c, s.config().n), opponent(p)});
    return GameState::from_parts(s.config(), pawns, s.reserve(Player::Black), s.reserve(Player::White),
                                 opponent(s.side_to_move()), s.move_count());
}

// Non-base cells in row-major order, mirroring the encoder's layout.
std::vector<CellCoord> grid_cells(const GameState& s) {
    std::vector<CellCoord> out;
    for (int y = 0; y < s.config().n; ++y)
        for (int x = 0; x < s.config().n; ++x)
            if (!s.in_any_base({x, y})) out.push_back({x, y});
    return out;
}

GameState random_state(const BoardConfig& cfg, std::mt19937_64& rng, int plies) {
    auto s = GameState::initial(cfg);
    for (int i = 0; i < plies && !s.terminal(); ++i) {
        auto moves = s.legal_moves();
        auto next = s.apply(moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)]).next;
        if (next.terminal()) break;
        s = next;
    }
    return s;
}

}  // namespace

TEST(Topology, InputAndHiddenCounts) {
    EXPECT_EQ(NetworkTopology::for_board(BoardConfig{}), (NetworkTopology{66, 33}));
    EXPECT_EQ(NetworkTopology::for_board(small()), (NetworkTopology{44, 22}));
    BoardConfig odd;
    odd.n = 7;
    odd.a = 2;
    odd.beta = 5;
    // 49 - 8 + 10 = 51 inputs, hidden rounds up.
    EXPECT_EQ(NetworkTopology::for_board(odd), (NetworkTopology{51, 26}));
}

TEST(Encoding, InitialState) {
    auto s = GameState::initial(BoardConfig{});
    auto f = encode_afterstate(s, Player::White);
    ASSERT_EQ(f.size(), 66u);
    for (int i = 0; i < 56; ++i) EXPECT_EQ(f[i], 0.0);
    EXPECT_DOUBLE_EQ(f[56], 1.0);  // own reserve 10/10
    EXPECT_DOUBLE_EQ(f[57], 1.0);
    EXPECT_DOUBLE_EQ(f[58], 1.0);
    EXPECT_DOUBLE_EQ(f[59], 1.0);
    EXPECT_DOUBLE_EQ(f[60], 0.0);
    EXPECT_DOUBLE_EQ(f[61], 0.0);
    EXPECT_DOUBLE_EQ(f[62], 1.0);  // no pawns out
    EXPECT_DOUBLE_EQ(f[63], 1.0);
    EXPECT_DOUBLE_EQ(f[64], 1.0);  // white to move
    EXPECT_DOUBLE_EQ(f[65], 1.0);
}

TEST(Encoding, SinglePawn) {
    auto s = GameState::from_parts(BoardConfig{}, {{{2, 0}, Player::White}}, 9, 10, Player::Black);
    auto f = encode_afterstate(s, Player::White);
    int plus = 0, other = 0;
    for (int i = 0; i < 56; ++i) {
        if (f[i] == 1.0) ++plus;
        else if (f[i] != 0.0) ++other;
    }
    EXPECT_EQ(plus, 1);
    EXPECT_EQ(other, 0);
    EXPECT_DOUBLE_EQ(f[0], 1.0);  // (2,0) is the first non-base cell
    EXPECT_DOUBLE_EQ(f[60], 0.1);
    EXPECT_DOUBLE_EQ(f[64], -1.0);
    // (2,0) is 6 ranks below the black base: 6 / 7.
    EXPECT_DOUBLE_EQ(f[62], 6.0 / 7.0);
}

TEST(Encoding, PerspectiveSymmetry) {
    std::mt19937_64 rng(3);
    for (auto cfg : {BoardConfig{}, small()}) {
        for (int trial = 0; trial < 200; ++trial) {
            auto s = random_state(cfg, rng, 1 + trial % 40);
            auto w = encode_afterstate(s, Player::White);
            auto b = encode_afterstate(s, Player::Black);
            EXPECT_EQ(w, encode_afterstate(mirror(s), Player::Black));
            EXPECT_EQ(b, encode_afterstate(mirror(s), Player::White));

            // Cell block: sign flipped and index mirrored through the rotation.
            auto cells = grid_cells(s);
            for (std::size_t i = 0; i < cells.size(); ++i) {
                auto rot = rotate(cells[i], cfg.n);
                auto j = std::find(cells.begin(), cells.end(), rot) - cells.begin();
                EXPECT_EQ(b[i], -w[j]);
            }
            for (double v : w) {
                EXPECT_GE(v, -1.0);
                EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(Encoding, ConfigMismatch) {
    auto net = ValueNetwork::init(BoardConfig{}, Player::White, 1);
    EXPECT_THROW(encode_afterstate(net, GameState::initial(small())), ConfigMismatch);
    EXPECT_THROW(net.forward(std::vector<double>(10, 0.0)), DimensionMismatch);
}

TEST(Forward, ZeroWeightsGiveHalf) {
    auto net = ValueNetwork::init(BoardConfig{}, Player::White, 9, 0.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        auto s = random_state(BoardConfig{}, rng, i * 3);
        EXPECT_EQ(net.forward(encode_afterstate(s, Player::White)), 0.5);
    }
}

TEST(Forward, RangeAndPurity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        auto net = ValueNetwork::init(small(), Player::Black, rng(), 3.0);
        std::vector<double> x(44);
        for (auto& v : x) v = u(rng);
        const double p = net.forward(x);
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        EXPECT_EQ(p, net.forward(x));
    }
}

TEST(Init, SeededAndNearHalf) {
    EXPECT_EQ(ValueNetwork::init(BoardConfig{}, Player::White, 42), ValueNetwork::init(BoardConfig{}, Player::White, 42));
    EXPECT_NE(ValueNetwork::init(BoardConfig{}, Player::White, 42), ValueNetwork::init(BoardConfig{}, Player::White, 43));
    auto net = ValueNetwork::init(BoardConfig{}, Player::White, 42);
    for (double w : net.input_to_hidden()) EXPECT_LE(std::abs(w), 0.1);

    // Within one network, initial values are nearly flat across states.
    std::mt19937_64 rng(8);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto s = random_state(BoardConfig{}, rng, i % 60);
        const double p = net.forward(encode_afterstate(s, Player::White));
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    EXPECT_LT(hi - lo, 0.05);

    // The common offset depends on the draw; across seeds it stays inside
    // (0.4, 0.6) for the large majority of networks.
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto s = random_state(BoardConfig{}, rng, static_cast<int>(seed % 40));
        const double p = ValueNetwork::init(BoardConfig{}, Player::White, seed).forward(encode_afterstate(s, Player::White));
        if (p > 0.4 && p < 0.6) ++inside;
    }
    EXPECT_GE(inside, 475);
}

TEST(Gradient, MatchesCentralDifferences) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-6;
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto net = ValueNetwork::init(small(), Player::White, rng(), 1.0);
        std::vector<double> x(44);
        for (auto& v : x) v = u(rng);
        Gradient g;
        const double v0 = net.value_and_gradient(x, g);
        EXPECT_DOUBLE_EQ(v0, net.value(x));

        auto check = [&](std::span<double> w, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double keep = w[i];
                w[i] = keep + h;
                const double up = net.value(x);
                w[i] = keep - h;
                const double down = net.value(x);
                w[i] = keep;
                const double fd = (up - down) / (2 * h);
                // Relative error, with an absolute floor for gradients that
                // vanish below finite-difference resolution.
                const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
                EXPECT_LE(std::abs(fd - grad[i]) / scale, 1e-6) << "weight " << i;
                ++compared;
            }
        };
        check(net.input_to_hidden(), g.input_to_hidden);
        check(net.hidden_to_output(), g.hidden_to_output);
    }
    EXPECT_GT(compared, 100000);
}

TEST(Checkpoint, RoundTrip) {
    auto net = ValueNetwork::init(BoardConfig{}, Player::Black, 77);
    auto text = checkpoint_to_string(net);
    EXPECT_EQ(checkpoint_from_string(text), net);
    EXPECT_EQ(checkpoint_to_string(checkpoint_from_string(text)), text);

    auto dir = fs::temp_directory_path() / "baserace_vnet_test";
    fs::create_directories(dir);
    save_checkpoint(net, dir / "b.vnet.json");
    auto back = load_checkpoint(dir / "b.vnet.json");
    EXPECT_EQ(back, net);
    EXPECT_EQ(back.owner(), Player::Black);
    for (std::size_t i = 0; i < net.input_to_hidden().size(); ++i)
        EXPECT_EQ(std::memcmp(&back.input_to_hidden()[i], &net.input_to_hidden()[i], sizeof(double)), 0);
    fs::remove_all(dir);
}

TEST(Checkpoint, Errors) {
    auto net = ValueNetwork::init(BoardConfig{}, Player::White, 1);
    auto j = nlohmann::json::parse(checkpoint_to_string(net));
    j["formatVersion"] = 2;
    EXPECT_THROW(checkpoint_from_string(j.dump()), FormatError);
    EXPECT_THROW(checkpoint_from_string("not json"), FormatError);
    j["formatVersion"] = 1;
    j["hiddenToOutput"].erase(0);
    EXPECT_THROW(checkpoint_from_string(j.dump()), FormatError);

    auto dir = fs::temp_directory_path() / "baserace_vnet_err";
    fs::create_directories(dir);
    save_checkpoint(net, dir / "w.vnet.json");
    EXPECT_THROW(load_checkpoint(dir / "w.vnet.json", small()), ConfigMismatch);
    EXPECT_NO_THROW(load_checkpoint(dir / "w.vnet.json", BoardConfig{}));
    EXPECT_THROW(load_checkpoint(dir / "missing.vnet.json"), IoError);
    fs::remove_all(dir);
}
