#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "baserace/game.h"

namespace baserace {

class ConfigMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Number of scalar features appended after the per-cell block.
inline constexpr int kScalarFeatures = 10;

struct NetworkTopology {
    int input = 0;
    int hidden = 0;

    /// n^2 - 2a^2 cell inputs plus the scalar block; hidden = ceil(input / 2).
    static NetworkTopology for_board(const BoardConfig& config);
    bool operator==(const NetworkTopology&) const = default;
};

using FeatureVector = std::vector<double>;

/// Afterstate features seen from `perspective`, in that player's own frame:
/// the board is rotated 180 degrees for Black so every network sees its own
/// base in the lower-left corner.
///
/// Layout: one entry per non-base cell, row-major (+1 own, -1 opponent,
/// 0 empty), then
///   own reserve, opponent reserve, own total, opponent total,
///   own on-board, opponent on-board            (each divided by beta)
///   closest own pawn to the opponent base,
///   closest opponent pawn to our base          (Chebyshev, / (n-1); 1 if none)
///   side to move (+1 own, -1 opponent), constant 1.
FeatureVector encode_afterstate(const GameState& state, Player perspective);

/// Gradient of the signed value v = 2p - 1 with respect to every weight.
struct Gradient {
    std::vector<double> input_to_hidden;
    std::vector<double> hidden_to_output;
};

/// Two-layer perceptron with logistic units whose output is read as the
/// owner's probability of winning from the encoded afterstate.
class ValueNetwork {
public:
    ValueNetwork(const BoardConfig& board, Player owner);

    /// Weights uniform in [-init_range, +init_range].
    static ValueNetwork init(const BoardConfig& board, Player owner, std::uint64_t seed,
                             double init_range = 0.1);

    const NetworkTopology& topology() const { return topology_; }
    const BoardConfig& board() const { return board_; }
    Player owner() const { return owner_; }

    /// hidden x (input + 1), row-major; the last column is the bias.
    std::span<double> input_to_hidden() { return w1_; }
    std::span<const double> input_to_hidden() const { return w1_; }
    /// hidden + 1 entries; the last is the bias.
    std::span<double> hidden_to_output() { return w2_; }
    std::span<const double> hidden_to_output() const { return w2_; }

    double forward(std::span<const double> features) const;
    double value(std::span<const double> features) const { return 2.0 * forward(features) - 1.0; }
    /// Returns v and fills `grad` with dv/dw.
    double value_and_gradient(std::span<const double> features, Gradient& grad) const;

    bool all_finite() const;
    bool operator==(const ValueNetwork&) const = default;

private:
    void check_input(std::span<const double> features) const;

    BoardConfig board_;
    Player owner_;
    NetworkTopology topology_;
    std::vector<double> w1_;
    std::vector<double> w2_;
};

/// Encodes from the network owner's perspective; throws ConfigMismatch.
FeatureVector encode_afterstate(const ValueNetwork& net, const GameState& state);

inline double forward(const ValueNetwork& net, std::span<const double> features) {
    return net.forward(features);
}

std::string checkpoint_to_string(const ValueNetwork& net);
ValueNetwork checkpoint_from_string(const std::string& text);

void save_checkpoint(const ValueNetwork& net, const std::filesystem::path& path);
ValueNetwork load_checkpoint(const std::filesystem::path& path);
/// Loads and verifies the checkpoint was built for `expected` (n, a, beta).
ValueNetwork load_checkpoint(const std::filesystem::path& path, const BoardConfig& expected);

}  // namespace baserace
