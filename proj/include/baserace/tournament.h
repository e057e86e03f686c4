#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "baserace/value_net.h"

namespace baserace {

class MissingCheckpoint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DegenerateCounts : public std::domain_error {
public:
    using std::domain_error::domain_error;
};
class IncompleteMatrix : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Counters of one round: a fixed white model against a fixed black model.
struct RoundResult {
    int white_wins = 0;
    int black_wins = 0;
    int draws = 0;
    double avg_moves = 0.0;             // plies per game over all games
    double avg_moves_white_wins = 0.0;  // over white-won games only (0 when none)
    double avg_moves_black_wins = 0.0;
    int games() const { return white_wins + black_wins + draws; }
};

/// Round 1 pits W_x against B_y, round 2 W_y against B_x.
struct ComparisonResult {
    std::string batch_x;
    std::string batch_y;
    int games_per_round = 0;
    std::uint64_t seed = 0;
    double epsilon_greedy = 0.9;
    RoundResult round1;
    RoundResult round2;
};

struct ComparisonModels {
    ValueNetwork white_x, black_x, white_y, black_y;
};

/// Loads <dir>/{white,black}.vnet.json; throws MissingCheckpoint.
std::pair<ValueNetwork, ValueNetwork> load_batch_models(const std::filesystem::path& batch_dir,
                                                        const BoardConfig& board);

/// Frozen evaluation games only. Game i of both rounds uses the same seed,
/// so comparing a batch with itself yields two identical rounds.
ComparisonResult run_comparison(const std::string& batch_x, const std::string& batch_y, const ComparisonModels& models,
                                int games_per_round, std::uint64_t seed, double epsilon_greedy = 0.9,
                                int move_cap = BoardConfig{}.move_cap);

std::string comparison_to_json(const ComparisonResult& c);
ComparisonResult comparison_from_json(const std::string& text);

/// A normalized ratio (always >= 1), or the infinite flag when a count was 0.
struct Ratio {
    double value = 1.0;
    bool infinite = false;
    bool first_is_numerator = true;  // round 1 (or batch x) was the larger side
};

/// max(avg1, avg2) / min(avg1, avg2).
double speed_ratio(const ComparisonResult& r);
/// Ratio of the two rounds' white/black win ratios. Throws DegenerateCounts.
double advantage_ratio_v1(const ComparisonResult& r);
/// Ratio of each batch's wins summed over both rounds. Throws DegenerateCounts.
double advantage_ratio_v2(const ComparisonResult& r);

struct RatioReport {
    std::string pair;  // "x-y"
    Ratio speed;
    Ratio advantage_v1;
    Ratio advantage_v2;
    int draws = 0;
};
RatioReport ratio_report(const ComparisonResult& r);

/// Rounds half away from zero to `digits` decimals, as printed in tables.
double round_display(double v, int digits);

/// CSV sorted by ascending speed ratio (stable):
/// index,pair,speedRatio,advantageV1,advantageV2
std::string ratio_scatter_csv(std::vector<RatioReport> reports);

struct RoundRobinCell {
    std::string white;
    std::string black;
    int net_wins = 0;  // white wins - black wins
    double avg_moves = 0.0;
};

std::vector<RoundRobinCell> cells_from_comparisons(const std::vector<ComparisonResult>& comparisons);

struct RoundRobinTable {
    std::vector<std::string> participants;
    // [white][black], diagonal unused
    std::vector<std::vector<int>> net_wins;
    std::vector<std::vector<double>> avg_moves;

    std::vector<int> white_sums, black_sums;
    std::vector<int> white_ranks, black_ranks;
    std::vector<double> white_move_sums, black_move_sums;
    std::vector<int> white_move_ranks, black_move_ranks;

    std::vector<int> totals;  // white sum - black sum
    std::vector<int> total_ranks;
    std::vector<double> avg_moves_per_batch;
    std::vector<long long> avg_moves_display;  // half-up integer
    std::vector<int> avg_move_ranks;

    bool rank_ties = false;  // some rank was decided by batch id order
    int games_per_round = 0;
};

RoundRobinTable build_round_robin(const std::vector<std::string>& participants, const std::vector<RoundRobinCell>& cells);

/// Per-batch aggregate rows, fixed column order:
/// batch,whiteSum,whiteRank,blackSum,blackRank,total,totalRank,
/// whiteMovesSum,whiteMovesRank,blackMovesSum,blackMovesRank,avgMoves,avgMovesRank
std::string round_robin_csv(const RoundRobinTable& t);
/// white,black,netWins,avgMoves
std::string round_robin_cells_csv(const RoundRobinTable& t);
std::vector<RoundRobinCell> parse_cells_csv(const std::string& text);

}  // namespace baserace
