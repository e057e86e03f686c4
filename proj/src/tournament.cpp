#include "baserace/tournament.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "baserace/agents.h"
#include "baserace/orchestrator.h"
#include "baserace/td.h"

namespace baserace {

namespace fs = std::filesystem;
using nlohmann::json;

std::pair<ValueNetwork, ValueNetwork> load_batch_models(const fs::path& dir, const BoardConfig& board) {
    const fs::path w = dir / "white.vnet.json";
    const fs::path b = dir / "black.vnet.json";
    if (!fs::exists(w) || !fs::exists(b)) throw MissingCheckpoint("no final checkpoints under " + dir.string());
    return {load_checkpoint(w, board), load_checkpoint(b, board)};
}

namespace {

RoundResult play_round(const ValueNetwork& white, const ValueNetwork& black, int games, std::uint64_t seed,
                       double epsilon, const BoardConfig& board) {
    LearnerAgent w(std::make_shared<ValueNetwork>(white), epsilon, false);
    LearnerAgent b(std::make_shared<ValueNetwork>(black), epsilon, false);
    RoundResult r;
    long long plies = 0, white_plies = 0, black_plies = 0;
    for (int i = 0; i < games; ++i) {
        const auto ep = play_evaluation_game(w, b, board, split_seed(seed, static_cast<std::uint64_t>(i)));
        const int len = ep.outcome.final_move_count;
        plies += len;
        if (ep.outcome.winner == Winner::White) {
            ++r.white_wins;
            white_plies += len;
        } else if (ep.outcome.winner == Winner::Black) {
            ++r.black_wins;
            black_plies += len;
        } else {
            ++r.draws;
        }
    }
    r.avg_moves = games ? static_cast<double>(plies) / games : 0.0;
    r.avg_moves_white_wins = r.white_wins ? static_cast<double>(white_plies) / r.white_wins : 0.0;
    r.avg_moves_black_wins = r.black_wins ? static_cast<double>(black_plies) / r.black_wins : 0.0;
    return r;
}

json round_to_json(const RoundResult& r) {
    return {{"whiteWins", r.white_wins},
            {"blackWins", r.black_wins},
            {"draws", r.draws},
            {"avgMoves", r.avg_moves},
            {"avgMovesWhiteWins", r.avg_moves_white_wins},
            {"avgMovesBlackWins", r.avg_moves_black_wins}};
}

RoundResult round_from_json(const json& j) {
    RoundResult r;
    r.white_wins = j.at("whiteWins").get<int>();
    r.black_wins = j.at("blackWins").get<int>();
    r.draws = j.value("draws", 0);
    r.avg_moves = j.at("avgMoves").get<double>();
    r.avg_moves_white_wins = j.value("avgMovesWhiteWins", 0.0);
    r.avg_moves_black_wins = j.value("avgMovesBlackWins", 0.0);
    return r;
}

Ratio normalized(double a, double b) {
    if (a >= b) return {a / b, false, true};
    return {b / a, false, false};
}

std::string fixed2(const Ratio& r) {
    if (r.infinite) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round_display(r.value, 2));
    return buf;
}

// Shortest text that parses back to the same double.
std::string format_number(double v) {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
    return std::string(buf, end);
}

/// Rank 1 goes to the best value; ties fall back to batch id order.
std::vector<int> rank(const std::vector<double>& values, bool higher_is_better, const std::vector<std::string>& ids,
                      bool& ties) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (values[l] != values[r]) return higher_is_better ? values[l] > values[r] : values[l] < values[r];
        return ids[l] < ids[r];
    });
    std::vector<int> ranks(values.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        ranks[order[pos]] = static_cast<int>(pos) + 1;
        if (pos > 0 && values[order[pos]] == values[order[pos - 1]]) ties = true;
    }
    return ranks;
}

template <typename T>
std::vector<double> as_double(const std::vector<T>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

ComparisonResult run_comparison(const std::string& batch_x, const std::string& batch_y, const ComparisonModels& m,
                                int games_per_round, std::uint64_t seed, double epsilon_greedy, int move_cap) {
    if (games_per_round < 1) throw std::invalid_argument("games per round must be >= 1");
    BoardConfig board = m.white_x.board();
    board.move_cap = move_cap;
    for (const auto* net : {&m.black_x, &m.white_y, &m.black_y})
        if (!net->board().same_board(board)) throw ConfigMismatch("compared models use different boards");

    ComparisonResult c;
    c.batch_x = batch_x;
    c.batch_y = batch_y;
    c.games_per_round = games_per_round;
    c.seed = seed;
    c.epsilon_greedy = epsilon_greedy;
    c.round1 = play_round(m.white_x, m.black_y, games_per_round, seed, epsilon_greedy, board);
    c.round2 = play_round(m.white_y, m.black_x, games_per_round, seed, epsilon_greedy, board);
    return c;
}

std::string comparison_to_json(const ComparisonResult& c) {
    json j = {{"batchX", c.batch_x},
              {"batchY", c.batch_y},
              {"gamesPerRound", c.games_per_round},
              {"seed", c.seed},
              {"epsilonGreedy", c.epsilon_greedy},
              {"round1", round_to_json(c.round1)},
              {"round2", round_to_json(c.round2)}};
    return j.dump(2) + "\n";
}

ComparisonResult comparison_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        ComparisonResult c;
        c.batch_x = j.at("batchX").get<std::string>();
        c.batch_y = j.at("batchY").get<std::string>();
        c.games_per_round = j.at("gamesPerRound").get<int>();
        c.seed = j.value("seed", std::uint64_t{0});
        c.epsilon_greedy = j.value("epsilonGreedy", 0.9);
        c.round1 = round_from_json(j.at("round1"));
        c.round2 = round_from_json(j.at("round2"));
        return c;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed comparison: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

double speed_ratio(const ComparisonResult& r) {
    const double a = r.round1.avg_moves;
    const double b = r.round2.avg_moves;
    if (!(a > 0.0) || !(b > 0.0)) throw DegenerateCounts("average moves must be positive");
    return std::max(a, b) / std::min(a, b);
}

double advantage_ratio_v1(const ComparisonResult& r) {
    if (r.round1.white_wins == 0 || r.round1.black_wins == 0 || r.round2.white_wins == 0 || r.round2.black_wins == 0)
        throw DegenerateCounts("a win count is zero");
    const double r1 = static_cast<double>(r.round1.white_wins) / r.round1.black_wins;
    const double r2 = static_cast<double>(r.round2.white_wins) / r.round2.black_wins;
    return std::max(r1 / r2, r2 / r1);
}

double advantage_ratio_v2(const ComparisonResult& r) {
    const int sx = r.round1.white_wins + r.round2.black_wins;
    const int sy = r.round2.white_wins + r.round1.black_wins;
    if (sx == 0 || sy == 0) throw DegenerateCounts("a batch won no games");
    return std::max(sx, sy) / static_cast<double>(std::min(sx, sy));
}

RatioReport ratio_report(const ComparisonResult& r) {
    RatioReport out;
    out.pair = r.batch_x + "-" + r.batch_y;
    out.draws = r.round1.draws + r.round2.draws;
    out.speed = normalized(r.round1.avg_moves, r.round2.avg_moves);
    if (!(r.round1.avg_moves > 0.0) || !(r.round2.avg_moves > 0.0)) out.speed = {1.0, true, true};

    if (r.round1.white_wins && r.round1.black_wins && r.round2.white_wins && r.round2.black_wins) {
        out.advantage_v1 = normalized(static_cast<double>(r.round1.white_wins) / r.round1.black_wins,
                                      static_cast<double>(r.round2.white_wins) / r.round2.black_wins);
    } else {
        out.advantage_v1 = {1.0, true, true};
    }
    const int sx = r.round1.white_wins + r.round2.black_wins;
    const int sy = r.round2.white_wins + r.round1.black_wins;
    if (sx && sy) out.advantage_v2 = normalized(sx, sy);
    else out.advantage_v2 = {1.0, true, sx >= sy};
    return out;
}

double round_display(double v, int digits) {
    const double scale = std::pow(10.0, digits);
    // Nudge by a few ulps so values such as 283.5 stored as 283.4999... still go up.
    const double scaled = v * scale;
    return std::copysign(std::floor(std::fabs(scaled) + 0.5 + 1e-9), scaled) / scale;
}

std::string ratio_scatter_csv(std::vector<RatioReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const RatioReport& l, const RatioReport& r) {
        if (l.speed.infinite != r.speed.infinite) return r.speed.infinite;
        return l.speed.value < r.speed.value;
    });
    std::ostringstream os;
    os << "index,pair,speedRatio,advantageV1,advantageV2\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        os << (i + 1) << ',' << r.pair << ',' << fixed2(r.speed) << ',' << fixed2(r.advantage_v1) << ','
           << fixed2(r.advantage_v2) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------

std::vector<RoundRobinCell> cells_from_comparisons(const std::vector<ComparisonResult>& comparisons) {
    std::vector<RoundRobinCell> cells;
    auto add = [&](const std::string& w, const std::string& b, const RoundResult& r) {
        for (const auto& c : cells)
            if (c.white == w && c.black == b) return;
        cells.push_back({w, b, r.white_wins - r.black_wins, r.avg_moves});
    };
    for (const auto& c : comparisons) {
        add(c.batch_x, c.batch_y, c.round1);
        add(c.batch_y, c.batch_x, c.round2);
    }
    return cells;
}

RoundRobinTable build_round_robin(const std::vector<std::string>& ids, const std::vector<RoundRobinCell>& cells) {
    const std::size_t k = ids.size();
    if (k < 2) throw IncompleteMatrix("a round robin needs at least two participants");
    RoundRobinTable t;
    t.participants = ids;
    t.net_wins.assign(k, std::vector<int>(k, 0));
    t.avg_moves.assign(k, std::vector<double>(k, 0.0));
    std::vector<std::vector<bool>> seen(k, std::vector<bool>(k, false));

    auto index_of = [&](const std::string& id) -> std::optional<std::size_t> {
        const auto it = std::find(ids.begin(), ids.end(), id);
        if (it == ids.end()) return std::nullopt;
        return static_cast<std::size_t>(it - ids.begin());
    };
    for (const auto& c : cells) {
        const auto w = index_of(c.white);
        const auto b = index_of(c.black);
        if (!w || !b || *w == *b || seen[*w][*b]) continue;
        t.net_wins[*w][*b] = c.net_wins;
        t.avg_moves[*w][*b] = c.avg_moves;
        seen[*w][*b] = true;
    }
    for (std::size_t w = 0; w < k; ++w)
        for (std::size_t b = 0; b < k; ++b)
            if (w != b && !seen[w][b]) throw IncompleteMatrix("missing cell W_" + ids[w] + " vs B_" + ids[b]);

    t.white_sums.assign(k, 0);
    t.black_sums.assign(k, 0);
    t.white_move_sums.assign(k, 0.0);
    t.black_move_sums.assign(k, 0.0);
    for (std::size_t w = 0; w < k; ++w) {
        for (std::size_t b = 0; b < k; ++b) {
            if (w == b) continue;
            t.white_sums[w] += t.net_wins[w][b];
            t.black_sums[b] += t.net_wins[w][b];
            t.white_move_sums[w] += t.avg_moves[w][b];
            t.black_move_sums[b] += t.avg_moves[w][b];
        }
    }
    // A black player's column sum is negative when it wins, so lower ranks better.
    t.white_ranks = rank(as_double(t.white_sums), true, ids, t.rank_ties);
    t.black_ranks = rank(as_double(t.black_sums), false, ids, t.rank_ties);
    t.white_move_ranks = rank(t.white_move_sums, false, ids, t.rank_ties);
    t.black_move_ranks = rank(t.black_move_sums, false, ids, t.rank_ties);

    t.totals.resize(k);
    t.avg_moves_per_batch.resize(k);
    t.avg_moves_display.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        t.totals[i] = t.white_sums[i] - t.black_sums[i];
        t.avg_moves_per_batch[i] = (t.white_move_sums[i] + t.black_move_sums[i]) / (2.0 * static_cast<double>(k - 1));
        t.avg_moves_display[i] = static_cast<long long>(round_display(t.avg_moves_per_batch[i], 0));
    }
    t.total_ranks = rank(as_double(t.totals), true, ids, t.rank_ties);
    t.avg_move_ranks = rank(t.avg_moves_per_batch, false, ids, t.rank_ties);
    return t;
}

std::string round_robin_csv(const RoundRobinTable& t) {
    std::ostringstream os;
    os << "batch,whiteSum,whiteRank,blackSum,blackRank,total,totalRank,whiteMovesSum,whiteMovesRank,"
          "blackMovesSum,blackMovesRank,avgMoves,avgMovesRank\n";
    for (std::size_t i = 0; i < t.participants.size(); ++i) {
        os << t.participants[i] << ',' << t.white_sums[i] << ',' << t.white_ranks[i] << ',' << t.black_sums[i] << ','
           << t.black_ranks[i] << ',' << t.totals[i] << ',' << t.total_ranks[i] << ','
           << format_number(t.white_move_sums[i]) << ',' << t.white_move_ranks[i] << ','
           << format_number(t.black_move_sums[i]) << ',' << t.black_move_ranks[i] << ',' << t.avg_moves_display[i]
           << ',' << t.avg_move_ranks[i] << '\n';
    }
    return os.str();
}

std::string round_robin_cells_csv(const RoundRobinTable& t) {
    std::ostringstream os;
    os << "white,black,netWins,avgMoves\n";
    for (std::size_t w = 0; w < t.participants.size(); ++w)
        for (std::size_t b = 0; b < t.participants.size(); ++b)
            if (w != b)
                os << t.participants[w] << ',' << t.participants[b] << ',' << t.net_wins[w][b] << ','
                   << format_number(t.avg_moves[w][b]) << '\n';
    return os.str();
}

std::vector<RoundRobinCell> parse_cells_csv(const std::string& text) {
    std::vector<RoundRobinCell> cells;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("white,", 0) == 0) continue;
        }
        std::istringstream row(line);
        RoundRobinCell c;
        std::string net, moves;
        if (!std::getline(row, c.white, ',') || !std::getline(row, c.black, ',') || !std::getline(row, net, ',') ||
            !std::getline(row, moves, ','))
            throw FormatError("bad cells row '" + line + "'");
        try {
            c.net_wins = std::stoi(net);
            c.avg_moves = std::stod(moves);
        } catch (const std::exception&) {
            throw FormatError("bad numbers in cells row '" + line + "'");
        }
        cells.push_back(std::move(c));
    }
    return cells;
}

}  // namespace baserace
