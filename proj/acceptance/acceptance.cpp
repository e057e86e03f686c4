// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "baserace/orchestrator.h"
#include "baserace/td.h"
#include "baserace/tournament.h"
#include "desk_plan.h"
#include "oracle.h"
#include "golden_tables.h"

using namespace baserace;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const fs::path& root, const std::string& name) {
    auto d = root / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

BoardConfig small_board() {
    BoardConfig c;
    c.n = 6;
    c.a = 1;
    c.beta = 3;
    return c;
}

// 1 ------------------------------------------------------------------------

Verdict metric_goldens() {
    const auto c = golden::batches_9_12();
    const double speed = round_display(speed_ratio(c), 2);
    const double v1 = round_display(advantage_ratio_v1(c), 2);
    const double v2 = round_display(advantage_ratio_v2(c), 2);
    auto literal = c;
    literal.round1.avg_moves = 211;
    literal.round2.avg_moves = 97;
    const bool ok = speed == 2.17 && v1 == 6.07 && v2 == 1.93;
    return {ok, fmt("speed %.2f (avg %.3f/%.3f; 211/97 alone gives %.4f), V1 %.2f, V2 %.2f", speed,
                    c.round1.avg_moves, c.round2.avg_moves, speed_ratio(literal), v1, v2)};
}

// 2 ------------------------------------------------------------------------

Verdict round_robin_goldens() {
    const auto t = build_round_robin(golden::kBatches, golden::round_robin_cells());
    const bool ok = t.white_sums == std::vector<int>{-238, -182, -194, -1204} &&
                    t.white_ranks == std::vector<int>{3, 1, 2, 4} &&
                    t.black_sums == std::vector<int>{-1244, -894, 1032, -712} &&
                    t.black_ranks == std::vector<int>{1, 2, 4, 3} &&
                    t.white_move_sums == std::vector<double>{764, 524, 1936, 922} &&
                    t.white_move_ranks == std::vector<int>{2, 1, 4, 3} &&
                    t.black_move_sums == std::vector<double>{937, 1192, 691, 1326} &&
                    t.black_move_ranks == std::vector<int>{2, 3, 1, 4} &&
                    t.totals == std::vector<int>{1006, 712, -1226, -492} &&
                    t.total_ranks == std::vector<int>{1, 2, 4, 3} &&
                    t.avg_moves_display == std::vector<long long>{284, 286, 438, 375} &&
                    t.avg_move_ranks == std::vector<int>{1, 2, 4, 3} && !t.rank_ties;
    return {ok, fmt("totals %d/%d/%d/%d, avg moves %lld/%lld/%lld/%lld", t.totals[0], t.totals[1], t.totals[2],
                    t.totals[3], t.avg_moves_display[0], t.avg_moves_display[1], t.avg_moves_display[2],
                    t.avg_moves_display[3])};
}

// 3 ------------------------------------------------------------------------

Verdict rules_oracle() {
    std::vector<GameState> frontier{initial_state(small_board())};
    int checked = 0, discrepancies = 0;
    for (int ply = 0; ply <= 3; ++ply) {
        std::vector<GameState> next;
        for (const auto& s : frontier) {
            if (s.terminal()) continue;
            auto got = legal_moves(s);
            std::sort(got.begin(), got.end());
            const auto want = oracle::legal_moves(s);
            ++checked;
            if (got != want) ++discrepancies;
            // Expand through the union so a move missing on either side is still explored.
            std::vector<Move> all = got;
            for (const auto& m : want)
                if (!std::binary_search(got.begin(), got.end(), m)) all.push_back(m);
            if (ply < 3)
                for (const auto& m : all)
                    if (!s.check(m)) next.push_back(apply_move(s, m).next);
        }
        frontier = std::move(next);
    }
    return {checked > 0 && discrepancies == 0, fmt("%d states within 3 plies, %d discrepancies", checked, discrepancies)};
}

// 4 ------------------------------------------------------------------------

Verdict gradients() {
    const BoardConfig board = small_board();
    const int inputs = NetworkTopology::for_board(board).input;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-6;
    double worst = 0.0;
    long compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto net = ValueNetwork::init(board, Player::White, rng(), 1.0);
        std::vector<double> x(inputs);
        for (auto& v : x) v = u(rng);
        Gradient g;
        net.value_and_gradient(x, g);
        auto check = [&](std::span<double> w, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double keep = w[i];
                w[i] = keep + h;
                const double up = net.value(x);
                w[i] = keep - h;
                const double down = net.value(x);
                w[i] = keep;
                const double fd = (up - down) / (2 * h);
                const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
                worst = std::max(worst, std::abs(fd - grad[i]) / scale);
                ++compared;
            }
        };
        check(net.input_to_hidden(), g.input_to_hidden);
        check(net.hidden_to_output(), g.hidden_to_output);
    }

    // lambda = 0 against a hand-written one-step TD update.
    int mismatches = 0, steps = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto net = ValueNetwork::init(board, Player::Black, rng(), 0.5);
        auto ref = net;
        TdParams params;
        params.lambda = 0.0;
        params.alpha = 0.05;
        TdLearner learner(net, params);
        std::vector<double> x0(inputs);
        for (auto& v : x0) v = u(rng);
        learner.observe(x0, 0.0);
        for (int step = 0; step < 5; ++step) {
            std::vector<double> x1(inputs);
            for (auto& v : x1) v = u(rng);
            const double r = 0.1 * step - 0.2;
            Gradient g;
            const double v0 = ref.value_and_gradient(x0, g);
            const double scale = params.alpha * (r + params.gamma * ref.value(x1) - v0);
            auto w1 = ref.input_to_hidden();
            for (std::size_t i = 0; i < w1.size(); ++i) w1[i] += scale * g.input_to_hidden[i];
            auto w2 = ref.hidden_to_output();
            for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += scale * g.hidden_to_output[i];
            learner.observe(x1, r);
            ++steps;
            if (!(net == ref)) ++mismatches;
            x0 = std::move(x1);
        }
    }
    return {worst <= 1e-6 && mismatches == 0,
            fmt("%ld weights, worst relative error %.2e; lambda=0 %d/%d steps bit-identical", compared, worst,
                steps - mismatches, steps)};
}

// 5 ------------------------------------------------------------------------

Verdict counts_and_lineage(const fs::path& work) {
    const auto start = std::chrono::steady_clock::now();
    const auto out = fresh_dir(work, "desk");
    const auto plan = desk::plan();
    const auto report = run_plan(plan, out);
    if (!report.ok()) return {false, "plan failed: " + report.error};

    const auto hc = read_records(out / "hc" / "games.jsonl");
    const auto cc = read_records(out / "cc" / "games.jsonl");
    const auto child = read_records(out / "cc-child" / "games.jsonl");
    const auto summary = nlohmann::json::parse(slurp(out / "cc-child" / "summary.json"));
    const bool lineage = summary["initialCheckpoints"]["white"] == file_checksum(out / "hc" / "white.vnet.json") &&
                         summary["initialCheckpoints"]["black"] == file_checksum(out / "hc" / "black.vnet.json");
    // Re-running the child in place is deterministic and exposes its starting networks.
    const auto rerun = run_batch(plan, plan.batches[1], out);
    const bool in_memory = rerun.white_initial == load_checkpoint(out / "hc" / "white.vnet.json") &&
                           rerun.black_initial == load_checkpoint(out / "hc" / "black.vnet.json");

    int diverged = 0;
    for (const auto* recs : {&hc, &cc, &child})
        for (const auto& r : *recs) {
            try {
                if (replay_record(r) != r.outcome) ++diverged;
            } catch (const std::exception&) {
                ++diverged;
            }
        }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = hc.size() == 110 && cc.size() == 100 && child.size() == 100 && lineage && diverged == 0 &&
                    in_memory && secs < 120;
    return {ok, fmt("HC %zu games, CC %zu, child %zu, lineage %s, %d divergent replays, %.1fs", hc.size(), cc.size(),
                    child.size(), lineage && in_memory ? "bit-identical" : "MISMATCH", diverged, secs)};
}

// 6 and 7 share one pinned-seed comparison -------------------------------

constexpr std::uint64_t kPinnedSeed = 2024;

struct LearningRun {
    ComparisonResult comparison;
    double seconds = 0;
};

LearningRun learning_run(const fs::path& work) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentPlan plan;
    plan.board = small_board();
    plan.seed = kPinnedSeed;
    BatchSpec b;
    b.id = "trained";
    b.kind = BatchKind::CC;
    b.stages = 20;
    b.cc_games_per_stage = 100;
    plan.batches = {b};
    RunOptions opts;
    opts.keep_records = false;
    auto r = run_batch(plan, b, fresh_dir(work, "learning"), opts);
    // The batch's own starting networks are the tabula-rasa opponents.
    ComparisonModels models{r.white_final, r.black_final, r.white_initial, r.black_initial};
    LearningRun run;
    run.comparison = run_comparison("trained", "tabula-rasa", models, 200, kPinnedSeed, 0.9, plan.board.move_cap);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

Verdict learning_property(const LearningRun& run) {
    const auto& c = run.comparison;
    // Black models: trained black plays round 2, tabula-rasa black round 1.
    const int trained_black = c.round2.black_wins, fresh_black = c.round1.black_wins;
    const int trained = c.round1.white_wins + c.round2.black_wins;
    const int fresh = c.round2.white_wins + c.round1.black_wins;
    const double black_share = trained_black + fresh_black ? double(trained_black) / (trained_black + fresh_black) : 0;
    const double share = trained + fresh ? double(trained) / (trained + fresh) : 0;
    return {black_share >= 0.55 && share >= 0.55,
            fmt("seed %llu, 2000 CC games: trained black won %.3f of black wins, trained batch %.3f of %d decisive "
                "games (%.1fs)",
                static_cast<unsigned long long>(kPinnedSeed), black_share, share, trained + fresh, run.seconds)};
}

Verdict speed_win_association(const LearningRun& run) {
    const auto& c = run.comparison;
    // A shutout makes V2 infinite, which still counts as > 1.
    const auto r = ratio_report(c);
    const auto show = [](const Ratio& q) { return q.infinite ? std::string("inf") : fmt("%.4f", q.value); };
    const bool speed_ok = !r.speed.infinite && r.speed.value > 1.0;
    const bool v2_ok = r.advantage_v2.infinite || r.advantage_v2.value > 1.0;
    return {speed_ok && v2_ok, "speedRatio " + show(r.speed) + fmt(" (round averages %.2f/%.2f)", c.round1.avg_moves,
                                                                      c.round2.avg_moves) +
                                   ", advantageRatioV2 " + show(r.advantage_v2) +
                                   fmt(" (%d/%d wins)", c.round1.white_wins + c.round2.black_wins,
                                       c.round2.white_wins + c.round1.black_wins)};
}

// 8 ------------------------------------------------------------------------

Verdict determinism(const fs::path& work) {
    const auto a = fresh_dir(work, "det-a"), b = fresh_dir(work, "det-b");
    const auto plan = desk::plan(99);
    RunOptions parallel;
    parallel.jobs = 2;
    if (!run_plan(plan, a).ok() || !run_plan(plan, b, parallel).ok()) return {false, "plan failed"};
    int files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto other = b / fs::relative(e.path(), a);
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
    int extra = 0;
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) ++extra;
    return {files > 0 && differing == 0 && extra == 0,
            fmt("%d files compared across two runs (jobs 1 and 2), %d differ, %d unmatched", files, differing, extra)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::string work = (fs::temp_directory_path() / "baserace-acceptance").string();
    std::vector<int> only;
    app.add_option("--work-dir", work, "Scratch directory for plan outputs");
    app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(work);

    std::optional<LearningRun> learning;
    auto learned = [&]() -> const LearningRun& {
        if (!learning) learning = learning_run(work);
        return *learning;
    };

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"metric golden values", metric_goldens},
        {"round-robin golden tables", round_robin_goldens},
        {"rules oracle equivalence", rules_oracle},
        {"gradient check and one-step TD", gradients},
        {"desk-plan counts, lineage, replay", [&] { return counts_and_lineage(work); }},
        {"trained black beats tabula rasa", [&] { return learning_property(learned()); }},
        {"speed-win association", [&] { return speed_win_association(learned()); }},
        {"byte-identical reruns", [&] { return determinism(work); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::printf("criterion %d %s: %s -- %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
