// baserace: train, replay, compare and serve from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 plan error, 3 replay divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "baserace/notation.h"
#include "baserace/orchestrator.h"
#include "baserace/play_service.h"
#include "baserace/tournament.h"

using namespace baserace;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kFailure = 1, kPlanError = 2, kDivergence = 3;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
}

void print_report(const PlanReport& r) {
    for (const auto& id : r.skipped) std::printf("skipped %s (already complete)\n", id.c_str());
    for (const auto& id : r.completed) std::printf("completed %s\n", id.c_str());
    if (!r.ok()) {
        std::fprintf(stderr, "batch %s failed: %s\n", r.failed_batch->c_str(), r.error.c_str());
        for (const auto& id : r.not_run) std::fprintf(stderr, "not run: %s\n", id.c_str());
    }
}

// Human at the white pieces on this terminal.
class TerminalHost final : public InteractiveHost {
public:
    MoveChannel& channel() override { return channel_; }
    void game_starting(const StageProgress& p, const GameState&) override {
        std::printf("\nbatch %s, stage %d, human game %d of %d\n", p.batch_id.c_str(), p.stage_index + 1,
                    p.hc_game_index + 1, p.hc_games_total);
    }
    void ply(const GameState& before, const Move& move, const MoveOutcome& out) override {
        if (before.side_to_move() == Player::Black) std::printf("computer plays %s\n", format_move(move).c_str());
        if (out.white_lost || out.black_lost)
            std::printf("captured: white lost %d, black lost %d\n", out.white_lost, out.black_lost);
    }
    void game_finished(const GameOutcome& o) override {
        std::printf("game over: %s (%s) after %d moves\n", std::string(to_string(o.winner)).c_str(),
                    std::string(to_string(o.reason)).c_str(), o.final_move_count);
    }
    void game_aborted() override { std::printf("game aborted; it will be replayed\n"); }

private:
    StreamChannel channel_{std::cin, std::cout};
};

int cmd_train(const std::string& plan_file, const std::string& out, bool resume, int jobs) {
    ExperimentPlan plan;
    try {
        plan = load_plan(plan_file);
        plan.execution_order();
    } catch (const PlanError& e) {
        std::fprintf(stderr, "plan error: %s\n", e.what());
        return kPlanError;
    }
    TerminalHost host;
    RunOptions opts;
    opts.resume = resume;
    opts.jobs = jobs;
    if (plan.has_interactive()) opts.host = &host;
    const auto report = run_plan(plan, out, opts);
    print_report(report);
    return report.ok() ? kOk : kFailure;
}

int cmd_replay(const std::string& log) {
    const auto records = read_records(log);
    int diverged = 0;
    for (const auto& r : records) {
        try {
            if (replay_record(r) != r.outcome) throw ReplayDivergence("outcome differs");
        } catch (const std::exception& e) {
            ++diverged;
            std::fprintf(stderr, "game %lld of batch %s: %s\n", static_cast<long long>(r.game_id), r.batch_id.c_str(),
                         e.what());
        }
    }
    std::printf("%zu games replayed, %d diverged\n", records.size(), diverged);
    return diverged == 0 ? kOk : kDivergence;
}

fs::path batch_dir(const std::string& runs, const std::string& batch) {
    const fs::path direct(batch);
    if (fs::is_directory(direct) && runs.empty()) return direct;
    return fs::path(runs.empty() ? "." : runs) / batch;
}

struct CompareOptions {
    std::string runs;
    int games = 1000;
    std::uint64_t seed = 1;
    double epsilon = 0.9;
    int move_cap = 0;  // 0: the batches' own cap
};

ComparisonResult compare(const std::string& x, const std::string& y, const CompareOptions& o) {
    const auto dir_x = batch_dir(o.runs, x), dir_y = batch_dir(o.runs, y);
    const BoardConfig board = load_checkpoint(dir_x / "white.vnet.json").board();
    auto [wx, bx] = load_batch_models(dir_x, board);
    auto [wy, by] = load_batch_models(dir_y, board);
    ComparisonModels models{std::move(wx), std::move(bx), std::move(wy), std::move(by)};
    return run_comparison(fs::path(x).filename().string(), fs::path(y).filename().string(), models, o.games, o.seed,
                          o.epsilon, o.move_cap > 0 ? o.move_cap : board.move_cap);
}

void print_comparison(const ComparisonResult& c) {
    auto line = [](const char* name, const RoundResult& r) {
        std::printf("%s: white %d, black %d, draws %d, avg moves %.2f\n", name, r.white_wins, r.black_wins, r.draws,
                    r.avg_moves);
    };
    line(("round 1 (W_" + c.batch_x + " vs B_" + c.batch_y + ")").c_str(), c.round1);
    line(("round 2 (W_" + c.batch_y + " vs B_" + c.batch_x + ")").c_str(), c.round2);
    const auto r = ratio_report(c);
    auto show = [](const Ratio& q) {
        if (q.infinite) return std::string("inf");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", round_display(q.value, 2));
        return std::string(buf);
    };
    std::printf("speedRatio %s, advantageRatioV1 %s, advantageRatioV2 %s\n", show(r.speed).c_str(),
                show(r.advantage_v1).c_str(), show(r.advantage_v2).c_str());
    if (r.draws) std::printf("WARNING: %d drawn games (move cap) counted in neither win column\n", r.draws);
}

std::vector<std::string> split_ids(const std::string& csv) {
    std::vector<std::string> ids;
    std::stringstream s(csv);
    for (std::string id; std::getline(s, id, ',');)
        if (!id.empty()) ids.push_back(id);
    return ids;
}

int cmd_round_robin(const std::string& batches, const std::string& out, const std::string& cells_file,
                    const CompareOptions& o) {
    const auto ids = split_ids(batches);
    std::vector<RoundRobinCell> cells;
    if (!cells_file.empty()) {
        cells = parse_cells_csv(slurp(cells_file));
    } else {
        std::vector<ComparisonResult> comparisons;
        std::string pairs;
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                comparisons.push_back(compare(ids[i], ids[j], o));
                const std::string name = "comparisons/" + ids[i] + "-" + ids[j] + ".json";
                write_file(fs::path(out) / name, comparison_to_json(comparisons.back()) + "\n");
                pairs += name + "\n";
            }
        // Ready for `metrics ratios --pairs`.
        write_file(fs::path(out) / "pairs.txt", pairs);
        cells = cells_from_comparisons(comparisons);
    }
    const auto table = build_round_robin(ids, cells);
    write_file(fs::path(out) / "roundrobin.csv", round_robin_csv(table));
    write_file(fs::path(out) / "cells.csv", round_robin_cells_csv(table));
    std::fputs(round_robin_csv(table).c_str(), stdout);
    if (table.rank_ties) std::printf("note: some ranks were tied and broken by batch id\n");
    return kOk;
}

int cmd_ratios(const std::string& pairs_file, const std::string& out) {
    // One comparison.json path per line, relative to the pairs file.
    const fs::path base = fs::path(pairs_file).parent_path();
    std::vector<RatioReport> reports;
    std::istringstream lines(slurp(pairs_file));
    int draws = 0;
    for (std::string line; std::getline(lines, line);) {
        if (line.empty() || line[0] == '#') continue;
        const fs::path p = fs::path(line).is_absolute() ? fs::path(line) : base / line;
        reports.push_back(ratio_report(comparison_from_json(slurp(p))));
        draws += reports.back().draws;
    }
    const auto csv = ratio_scatter_csv(reports);
    if (!out.empty()) write_file(out, csv);
    std::fputs(csv.c_str(), stdout);
    if (draws) std::printf("WARNING: %d drawn games across these comparisons\n", draws);
    return kOk;
}

int cmd_serve(const std::string& plan_file, const std::string& out, const std::string& bind, bool resume) {
    ExperimentPlan plan;
    try {
        plan = load_plan(plan_file);
        plan.execution_order();
        if (!plan.has_interactive()) throw NoInteractiveStages();
    } catch (const PlanError& e) {
        std::fprintf(stderr, "plan error: %s\n", e.what());
        return kPlanError;
    }
    const auto report = serve_plan(
        plan, out, bind,
        [&](int port) {
            const auto host = bind.substr(0, bind.rfind(':'));
            std::printf("listening on %s:%d\n", host.c_str(), port);
            std::fflush(stdout);
        },
        resume);
    print_report(report);
    return report.ok() ? kOk : kFailure;
}

// Stdin client for a running `serve`.
int cmd_play(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("--connect expects host:port");
    LineClient client(address.substr(0, colon), std::stoi(address.substr(colon + 1)));
    client.send({{"type", "hello"}, {"version", kProtocolVersion}});
    for (;;) {
        auto m = client.receive(24 * 3600 * 1000);
        if (!m) {
            std::printf("connection closed\n");
            return kOk;
        }
        const std::string type = (*m)["type"];
        if (type == "state") {
            BoardConfig c;
            c.n = (*m)["n"];
            c.a = (*m)["a"];
            c.beta = (*m)["beta"];
            std::vector<std::pair<CellCoord, Player>> pawns;
            for (const auto& o : (*m)["occupancy"])
                pawns.emplace_back(parse_cell(o["cell"].get<std::string>()),
                                   o["player"] == "white" ? Player::White : Player::Black);
            const auto s = GameState::from_parts(c, pawns, (*m)["reserves"]["white"], (*m)["reserves"]["black"],
                                                 (*m)["sideToMove"] == "white" ? Player::White : Player::Black,
                                                 (*m)["moveCount"]);
            if (m->contains("lastMove"))
                std::printf("%s played %s\n", (*m)["lastMover"].get<std::string>().c_str(),
                            (*m)["lastMove"].get<std::string>().c_str());
            std::fputs(render_board(s).c_str(), stdout);
        } else if (type == "yourTurn") {
            std::string line;
            do {
                std::printf("your move> ");
                std::fflush(stdout);
                if (!std::getline(std::cin, line)) return kOk;
            } while (line.find_first_not_of(" \t\r") == std::string::npos);
            client.send({{"type", "move"}, {"version", kProtocolVersion}, {"move", line}});
        } else if (type == "moveResult" && (*m)["status"] == "rejected") {
            std::printf("rejected: %s\n", (*m)["rule"].get<std::string>().c_str());
        } else if (type == "error") {
            std::printf("error %s: %s\n", (*m)["code"].get<std::string>().c_str(),
                        (*m)["message"].get<std::string>().c_str());
        } else if (type == "gameOver") {
            std::printf("game over: %s wins (%s) after %d moves\n", (*m)["winner"].get<std::string>().c_str(),
                        (*m)["reason"].get<std::string>().c_str(), (*m)["moveCount"].get<int>());
        } else if (type == "progress") {
            std::printf("[%s stage %d: human game %d/%d, aborted %d]\n", (*m)["batchId"].get<std::string>().c_str(),
                        (*m)["stageIndex"].get<int>() + 1, (*m)["hcGameIndex"].get<int>(),
                        (*m)["hcGamesTotal"].get<int>(), (*m)["abortedGames"].get<int>());
            if ((*m)["complete"] == true) return kOk;
        }
        std::fflush(stdout);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Base-race training and evaluation"};
    app.require_subcommand(1);

    std::string plan_file, out, log, bind = "127.0.0.1:7420", address;
    bool resume = false;
    int jobs = 1;

    auto* train = app.add_subcommand("train", "Run an experiment plan");
    train->add_option("--plan", plan_file, "Plan JSON")->required();
    train->add_option("--out", out, "Output root")->required();
    train->add_flag("--resume", resume, "Skip batches whose outputs verify");
    train->add_option("--jobs", jobs, "Independent batches run in parallel")->check(CLI::PositiveNumber);

    auto* replay = app.add_subcommand("replay", "Re-validate a games.jsonl log");
    replay->add_option("--log", log, "games.jsonl")->required()->check(CLI::ExistingFile);

    CompareOptions co;
    std::string white, black;
    auto add_compare = [&](CLI::App* c) {
        c->add_option("--runs", co.runs, "Directory holding the batch directories");
        c->add_option("--games", co.games, "Games per round")->check(CLI::PositiveNumber);
        c->add_option("--seed", co.seed, "Comparison seed");
        c->add_option("--epsilon", co.epsilon, "Greedy probability of the frozen learners")->check(CLI::Range(0.0, 1.0));
        c->add_option("--move-cap", co.move_cap, "Override the batches' move cap");
    };
    auto* tournament = app.add_subcommand("tournament", "Compare two trained batches");
    tournament->add_option("--white", white, "Batch x (white in round 1)")->required();
    tournament->add_option("--black", black, "Batch y (black in round 1)")->required();
    tournament->add_option("--out", out, "Directory for comparison.json")->required();
    add_compare(tournament);

    auto* metrics = app.add_subcommand("metrics", "Aggregate tournament results");
    metrics->require_subcommand(1);
    std::string batches, cells, pairs;
    auto* rr = metrics->add_subcommand("round-robin", "Round-robin tables over a set of batches");
    rr->add_option("--batches", batches, "Comma-separated batch ids")->required();
    rr->add_option("--out", out, "Directory for roundrobin.csv and cells.csv")->required();
    rr->add_option("--cells", cells, "Use these white,black,netWins,avgMoves cells instead of playing")
        ->check(CLI::ExistingFile);
    add_compare(rr);
    auto* ratios = metrics->add_subcommand("ratios", "Speed and advantage ratios, sorted by speed");
    ratios->add_option("--pairs", pairs, "File listing comparison.json paths")->required()->check(CLI::ExistingFile);
    ratios->add_option("--out", out, "Also write the CSV to this file");

    auto* serve = app.add_subcommand("serve", "Run a plan with interactive HC games over a local socket");
    serve->add_option("--plan", plan_file, "Plan JSON")->required();
    serve->add_option("--out", out, "Output root")->required();
    serve->add_option("--bind", bind, "host:port (port 0 picks one)");
    serve->add_flag("--resume", resume, "Skip batches whose outputs verify");

    auto* play = app.add_subcommand("play", "Terminal client for a running serve");
    play->add_option("--connect", address, "host:port")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(plan_file, out, resume, jobs);
        if (*replay) return cmd_replay(log);
        if (*tournament) {
            const auto c = compare(white, black, co);
            write_file(fs::path(out) / "comparison.json", comparison_to_json(c) + "\n");
            print_comparison(c);
            return kOk;
        }
        if (*rr) return cmd_round_robin(batches, out, cells, co);
        if (*ratios) return cmd_ratios(pairs, out);
        if (*serve) return cmd_serve(plan_file, out, bind, resume);
        if (*play) return cmd_play(address);
    } catch (const PlanError& e) {
        std::fprintf(stderr, "plan error: %s\n", e.what());
        return kPlanError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
    return kFailure;
}
