#include "baserace/orchestrator.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace baserace {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPlanVersion = 1;

std::string_view kind_name(BatchKind k) {
    switch (k) {
        case BatchKind::CC: return "CC";
        case BatchKind::HC: return "HC";
        case BatchKind::HC1: return "HC1";
    }
    return "?";
}

BatchKind kind_from(const std::string& s) {
    if (s == "CC") return BatchKind::CC;
    if (s == "HC") return BatchKind::HC;
    if (s == "HC1") return BatchKind::HC1;
    throw PlanError("unknown batch kind '" + s + "'");
}

std::string_view human_name(HumanPolicy h) {
    switch (h) {
        case HumanPolicy::None: return "none";
        case HumanPolicy::Policy1: return "policy1";
        case HumanPolicy::Policy2: return "policy2";
        case HumanPolicy::Interactive: return "interactive";
    }
    return "?";
}

HumanPolicy human_from(const std::string& s) {
    if (s == "none") return HumanPolicy::None;
    if (s == "policy1") return HumanPolicy::Policy1;
    if (s == "policy2") return HumanPolicy::Policy2;
    if (s == "interactive") return HumanPolicy::Interactive;
    throw PlanError("unknown humanAgent '" + s + "'");
}

json init_to_json(const ModelInit& m) {
    if (m.kind == ModelInit::Kind::FromBatch) return {{"fromBatch", m.batch}};
    if (m.seed) return {{"tabulaRasa", *m.seed}};
    return "tabulaRasa";
}

ModelInit init_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "tabulaRasa") throw PlanError("model init must be \"tabulaRasa\" or an object");
        return ModelInit::tabula_rasa();
    }
    if (j.contains("fromBatch")) return ModelInit::from_batch(j.at("fromBatch").get<std::string>());
    if (j.contains("tabulaRasa")) {
        const auto& s = j.at("tabulaRasa");
        if (s.is_null()) return ModelInit::tabula_rasa();
        return ModelInit::tabula_rasa(s.get<std::uint64_t>());
    }
    throw PlanError("model init needs 'tabulaRasa' or 'fromBatch'");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed for " + p.string());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

int BatchSpec::default_hc_games(BatchKind kind) {
    switch (kind) {
        case BatchKind::CC: return 0;
        case BatchKind::HC: return 10;
        case BatchKind::HC1: return 1;
    }
    return 0;
}

std::vector<std::string> BatchSpec::parents() const {
    std::vector<std::string> out;
    for (const auto* m : {&white_init, &black_init})
        if (m->kind == ModelInit::Kind::FromBatch && std::find(out.begin(), out.end(), m->batch) == out.end())
            out.push_back(m->batch);
    return out;
}

void BatchSpec::validate() const {
    if (id.empty()) throw PlanError("batch id must not be empty");
    if (id.find_first_of("/\\") != std::string::npos || id == "." || id == "..")
        throw PlanError("batch id '" + id + "' is not a valid directory name");
    if (stages < 0 || cc_games_per_stage < 0 || hc_games_per_stage < 0)
        throw PlanError("batch '" + id + "': game counts must be non-negative");
    if (kind == BatchKind::CC && hc_games_per_stage != 0)
        throw PlanError("batch '" + id + "': CC batches have no HC games");
    if (kind != BatchKind::CC && human == HumanPolicy::None)
        throw PlanError("batch '" + id + "': humanAgent is required for HC batches");
}

const BatchSpec& ExperimentPlan::batch(const std::string& id) const {
    for (const auto& b : batches)
        if (b.id == id) return b;
    throw MissingDependency("no batch with id '" + id + "'");
}

std::vector<std::string> ExperimentPlan::execution_order() const {
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        if (!position.emplace(batches[i].id, i).second) throw PlanError("duplicate batch id '" + batches[i].id + "'");
    }
    for (const auto& b : batches)
        for (const auto& p : b.parents())
            if (!position.count(p)) throw MissingDependency("batch '" + b.id + "' depends on unknown batch '" + p + "'");

    std::vector<std::string> order;
    std::set<std::string> done;
    while (order.size() < batches.size()) {
        bool progressed = false;
        for (const auto& b : batches) {
            if (done.count(b.id)) continue;
            const auto parents = b.parents();
            if (std::all_of(parents.begin(), parents.end(), [&](const std::string& p) { return done.count(p) > 0; })) {
                order.push_back(b.id);
                done.insert(b.id);
                progressed = true;
            }
        }
        if (!progressed) throw CycleDetected("batch lineage contains a cycle");
    }
    return order;
}

bool ExperimentPlan::has_interactive() const {
    return std::any_of(batches.begin(), batches.end(), [](const BatchSpec& b) {
        return b.human == HumanPolicy::Interactive && b.hc_games_total() > 0;
    });
}

void ExperimentPlan::validate() const {
    try {
        board.validate();
        td.validate();
    } catch (const std::invalid_argument& e) {
        throw PlanError(e.what());
    }
    if (epsilon_schedule && epsilon_schedule->games < 1) throw PlanError("epsilonSchedule.games must be >= 1");
    for (const auto& b : batches) b.validate();
    execution_order();
}

ExperimentPlan plan_from_json(const std::string& text) {
    ExperimentPlan plan;
    try {
        const json j = json::parse(text);
        if (j.value("formatVersion", kPlanVersion) != kPlanVersion) throw PlanError("unsupported plan formatVersion");
        plan.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("board")) {
            const auto& b = j.at("board");
            plan.board.n = b.value("n", plan.board.n);
            plan.board.a = b.value("a", plan.board.a);
            plan.board.beta = b.value("beta", plan.board.beta);
            plan.board.move_cap = b.value("moveCap", plan.board.move_cap);
        }
        if (j.contains("td")) {
            const auto& t = j.at("td");
            plan.td.lambda = t.value("lambda", plan.td.lambda);
            plan.td.alpha = t.value("alpha", plan.td.alpha);
            plan.td.gamma = t.value("gamma", plan.td.gamma);
            plan.td.epsilon_greedy = t.value("epsilonGreedy", plan.td.epsilon_greedy);
            if (t.contains("epsilonSchedule")) {
                const auto& s = t.at("epsilonSchedule");
                plan.epsilon_schedule = EpsilonSchedule{s.at("final").get<double>(), s.at("games").get<int>()};
            }
        }
        if (j.contains("reward")) {
            const auto& r = j.at("reward");
            plan.reward.win_credit = r.value("win", plan.reward.win_credit);
            plan.reward.loss_credit = r.value("loss", plan.reward.loss_credit);
        }
        for (const auto& jb : j.value("batches", json::array())) {
            BatchSpec b;
            b.id = jb.at("id").get<std::string>();
            b.kind = kind_from(jb.at("kind").get<std::string>());
            b.stages = jb.value("stages", b.stages);
            b.cc_games_per_stage = jb.value("ccGamesPerStage", b.cc_games_per_stage);
            b.hc_games_per_stage = jb.value("hcGamesPerStage", BatchSpec::default_hc_games(b.kind));
            b.human = human_from(jb.value("humanAgent", std::string("none")));
            b.white_init = init_from_json(jb.value("whiteInit", json("tabulaRasa")));
            b.black_init = init_from_json(jb.value("blackInit", json("tabulaRasa")));
            if (jb.contains("seed")) b.seed = jb.at("seed").get<std::uint64_t>();
            b.hc_first = jb.value("hcFirst", true);
            plan.batches.push_back(std::move(b));
        }
    } catch (const json::exception& e) {
        throw PlanError(std::string("malformed plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

std::string plan_to_json(const ExperimentPlan& plan) {
    json j;
    j["formatVersion"] = kPlanVersion;
    j["seed"] = plan.seed;
    j["board"] = {{"n", plan.board.n}, {"a", plan.board.a}, {"beta", plan.board.beta}, {"moveCap", plan.board.move_cap}};
    j["td"] = {{"lambda", plan.td.lambda},
               {"alpha", plan.td.alpha},
               {"gamma", plan.td.gamma},
               {"epsilonGreedy", plan.td.epsilon_greedy}};
    if (plan.epsilon_schedule)
        j["td"]["epsilonSchedule"] = {{"final", plan.epsilon_schedule->final_value},
                                      {"games", plan.epsilon_schedule->games}};
    j["reward"] = {{"win", plan.reward.win_credit}, {"loss", plan.reward.loss_credit}};
    j["batches"] = json::array();
    for (const auto& b : plan.batches) {
        json jb = {{"id", b.id},
                   {"kind", kind_name(b.kind)},
                   {"stages", b.stages},
                   {"ccGamesPerStage", b.cc_games_per_stage},
                   {"hcGamesPerStage", b.hc_games_per_stage},
                   {"humanAgent", human_name(b.human)},
                   {"whiteInit", init_to_json(b.white_init)},
                   {"blackInit", init_to_json(b.black_init)},
                   {"hcFirst", b.hc_first}};
        if (b.seed) jb["seed"] = *b.seed;
        j["batches"].push_back(std::move(jb));
    }
    return j.dump(2) + "\n";
}

ExperimentPlan load_plan(const fs::path& path) { return plan_from_json(read_file(path)); }

// ---------------------------------------------------------------------------

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string file_checksum(const fs::path& path) { return hex64(fnv1a(read_file(path))); }

std::uint64_t batch_seed(const ExperimentPlan& plan, const BatchSpec& spec) {
    if (spec.seed) return *spec.seed;
    return split_seed(plan.seed, fnv1a(spec.id));
}

namespace {

constexpr std::uint64_t kWhiteInitStream = 0x5748495445ULL;  // "WHITE"
constexpr std::uint64_t kBlackInitStream = 0x424c41434bULL;  // "BLACK"

ValueNetwork initial_network(const ExperimentPlan& plan, const BatchSpec& spec, const ModelInit& init, Player owner,
                             const fs::path& out_root) {
    if (init.kind == ModelInit::Kind::FromBatch) {
        const fs::path p = out_root / init.batch / (owner == Player::White ? "white.vnet.json" : "black.vnet.json");
        if (!fs::exists(p))
            throw MissingDependency("batch '" + spec.id + "' needs " + p.string() + ", which has not been produced");
        return load_checkpoint(p, plan.board);
    }
    const std::uint64_t seed =
        init.seed.value_or(split_seed(batch_seed(plan, spec), owner == Player::White ? kWhiteInitStream : kBlackInitStream));
    return ValueNetwork::init(plan.board, owner, seed);
}

double scheduled_epsilon(const ExperimentPlan& plan, int cc_games_done) {
    if (!plan.epsilon_schedule) return plan.td.epsilon_greedy;
    const double t = std::min(1.0, static_cast<double>(cc_games_done) / plan.epsilon_schedule->games);
    return plan.td.epsilon_greedy + (plan.epsilon_schedule->final_value - plan.td.epsilon_greedy) * t;
}

struct Tally {
    int white = 0, black = 0, draws = 0;
    long long plies = 0;
    int games = 0;
    void add(const GameOutcome& o) {
        ++games;
        plies += o.final_move_count;
        if (o.winner == Winner::White) ++white;
        else if (o.winner == Winner::Black) ++black;
        else ++draws;
    }
    json to_json() const {
        return {{"games", games},
                {"whiteWins", white},
                {"blackWins", black},
                {"draws", draws},
                {"avgMoves", games ? static_cast<double>(plies) / games : 0.0}};
    }
};

}  // namespace

bool batch_complete(const fs::path& dir) {
    const fs::path summary = dir / "summary.json";
    if (!fs::exists(summary)) return false;
    try {
        const json j = json::parse(read_file(summary));
        const auto& sums = j.at("checksums");
        for (const auto& [name, value] : sums.items()) {
            if (!fs::exists(dir / name) || file_checksum(dir / name) != value.get<std::string>()) return false;
        }
        return sums.size() >= 3;
    } catch (const std::exception&) {
        return false;
    }
}

BatchResult run_batch(const ExperimentPlan& plan, const BatchSpec& spec, const fs::path& out_root,
                      const RunOptions& options) {
    spec.validate();
    const fs::path dir = out_root / spec.id;

    if (options.resume && batch_complete(dir)) {
        auto w = load_checkpoint(dir / "white.vnet.json", plan.board);
        auto b = load_checkpoint(dir / "black.vnet.json", plan.board);
        BatchResult r{spec.id, w, b, w, b, {}, 0, true};
        if (options.keep_records) r.records = read_records(dir / "games.jsonl");
        return r;
    }
    if (spec.human == HumanPolicy::Interactive && spec.hc_games_total() > 0 && !options.host)
        throw PlanError("batch '" + spec.id + "' is interactive but no interactive host is attached");

    const auto white_net = std::make_shared<ValueNetwork>(initial_network(plan, spec, spec.white_init, Player::White, out_root));
    const auto black_net = std::make_shared<ValueNetwork>(initial_network(plan, spec, spec.black_init, Player::Black, out_root));
    BatchResult result{spec.id, *white_net, *black_net, *white_net, *black_net, {}, 0, false};

    fs::create_directories(dir);
    fs::remove(dir / "summary.json");
    std::ofstream log(dir / "games.jsonl", std::ios::binary | std::ios::trunc);
    if (!log) throw IoError("cannot write " + (dir / "games.jsonl").string());

    LearnerAgent white_learner(white_net, plan.td.epsilon_greedy, true);
    LearnerAgent black_learner(black_net, plan.td.epsilon_greedy, true);

    std::unique_ptr<Agent> human;
    switch (spec.human) {
        case HumanPolicy::Policy1: human = std::make_unique<Policy1Agent>(); break;
        case HumanPolicy::Policy2: human = std::make_unique<Policy2Agent>(); break;
        case HumanPolicy::Interactive:
            if (options.host) human = std::make_unique<InteractiveAgent>(options.host->channel(), AgentKind::InteractiveService);
            break;
        case HumanPolicy::None: break;
    }

    const std::uint64_t seed = batch_seed(plan, spec);
    std::int64_t game_id = 0;
    int cc_done = 0;
    Tally cc_tally, hc_tally;

    auto persist = [&](EpisodeResult&& ep, int stage, GameKind kind) {
        ep.record.game_id = game_id;
        ep.record.batch_id = spec.id;
        ep.record.stage_index = stage;
        ep.record.kind = kind;
        log << record_to_json(ep.record) << '\n';
        (kind == GameKind::CC ? cc_tally : hc_tally).add(ep.outcome);
        if (options.keep_records) result.records.push_back(std::move(ep.record));
    };

    auto run_hc = [&](int stage) {
        for (int g = 0; g < spec.hc_games_per_stage; ++g, ++game_id) {
            const std::uint64_t game_seed = split_seed(seed, static_cast<std::uint64_t>(game_id));
            // Only the computer (black) learns in HC games; the white model is
            // neither consulted nor updated.
            EpisodeOptions opts{plan.td, plan.reward, true, {}};
            black_learner.set_epsilon_greedy(scheduled_epsilon(plan, cc_done));
            for (;;) {
                human->begin_game(g);
                if (spec.human == HumanPolicy::Interactive) {
                    options.host->game_starting({spec.id, stage, g, spec.hc_games_per_stage}, GameState::initial(plan.board));
                    opts.observer = [&](const GameState& before, const Move& m, const MoveOutcome& out) {
                        options.host->ply(before, m, out);
                    };
                    // Aborted games roll the black model back and are replayed.
                    const ValueNetwork snapshot = *black_net;
                    try {
                        auto ep = play_episode(*human, black_learner, plan.board, game_seed, opts);
                        options.host->game_finished(ep.outcome);
                        persist(std::move(ep), stage, GameKind::HC);
                        break;
                    } catch (const ChannelClosed&) {
                        *black_net = snapshot;
                        ++result.aborted_games;
                        options.host->game_aborted();
                        continue;
                    }
                }
                persist(play_episode(*human, black_learner, plan.board, game_seed, opts), stage, GameKind::HC);
                break;
            }
        }
    };
    auto run_cc = [&](int stage) {
        for (int g = 0; g < spec.cc_games_per_stage; ++g, ++game_id, ++cc_done) {
            const double eps = scheduled_epsilon(plan, cc_done);
            white_learner.set_epsilon_greedy(eps);
            black_learner.set_epsilon_greedy(eps);
            const std::uint64_t game_seed = split_seed(seed, static_cast<std::uint64_t>(game_id));
            persist(play_episode(white_learner, black_learner, plan.board, game_seed,
                                 EpisodeOptions{plan.td, plan.reward, true, {}}),
                    stage, GameKind::CC);
        }
    };

    for (int stage = 0; stage < spec.stages; ++stage) {
        if (spec.hc_first) {
            run_hc(stage);
            run_cc(stage);
        } else {
            run_cc(stage);
            run_hc(stage);
        }
        if (!white_net->all_finite() || !black_net->all_finite())
            throw std::runtime_error("batch '" + spec.id + "': training produced non-finite weights");
        const fs::path stage_dir = dir / ("stage-" + std::to_string(stage + 1));
        fs::create_directories(stage_dir);
        save_checkpoint(*white_net, stage_dir / "white.vnet.json");
        save_checkpoint(*black_net, stage_dir / "black.vnet.json");
    }
    log.close();
    if (!log) throw IoError("write failed for " + (dir / "games.jsonl").string());

    save_checkpoint(*white_net, dir / "white.vnet.json");
    save_checkpoint(*black_net, dir / "black.vnet.json");
    result.white_final = *white_net;
    result.black_final = *black_net;

    json summary;
    summary["batchId"] = spec.id;
    summary["kind"] = kind_name(spec.kind);
    summary["humanAgent"] = human_name(spec.human);
    summary["stages"] = spec.stages;
    summary["seed"] = seed;
    summary["parents"] = spec.parents();
    summary["games"] = {{"total", cc_tally.games + hc_tally.games}, {"cc", cc_tally.to_json()}, {"hc", hc_tally.to_json()}};
    summary["abortedGames"] = result.aborted_games;
    summary["initialCheckpoints"] = {{"white", hex64(fnv1a(checkpoint_to_string(result.white_initial)))},
                                     {"black", hex64(fnv1a(checkpoint_to_string(result.black_initial)))}};
    summary["checksums"] = {{"white.vnet.json", file_checksum(dir / "white.vnet.json")},
                            {"black.vnet.json", file_checksum(dir / "black.vnet.json")},
                            {"games.jsonl", file_checksum(dir / "games.jsonl")}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    return result;
}

PlanReport run_plan(const ExperimentPlan& plan, const fs::path& out_root, const RunOptions& options) {
    PlanReport report;
    const auto order = plan.execution_order();
    if (order.empty()) return report;
    fs::create_directories(out_root);

    RunOptions batch_options = options;
    batch_options.keep_records = false;

    std::set<std::string> done, failed;
    std::vector<std::string> pending = order;
    while (!pending.empty()) {
        // Batches downstream of a failure can never run.
        std::erase_if(pending, [&](const std::string& id) {
            const auto parents = plan.batch(id).parents();
            if (std::any_of(parents.begin(), parents.end(), [&](const std::string& p) { return failed.count(p) > 0; })) {
                failed.insert(id);
                return true;
            }
            return false;
        });
        // Everything whose parents are finished can run now.
        std::vector<std::string> ready;
        for (const auto& id : pending) {
            const auto parents = plan.batch(id).parents();
            if (std::all_of(parents.begin(), parents.end(), [&](const std::string& p) { return done.count(p) > 0; }))
                ready.push_back(id);
        }
        if (ready.empty()) break;
        const int jobs = std::max(1, options.jobs);
        std::vector<std::string> wave;
        for (const auto& id : ready) {
            const bool interactive = plan.batch(id).human == HumanPolicy::Interactive;
            // Interactive batches run alone (one live session).
            if (interactive && !wave.empty()) break;
            wave.push_back(id);
            if (interactive || static_cast<int>(wave.size()) >= jobs) break;
        }

        std::vector<std::future<BatchResult>> futures;
        for (const auto& id : wave) {
            const BatchSpec& spec = plan.batch(id);
            futures.push_back(std::async(wave.size() > 1 ? std::launch::async : std::launch::deferred,
                                         [&, spec_ptr = &spec] { return run_batch(plan, *spec_ptr, out_root, batch_options); }));
        }
        for (std::size_t i = 0; i < futures.size(); ++i) {
            try {
                const BatchResult r = futures[i].get();
                (r.skipped ? report.skipped : report.completed).push_back(wave[i]);
                done.insert(wave[i]);
            } catch (const std::exception& e) {
                failed.insert(wave[i]);
                if (!report.failed_batch) {
                    report.failed_batch = wave[i];
                    report.error = e.what();
                }
            }
        }
        std::erase_if(pending, [&](const std::string& id) { return done.count(id) > 0 || failed.count(id) > 0; });
    }
    for (const auto& id : order)
        if (failed.count(id)) report.not_run.push_back(id);
    return report;
}

}  // namespace baserace
