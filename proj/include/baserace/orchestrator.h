#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "baserace/agents.h"
#include "baserace/record.h"
#include "baserace/td.h"
#include "baserace/value_net.h"

namespace baserace {

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class CycleDetected : public PlanError {
public:
    using PlanError::PlanError;
};
class MissingDependency : public PlanError {
public:
    using PlanError::PlanError;
};

enum class BatchKind : std::uint8_t { CC, HC, HC1 };
enum class HumanPolicy : std::uint8_t { None, Policy1, Policy2, Interactive };

struct ModelInit {
    enum class Kind : std::uint8_t { TabulaRasa, FromBatch };
    Kind kind = Kind::TabulaRasa;
    std::optional<std::uint64_t> seed;  // tabula rasa only; derived from the batch seed when absent
    std::string batch;                  // FromBatch only

    static ModelInit tabula_rasa(std::optional<std::uint64_t> seed = std::nullopt) {
        return {Kind::TabulaRasa, seed, {}};
    }
    static ModelInit from_batch(std::string id) { return {Kind::FromBatch, std::nullopt, std::move(id)}; }
};

struct BatchSpec {
    std::string id;
    BatchKind kind = BatchKind::CC;
    int stages = 5;
    int cc_games_per_stage = 1000;
    int hc_games_per_stage = 0;  // 10 for HC and 1 for HC1 unless overridden
    HumanPolicy human = HumanPolicy::None;
    ModelInit white_init;
    ModelInit black_init;
    std::optional<std::uint64_t> seed;
    /// Within a stage, play the HC games before the CC games.
    bool hc_first = true;

    static int default_hc_games(BatchKind kind);
    int hc_games_total() const { return stages * hc_games_per_stage; }
    int cc_games_total() const { return stages * cc_games_per_stage; }
    int total_games() const { return hc_games_total() + cc_games_total(); }
    std::vector<std::string> parents() const;
    void validate() const;  // throws PlanError
};

/// Linear decay of the greedy probability across a batch's CC games.
struct EpsilonSchedule {
    double final_value = 0.9;
    int games = 1;
};

struct ExperimentPlan {
    BoardConfig board;
    TdParams td;
    RewardScheme reward;
    std::optional<EpsilonSchedule> epsilon_schedule;
    std::uint64_t seed = 0;
    std::vector<BatchSpec> batches;

    const BatchSpec& batch(const std::string& id) const;
    /// Topological order, ties resolved by declaration order. Throws
    /// CycleDetected or MissingDependency.
    std::vector<std::string> execution_order() const;
    bool has_interactive() const;
    void validate() const;
};

ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Seed of a batch: its explicit seed, or one split from the plan seed and
/// the batch id so adding batches never perturbs existing ones.
std::uint64_t batch_seed(const ExperimentPlan& plan, const BatchSpec& spec);
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t fnv1a(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

struct StageProgress {
    std::string batch_id;
    int stage_index = 0;
    int hc_game_index = 0;
    int hc_games_total = 0;
};

/// Hooks for a live human at the white pieces.
class InteractiveHost {
public:
    virtual ~InteractiveHost() = default;
    virtual MoveChannel& channel() = 0;
    virtual void game_starting(const StageProgress& progress, const GameState& state) {
        (void)progress;
        (void)state;
    }
    virtual void ply(const GameState& before, const Move& move, const MoveOutcome& out) {
        (void)before;
        (void)move;
        (void)out;
    }
    virtual void game_finished(const GameOutcome& outcome) { (void)outcome; }
    virtual void game_aborted() {}
};

struct BatchResult {
    std::string id;
    ValueNetwork white_initial;
    ValueNetwork black_initial;
    ValueNetwork white_final;
    ValueNetwork black_final;
    std::vector<GameRecord> records;
    int aborted_games = 0;
    bool skipped = false;
};

struct RunOptions {
    bool resume = false;
    int jobs = 1;
    InteractiveHost* host = nullptr;  // required for interactive batches
    bool keep_records = true;         // keep GameRecords in memory as well as on disk
};

/// Runs one batch, writing outputRoot/<id>/{stage-<k>/, white.vnet.json,
/// black.vnet.json, games.jsonl, summary.json}. Parents must already be
/// materialized under `out_root`.
BatchResult run_batch(const ExperimentPlan& plan, const BatchSpec& spec, const std::filesystem::path& out_root,
                      const RunOptions& options = {});

/// True when `dir` holds a finished batch whose checksums verify.
bool batch_complete(const std::filesystem::path& dir);

struct PlanReport {
    std::vector<std::string> completed;
    std::vector<std::string> skipped;
    std::optional<std::string> failed_batch;  // first failure
    std::string error;
    /// Batches that failed or could not run because an ancestor failed.
    std::vector<std::string> not_run;
    bool ok() const { return !failed_batch; }
};

PlanReport run_plan(const ExperimentPlan& plan, const std::filesystem::path& out_root,
                    const RunOptions& options = {});

}  // namespace baserace
