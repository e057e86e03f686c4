#pragma once

#include "baserace/orchestrator.h"

namespace desk {

inline baserace::BoardConfig board() {
    baserace::BoardConfig c;
    c.n = 6;
    c.a = 1;
    c.beta = 3;
    c.move_cap = 400;
    return c;
}

/// Desk-scale plan: an HC batch (scripted policy 2) feeding a CC batch,
/// plus an independent CC batch.
inline baserace::ExperimentPlan plan(std::uint64_t seed = 2024) {
    using namespace baserace;
    ExperimentPlan p;
    p.board = board();
    p.seed = seed;

    BatchSpec hc;
    hc.id = "hc";
    hc.kind = BatchKind::HC;
    hc.stages = 5;
    hc.cc_games_per_stage = 20;
    hc.hc_games_per_stage = 2;
    hc.human = HumanPolicy::Policy2;

    BatchSpec child;
    child.id = "cc-child";
    child.kind = BatchKind::CC;
    child.stages = 5;
    child.cc_games_per_stage = 20;
    child.white_init = ModelInit::from_batch("hc");
    child.black_init = ModelInit::from_batch("hc");

    BatchSpec solo;
    solo.id = "cc";
    solo.kind = BatchKind::CC;
    solo.stages = 5;
    solo.cc_games_per_stage = 20;

    p.batches = {hc, child, solo};
    return p;
}

}  // namespace desk
