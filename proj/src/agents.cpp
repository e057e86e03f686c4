#include "baserace/agents.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "baserace/notation.h"

namespace baserace {

namespace {

std::size_t pick_index(Rng& rng, std::size_t count) {
    std::uniform_int_distribution<std::size_t> dist(0, count - 1);
    return dist(rng);
}

bool contains(const std::vector<Move>& moves, const Move& m) {
    return std::find(moves.begin(), moves.end(), m) != moves.end();
}

int step_gain(const GameState& s, const Move& m) {
    const Player me = s.side_to_move();
    return s.base_distance(m.to, me) - s.base_distance(m.from, me);
}

bool wins_immediately(const GameState& s, const Move& m) {
    return m.kind == MoveKind::Step && s.in_base(m.to, opponent(s.side_to_move()));
}

/// White pawns ordered by progress (distance from the white base), furthest first.
std::vector<CellCoord> pawns_by_progress(const GameState& s) {
    auto pawns = s.pawns(Player::White);
    std::stable_sort(pawns.begin(), pawns.end(), [&](CellCoord l, CellCoord r) {
        return s.base_distance(l, Player::White) > s.base_distance(r, Player::White);
    });
    return pawns;
}

std::optional<Move> exit_move(const GameState& s, const std::vector<Move>& legal, CellCoord preferred) {
    const Move wanted = Move::exit_to(preferred);
    if (contains(legal, wanted)) return wanted;
    for (const auto& m : legal)
        if (m.kind == MoveKind::BaseExit) return m;
    (void)s;
    return std::nullopt;
}

/// Fallback chain once the scripted step is unavailable: another forward
/// step of the leading pawn, then a lateral one, then the same for the
/// other pawns, then any legal move.
Move fallback(const GameState& s, const std::vector<Move>& legal, Rng& rng) {
    for (const auto& pawn : pawns_by_progress(s)) {
        std::optional<Move> lateral;
        for (const auto& m : legal) {
            if (m.kind != MoveKind::Step || m.from != pawn) continue;
            if (step_gain(s, m) > 0) return m;
            if (!lateral) lateral = m;
        }
        if (lateral) return *lateral;
    }
    return legal[pick_index(rng, legal.size())];
}

bool in_central_band(CellCoord c, int n) {
    const int lo = n / 4;
    const int hi = (3 * n) / 4;
    return c.x >= lo && c.x < hi && c.y >= lo && c.y < hi;
}

Move central_walk(const GameState& s, const std::vector<Move>& legal, Policy2Memory& memory, Rng& rng) {
    const BoardConfig& cfg = s.config();
    if (memory.exits_made < 2 && s.reserve(Player::White) > 0) {
        if (auto m = exit_move(s, legal, {cfg.a, 0})) {
            ++memory.exits_made;
            return *m;
        }
    }
    for (const auto& m : legal)
        if (wins_immediately(s, m)) return m;

    std::vector<std::pair<Move, int>> weighted;
    int total = 0;
    for (const auto& m : legal) {
        if (m.kind != MoveKind::Step || !in_central_band(m.to, cfg.n)) continue;
        const int w = step_gain(s, m) > 0 ? 3 : 1;
        weighted.emplace_back(m, w);
        total += w;
    }
    if (weighted.empty()) {
        // Outside the band: head toward it by forward steps.
        for (const auto& m : legal) {
            if (m.kind == MoveKind::Step && step_gain(s, m) > 0) {
                weighted.emplace_back(m, 1);
                ++total;
            }
        }
    }
    if (weighted.empty()) return legal[pick_index(rng, legal.size())];
    auto ticket = static_cast<int>(pick_index(rng, static_cast<std::size_t>(total)));
    for (const auto& [m, w] : weighted) {
        if (ticket < w) return m;
        ticket -= w;
    }
    return weighted.back().first;
}

Move follow_route(const GameState& s, const Route& route, int max_pawns_out, Policy2Memory& memory, Rng& rng) {
    const auto legal = s.legal_moves();
    if (legal.empty()) throw NoLegalMove();
    const BoardConfig& cfg = s.config();

    if (s.on_board(Player::White) == 0) {
        if (auto m = exit_move(s, legal, route.exit)) {
            ++memory.exits_made;
            return *m;
        }
        return legal[pick_index(rng, legal.size())];
    }

    for (const auto& pawn : pawns_by_progress(s)) {
        const Move scripted = Move::step(pawn, route.next(pawn, cfg));
        if (contains(legal, scripted)) {
            memory.blocked_turns = 0;
            return scripted;
        }
    }

    ++memory.blocked_turns;
    if (memory.blocked_turns >= kBlockedTurnsBeforeSecondPawn && s.on_board(Player::White) < max_pawns_out) {
        if (auto m = exit_move(s, legal, route.exit)) {
            memory.blocked_turns = 0;
            ++memory.exits_made;
            return *m;
        }
    }
    return fallback(s, legal, rng);
}

}  // namespace

// ---------------------------------------------------------------------------

double afterstate_probability(const ValueNetwork& net, const GameState& after) {
    if (const auto& o = after.outcome()) {
        if (o->winner == Winner::Draw) return 0.5;
        const bool owner_won = (o->winner == Winner::White) == (net.owner() == Player::White);
        return owner_won ? 1.0 : 0.0;
    }
    return net.forward(encode_afterstate(after, net.owner()));
}

Move learner_select(const GameState& state, const ValueNetwork& net, double epsilon_greedy, Rng& rng) {
    if (!net.board().same_board(state.config()))
        throw ConfigMismatch("network board configuration differs from the game's");
    const auto moves = state.legal_moves();
    if (moves.empty()) throw NoLegalMove();

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) >= epsilon_greedy) return moves[pick_index(rng, moves.size())];

    std::vector<std::size_t> best;
    double best_value = -1.0;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        const double v = afterstate_probability(net, state.apply(moves[i]).next);
        if (v > best_value) {
            best_value = v;
            best.assign(1, i);
        } else if (v == best_value) {
            best.push_back(i);
        }
    }
    return moves[best[best.size() == 1 ? 0 : pick_index(rng, best.size())]];
}

Move LearnerAgent::select_move(const GameState& state, Rng& rng) {
    return learner_select(state, *net_, epsilon_, rng);
}

// ---------------------------------------------------------------------------

CellCoord Route::next(CellCoord at, const BoardConfig& cfg) const {
    switch (shape) {
        case Shape::NorthThenEast:
            if (at.y < turn) return {at.x, at.y + 1};
            return {at.x + 1, at.y};
        case Shape::EastThenNorth:
            if (at.x < turn) return {at.x + 1, at.y};
            if (at.y < cfg.n - 1) return {at.x, at.y + 1};
            return {at.x + 1, at.y};
    }
    return at;
}

namespace {

std::vector<CellCoord> trace_route(const Route& route, const BoardConfig& cfg) {
    const GameState probe = GameState::initial(cfg);
    std::vector<CellCoord> path{route.exit};
    CellCoord at = route.exit;
    while (!probe.in_base(at, Player::Black) && static_cast<int>(path.size()) <= 2 * cfg.n * cfg.n) {
        at = route.next(at, cfg);
        path.push_back(at);
    }
    return path;
}

}  // namespace

Route policy1_route(const BoardConfig& cfg) {
    return Route{Route::Shape::NorthThenEast, cfg.n - cfg.a, {0, cfg.a}};
}

RoutePlan policy2_plan(int route_index, const BoardConfig& cfg) {
    if (route_index < 0 || route_index > 9) throw std::out_of_range("route index must be in 0..9");
    RoutePlan plan;
    plan.route_index = route_index;
    if (route_index >= 8) {
        plan.pawns_out = 2;
        return plan;
    }
    const int file = static_cast<int>(std::lround(route_index * (cfg.n - 1) / 7.0));
    const CellCoord exit = file < cfg.a ? CellCoord{file, cfg.a} : CellCoord{cfg.a, 0};
    plan.route = Route{Route::Shape::EastThenNorth, file, exit};
    plan.pawns_out = 1;
    plan.waypoints = trace_route(plan.route, cfg);
    return plan;
}

Move policy1_select(const GameState& state, Rng& rng) {
    if (state.side_to_move() != Player::White) throw std::logic_error("scripted policies play white");
    Policy2Memory unused;
    // A single pawn: a replacement is only exited once the board is empty.
    return follow_route(state, policy1_route(state.config()), 1, unused, rng);
}

Move policy2_select(const GameState& state, const RoutePlan& plan, Policy2Memory& memory, Rng& rng) {
    if (state.side_to_move() != Player::White) throw std::logic_error("scripted policies play white");
    if (plan.route_index >= 8) {
        const auto legal = state.legal_moves();
        if (legal.empty()) throw NoLegalMove();
        return central_walk(state, legal, memory, rng);
    }
    return follow_route(state, plan.route, 2, memory, rng);
}

void Policy2Agent::begin_game(int game_in_stage) {
    route_index_ = game_in_stage % 10;
    plan_.reset();
    memory_ = {};
}

Move Policy2Agent::select_move(const GameState& state, Rng& rng) {
    if (!plan_) plan_ = policy2_plan(route_index_, state.config());
    return policy2_select(state, *plan_, memory_, rng);
}

// ---------------------------------------------------------------------------

Submission validate_submission(const GameState& state, std::string_view text) {
    Move m;
    try {
        m = parse_move(text);
    } catch (const MalformedMove&) {
        return {std::nullopt, "malformed move"};
    }
    if (auto rule = state.check(m)) return {std::nullopt, std::string(rule_name(*rule))};
    return {m, {}};
}

Move interactive_select(const GameState& state, MoveChannel& channel) {
    for (;;) {
        auto text = channel.request_move(state);
        if (!text) throw ChannelClosed();
        auto verdict = validate_submission(state, *text);
        if (verdict.move) return *verdict.move;
        channel.reject(*text, verdict.reason);
    }
}

std::optional<std::string> StreamChannel::request_move(const GameState& state) {
    out_ << render_board(state) << "your move> " << std::flush;
    std::string line;
    while (std::getline(in_, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
        out_ << "your move> " << std::flush;
    }
    return std::nullopt;
}

void StreamChannel::reject(const std::string& submitted, std::string_view reason) {
    out_ << "rejected '" << submitted << "': " << reason << '\n';
}

}  // namespace baserace
