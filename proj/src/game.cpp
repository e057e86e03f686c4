#include "baserace/game.h"

#include <algorithm>
#include <array>
#include <cstdlib>

namespace baserace {

namespace {

constexpr std::array<CellCoord, 4> kDirections{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

Occupant occupant_of(Player p) { return p == Player::White ? Occupant::White : Occupant::Black; }

bool orthogonal_neighbours(CellCoord a, CellCoord b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}

}  // namespace

std::string_view to_string(Player p) { return p == Player::White ? "white" : "black"; }

std::string_view to_string(Winner w) {
    switch (w) {
        case Winner::White: return "white";
        case Winner::Black: return "black";
        case Winner::Draw: return "draw";
    }
    return "?";
}

std::string_view to_string(EndReason r) {
    switch (r) {
        case EndReason::EnteredBase: return "enteredBase";
        case EndReason::OpponentOutOfPawns: return "opponentOutOfPawns";
        case EndReason::MoveCapReached: return "moveCapReached";
    }
    return "?";
}

Winner winner_from_string(std::string_view s) {
    if (s == "white") return Winner::White;
    if (s == "black") return Winner::Black;
    if (s == "draw") return Winner::Draw;
    throw std::invalid_argument("unknown winner '" + std::string(s) + "'");
}

EndReason end_reason_from_string(std::string_view s) {
    if (s == "enteredBase") return EndReason::EnteredBase;
    if (s == "opponentOutOfPawns") return EndReason::OpponentOutOfPawns;
    if (s == "moveCapReached") return EndReason::MoveCapReached;
    throw std::invalid_argument("unknown end reason '" + std::string(s) + "'");
}

std::string_view rule_name(Rule r) {
    switch (r) {
        case Rule::OutOfBounds: return "out of bounds";
        case Rule::NotOwnPawn: return "not own pawn";
        case Rule::NotAdjacent: return "not adjacent";
        case Rule::TargetOccupied: return "target occupied";
        case Rule::DistanceRule: return "distance rule";
        case Rule::EmptyReserve: return "empty reserve";
        case Rule::NotAdjacentToBase: return "not adjacent to base";
        case Rule::GameOver: return "game over";
    }
    return "?";
}

void BoardConfig::validate() const {
    if (n < 4) throw InvalidConfig("board side n must be >= 4");
    if (a < 1) throw InvalidConfig("base side a must be >= 1");
    if (2 * a >= n) throw InvalidConfig("bases overlap: 2a must be < n");
    if (beta < 1) throw InvalidConfig("beta must be >= 1");
    if (n > 26) throw InvalidConfig("board side n must be <= 26 (file letters)");
    if (move_cap < 1) throw InvalidConfig("move cap must be >= 1");
}

int base_distance(CellCoord c, Player owner, const BoardConfig& cfg) {
    if (owner == Player::White) {
        return std::max({0, c.x - (cfg.a - 1), c.y - (cfg.a - 1)});
    }
    const int lo = cfg.n - cfg.a;
    return std::max({0, lo - c.x, lo - c.y});
}

GameState::GameState(const BoardConfig& config)
    : config_(config), cells_(static_cast<std::size_t>(config.n * config.n), Occupant::Empty) {}

GameState GameState::initial(const BoardConfig& config) {
    config.validate();
    GameState s(config);
    s.white_reserve_ = config.beta;
    s.black_reserve_ = config.beta;
    return s;
}

GameState GameState::from_parts(const BoardConfig& config,
                                const std::vector<std::pair<CellCoord, Player>>& pawns,
                                int white_reserve, int black_reserve, Player side_to_move,
                                int move_count) {
    config.validate();
    GameState s(config);
    for (const auto& [c, p] : pawns) {
        if (!s.in_bounds(c)) throw std::invalid_argument("pawn out of bounds");
        if (s.in_any_base(c)) throw std::invalid_argument("pawn placed inside a base region");
        if (s.at(c) != Occupant::Empty) throw std::invalid_argument("two pawns on one cell");
        s.cells_[s.index(c)] = occupant_of(p);
    }
    if (white_reserve < 0 || black_reserve < 0) throw std::invalid_argument("negative reserve");
    if (move_count < 0) throw std::invalid_argument("negative move count");
    s.white_reserve_ = white_reserve;
    s.black_reserve_ = black_reserve;
    s.side_ = side_to_move;
    s.move_count_ = move_count;
    for (Player p : {Player::White, Player::Black}) {
        if (s.total(p) > config.beta) throw std::invalid_argument("pawn count exceeds beta");
    }
    const int wt = s.total(Player::White);
    const int bt = s.total(Player::Black);
    if (wt == 0 || bt == 0) {
        Winner w = wt == 0 && bt == 0 ? Winner::Draw : (wt == 0 ? Winner::Black : Winner::White);
        if (w == Winner::Draw) throw std::invalid_argument("both players have no pawns");
        s.outcome_ = GameOutcome{w, EndReason::OpponentOutOfPawns, move_count};
    }
    return s;
}

int GameState::on_board(Player p) const {
    const Occupant o = occupant_of(p);
    return static_cast<int>(std::count(cells_.begin(), cells_.end(), o));
}

std::vector<CellCoord> GameState::pawns(Player p) const {
    const Occupant o = occupant_of(p);
    std::vector<CellCoord> out;
    for (int y = 0; y < config_.n; ++y)
        for (int x = 0; x < config_.n; ++x)
            if (cells_[index({x, y})] == o) out.push_back({x, y});
    return out;
}

bool GameState::in_base(CellCoord c, Player owner) const {
    if (owner == Player::White) return c.x < config_.a && c.y < config_.a;
    const int lo = config_.n - config_.a;
    return c.x >= lo && c.y >= lo;
}

int GameState::base_distance(CellCoord c, Player owner) const {
    return baserace::base_distance(c, owner, config_);
}

std::vector<CellCoord> GameState::base_exits(Player owner) const {
    std::vector<CellCoord> out;
    for (int y = 0; y < config_.n; ++y) {
        for (int x = 0; x < config_.n; ++x) {
            const CellCoord c{x, y};
            if (in_any_base(c)) continue;
            for (const auto& d : kDirections) {
                const CellCoord nb{x + d.x, y + d.y};
                if (in_bounds(nb) && in_base(nb, owner)) {
                    out.push_back(c);
                    break;
                }
            }
        }
    }
    return out;
}

bool GameState::free_for_step(CellCoord c) const {
    return in_bounds(c) && cells_[index(c)] == Occupant::Empty;
}

std::vector<Move> GameState::pawn_steps(CellCoord from, Player owner) const {
    std::vector<Move> out;
    const int here = base_distance(from, owner);
    for (const auto& d : kDirections) {
        const CellCoord to{from.x + d.x, from.y + d.y};
        if (!free_for_step(to)) continue;
        if (in_base(to, owner)) continue;
        if (base_distance(to, owner) < here) continue;
        out.push_back(Move::step(from, to));
    }
    return out;
}

std::vector<Move> GameState::legal_moves() const {
    if (terminal()) throw TerminalState();
    std::vector<Move> out;
    if (reserve(side_) > 0) {
        for (const auto& c : base_exits(side_))
            if (at(c) == Occupant::Empty) out.push_back(Move::exit_to(c));
    }
    for (const auto& p : pawns(side_)) {
        auto steps = pawn_steps(p, side_);
        out.insert(out.end(), steps.begin(), steps.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Rule> GameState::check(const Move& m) const {
    if (terminal()) return Rule::GameOver;
    if (!in_bounds(m.to)) return Rule::OutOfBounds;
    if (m.kind == MoveKind::BaseExit) {
        if (reserve(side_) == 0) return Rule::EmptyReserve;
        if (in_any_base(m.to)) return Rule::NotAdjacentToBase;
        bool adjacent = false;
        for (const auto& d : kDirections) {
            const CellCoord nb{m.to.x + d.x, m.to.y + d.y};
            if (in_bounds(nb) && in_base(nb, side_)) adjacent = true;
        }
        if (!adjacent) return Rule::NotAdjacentToBase;
        if (at(m.to) != Occupant::Empty) return Rule::TargetOccupied;
        return std::nullopt;
    }
    if (!in_bounds(m.from)) return Rule::OutOfBounds;
    if (at(m.from) != occupant_of(side_)) return Rule::NotOwnPawn;
    if (!orthogonal_neighbours(m.from, m.to)) return Rule::NotAdjacent;
    if (at(m.to) != Occupant::Empty) return Rule::TargetOccupied;
    if (in_base(m.to, side_) || base_distance(m.to, side_) < base_distance(m.from, side_))
        return Rule::DistanceRule;
    return std::nullopt;
}

MoveOutcome GameState::apply(const Move& m) const {
    if (auto violated = check(m)) throw IllegalMove(*violated);

    const Player mover = side_;
    GameState next = *this;
    MoveOutcome result{next, 0, 0, std::nullopt};
    GameState& s = result.next;

    if (m.kind == MoveKind::BaseExit) {
        (mover == Player::White ? s.white_reserve_ : s.black_reserve_) -= 1;
    } else {
        s.cells_[index(m.from)] = Occupant::Empty;
    }

    s.side_ = opponent(mover);
    s.move_count_ += 1;

    if (s.in_base(m.to, opponent(mover))) {
        s.outcome_ = GameOutcome{mover == Player::White ? Winner::White : Winner::Black,
                                 EndReason::EnteredBase, s.move_count_};
        result.terminal = s.outcome_;
        return result;
    }
    s.cells_[index(m.to)] = occupant_of(mover);

    // Immobile pawns of both sides are judged against the same post-move
    // board and removed together; removal is not iterated.
    std::vector<CellCoord> trapped;
    for (Player p : {Player::White, Player::Black}) {
        for (const auto& c : s.pawns(p)) {
            if (s.pawn_steps(c, p).empty()) trapped.push_back(c);
        }
    }
    for (const auto& c : trapped) {
        (s.at(c) == Occupant::White ? result.white_lost : result.black_lost) += 1;
        s.cells_[index(c)] = Occupant::Empty;
    }
    for (Player p : {Player::White, Player::Black}) {
        int& reserve = p == Player::White ? s.white_reserve_ : s.black_reserve_;
        if (reserve == 0) continue;
        const auto exits = s.base_exits(p);
        const bool any_free = std::any_of(exits.begin(), exits.end(),
                                          [&](CellCoord c) { return s.at(c) == Occupant::Empty; });
        if (!any_free) {
            (p == Player::White ? result.white_lost : result.black_lost) += reserve;
            reserve = 0;
        }
    }

    const bool white_out = s.total(Player::White) == 0;
    const bool black_out = s.total(Player::Black) == 0;
    if (white_out || black_out) {
        // Simultaneous exhaustion goes to the player who completed the move.
        Winner w;
        if (white_out && black_out)
            w = mover == Player::White ? Winner::White : Winner::Black;
        else
            w = white_out ? Winner::Black : Winner::White;
        s.outcome_ = GameOutcome{w, EndReason::OpponentOutOfPawns, s.move_count_};
    } else if (s.move_count_ >= config_.move_cap) {
        s.outcome_ = GameOutcome{Winner::Draw, EndReason::MoveCapReached, s.move_count_};
    }
    result.terminal = s.outcome_;
    return result;
}

}  // namespace baserace
