#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace baserace {

enum class Player : std::uint8_t { White, Black };

constexpr Player opponent(Player p) { return p == Player::White ? Player::Black : Player::White; }
std::string_view to_string(Player p);

struct BoardConfig {
    int n = 8;
    int a = 2;
    int beta = 10;
    // Plies after which a game is truncated and scored as a draw.
    int move_cap = 3000;

    void validate() const;  // throws InvalidConfig
    bool same_board(const BoardConfig& o) const { return n == o.n && a == o.a && beta == o.beta; }
    bool operator==(const BoardConfig&) const = default;
};

struct CellCoord {
    int x = 0;  // file
    int y = 0;  // rank
    auto operator<=>(const CellCoord&) const = default;
};

enum class MoveKind : std::uint8_t { BaseExit, Step };

struct Move {
    MoveKind kind = MoveKind::Step;
    CellCoord from{};  // meaningless for BaseExit
    CellCoord to{};

    static Move exit_to(CellCoord to) { return {MoveKind::BaseExit, {}, to}; }
    static Move step(CellCoord from, CellCoord to) { return {MoveKind::Step, from, to}; }

    auto operator<=>(const Move&) const = default;
};

enum class Winner : std::uint8_t { White, Black, Draw };
enum class EndReason : std::uint8_t { EnteredBase, OpponentOutOfPawns, MoveCapReached };

std::string_view to_string(Winner w);
std::string_view to_string(EndReason r);
Winner winner_from_string(std::string_view s);
EndReason end_reason_from_string(std::string_view s);

struct GameOutcome {
    Winner winner = Winner::Draw;
    EndReason reason = EndReason::MoveCapReached;
    int final_move_count = 0;
    bool operator==(const GameOutcome&) const = default;
};

/// Rule violated by an attempted move. The names double as the
/// user-facing rejection text of the interactive channels.
enum class Rule : std::uint8_t {
    OutOfBounds,
    NotOwnPawn,
    NotAdjacent,
    TargetOccupied,
    DistanceRule,
    EmptyReserve,
    NotAdjacentToBase,
    GameOver,
};
std::string_view rule_name(Rule r);

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TerminalState : public std::logic_error {
public:
    TerminalState() : std::logic_error("state is terminal") {}
};

class IllegalMove : public std::invalid_argument {
public:
    explicit IllegalMove(Rule rule)
        : std::invalid_argument("illegal move: " + std::string(rule_name(rule))), rule_(rule) {}
    Rule rule() const { return rule_; }

private:
    Rule rule_;
};

enum class Occupant : std::uint8_t { Empty, White, Black };

struct MoveOutcome;

/// Immutable board position. Pawns inside a base are fungible and tracked
/// only by the reserve counts; the occupancy grid never holds a pawn on a
/// base cell.
class GameState {
public:
    static GameState initial(const BoardConfig& config);

    /// Builds an arbitrary position, validating every structural invariant.
    static GameState from_parts(const BoardConfig& config,
                                const std::vector<std::pair<CellCoord, Player>>& pawns,
                                int white_reserve, int black_reserve, Player side_to_move,
                                int move_count = 0);

    const BoardConfig& config() const { return config_; }
    Occupant at(CellCoord c) const { return cells_[index(c)]; }
    int reserve(Player p) const { return p == Player::White ? white_reserve_ : black_reserve_; }
    int on_board(Player p) const;
    int total(Player p) const { return reserve(p) + on_board(p); }
    Player side_to_move() const { return side_; }
    int move_count() const { return move_count_; }
    const std::optional<GameOutcome>& outcome() const { return outcome_; }
    bool terminal() const { return outcome_.has_value(); }

    /// Pawns of `p` on the board, in row-major order.
    std::vector<CellCoord> pawns(Player p) const;

    bool in_bounds(CellCoord c) const { return c.x >= 0 && c.y >= 0 && c.x < config_.n && c.y < config_.n; }
    bool in_base(CellCoord c, Player owner) const;
    bool in_any_base(CellCoord c) const { return in_base(c, Player::White) || in_base(c, Player::Black); }
    int base_distance(CellCoord c, Player owner) const;

    /// Non-base cells orthogonally adjacent to `owner`'s base, row-major.
    std::vector<CellCoord> base_exits(Player owner) const;

    std::vector<Move> legal_moves() const;
    /// Legal steps for the pawn at `from` as if `owner` were to move.
    std::vector<Move> pawn_steps(CellCoord from, Player owner) const;

    /// Returns the rule `move` violates, or nullopt when it is legal.
    std::optional<Rule> check(const Move& move) const;
    MoveOutcome apply(const Move& move) const;

    bool operator==(const GameState&) const = default;

private:
    explicit GameState(const BoardConfig& config);
    std::size_t index(CellCoord c) const { return static_cast<std::size_t>(c.y * config_.n + c.x); }
    bool free_for_step(CellCoord c) const;

    BoardConfig config_;
    std::vector<Occupant> cells_;
    int white_reserve_ = 0;
    int black_reserve_ = 0;
    Player side_ = Player::White;
    int move_count_ = 0;
    std::optional<GameOutcome> outcome_;
};

struct MoveOutcome {
    GameState next;
    int white_lost = 0;
    int black_lost = 0;
    std::optional<GameOutcome> terminal;
};

// Free-function spellings of the core operations.
int base_distance(CellCoord cell, Player player, const BoardConfig& config);
inline GameState initial_state(const BoardConfig& config) { return GameState::initial(config); }
inline std::vector<Move> legal_moves(const GameState& s) { return s.legal_moves(); }
inline MoveOutcome apply_move(const GameState& s, const Move& m) { return s.apply(m); }

}  // namespace baserace
