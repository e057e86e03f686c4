#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "baserace/game.h"
#include "baserace/notation.h"
#include "oracle.h"

using namespace baserace;

namespace {

BoardConfig cfg(int n, int a, int beta) {
    BoardConfig c;
    c.n = n;
    c.a = a;
    c.beta = beta;
    return c;
}

}  // namespace

TEST(BaseDistance, Examples) {
    const BoardConfig c;
    EXPECT_EQ(base_distance({3, 3}, Player::White, c), 2);
    EXPECT_EQ(base_distance({0, 5}, Player::White, c), 4);
    EXPECT_EQ(base_distance({1, 1}, Player::White, c), 0);
    EXPECT_EQ(base_distance({3, 0}, Player::White, c), 2);
    EXPECT_EQ(base_distance({7, 0}, Player::Black, c), 6);
    EXPECT_EQ(base_distance({6, 6}, Player::Black, c), 0);
}

TEST(BaseDistance, MatchesBruteForceEverywhere) {
    for (auto c : {cfg(8, 2, 10), cfg(6, 1, 3), cfg(9, 3, 5)})
        for (int x = 0; x < c.n; ++x)
            for (int y = 0; y < c.n; ++y)
                for (Player p : {Player::White, Player::Black})
                    EXPECT_EQ(base_distance({x, y}, p, c), oracle::distance({x, y}, p, c));
}

TEST(InitialState, Reserves) {
    auto s = initial_state(BoardConfig{});
    EXPECT_EQ(s.reserve(Player::White), 10);
    EXPECT_EQ(s.reserve(Player::Black), 10);
    EXPECT_TRUE(s.pawns(Player::White).empty());
    EXPECT_EQ(s.side_to_move(), Player::White);
    EXPECT_EQ(s.move_count(), 0);

    auto small = initial_state(cfg(6, 1, 4));
    EXPECT_EQ(small.reserve(Player::White), 4);
    EXPECT_EQ(small.reserve(Player::Black), 4);
}

TEST(InitialState, RejectsBadConfigs) {
    EXPECT_THROW(initial_state(cfg(8, 4, 10)), InvalidConfig);
    EXPECT_THROW(initial_state(cfg(3, 1, 1)), InvalidConfig);
    EXPECT_THROW(initial_state(cfg(8, 0, 10)), InvalidConfig);
    EXPECT_THROW(initial_state(cfg(8, 2, 0)), InvalidConfig);
}

TEST(LegalMoves, OrthogonalBaseExits) {
    auto s = initial_state(BoardConfig{});
    auto moves = legal_moves(s);
    ASSERT_EQ(moves.size(), 4u);
    std::set<CellCoord> cells;
    for (const auto& m : moves) {
        EXPECT_EQ(m.kind, MoveKind::BaseExit);
        cells.insert(m.to);
    }
    EXPECT_EQ(cells, (std::set<CellCoord>{{2, 0}, {2, 1}, {0, 2}, {1, 2}}));
}

TEST(LegalMoves, BackwardStepForbidden) {
    auto s = GameState::from_parts(BoardConfig{}, {{{3, 0}, Player::White}}, 9, 10, Player::White);
    auto moves = legal_moves(s);
    EXPECT_EQ(std::count(moves.begin(), moves.end(), Move::step({3, 0}, {2, 0})), 0);
    EXPECT_EQ(s.check(Move::step({3, 0}, {2, 0})), Rule::DistanceRule);
    EXPECT_EQ(std::count(moves.begin(), moves.end(), Move::step({3, 0}, {4, 0})), 1);
}

TEST(LegalMoves, OpenPawnHasAllNonDecreasingSteps) {
    auto s = GameState::from_parts(BoardConfig{}, {{{3, 3}, Player::White}}, 9, 10, Player::White);
    std::vector<Move> steps;
    for (const auto& m : legal_moves(s))
        if (m.kind == MoveKind::Step) steps.push_back(m);
    std::sort(steps.begin(), steps.end());
    auto expected = oracle::legal_moves(s);
    std::erase_if(expected, [](const Move& m) { return m.kind != MoveKind::Step; });
    EXPECT_EQ(steps, expected);
    EXPECT_EQ(steps.size(), 4u);
}

TEST(LegalMoves, TerminalStateThrows) {
    auto s = GameState::from_parts(BoardConfig{}, {{{5, 6}, Player::White}}, 9, 10, Player::White);
    auto out = apply_move(s, Move::step({5, 6}, {6, 6}));
    ASSERT_TRUE(out.terminal);
    EXPECT_THROW(legal_moves(out.next), TerminalState);
    try {
        apply_move(out.next, Move::exit_to({2, 0}));
        FAIL();
    } catch (const IllegalMove& e) {
        EXPECT_EQ(e.rule(), Rule::GameOver);
    }
}

TEST(ApplyMove, EnteringOpponentBaseWins) {
    auto s = GameState::from_parts(BoardConfig{}, {{{5, 6}, Player::White}}, 9, 10, Player::White);
    auto out = apply_move(s, Move::step({5, 6}, {6, 6}));
    ASSERT_TRUE(out.terminal);
    EXPECT_EQ(out.terminal->winner, Winner::White);
    EXPECT_EQ(out.terminal->reason, EndReason::EnteredBase);
    EXPECT_EQ(out.terminal->final_move_count, 1);
}

TEST(ApplyMove, IllegalMoveCarriesRule) {
    auto s = initial_state(BoardConfig{});
    try {
        apply_move(s, Move::exit_to({3, 3}));
        FAIL();
    } catch (const IllegalMove& e) {
        EXPECT_EQ(e.rule(), Rule::NotAdjacentToBase);
    }
    EXPECT_EQ(s.check(Move::step({4, 4}, {4, 5})), Rule::NotOwnPawn);
    EXPECT_EQ(s.check(Move::exit_to({9, 9})), Rule::OutOfBounds);
}

TEST(ApplyMove, TrappedPawnIsRemoved) {
    // Black pawn on (7,0): its only non-backward neighbour is (6,0).
    auto s = GameState::from_parts(BoardConfig{}, {{{5, 0}, Player::White}, {{7, 0}, Player::Black}}, 9, 9,
                                   Player::White);
    auto out = apply_move(s, Move::step({5, 0}, {6, 0}));
    EXPECT_EQ(out.black_lost, 1);
    EXPECT_EQ(out.white_lost, 0);
    EXPECT_EQ(out.next.at({7, 0}), Occupant::Empty);
    EXPECT_EQ(out.next.total(Player::Black), 9);
    EXPECT_FALSE(out.terminal);
    EXPECT_EQ(oracle::trapped(s.apply(Move::step({5, 0}, {6, 0})).next, Player::Black), 0);
}

TEST(ApplyMove, BaseStarvationLosesReserve) {
    auto s = GameState::from_parts(BoardConfig{},
                                   {{{2, 0}, Player::White},
                                    {{0, 2}, Player::White},
                                    {{1, 2}, Player::White},
                                    {{3, 1}, Player::Black}},
                                   3, 9, Player::Black);
    auto out = apply_move(s, Move::step({3, 1}, {2, 1}));
    EXPECT_EQ(out.white_lost, 3);
    EXPECT_EQ(out.black_lost, 0);
    EXPECT_EQ(out.next.reserve(Player::White), 0);
    EXPECT_EQ(out.next.total(Player::White), 3);
}

TEST(ApplyMove, TrapResolutionIsSimultaneous) {
    // Both sides lose a pawn in the same round.
    auto pre = GameState::from_parts(BoardConfig{},
                                     {{{5, 0}, Player::White},
                                      {{7, 0}, Player::Black},
                                      {{0, 7}, Player::White},
                                      {{1, 7}, Player::Black}},
                                     5, 5, Player::White);
    // White (0,7): north is off board, (0,6) is backward, (1,7) is black.
    auto out = apply_move(pre, Move::step({5, 0}, {6, 0}));
    EXPECT_EQ(out.black_lost, 1);
    EXPECT_EQ(out.white_lost, 1);
}

TEST(ApplyMove, MoverWinsOnSimultaneousExhaustion) {
    // Found by exhaustive search over 4x4 positions: White's last exit
    // wipes out both sides in the same round.
    auto s = GameState::from_parts(cfg(4, 1, 7),
                                   {{parse_cell("b1"), Player::White},
                                    {parse_cell("c1"), Player::White},
                                    {parse_cell("d1"), Player::White},
                                    {parse_cell("b2"), Player::White},
                                    {parse_cell("a3"), Player::White},
                                    {parse_cell("a4"), Player::White},
                                    {parse_cell("c2"), Player::Black},
                                    {parse_cell("d2"), Player::Black},
                                    {parse_cell("b3"), Player::Black},
                                    {parse_cell("b4"), Player::Black}},
                                   1, 0, Player::White);
    auto out = apply_move(s, parse_move("out-a2"));
    ASSERT_TRUE(out.terminal);
    EXPECT_EQ(out.next.total(Player::White), 0);
    EXPECT_EQ(out.next.total(Player::Black), 0);
    EXPECT_EQ(out.terminal->winner, Winner::White);
    EXPECT_EQ(out.terminal->reason, EndReason::OpponentOutOfPawns);
}

TEST(ApplyMove, MoveCapDraw) {
    BoardConfig c = cfg(6, 1, 3);
    c.move_cap = 2;
    auto s = initial_state(c);
    s = apply_move(s, legal_moves(s).front()).next;
    auto out = apply_move(s, legal_moves(s).front());
    ASSERT_TRUE(out.terminal);
    EXPECT_EQ(out.terminal->winner, Winner::Draw);
    EXPECT_EQ(out.terminal->reason, EndReason::MoveCapReached);
    EXPECT_EQ(out.terminal->final_move_count, 2);
}

TEST(RulesOracle, ThreePlyEquivalenceSmallBoard) {
    const BoardConfig c = cfg(6, 1, 3);
    std::vector<GameState> frontier{initial_state(c)};
    int checked = 0, discrepancies = 0;
    for (int ply = 0; ply <= 3; ++ply) {
        std::vector<GameState> next;
        for (const auto& s : frontier) {
            if (s.terminal()) continue;
            auto got = legal_moves(s);
            auto want = oracle::legal_moves(s);
            std::sort(got.begin(), got.end());
            ++checked;
            if (got != want) ++discrepancies;
            if (ply < 3)
                for (const auto& m : got) next.push_back(apply_move(s, m).next);
        }
        frontier = std::move(next);
    }
    EXPECT_GT(checked, 10);
    EXPECT_EQ(discrepancies, 0);
}

TEST(Properties, RandomPlayouts) {
    std::mt19937_64 rng(7);
    for (auto c : {cfg(6, 1, 3), cfg(8, 2, 10), cfg(7, 2, 4)}) {
        for (int g = 0; g < 60; ++g) {
            auto s = initial_state(c);
            std::map<CellCoord, int> tracked;  // cell -> distance when last seen
            while (!s.terminal()) {
                auto moves = legal_moves(s);
                ASSERT_FALSE(moves.empty());
                auto sorted = moves;
                std::sort(sorted.begin(), sorted.end());
                ASSERT_EQ(moves, sorted);
                ASSERT_EQ(moves, oracle::legal_moves(s));
                const Move m = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
                const Player mover = s.side_to_move();
                auto out = apply_move(s, m);
                auto again = apply_move(s, m);
                ASSERT_EQ(out.next, again.next);

                if (m.kind == MoveKind::Step)
                    ASSERT_GE(base_distance(m.to, mover, c), base_distance(m.from, mover, c));
                const bool entered = out.terminal && out.terminal->reason == EndReason::EnteredBase;
                for (Player p : {Player::White, Player::Black}) {
                    if (entered && p == mover) continue;  // the winning pawn left the board
                    const int lost = p == Player::White ? out.white_lost : out.black_lost;
                    ASSERT_EQ(out.next.total(p), s.total(p) - lost);
                    ASSERT_LE(out.next.total(p), s.total(p));
                    for (const auto& cell : out.next.pawns(p)) ASSERT_FALSE(out.next.in_any_base(cell));
                }
                if (!out.terminal) {
                    ASSERT_EQ(oracle::trapped(out.next, Player::White), 0);
                    ASSERT_EQ(oracle::trapped(out.next, Player::Black), 0);
                    ASSERT_NE(out.next.side_to_move(), mover);
                } else {
                    const auto& o = *out.terminal;
                    ASSERT_EQ(o.reason == EndReason::MoveCapReached, o.winner == Winner::Draw);
                    if (o.reason == EndReason::OpponentOutOfPawns)
                        ASSERT_TRUE(out.next.total(Player::White) == 0 || out.next.total(Player::Black) == 0);
                }
                s = out.next;
            }
        }
    }
}

TEST(Notation, RoundTrip) {
    EXPECT_EQ(format_cell({0, 0}), "a1");
    EXPECT_EQ(format_cell({2, 3}), "c4");
    EXPECT_EQ(format_move(Move::step({2, 2}, {2, 3})), "c3-c4");
    EXPECT_EQ(format_move(Move::exit_to({1, 2})), "out-b3");
    EXPECT_EQ(parse_move("c3-c4"), Move::step({2, 2}, {2, 3}));
    EXPECT_EQ(parse_move("out-b3"), Move::exit_to({1, 2}));
    EXPECT_THROW(parse_move("zz"), MalformedMove);
    EXPECT_THROW(parse_move("c3c4"), MalformedMove);
    EXPECT_THROW(parse_move(""), MalformedMove);
    auto s = initial_state(BoardConfig{});
    for (const auto& m : legal_moves(s)) EXPECT_EQ(parse_move(format_move(m)), m);
    EXPECT_FALSE(render_board(s).empty());
}
