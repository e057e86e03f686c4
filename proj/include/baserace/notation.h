#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "baserace/game.h"

namespace baserace {

// Cells are written as a file letter and a 1-based rank: (0,0) is "a1".
// Steps are "<from>-<to>" and base exits "out-<to>".

class MalformedMove : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string format_cell(CellCoord c);
std::string format_move(const Move& m);

CellCoord parse_cell(std::string_view text);
/// Parses move text. Throws MalformedMove; legality is not checked.
Move parse_move(std::string_view text);

/// Plain-text board diagram for terminal play, rank n at the top.
std::string render_board(const GameState& s);

}  // namespace baserace
