#include "baserace/notation.h"

#include <cctype>
#include <sstream>

namespace baserace {

std::string format_cell(CellCoord c) {
    std::string out(1, static_cast<char>('a' + c.x));
    out += std::to_string(c.y + 1);
    return out;
}

std::string format_move(const Move& m) {
    if (m.kind == MoveKind::BaseExit) return "out-" + format_cell(m.to);
    return format_cell(m.from) + "-" + format_cell(m.to);
}

CellCoord parse_cell(std::string_view text) {
    if (text.size() < 2 || !std::islower(static_cast<unsigned char>(text[0])))
        throw MalformedMove("bad cell '" + std::string(text) + "'");
    int rank = 0;
    for (std::size_t i = 1; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i])) || i > 3)
            throw MalformedMove("bad cell '" + std::string(text) + "'");
        rank = rank * 10 + (text[i] - '0');
    }
    if (rank < 1) throw MalformedMove("bad rank in '" + std::string(text) + "'");
    return {text[0] - 'a', rank - 1};
}

Move parse_move(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    const auto dash = text.find('-');
    if (dash == std::string_view::npos || text.find('-', dash + 1) != std::string_view::npos)
        throw MalformedMove("expected '<cell>-<cell>' or 'out-<cell>', got '" + std::string(text) + "'");
    const auto lhs = text.substr(0, dash);
    const auto rhs = text.substr(dash + 1);
    if (lhs == "out") return Move::exit_to(parse_cell(rhs));
    return Move::step(parse_cell(lhs), parse_cell(rhs));
}

std::string render_board(const GameState& s) {
    const int n = s.config().n;
    std::ostringstream os;
    for (int y = n - 1; y >= 0; --y) {
        os << (y + 1 < 10 ? " " : "") << (y + 1) << ' ';
        for (int x = 0; x < n; ++x) {
            const CellCoord c{x, y};
            char ch = '.';
            if (s.in_base(c, Player::White)) ch = '#';
            else if (s.in_base(c, Player::Black)) ch = '%';
            else if (s.at(c) == Occupant::White) ch = 'W';
            else if (s.at(c) == Occupant::Black) ch = 'B';
            os << ch << ' ';
        }
        os << '\n';
    }
    os << "   ";
    for (int x = 0; x < n; ++x) os << static_cast<char>('a' + x) << ' ';
    os << "\nwhite reserve " << s.reserve(Player::White) << ", black reserve "
       << s.reserve(Player::Black) << ", " << to_string(s.side_to_move()) << " to move, ply "
       << s.move_count() << '\n';
    return os.str();
}

}  // namespace baserace
