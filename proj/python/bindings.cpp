// Python bindings for the rules engine, value network, plans and metrics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "baserace/notation.h"
#include "baserace/orchestrator.h"
#include "baserace/tournament.h"

namespace py = pybind11;
using namespace baserace;

namespace {

Player player_from(const std::string& s) {
    if (s == "white") return Player::White;
    if (s == "black") return Player::Black;
    throw py::value_error("player must be 'white' or 'black'");
}

py::object outcome_dict(const std::optional<GameOutcome>& o) {
    if (!o) return py::none();
    py::dict d;
    d["winner"] = std::string(to_string(o->winner));
    d["reason"] = std::string(to_string(o->reason));
    d["move_count"] = o->final_move_count;
    return std::move(d);
}

std::vector<std::string> move_texts(const std::vector<Move>& moves) {
    std::vector<std::string> out;
    out.reserve(moves.size());
    for (const auto& m : moves) out.push_back(format_move(m));
    return out;
}

py::object ratio_value(const Ratio& r) {
    if (r.infinite) return py::float_(std::numeric_limits<double>::infinity());
    return py::float_(r.value);
}

RoundResult round_from(int white_wins, int black_wins, double avg_moves, int draws) {
    RoundResult r;
    r.white_wins = white_wins;
    r.black_wins = black_wins;
    r.draws = draws;
    r.avg_moves = avg_moves;
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Base-race rules, TD value networks, experiment plans and tournament metrics";

    py::register_exception<IllegalMove>(m, "IllegalMove", PyExc_ValueError);
    py::register_exception<TerminalState>(m, "TerminalState", PyExc_RuntimeError);
    py::register_exception<MalformedMove>(m, "MalformedMove", PyExc_ValueError);
    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<PlanError>(m, "PlanError", PyExc_ValueError);
    py::register_exception<DegenerateCounts>(m, "DegenerateCounts", PyExc_ArithmeticError);
    py::register_exception<IncompleteMatrix>(m, "IncompleteMatrix", PyExc_ValueError);

    py::class_<BoardConfig>(m, "BoardConfig")
        .def(py::init([](int n, int a, int beta, int move_cap) {
                 BoardConfig c{n, a, beta, move_cap};
                 c.validate();
                 return c;
             }),
             py::arg("n") = 8, py::arg("a") = 2, py::arg("beta") = 10, py::arg("move_cap") = 3000)
        .def_readonly("n", &BoardConfig::n)
        .def_readonly("a", &BoardConfig::a)
        .def_readonly("beta", &BoardConfig::beta)
        .def_readonly("move_cap", &BoardConfig::move_cap)
        .def("__repr__", [](const BoardConfig& c) {
            return "BoardConfig(n=" + std::to_string(c.n) + ", a=" + std::to_string(c.a) +
                   ", beta=" + std::to_string(c.beta) + ", move_cap=" + std::to_string(c.move_cap) + ")";
        });

    py::class_<GameState>(m, "GameState")
        .def_static("initial", &GameState::initial, py::arg("config"))
        .def_property_readonly("config", &GameState::config)
        .def_property_readonly("side_to_move", [](const GameState& s) { return std::string(to_string(s.side_to_move())); })
        .def_property_readonly("move_count", &GameState::move_count)
        .def_property_readonly("terminal", &GameState::terminal)
        .def_property_readonly("outcome", [](const GameState& s) { return outcome_dict(s.outcome()); })
        .def("reserve", [](const GameState& s, const std::string& p) { return s.reserve(player_from(p)); })
        .def("total", [](const GameState& s, const std::string& p) { return s.total(player_from(p)); })
        .def("pawns",
             [](const GameState& s, const std::string& p) {
                 std::vector<std::string> cells;
                 for (const auto& c : s.pawns(player_from(p))) cells.push_back(format_cell(c));
                 return cells;
             })
        .def("legal_moves", [](const GameState& s) { return move_texts(s.legal_moves()); },
             "Legal moves in notation, in engine order.")
        .def("apply",
             [](const GameState& s, const std::string& text) {
                 const auto out = s.apply(parse_move(text));
                 py::dict d;
                 d["state"] = out.next;
                 d["white_lost"] = out.white_lost;
                 d["black_lost"] = out.black_lost;
                 d["outcome"] = outcome_dict(out.terminal);
                 return d;
             },
             py::arg("move"))
        .def("render", &render_board)
        .def("__eq__", [](const GameState& a, const GameState& b) { return a == b; });

    m.def(
        "base_distance",
        [](const std::string& cell, const std::string& player, const BoardConfig& c) {
            return base_distance(parse_cell(cell), player_from(player), c);
        },
        py::arg("cell"), py::arg("player"), py::arg("config"));

    py::class_<ValueNetwork>(m, "ValueNetwork")
        .def_static(
            "init",
            [](const BoardConfig& c, const std::string& owner, std::uint64_t seed) {
                return ValueNetwork::init(c, player_from(owner), seed);
            },
            py::arg("config"), py::arg("owner"), py::arg("seed"))
        .def_static("from_checkpoint", &checkpoint_from_string, py::arg("text"))
        .def("to_checkpoint", &checkpoint_to_string)
        .def_property_readonly("owner", [](const ValueNetwork& n) { return std::string(to_string(n.owner())); })
        .def_property_readonly("input_size", [](const ValueNetwork& n) { return n.topology().input; })
        .def_property_readonly("hidden_size", [](const ValueNetwork& n) { return n.topology().hidden; })
        .def("evaluate", [](const ValueNetwork& n, const GameState& s) { return forward(n, encode_afterstate(n, s)); },
             "Win probability of the owner in `state`.")
        .def("__eq__", [](const ValueNetwork& a, const ValueNetwork& b) { return a == b; });

    m.def(
        "encode",
        [](const GameState& s, const std::string& perspective) {
            return encode_afterstate(s, player_from(perspective));
        },
        py::arg("state"), py::arg("perspective"));

    m.def("canonical_plan", [](const std::string& text) { return plan_to_json(plan_from_json(text)); },
          "Validates a plan document and returns its canonical JSON.");
    m.def(
        "run_plan",
        [](const std::string& plan_text, const std::filesystem::path& out, bool resume, int jobs) {
            const auto plan = plan_from_json(plan_text);
            RunOptions opts;
            opts.resume = resume;
            opts.jobs = jobs;
            PlanReport r;
            {
                py::gil_scoped_release release;
                r = run_plan(plan, out, opts);
            }
            py::dict d;
            d["ok"] = r.ok();
            d["completed"] = r.completed;
            d["skipped"] = r.skipped;
            d["failed_batch"] = r.failed_batch ? py::object(py::str(*r.failed_batch)) : py::object(py::none());
            d["error"] = r.error;
            d["not_run"] = r.not_run;
            return d;
        },
        py::arg("plan"), py::arg("out"), py::arg("resume") = false, py::arg("jobs") = 1);
    m.def(
        "replay_log",
        [](const std::filesystem::path& log) {
            const auto records = read_records(log);
            int diverged = 0;
            for (const auto& r : records) {
                try {
                    if (replay_record(r) != r.outcome) ++diverged;
                } catch (const std::exception&) {
                    ++diverged;
                }
            }
            return py::make_tuple(records.size(), diverged);
        },
        py::arg("log"), "Returns (games, diverged) for a games.jsonl file.");

    m.def("round_display", &round_display, py::arg("value"), py::arg("digits"));
    m.def(
        "comparison_ratios",
        [](py::tuple round1, py::tuple round2) {
            ComparisonResult c;
            c.round1 = round_from(round1[0].cast<int>(), round1[1].cast<int>(), round1[2].cast<double>(),
                                  round1.size() > 3 ? round1[3].cast<int>() : 0);
            c.round2 = round_from(round2[0].cast<int>(), round2[1].cast<int>(), round2[2].cast<double>(),
                                  round2.size() > 3 ? round2[3].cast<int>() : 0);
            const auto r = ratio_report(c);
            py::dict d;
            d["speed"] = ratio_value(r.speed);
            d["advantage_v1"] = ratio_value(r.advantage_v1);
            d["advantage_v2"] = ratio_value(r.advantage_v2);
            return d;
        },
        py::arg("round1"), py::arg("round2"),
        "Each round is (white_wins, black_wins, avg_moves[, draws]). Infinite ratios come back as inf.");
    m.def(
        "round_robin",
        [](const std::vector<std::string>& batches, const std::string& cells_csv) {
            const auto t = build_round_robin(batches, parse_cells_csv(cells_csv));
            py::dict d;
            d["white_sums"] = t.white_sums;
            d["white_ranks"] = t.white_ranks;
            d["black_sums"] = t.black_sums;
            d["black_ranks"] = t.black_ranks;
            d["white_move_sums"] = t.white_move_sums;
            d["black_move_sums"] = t.black_move_sums;
            d["totals"] = t.totals;
            d["total_ranks"] = t.total_ranks;
            d["avg_moves"] = t.avg_moves_display;
            d["avg_move_ranks"] = t.avg_move_ranks;
            d["rank_ties"] = t.rank_ties;
            d["csv"] = round_robin_csv(t);
            return d;
        },
        py::arg("batches"), py::arg("cells_csv"));
}
