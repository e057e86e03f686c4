#include "baserace/record.h"

#include <fstream>

#include <json.hpp>

#include "baserace/notation.h"
#include "baserace/value_net.h"

namespace baserace {

using nlohmann::json;

std::string record_to_json(const GameRecord& r) {
    json j;
    j["schemaVersion"] = kRecordSchemaVersion;
    j["gameId"] = r.game_id;
    j["batchId"] = r.batch_id;
    j["stageIndex"] = r.stage_index;
    j["gameKind"] = r.kind == GameKind::CC ? "CC" : "HC";
    j["board"] = {{"n", r.board.n}, {"a", r.board.a}, {"beta", r.board.beta}, {"moveCap", r.board.move_cap}};
    j["moves"] = r.moves;
    j["captures"] = r.captures;
    j["outcome"] = {{"winner", to_string(r.outcome.winner)},
                    {"reason", to_string(r.outcome.reason)},
                    {"finalMoveCount", r.outcome.final_move_count}};
    j["moveCount"] = r.move_count;
    j["seed"] = r.seed;
    return j.dump();
}

GameRecord record_from_json(const std::string& line) {
    try {
        const json j = json::parse(line);
        if (j.at("schemaVersion").get<int>() != kRecordSchemaVersion)
            throw FormatError("unsupported record schemaVersion");
        GameRecord r;
        r.game_id = j.at("gameId").get<std::int64_t>();
        r.batch_id = j.at("batchId").get<std::string>();
        r.stage_index = j.at("stageIndex").get<int>();
        const auto kind = j.at("gameKind").get<std::string>();
        if (kind != "CC" && kind != "HC") throw FormatError("bad gameKind '" + kind + "'");
        r.kind = kind == "CC" ? GameKind::CC : GameKind::HC;
        const auto& b = j.at("board");
        r.board = BoardConfig{b.at("n").get<int>(), b.at("a").get<int>(), b.at("beta").get<int>(),
                              b.at("moveCap").get<int>()};
        r.moves = j.at("moves").get<std::vector<std::string>>();
        r.captures = j.at("captures").get<std::vector<std::array<int, 2>>>();
        const auto& o = j.at("outcome");
        r.outcome = GameOutcome{winner_from_string(o.at("winner").get<std::string>()),
                                end_reason_from_string(o.at("reason").get<std::string>()),
                                o.at("finalMoveCount").get<int>()};
        r.move_count = j.at("moveCount").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed game record: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("malformed game record: ") + e.what());
    }
}

std::vector<GameRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<GameRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(record_from_json(line));
    }
    return out;
}

GameOutcome replay_record(const GameRecord& r) {
    if (r.captures.size() != r.moves.size())
        throw ReplayDivergence("game " + std::to_string(r.game_id) + ": captures and moves differ in length");
    GameState s = GameState::initial(r.board);
    for (std::size_t i = 0; i < r.moves.size(); ++i) {
        if (s.terminal())
            throw ReplayDivergence("game " + std::to_string(r.game_id) + ": moves continue past the end");
        const auto out = s.apply(parse_move(r.moves[i]));
        if (out.white_lost != r.captures[i][0] || out.black_lost != r.captures[i][1])
            throw ReplayDivergence("game " + std::to_string(r.game_id) + ": capture mismatch at ply " +
                                   std::to_string(i + 1));
        s = out.next;
    }
    if (!s.terminal()) throw ReplayDivergence("game " + std::to_string(r.game_id) + ": replay did not end");
    if (!(*s.outcome() == r.outcome) || s.move_count() != r.move_count)
        throw ReplayDivergence("game " + std::to_string(r.game_id) + ": outcome differs from the record");
    return *s.outcome();
}

}  // namespace baserace
