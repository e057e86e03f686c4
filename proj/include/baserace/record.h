#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "baserace/game.h"

namespace baserace {

inline constexpr int kRecordSchemaVersion = 1;

enum class GameKind : std::uint8_t { CC, HC };

/// One game as persisted in games.jsonl. Replaying `moves` from the initial
/// position reproduces `captures`, `outcome` and `move_count` exactly.
struct GameRecord {
    std::int64_t game_id = 0;
    std::string batch_id;
    int stage_index = 0;
    GameKind kind = GameKind::CC;
    BoardConfig board;
    std::vector<std::string> moves;
    std::vector<std::array<int, 2>> captures;  // {white lost, black lost} per ply
    GameOutcome outcome;
    int move_count = 0;
    std::uint64_t seed = 0;

    bool operator==(const GameRecord&) const = default;
};

class ReplayDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-line JSON, keys sorted.
std::string record_to_json(const GameRecord& r);
GameRecord record_from_json(const std::string& line);

std::vector<GameRecord> read_records(const std::filesystem::path& jsonl);

/// Re-executes the record through the rules engine. Throws ReplayDivergence
/// when the recorded captures, length, or outcome disagree, and IllegalMove
/// when a recorded move is not legal.
GameOutcome replay_record(const GameRecord& r);

}  // namespace baserace
