#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "baserace/record.h"
#include "baserace/td.h"

using namespace baserace;
namespace fs = std::filesystem;

namespace {

BoardConfig small() {
    BoardConfig c;
    c.n = 6;
    c.a = 1;
    c.beta = 3;
    return c;
}

GameRecord sample_record(std::uint64_t seed) {
    auto w = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::White, 1));
    auto b = std::make_shared<ValueNetwork>(ValueNetwork::init(small(), Player::Black, 2));
    LearnerAgent white(w, 0.9, false), black(b, 0.9, false);
    auto r = play_evaluation_game(white, black, small(), seed).record;
    r.game_id = 17;
    r.batch_id = "batch-9";
    r.stage_index = 2;
    r.kind = GameKind::HC;
    return r;
}

}  // namespace

TEST(Record, JsonRoundTrip) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = sample_record(seed);
        const auto line = record_to_json(r);
        EXPECT_EQ(line.find('\n'), std::string::npos);
        EXPECT_EQ(record_from_json(line), r);
        auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["schemaVersion"], 1);
        EXPECT_EQ(j["gameKind"], "HC");
        EXPECT_EQ(j["moves"].size(), r.moves.size());
    }
}

TEST(Record, ReplayReproducesOutcome) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto r = sample_record(seed);
        EXPECT_EQ(replay_record(r), r.outcome);
    }
}

TEST(Record, TamperedRecordsAreCaught) {
    auto r = sample_record(3);
    ASSERT_GT(r.moves.size(), 4u);

    auto truncated = r;
    truncated.moves.pop_back();
    truncated.captures.pop_back();
    EXPECT_THROW(replay_record(truncated), ReplayDivergence);

    auto wrong_outcome = r;
    wrong_outcome.outcome.winner = r.outcome.winner == Winner::White ? Winner::Black : Winner::White;
    EXPECT_THROW(replay_record(wrong_outcome), ReplayDivergence);

    auto wrong_count = r;
    wrong_count.move_count += 1;
    EXPECT_THROW(replay_record(wrong_count), ReplayDivergence);

    auto bad_move = r;
    bad_move.moves[2] = "a1-a2";
    bool caught = false;
    try {
        replay_record(bad_move);
    } catch (const ReplayDivergence&) {
        caught = true;
    } catch (const IllegalMove&) {
        caught = true;
    }
    EXPECT_TRUE(caught);

    auto bad_capture = r;
    bad_capture.captures[0][0] += 1;
    EXPECT_THROW(replay_record(bad_capture), ReplayDivergence);
}

TEST(Record, ReadJsonl) {
    auto dir = fs::temp_directory_path() / "baserace_record_test";
    fs::create_directories(dir);
    std::vector<GameRecord> written;
    {
        std::ofstream out(dir / "games.jsonl");
        for (std::uint64_t s = 0; s < 5; ++s) {
            written.push_back(sample_record(s));
            out << record_to_json(written.back()) << '\n';
        }
    }
    EXPECT_EQ(read_records(dir / "games.jsonl"), written);
    fs::remove_all(dir);
}
