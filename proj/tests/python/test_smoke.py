import json
import math
from pathlib import Path

import pytest

import baserace as br

ROOT = Path(__file__).resolve().parents[2]


def small():
    return br.BoardConfig(n=6, a=1, beta=3)


def test_initial_moves_and_apply():
    s = br.GameState.initial(small())
    assert s.side_to_move == "white"
    assert sorted(s.legal_moves()) == ["out-a2", "out-b1"]
    out = s.apply("out-a2")
    nxt = out["state"]
    assert nxt.pawns("white") == ["a2"]
    assert nxt.reserve("white") == 2
    assert nxt.side_to_move == "black"
    assert out["outcome"] is None


def test_rule_errors():
    s = br.GameState.initial(small())
    with pytest.raises(br.MalformedMove):
        s.apply("zz")
    with pytest.raises(br.IllegalMove):
        s.apply("c3-c4")
    with pytest.raises(br.InvalidConfig):
        br.BoardConfig(n=4, a=2, beta=3)


def test_base_distance():
    c = br.BoardConfig()
    assert br.base_distance("a1", "white", c) == 0
    assert br.base_distance("d1", "white", c) == 2


def test_value_network():
    net = br.ValueNetwork.init(br.BoardConfig(), "black", 7)
    assert (net.input_size, net.hidden_size) == (66, 33)
    v = net.evaluate(br.GameState.initial(br.BoardConfig()))
    assert 0.0 < v < 1.0
    assert br.ValueNetwork.from_checkpoint(net.to_checkpoint()) == net
    assert len(br.encode(br.GameState.initial(small()), "white")) == 44


def test_ratio_goldens():
    r1 = (426, 574, (426 * 258 + 574 * 176) / 1000)
    r2 = (109, 891, (109 * 337 + 891 * 68) / 1000)
    r = br.comparison_ratios(r1, r2)
    assert br.round_display(r["speed"], 2) == 2.17
    assert br.round_display(r["advantage_v1"], 2) == 6.07
    assert br.round_display(r["advantage_v2"], 2) == 1.93
    assert math.isinf(br.comparison_ratios((5, 0, 10), (0, 5, 10))["advantage_v2"])


def test_round_robin_goldens():
    cells = (ROOT / "data" / "roundrobin-cells.csv").read_text()
    t = br.round_robin(["9", "12", "13", "16"], cells)
    assert t["totals"] == [1006, 712, -1226, -492]
    assert t["avg_moves"] == [284, 286, 438, 375]
    assert t["total_ranks"] == [1, 2, 4, 3]


def test_plan_run_and_replay(tmp_path):
    plan = json.loads((ROOT / "plans" / "desk.json").read_text())
    for b in plan["batches"]:
        b["stages"] = 1
        b["ccGamesPerStage"] = 5
    text = json.dumps(plan)
    assert json.loads(br.canonical_plan(text))["batches"][0]["id"] == "hc"
    report = br.run_plan(text, tmp_path)
    assert report["ok"], report["error"]
    assert sorted(report["completed"]) == ["cc", "cc-child", "hc"]
    assert br.replay_log(tmp_path / "hc" / "games.jsonl") == (7, 0)

    with pytest.raises(br.PlanError):
        br.canonical_plan('{"batches":[{"id":"a","kind":"CC","whiteInit":{"fromBatch":"a"}}]}')
