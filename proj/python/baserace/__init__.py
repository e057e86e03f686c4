"""Base-race rules engine, TD(lambda) value networks, experiment plans and tournament metrics."""

from ._core import (
    BoardConfig,
    DegenerateCounts,
    GameState,
    IllegalMove,
    IncompleteMatrix,
    InvalidConfig,
    MalformedMove,
    PlanError,
    TerminalState,
    ValueNetwork,
    base_distance,
    canonical_plan,
    comparison_ratios,
    encode,
    replay_log,
    round_display,
    round_robin,
    run_plan,
)

__all__ = [
    "BoardConfig",
    "DegenerateCounts",
    "GameState",
    "IllegalMove",
    "IncompleteMatrix",
    "InvalidConfig",
    "MalformedMove",
    "PlanError",
    "TerminalState",
    "ValueNetwork",
    "base_distance",
    "canonical_plan",
    "comparison_ratios",
    "encode",
    "replay_log",
    "round_display",
    "round_robin",
    "run_plan",
]
