"""reward_bridge: rewards and group advantages for RL training loops,
relayed from the sheetqa grader over its JSONL batch protocol."""

from .bridge import (
    BridgeConfig,
    BridgeError,
    ShapeError,
    advantages,
    grade_batch,
    group_advantages,
)

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "BridgeError",
    "ShapeError",
    "advantages",
    "grade_batch",
    "group_advantages",
]
