"""Subprocess transport to the grader CLI plus group-advantage math.

The bridge is a pure relay: rewards come verbatim from the grader's results
file, and the advantage normalization reproduces the grader's formula so a
training loop never needs to import it."""

from __future__ import annotations

import json
import math
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path


class BridgeError(Exception):
    """Subprocess or I/O failure while talking to the grader."""


class ShapeError(BridgeError):
    """Reward list length is not divisible by the group size."""


@dataclass(frozen=True)
class BridgeConfig:
    grader: str = "sheetqa"
    group_size: int = 8
    timeout: float = 120.0

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group size must be at least 2")


def grade_batch(
    responses: list[tuple[str, str]],
    gold_path: str | Path,
    config: BridgeConfig | None = None,
) -> list[int]:
    """Binary rewards for (record_id, response_text) pairs, in input order.

    Spawns ``<grader> grade pred.jsonl gold.jsonl out.jsonl`` and reads the
    results back; the numbers are exactly what the CLI writes."""
    config = config or BridgeConfig()
    if not responses:
        return []
    gold_path = Path(gold_path)
    if not gold_path.is_file():
        raise BridgeError(f"gold file not readable: {gold_path}")
    with tempfile.TemporaryDirectory(prefix="reward-bridge-") as tmp:
        pred = Path(tmp) / "pred.jsonl"
        out = Path(tmp) / "results.jsonl"
        with open(pred, "w", encoding="utf-8", newline="\n") as fh:
            for record_id, text in responses:
                fh.write(
                    json.dumps(
                        {"record_id": record_id, "response_text": text},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        cmd = [config.grader, "grade", str(pred), str(gold_path), str(out)]
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=config.timeout
            )
        except OSError as exc:
            raise BridgeError(f"cannot run grader {config.grader!r}: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise BridgeError(f"grader timed out after {config.timeout}s") from exc
        if proc.returncode != 0:
            detail = proc.stderr.strip() or proc.stdout.strip()
            raise BridgeError(f"grader exited {proc.returncode}: {detail}")
        try:
            rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines() if line]
        except (OSError, json.JSONDecodeError) as exc:
            raise BridgeError(f"cannot read grader results: {exc}") from exc
    if len(rows) != len(responses):
        raise BridgeError(
            f"grader returned {len(rows)} results for {len(responses)} responses"
        )
    return [int(row["reward"]) for row in rows]


def group_advantages(rewards) -> list[float]:
    """(r - mean) / population std; an all-equal group maps to zeros."""
    rewards = [float(r) for r in rewards]
    n = len(rewards)
    if n < 2:
        raise ShapeError(f"group of {n}, need at least 2")
    mean = sum(rewards) / n
    variance = sum((r - mean) ** 2 for r in rewards) / n
    if variance == 0.0:
        return [0.0] * n
    std = math.sqrt(variance)
    return [(r - mean) / std for r in rewards]


def advantages(rewards, group_size: int | None = None, config: BridgeConfig | None = None) -> list[list[float]]:
    """Advantage vectors for consecutive groups of ``group_size`` rewards."""
    n = group_size if group_size is not None else (config or BridgeConfig()).group_size
    rewards = list(rewards)
    if n < 2:
        raise ShapeError("group size must be at least 2")
    if len(rewards) % n:
        raise ShapeError(f"{len(rewards)} rewards do not divide into groups of {n}")
    return [group_advantages(rewards[i : i + n]) for i in range(0, len(rewards), n)]
