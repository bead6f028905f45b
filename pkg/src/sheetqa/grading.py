"""Verifiable reward computation: boxed-answer extraction, binary accuracy
scoring, group-normalized advantages, and the rhythmic-consistency checker."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import EmptySet, GroupTooSmall
from .notation import Meter, parse_tune
from .questions import QARecord
from .theory import measure_capacity

LABELS = ("A", "B", "C", "D")

_BOXED_MARKER = re.compile(r"\\boxed\s*\{")
_WRAPPERS = re.compile(r"\\(?:text|mathrm|mathbf|mathtt)\s*\{([^{}]*)\}")
_STRIP_CHARS = " \t\n.()[]{}:;,*_$'\"`"


def _boxed_groups(response: str) -> list[str]:
    """Contents of every complete \\boxed{...} group, brace-balanced."""
    groups = []
    for m in _BOXED_MARKER.finditer(response):
        depth = 1
        start = m.end()
        for i in range(start, len(response)):
            ch = response[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    groups.append(response[start:i])
                    break
    return groups


def _normalize(content: str) -> str | None:
    content = _WRAPPERS.sub(r"\1", content)
    content = content.strip(_STRIP_CHARS).upper()
    return content if content in LABELS else None


def extract_answer(response: str) -> str | None:
    """Label from the last complete boxed group, or None."""
    label, _ = extract_answer_detail(response)
    return label


def extract_answer_detail(response: str) -> tuple[str | None, str | None]:
    """(label, failure reason); the last boxed group wins when several exist."""
    groups = _boxed_groups(response)
    if not groups:
        return None, "no_boxed"
    label = _normalize(groups[-1])
    if label is None:
        return None, "unparseable"
    return label, None


@dataclass(frozen=True)
class GradeResult:
    record_id: str
    extracted: str | None
    reward: int
    failure_reason: str | None  # no_boxed | unparseable | wrong | None


def score(response: str, record: QARecord) -> GradeResult:
    """Binary accuracy reward; no partial credit, no format signal."""
    extracted, reason = extract_answer_detail(response)
    if extracted is None:
        return GradeResult(record.id, None, 0, reason)
    if extracted != record.answer_label:
        return GradeResult(record.id, extracted, 0, "wrong")
    return GradeResult(record.id, extracted, 1, None)


@dataclass(frozen=True)
class AdvantageVector:
    values: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.values)


def group_advantages(rewards) -> AdvantageVector:
    """Group-relative advantages: (r - mean) / population std.

    A group whose rewards are all equal carries no signal and maps to zeros
    rather than dividing by an epsilon."""
    rewards = [float(r) for r in rewards]
    n = len(rewards)
    if n < 2:
        raise GroupTooSmall(f"group of {n}, need at least 2")
    mean = sum(rewards) / n
    variance = sum((r - mean) ** 2 for r in rewards) / n
    if variance == 0.0:
        return AdvantageVector((0.0,) * n)
    std = math.sqrt(variance)
    return AdvantageVector(tuple((r - mean) / std for r in rewards))


# ---------------------------------------------------------------------------
# rhythmic consistency


@dataclass(frozen=True)
class MeasureSum:
    duration: Fraction  # in unit-note-length counts
    capacity: Fraction
    ok: bool


@dataclass(frozen=True)
class RcVerdict:
    sample_id: str
    syntax_ok: bool
    per_measure: tuple[MeasureSum, ...]
    score: int
    failure: str | None = None  # syntax | measure-count | capacity | None

    @property
    def measure_count(self) -> int:
        return len(self.per_measure)


# Non-ABC pitch spellings such as "Bb" or "C#"; ABC writes these _B / ^C.
# The ASCII "Xb" form can also be read as two ABC notes, but continuations
# are graded strictly: any letter immediately followed by an accidental
# suffix fails the syntax stage.
_NON_ABC_PITCH = re.compile(r"[A-G][#b\u266d\u266f]")

EXPECTED_MEASURES = 4


def check_rhythmic_consistency(
    continuation: str, meter: Meter, unit: Fraction, sample_id: str = ""
) -> RcVerdict:
    """Two-stage check: notation syntax, then exact per-measure sums.

    The continuation may carry its own header lines; a declared L: governs its
    notation, while the given meter always defines the expected capacity.
    Score is 1 only when the syntax is clean and all four measures sum exactly
    to capacity."""
    lines = continuation.replace("\r\n", "\n").split("\n")
    body = [ln for ln in lines if not re.match(r"^\s*[A-Za-z]:", ln)]
    if _NON_ABC_PITCH.search("\n".join(body)):
        return RcVerdict(sample_id, False, (), 0, "syntax")
    has_unit = any(re.match(r"^\s*L:", ln) for ln in lines)
    text = continuation if has_unit else f"L:{unit.numerator}/{unit.denominator}\n{continuation}"
    try:
        tune = parse_tune(text)
    except Exception:
        return RcVerdict(sample_id, False, (), 0, "syntax")
    capacity = measure_capacity(meter, tune.header.unit_length)
    sums = tuple(
        MeasureSum(m.duration, capacity, m.duration == capacity) for m in tune.measures
    )
    if len(sums) != EXPECTED_MEASURES:
        return RcVerdict(sample_id, True, sums, 0, "measure-count")
    if not all(s.ok for s in sums):
        return RcVerdict(sample_id, True, sums, 0, "capacity")
    return RcVerdict(sample_id, True, sums, 1, None)


def rc_score(verdicts) -> float:
    """Mean of the binary scores."""
    verdicts = list(verdicts)
    if not verdicts:
        raise EmptySet("no rhythmic-consistency verdicts")
    return sum(v.score for v in verdicts) / len(verdicts)
