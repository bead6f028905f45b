"""Reward computation: boxed extraction, accuracy scoring, group advantages,
and the rhythmic-consistency checker."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from sheetqa.dataset import object_to_record
from sheetqa.errors import EmptySet, GroupTooSmall
from sheetqa.grading import (
    check_rhythmic_consistency,
    extract_answer,
    extract_answer_detail,
    group_advantages,
    rc_score,
    score,
)
from sheetqa.notation import Meter

# ---------------------------------------------------------------------------
# boxed extraction

EXTRACTION_CASES = [
    (r"reasoning \boxed{C}", "C"),
    (r"\boxed{A}", "A"),
    (r"\boxed{a}", "A"),
    (r"\boxed{(B)}", "B"),
    (r"\boxed{B.}", "B"),
    (r"\boxed{ C }", "C"),
    (r"\boxed{**D**}", "D"),
    (r"$\boxed{A}$", "A"),
    (r"\boxed{\text{B}}", "B"),
    (r"\boxed{\mathrm{C}}", "C"),
    (r"\boxed {D}", "D"),
    (r"\boxed{'C'}", "C"),
    (r"\boxed{[A]}", "A"),
    (r"\boxed{d}", "D"),
    (r"\boxed{A} ... actually \boxed{B}", "B"),
    (r"\boxed{A}\boxed{B}\boxed{C}", "C"),
    (r"the answer is C", None),
    (r"", None),
    (r"\boxed{}", None),
    (r"\boxed{E}", None),
    (r"\boxed{AB}", None),
    (r"\boxed{The answer is A}", None),
    (r"\boxed{A", None),  # unterminated group
    (r"\boxed{1}", None),
    (r"boxed{A}", None),  # no backslash
]


@pytest.mark.parametrize("response,expected", EXTRACTION_CASES)
def test_extract_answer_cases(response, expected):
    assert extract_answer(response) == expected


def test_extraction_failure_reasons():
    assert extract_answer_detail("no box at all") == (None, "no_boxed")
    assert extract_answer_detail(r"\boxed{E}") == (None, "unparseable")
    assert extract_answer_detail(r"\boxed{A} then \boxed{junk}") == (None, "unparseable")
    assert extract_answer_detail(r"\boxed{B}") == ("B", None)


def _record(seed=0):
    return object_to_record(
        {
            "class_name": "TimeSignatureQuestion",
            "question": "Select the correct time signature for the music score.",
            "abc_context": "L:1/8\nK:C\n| cccc dddd |",
            "correct_answer": "2/2",
            "incorrect_answer1": "9/8",
            "incorrect_answer2": "12/8",
            "incorrect_answer3": "7/8",
            "category": "Rhythm",
            "seed": seed,
            "id": "rhythms-0000",
        }
    )


def test_score_correct_label():
    record = _record(seed=5)
    result = score(rf"thinking... \boxed{{{record.answer_label}}}", record)
    assert result.reward == 1 and result.failure_reason is None


def test_score_wrong_label():
    record = _record(seed=5)
    wrong = next(l for l in "ABCD" if l != record.answer_label)
    result = score(rf"\boxed{{{wrong}}}", record)
    assert result.reward == 0 and result.failure_reason == "wrong"
    assert result.extracted == wrong


def test_score_no_box_is_zero_not_partial():
    result = score("The answer is likely B", _record())
    assert result.reward == 0
    assert result.failure_reason == "no_boxed"
    assert result.extracted is None


def test_score_pure_function():
    record = _record(seed=9)
    response = r"\boxed{A}"
    assert score(response, record) == score(response, record)


# ---------------------------------------------------------------------------
# group advantages


def test_advantages_alternating_fixture():
    assert group_advantages([1, 0, 1, 0]).values == (1.0, -1.0, 1.0, -1.0)


def test_advantages_degenerate_groups():
    assert group_advantages([1, 1, 1, 1]).values == (0.0, 0.0, 0.0, 0.0)
    assert group_advantages([0, 0]).values == (0.0, 0.0)


def test_advantages_single_success_fixture():
    values = group_advantages([1, 0, 0, 0]).values
    assert values[0] == pytest.approx(1.7320508075688772, abs=1e-12)
    for v in values[1:]:
        assert v == pytest.approx(-0.5773502691896257, abs=1e-12)


def test_advantages_group_too_small():
    with pytest.raises(GroupTooSmall):
        group_advantages([1])


def test_advantages_normalization_properties():
    rng = random.Random(13)
    trials = 0
    while trials < 1000:
        n = rng.randrange(2, 17)
        rewards = [rng.randrange(2) for _ in range(n)]
        if len(set(rewards)) == 1:
            continue
        values = group_advantages(rewards).values
        mean = sum(values) / n
        std = math.sqrt(sum(v * v for v in values) / n)
        assert abs(mean) < 1e-9
        assert abs(std - 1) < 1e-9
        group_mean = sum(rewards) / n
        for reward, value in zip(rewards, values):
            assert (value > 0) == (reward > group_mean)
        trials += 1


# ---------------------------------------------------------------------------
# rhythmic consistency


def _measures(*sums, unit=8):
    """Four-ish measures of 'a' notes with the given unit sums."""
    bars = []
    for total in sums:
        tokens, left = [], total
        while left > 0:
            step = min(4, left)
            tokens.append(f"a{step}" if step > 1 else "a")
            left -= step
        bars.append(" ".join(tokens))
    return "| " + " | ".join(bars) + " |"


def test_rc_all_full():
    verdict = check_rhythmic_consistency(
        _measures(6, 6, 6, 6), Meter(3, 4), Fraction(1, 8), sample_id="s1"
    )
    assert verdict.score == 1 and verdict.syntax_ok
    assert all(m.ok for m in verdict.per_measure)


def test_rc_one_short_measure_flagged():
    verdict = check_rhythmic_consistency(
        _measures(6, 5, 6, 6), Meter(3, 4), Fraction(1, 8)
    )
    assert verdict.score == 0
    assert verdict.failure == "capacity"
    flags = [m.ok for m in verdict.per_measure]
    assert flags == [True, False, True, True]
    assert verdict.per_measure[1].duration == 5
    assert verdict.per_measure[1].capacity == 6


def test_rc_non_abc_spelling_fails_syntax():
    verdict = check_rhythmic_consistency(
        "| Bb2 c4 | c6 | c6 | c6 |", Meter(3, 4), Fraction(1, 8)
    )
    assert not verdict.syntax_ok
    assert verdict.score == 0
    assert verdict.failure == "syntax"


def test_rc_unicode_accidental_fails_syntax():
    verdict = check_rhythmic_consistency(
        "| B♭2 c4 | c6 | c6 | c6 |", Meter(3, 4), Fraction(1, 8)
    )
    assert not verdict.syntax_ok


def test_rc_parse_failure_fails_syntax():
    verdict = check_rhythmic_consistency(
        "| c2 > d4 | c6 | c6 | c6 |", Meter(3, 4), Fraction(1, 8)
    )
    assert not verdict.syntax_ok and verdict.score == 0


def test_rc_measure_count_mismatch_reported_distinctly():
    verdict = check_rhythmic_consistency(
        _measures(6, 6, 6), Meter(3, 4), Fraction(1, 8)
    )
    assert verdict.syntax_ok
    assert verdict.score == 0
    assert verdict.failure == "measure-count"
    assert verdict.measure_count == 3


def test_rc_headers_in_continuation_respected():
    text = "L:1/4\nK:C\n| a3 | a3 | a3 | a3 |"
    verdict = check_rhythmic_consistency(text, Meter(3, 4), Fraction(1, 8))
    assert verdict.score == 1  # declared L:1/4 governs the notation
    assert verdict.per_measure[0].capacity == 3


def test_rc_agrees_with_validate_measures():
    from sheetqa.notation import parse_tune
    from sheetqa.theory import validate_measures

    text = "| a4 a2 | (3aaa a2 a2 | a6 | a2 a2 a2 |"
    verdict = check_rhythmic_consistency(text, Meter(3, 4), Fraction(1, 8))
    report = validate_measures(parse_tune("L:1/8\n" + text), Meter(3, 4))
    assert [m.ok for m in verdict.per_measure] == [m.full for m in report.measures]
    assert [m.duration for m in verdict.per_measure] == [
        m.duration for m in report.measures
    ]


def test_rc_score_aggregation():
    class V:
        def __init__(self, s):
            self.score = s

    assert rc_score([V(1), V(1)]) == 1.0
    assert rc_score([V(1), V(0)]) == 0.5
    scores = [V(1)] * 152 + [V(0)] * 48
    assert f"{100 * rc_score(scores):.2f}" == "76.00"
    with pytest.raises(EmptySet):
        rc_score([])


def test_rc_constructed_suite_matches_hand_labels():
    rng = random.Random(21)
    meter, unit = Meter(3, 4), Fraction(1, 8)
    cases = []
    for i in range(50):
        kind = i % 5
        if kind in (0, 1):  # valid
            cases.append((_measures(6, 6, 6, 6), 1))
        elif kind == 2:  # one bad measure
            sums = [6, 6, 6, 6]
            sums[rng.randrange(4)] += rng.choice((-2, -1, 1, 2))
            cases.append((_measures(*sums), 0))
        elif kind == 3:  # wrong measure count
            cases.append((_measures(6, 6, 6, 6, 6), 0))
        else:  # syntax violation
            cases.append(("| C#2 c4 | c6 | c6 | c6 |", 0))
    verdicts = [check_rhythmic_consistency(text, meter, unit) for text, _ in cases]
    assert [v.score for v in verdicts] == [label for _, label in cases]
