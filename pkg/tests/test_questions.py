"""Template generators: reference fixtures, falsification, determinism,
and option shuffling."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from sheetqa.errors import Ineligible, InsufficientCandidates
from sheetqa.notation import Key, Meter, parse_meter, parse_tune
from sheetqa.questions import (
    ChoiceSet,
    METER_POOL,
    gen_bar_placement,
    gen_chord_id,
    gen_chord_root_id,
    gen_chords_completion,
    gen_distractors,
    gen_interval_number,
    gen_note_completion,
    gen_scale_id,
    gen_scale_selection,
    gen_time_signature,
    shuffle_choices,
    verify_record,
)
from sheetqa.theory import ScaleSpec, measure_capacity, validate_measures

REFERENCE_TIME_SIG = "X:1\nL:1/8\nQ:1/4=120\nM:2/2\nK:A\n| efga fedc | c3 d edcd | fedc c2 B2 | E3 G BGEG |"
REFERENCE_BAR = "X:2\nL:1/8\nQ:1/4=120\nM:3/4\nK:F\n| f4 F2 | g2 gg gg | g4 G2 | a2 ba gf |"


@pytest.fixture
def timesig_tune():
    return parse_tune(REFERENCE_TIME_SIG)


@pytest.fixture
def bar_tune():
    return parse_tune(REFERENCE_BAR)


def test_time_signature_record(timesig_tune):
    record = gen_time_signature(timesig_tune, random.Random(0), record_id="r", seed=3)
    assert record.correct_answer == "2/2"
    assert record.question == "Select the correct time signature for the music score."
    assert "M:" not in record.abc_context
    assert record.abc_context.startswith("L:1/8\nQ:1/4=120\nK:A\n| ")
    assert verify_record(record).passed
    # every distractor has a different capacity and fails the context
    context = parse_tune(record.abc_context)
    for payload in record.incorrect_answers:
        meter = parse_meter(payload)
        assert measure_capacity(meter, Fraction(1, 8)) != 8
        assert not validate_measures(context, meter).all_full


def test_time_signature_never_offers_equal_capacity(timesig_tune):
    for seed in range(60):
        record = gen_time_signature(timesig_tune, random.Random(seed))
        assert "4/4" not in record.incorrect_answers  # 4/4 == 2/2 at L:1/8
        assert "2/2" not in record.incorrect_answers


def test_time_signature_rest_tune_eligible():
    tune = parse_tune("L:1/8\nM:2/2\nK:C\n| z8 | z8 | z8 | z8 |")
    record = gen_time_signature(tune, random.Random(1))
    assert record.correct_answer == "2/2"
    assert verify_record(record).passed
    pool_capacities = {str(m): measure_capacity(m, Fraction(1, 8)) for m in METER_POOL}
    assert pool_capacities["3/4"] == 6  # 3/4 stays a legal distractor


def test_time_signature_ineligible_without_meter():
    tune = parse_tune("L:1/8\nK:C\n| abcd abcd | abcd abcd | abcd abcd | abcd abcd |")
    with pytest.raises(Ineligible):
        gen_time_signature(tune, random.Random(0))


def test_time_signature_excludes_partial_measures_from_context():
    tune = parse_tune(
        "L:1/8\nM:2/2\nK:C\n| a4 | abcd abcd | abcd abcd | abcd abcd | abcd abcd |"
    )
    record = gen_time_signature(tune, random.Random(0))
    # the short pickup measure cannot appear in any eligible window
    assert "a4" not in record.abc_context
    too_short = parse_tune("L:1/8\nM:2/2\nK:C\n| a4 | abcd abcd | abcd abcd | abcd abcd |")
    with pytest.raises(Ineligible):
        gen_time_signature(too_short, random.Random(0))


def test_bar_placement_record(bar_tune):
    record = gen_bar_placement(bar_tune, random.Random(4), record_id="bp", seed=9)
    assert record.abc_context.splitlines()[-1].startswith("f4 F2 g2")
    assert "M:3/4" in record.abc_context
    assert record.correct_answer.splitlines()[-1] == "| f4 F2 | g2 g g g g | g4 G2 | a2 b a g f |"
    assert verify_record(record).passed
    meter = Meter(3, 4)
    for payload in record.incorrect_answers:
        option = parse_tune(payload)
        assert option.events == parse_tune(record.abc_context).events
        assert not validate_measures(option, meter).all_full


def test_bar_placement_distractor_has_overfull_measure(bar_tune):
    record = gen_bar_placement(bar_tune, random.Random(4))
    found_violation = False
    for payload in record.incorrect_answers:
        report = validate_measures(parse_tune(payload), Meter(3, 4))
        found_violation |= any(not m.full for m in report.measures)
    assert found_violation


def test_bar_placement_uniform_two_measures_ineligible():
    tune = parse_tune("L:1/8\nM:3/4\nK:C\n| a6 | b6 |")
    with pytest.raises(Ineligible):
        gen_bar_placement(tune, random.Random(0), context_measures=3)


def test_interval_number_octave_example():
    tune = parse_tune("L:1/8\nQ:1/4=120\nM:2/2\nK:A\n| B b2 B b2 B2 |")
    record = gen_interval_number(tune, random.Random(0))
    assert record.correct_answer == "perfect octave"
    assert record.abc_context.splitlines()[-1] in ("B b2", "b2 B", "b2 B2", "B2 B", "B B", "B2 b2"[:5])
    assert verify_record(record).passed


def test_interval_unison_from_identical_pitches():
    tune = parse_tune("L:1/4\nK:C\n| C C C C |")
    record = gen_interval_number(tune, random.Random(0))
    assert record.correct_answer == "perfect unison"
    assert verify_record(record).passed


def test_interval_distractors_share_number_or_quality():
    tune = parse_tune("L:1/4\nK:C\n| C E G c |")
    for seed in range(20):
        record = gen_interval_number(tune, random.Random(seed))
        correct_quality, correct_number = record.correct_answer.split()
        share = [
            payload
            for payload in record.incorrect_answers
            if payload.split()[0] == correct_quality or payload.split()[1] == correct_number
        ]
        assert share, record.incorrect_answers
        assert verify_record(record).passed


def test_note_completion_major_third_example():
    tune = parse_tune("L:1/16\nM:2/4\nK:G\n| G4 G4 G4 G4 |")
    for seed in range(40):
        record = gen_note_completion(tune, random.Random(seed))
        assert verify_record(record).passed
        if "major third" in record.question:
            assert record.correct_answer.splitlines()[-1] == "G B"
            return
    pytest.fail("major third target never drawn")


def test_note_completion_unison():
    tune = parse_tune("L:1/4\nK:C\n| C C C C |")
    for seed in range(60):
        record = gen_note_completion(tune, random.Random(seed))
        if "perfect unison" in record.question:
            assert record.correct_answer.splitlines()[-1] == "C C"
            assert verify_record(record).passed
            return
    pytest.fail("perfect unison target never drawn")


def test_chords_completion_b_augmented_canonical():
    for seed in range(300):
        record = gen_chords_completion(None, random.Random(seed))
        assert verify_record(record).passed
        if "B augmented" not in record.question:
            continue
        body = record.correct_answer.splitlines()[-1]
        if body == "[B^d^^f]":
            wrong_bodies = [w.splitlines()[-1] for w in record.incorrect_answers]
            assert "[B^d^f]" in wrong_bodies  # B-major spelling is falsified
            return
    pytest.fail("B augmented with missing fifth never drawn")


def test_chords_completion_forced(monkeypatch):
    record = None
    for seed in range(100):
        candidate = gen_chords_completion(None, random.Random(seed))
        if "C major" in candidate.question and candidate.abc_context.endswith("[CE]"):
            record = candidate
            break
    assert record is not None
    assert record.correct_answer.splitlines()[-1] == "[CEG]"


def test_chord_root_id_signature_example():
    key = Key("C", 1, "minor")
    for seed in range(200):
        record = gen_chord_root_id(None, random.Random(seed), key=key)
        assert verify_record(record).passed
        body = record.abc_context.splitlines()[-1]
        if body == "[GBd]":  # G# minor root position, written over C#m
            assert record.correct_answer == "G#"
            assert "G" in record.incorrect_answers
            return
    pytest.fail("G# minor voicing never drawn")


def test_chord_root_id_inversion():
    for seed in range(200):
        record = gen_chord_root_id(None, random.Random(seed), key=Key("C"))
        body = record.abc_context.splitlines()[-1]
        if body == "[EGc]":
            assert record.correct_answer == "c"
            return
    pytest.fail("first-inversion C major never drawn")


def test_chord_id_fixtures():
    seen = {}
    for seed in range(400):
        record = gen_chord_id(None, random.Random(seed))
        assert verify_record(record).passed
        seen[record.abc_context.splitlines()[-1]] = record
    fm = seen.get("[F_Ac]")
    assert fm is not None and fm.correct_answer == "Fm"
    c = seen.get("[CEG]")
    assert c is not None and c.correct_answer == "C"
    cdim = seen.get("[C_E_G]")
    assert cdim is not None and cdim.correct_answer == "Cdim"


def test_scale_id_a_major_melody():
    tune = parse_tune(
        "X:9\nL:1/8\nM:4/4\nK:A\n| A2 ce a2 ec | fd BG A2 E2 | ABcd efga | f2 d2 e2 A2 |"
    )
    record = gen_scale_id(tune, random.Random(0))
    assert record.correct_answer == "A"
    assert set(record.incorrect_answers) == {"A#", "Ab", "Am"}
    assert record.abc_context.startswith("L:1/4\nK:C\n")
    assert verify_record(record).passed


def test_scale_id_c_major_distractor_slots():
    tune = parse_tune("X:9\nL:1/8\nM:4/4\nK:C\n| C2 E2 G2 E2 | D2 F2 A2 F2 | E2 G2 c2 G2 | D2 B,2 C4 |")
    record = gen_scale_id(tune, random.Random(1))
    assert record.correct_answer == "C"
    # accidental variants plus the parallel mode; the relative key (Am) is a
    # consistent-but-outranked candidate, not an offered option
    assert set(record.incorrect_answers) == {"C#", "Cb", "Cm"}
    assert verify_record(record).passed


def test_scale_id_short_melody_ineligible():
    tune = parse_tune("L:1/8\nM:4/4\nK:G\n| g8 | f8 |")
    with pytest.raises(Ineligible):
        gen_scale_id(tune, random.Random(0))


def test_scale_selection_ebm():
    spec = ScaleSpec(("E", -1), "natural_minor", "ascending")
    record = gen_scale_selection(spec, random.Random(0))
    assert record.abc_context == "None"
    assert record.correct_answer == "L:1/4\nK:C\n_E F _G _A _B _c _d _e"
    bodies = [w.splitlines()[-1] for w in record.incorrect_answers]
    assert "_e _d _c _B _A _G F _E" in bodies  # reversed-direction slot
    assert verify_record(record).passed
    assert record.question == "Select the correctly written Ebm key with ascending direction."


def test_scale_selection_c_major():
    record = gen_scale_selection(ScaleSpec(("C", 0), "major"), random.Random(3))
    assert record.correct_answer.splitlines()[-1] == "C D E F G A B c"
    assert verify_record(record).passed


def test_scale_selection_fs_minor():
    record = gen_scale_selection(ScaleSpec(("F", 1), "natural_minor"), random.Random(4))
    assert record.correct_answer.splitlines()[-1] == "^F ^G A B ^c d e ^f"
    assert verify_record(record).passed


# ---------------------------------------------------------------------------
# distractor pools and shuffling


def test_gen_distractors_time_signature_pool():
    cs = gen_distractors("TimeSignatureQuestion", "2/2", Fraction(1, 8), random.Random(0))
    assert len(set(cs.distractors)) == 3
    assert "4/4" not in cs.distractors


def test_gen_distractors_interval_pool_always_succeeds():
    for seed in range(30):
        cs = gen_distractors("IntervalNumberQuestion", "major third", None, random.Random(seed))
        assert "major third" not in cs.distractors


def test_gen_distractors_other_templates_decline():
    with pytest.raises(InsufficientCandidates):
        gen_distractors("ScaleSelectionQuestion", "x", None, random.Random(0))


def test_shuffle_determinism_and_coverage():
    cs = ChoiceSet("w", ("x", "y", "z"))
    first = shuffle_choices(cs, random.Random(123))
    assert shuffle_choices(cs, random.Random(123)) == first
    assert shuffle_choices(cs, random.Random(0)) != shuffle_choices(cs, random.Random(1))
    labels = {shuffle_choices(cs, random.Random(seed))[1] for seed in range(40)}
    assert labels == {"A", "B", "C", "D"}


def test_shuffle_label_distribution_uniform():
    cs = ChoiceSet("w", ("x", "y", "z"))
    counts = {"A": 0, "B": 0, "C": 0, "D": 0}
    n = 10_000
    for seed in range(n):
        _, label = shuffle_choices(cs, random.Random(seed))
        counts[label] += 1
    for label, count in counts.items():
        assert abs(count / n - 0.25) < 0.02, counts


def test_generator_determinism():
    tune = parse_tune(REFERENCE_TIME_SIG)
    a = gen_time_signature(tune, random.Random(77), record_id="x", seed=5)
    b = gen_time_signature(tune, random.Random(77), record_id="x", seed=5)
    assert a == b
    c = gen_bar_placement(tune, random.Random(77), record_id="x", seed=5)
    d = gen_bar_placement(tune, random.Random(77), record_id="x", seed=5)
    assert c == d


def test_records_expose_shuffled_choices():
    record = gen_scale_selection(ScaleSpec(("C", 0), "major"), random.Random(3), seed=99)
    choices, label = record.choices, record.answer_label
    assert len(choices) == 4
    assert choices[("A", "B", "C", "D").index(label)] == record.correct_answer


def test_verify_record_catches_duplicates():
    record = gen_scale_selection(ScaleSpec(("C", 0), "major"), random.Random(3), seed=99)
    import dataclasses

    broken = dataclasses.replace(
        record, incorrect_answers=(record.correct_answer, *record.incorrect_answers[:2])
    )
    verdict = verify_record(broken)
    assert not verdict.passed
    assert "duplicate" in verdict.failures


def test_verify_record_catches_equal_capacity():
    tune = parse_tune(REFERENCE_TIME_SIG)
    record = gen_time_signature(tune, random.Random(0))
    import dataclasses

    broken = dataclasses.replace(
        record, incorrect_answers=("4/4", *record.incorrect_answers[:2])
    )
    verdict = verify_record(broken)
    assert not verdict.passed
    assert any(f.startswith("equal-capacity") for f in verdict.failures)
