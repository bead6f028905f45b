"""Rhythm templates: time-signature deduction and bar-line placement."""

from __future__ import annotations

import random
from fractions import Fraction

from ..errors import Ineligible, InsufficientCandidates
from ..notation import (
    Header,
    Measure,
    Meter,
    Tune,
    event_atoms,
    parse_meter,
    parse_tune,
    rebar,
    serialize_body,
    serialize_events,
    serialize_header,
)
from ..theory import measure_capacity, validate_measures
from .records import QARecord

TIME_SIGNATURE_QUESTION = "Select the correct time signature for the music score."
BAR_PLACEMENT_QUESTION = (
    "Based on the time signature, which option correctly places the bar lines "
    "for the given sequence of notes?"
)

# Candidate meters offered as time-signature options.
METER_POOL = (
    Meter(2, 4),
    Meter(3, 4),
    Meter(4, 4),
    Meter(2, 2),
    Meter(3, 8),
    Meter(6, 8),
    Meter(9, 8),
    Meter(12, 8),
    Meter(5, 8),
    Meter(7, 8),
    Meter(4, 2),
    Meter(3, 2),
)

_MAX_BARRING_TRIES = 250


def full_measure_windows(tune: Tune, size: int) -> list[int]:
    """Start indices of ``size`` consecutive measures that exactly fill the meter."""
    if tune.header.meter is None or len(tune.measures) < size:
        return []
    report = validate_measures(tune, tune.header.meter)
    full = [check.full for check in report.measures]
    return [
        i for i in range(len(full) - size + 1) if all(full[i : i + size])
    ]


def _pick_window(tune: Tune, size: int, rng: random.Random) -> tuple[Measure, ...]:
    windows = full_measure_windows(tune, size)
    if not windows:
        raise Ineligible(f"no run of {size} full measures")
    start = windows[rng.randrange(len(windows))]
    return tune.measures[start : start + size]


def time_signature_distractors(
    correct: Meter, unit: Fraction, rng: random.Random
) -> tuple[str, str, str]:
    """Three meters that every full measure of the context falsifies.

    Meters with the same capacity as the correct one (2/2 vs 4/4) can never be
    falsified and are excluded."""
    capacity = measure_capacity(correct, unit)
    pool = [
        str(m)
        for m in METER_POOL
        if measure_capacity(m, unit) != capacity
    ]
    if len(pool) < 3:
        raise InsufficientCandidates("meter pool too small")
    return tuple(rng.sample(pool, 3))


def gen_time_signature(
    tune: Tune,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
    context_measures: int = 4,
) -> QARecord:
    meter = tune.header.meter
    if meter is None:
        raise Ineligible("tune has no meter")
    window = _pick_window(tune, context_measures, rng)
    context = (
        serialize_header(tune.header, drop=("X", "T", "M"))
        + "\n"
        + serialize_body(window)
    )
    distractors = time_signature_distractors(meter, tune.header.unit_length, rng)
    return QARecord(
        id=record_id,
        class_name="TimeSignatureQuestion",
        question=TIME_SIGNATURE_QUESTION,
        abc_context=context,
        correct_answer=str(meter),
        incorrect_answers=distractors,
        seed=seed,
        source_tune_id=source_tune_id,
    )


def check_time_signature(record: QARecord) -> list[str]:
    """Failing-predicate names for a time-signature record (empty = pass)."""
    failures: list[str] = []
    try:
        context = parse_tune(record.abc_context)
    except Exception:
        return ["context-unparseable"]
    unit = context.header.unit_length

    def all_full(meter: Meter) -> bool:
        return validate_measures(context, meter).all_full

    try:
        correct = parse_meter(record.correct_answer)
    except Exception:
        return ["correct-unparseable"]
    if correct is None or not all_full(correct):
        failures.append("correct-not-full")
        return failures
    capacity = measure_capacity(correct, unit)
    for payload in record.incorrect_answers:
        try:
            meter = parse_meter(payload)
        except Exception:
            failures.append(f"distractor-unparseable:{payload}")
            continue
        if meter is None or measure_capacity(meter, unit) == capacity:
            failures.append(f"equal-capacity:{payload}")
        elif all_full(meter):
            failures.append(f"distractor-not-falsified:{payload}")
    return failures


# ---------------------------------------------------------------------------
# bar placement


def _compositions(total: int, parts: int, rng: random.Random) -> tuple[int, ...]:
    """One random composition of ``total`` atoms into ``parts`` measures."""
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    bounds = [0, *cuts, total]
    return tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def invalid_barrings(
    header: Header,
    events,
    correct_sizes: tuple[int, ...],
    rng: random.Random,
    want: int = 3,
) -> list[Tune]:
    """Alternative barrings of the same events with >=1 overfull/underfull
    measure.  Barrings with single-atom measures look obviously wrong, so a
    first pass skips them; anything invalid is accepted once plausible
    candidates run out."""
    atoms = event_atoms(tuple(events))
    n = len(atoms)
    meter = header.meter
    assert meter is not None
    seen = {correct_sizes}
    found: list[Tune] = []
    lo = max(2, len(correct_sizes) - 2)
    hi = max(lo, min(n, len(correct_sizes) + 2))
    for attempt in range(_MAX_BARRING_TRIES):
        if len(found) >= want:
            break
        parts = rng.randint(lo, hi)
        if parts < 2 or parts > n:
            continue
        sizes = _compositions(n, parts, rng)
        if sizes in seen:
            continue
        plausible = min(sizes) >= 2 or n < 2 * parts
        if not plausible and attempt < _MAX_BARRING_TRIES // 2:
            continue
        seen.add(sizes)
        candidate = rebar(header, tuple(events), sizes)
        if not validate_measures(candidate, meter).all_full:
            found.append(candidate)
    if len(found) < want:
        raise InsufficientCandidates(
            f"only {len(found)} invalid barrings found for {n} atoms"
        )
    return found


def gen_bar_placement(
    tune: Tune,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
    context_measures: int = 4,
) -> QARecord:
    meter = tune.header.meter
    if meter is None:
        raise Ineligible("tune has no meter")
    if not 3 <= context_measures <= 5:
        raise Ineligible("bar placement needs 3-5 context measures")
    window = _pick_window(tune, context_measures, rng)
    events = tuple(e for m in window for e in m.events)
    if len(event_atoms(events)) < 4:
        raise Ineligible("too few events to rebar")
    header_text = serialize_header(tune.header, drop=("X", "T"))
    context = header_text + "\n" + serialize_events(events)
    correct_tune = Tune(tune.header, window)
    correct_sizes = tuple(len(event_atoms(m.events)) for m in window)
    try:
        wrong = invalid_barrings(tune.header, events, correct_sizes, rng)
    except InsufficientCandidates as exc:
        raise Ineligible(str(exc)) from exc
    render = lambda t: header_text + "\n" + serialize_body(t.measures)
    return QARecord(
        id=record_id,
        class_name="BarLinePlacementQuestion",
        question=BAR_PLACEMENT_QUESTION,
        abc_context=context,
        correct_answer=render(correct_tune),
        incorrect_answers=tuple(render(t) for t in wrong),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def check_bar_placement(record: QARecord) -> list[str]:
    failures: list[str] = []
    try:
        context = parse_tune(record.abc_context)
    except Exception:
        return ["context-unparseable"]
    meter = context.header.meter
    if meter is None:
        return ["context-missing-meter"]
    sequence = context.events

    def parsed(payload: str) -> Tune | None:
        try:
            return parse_tune(payload)
        except Exception:
            return None

    correct = parsed(record.correct_answer)
    if correct is None:
        return ["correct-unparseable"]
    if correct.events != sequence:
        failures.append("correct-sequence-mismatch")
    if not validate_measures(correct, meter).all_full:
        failures.append("correct-not-full")
    for i, payload in enumerate(record.incorrect_answers, 1):
        option = parsed(payload)
        if option is None:
            failures.append(f"distractor{i}-unparseable")
            continue
        if option.events != sequence:
            failures.append(f"distractor{i}-sequence-mismatch")
        if validate_measures(option, meter).all_full:
            failures.append(f"distractor{i}-not-falsified")
    return failures
