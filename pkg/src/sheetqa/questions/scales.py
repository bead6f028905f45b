"""Scale templates: key identification from a re-spelled melody and picking
the correctly written scale."""

from __future__ import annotations

import random
import re
from fractions import Fraction

from ..errors import Ineligible, SheetQAError, UnsupportedKey
from ..notation import (
    Event,
    Header,
    Key,
    Pitch,
    Tune,
    WrittenNote,
    parse_tune,
    serialize_events,
    serialize_header,
)
from ..theory import (
    ScaleSpec,
    enharmonic_equal,
    infer_keys,
    parse_key_display,
    scale_pitches,
    sounding_pitch,
)
from .records import QARecord

SCALE_ID_QUESTION = "Select the most suitable key for the following musical score."
SCALE_SELECTION_QUESTION = (
    "Select the correctly written {key} key with {direction} direction."
)

_SELECTION_RE = re.compile(
    r"correctly written (\S+) key with (ascending|descending) direction\.$"
)

_SCALE_HEADER = serialize_header(Header(unit_length=Fraction(1, 4)))  # L:1/4 / K:C

MIN_MELODY_NOTES = 12
MAX_MELODY_NOTES = 20
_WINDOW_TRIES = 8


def _unit_note(p: Pitch, accidental: int | None) -> Event:
    return Event("note", (WrittenNote(p.letter, accidental, p.octave),), Fraction(1))


def respell_over_c(pitches: list[Pitch]) -> str:
    """Unit-length melody over K:C where every altered note carries its mark.

    Sharps/flats are always written explicitly (even when an earlier mark
    already implies them); naturals take an explicit ``=`` only when needed to
    cancel an earlier mark on the same letter and octave."""
    state: dict[tuple[str, int], int] = {}
    events = []
    for p in pitches:
        place = (p.letter, p.octave)
        if p.accidental != 0:
            mark: int | None = p.accidental
            state[place] = p.accidental
        elif state.get(place, 0) != 0:
            mark = 0
            state[place] = 0
        else:
            mark = None
        events.append(_unit_note(p, mark))
    return serialize_events(tuple(events))


def _melody_pitches(tune: Tune) -> list[Pitch]:
    """Sounding pitches of the tune's single-note events, in order."""
    out = []
    for measure in tune.measures:
        state: dict[tuple[str, int], int] = {}
        for event in measure.events:
            pitches = [sounding_pitch(n, tune.header.key, state) for n in event.notes]
            if event.kind == "note":
                out.extend(pitches)
    return out


def gen_scale_id(
    tune: Tune,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    key = tune.header.key
    melody = _melody_pitches(tune)
    if len(melody) < MIN_MELODY_NOTES:
        raise Ineligible("melody too short")
    context = None
    for _ in range(_WINDOW_TRIES):
        length = rng.randint(MIN_MELODY_NOTES, min(MAX_MELODY_NOTES, len(melody)))
        start = rng.randrange(len(melody) - length + 1)
        body = respell_over_c(melody[start : start + length])
        candidate = _SCALE_HEADER + "\n" + body
        try:
            ranked = infer_keys(parse_tune(candidate))
        except SheetQAError:
            continue
        if ranked[0] == key:
            context = candidate
            break
    if context is None:
        raise Ineligible("no melody window ranks the source key first")

    variants = [
        Key(key.tonic_letter, acc, key.mode)
        for acc in (1, -1, 0)
        if acc != key.tonic_accidental
    ]
    parallel = Key(
        key.tonic_letter, key.tonic_accidental, "minor" if key.mode == "major" else "major"
    )
    wrong = [v.display for v in [*variants, parallel] if not enharmonic_equal(v, key)]
    if len(wrong) < 3:
        raise Ineligible("could not assemble three key-name distractors")

    return QARecord(
        id=record_id,
        class_name="ScaleIdentificationFromAbcQuestion",
        question=SCALE_ID_QUESTION,
        abc_context=context,
        correct_answer=key.display,
        incorrect_answers=tuple(wrong[:3]),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def check_scale_id(record: QARecord) -> list[str]:
    try:
        top = infer_keys(parse_tune(record.abc_context))[0]
    except SheetQAError:
        return ["context-uninferable"]
    failures = []
    if record.correct_answer != top.display:
        failures.append("correct-not-top-ranked")
    try:
        correct_key = parse_key_display(record.correct_answer)
    except SheetQAError:
        return failures + ["correct-unparseable"]
    for i, payload in enumerate(record.incorrect_answers, 1):
        if payload == top.display:
            failures.append(f"distractor{i}-not-falsified")
        try:
            if enharmonic_equal(parse_key_display(payload), correct_key):
                failures.append(f"distractor{i}-enharmonic-duplicate")
        except SheetQAError:
            pass  # unparseable names are trivially wrong options
    return failures


# ---------------------------------------------------------------------------
# scale selection


def render_scale(spec: ScaleSpec) -> str:
    """Canonical written scale: explicit mark on every altered degree."""
    events = tuple(
        _unit_note(p, p.accidental if p.accidental != 0 else None)
        for p in scale_pitches(spec)
    )
    return _SCALE_HEADER + "\n" + serialize_events(events)


def _altered_degree(spec: ScaleSpec, index: int, delta: int) -> str | None:
    pitches = scale_pitches(spec)
    p = pitches[index]
    acc = p.accidental + delta
    if not -2 <= acc <= 2:
        return None
    pitches[index] = Pitch(p.letter, acc, p.octave)
    events = tuple(
        _unit_note(q, q.accidental if q.accidental != 0 else None) for q in pitches
    )
    return _SCALE_HEADER + "\n" + serialize_events(events)


def gen_scale_selection(
    spec: ScaleSpec,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    correct = render_scale(spec)  # raises UnsupportedKey outside the 30 keys

    wrong: list[str] = []
    seen = {correct}

    def offer(payload: str | None) -> None:
        if payload is not None and payload not in seen and len(wrong) < 3:
            seen.add(payload)
            wrong.append(payload)

    reversed_dir = "descending" if spec.direction == "ascending" else "ascending"
    offer(render_scale(ScaleSpec(spec.tonic, spec.mode, reversed_dir)))

    degrees = list(range(1, 7))
    rng.shuffle(degrees)
    deltas = [1, -1] if rng.random() < 0.5 else [-1, 1]
    offer(_altered_degree(spec, degrees[0], deltas[0]))

    other_mode = "natural_minor" if spec.mode == "major" else "major"
    try:
        offer(render_scale(ScaleSpec(spec.tonic, other_mode, spec.direction)))
    except UnsupportedKey:
        pass
    for degree in degrees[1:]:
        if len(wrong) >= 3:
            break
        for delta in deltas:
            offer(_altered_degree(spec, degree, delta))
    if len(wrong) < 3:
        raise Ineligible("could not build three falsified scale spellings")

    return QARecord(
        id=record_id,
        class_name="ScaleSelectionQuestion",
        question=SCALE_SELECTION_QUESTION.format(
            key=spec.key.display, direction=spec.direction
        ),
        abc_context="None",
        correct_answer=correct,
        incorrect_answers=tuple(wrong[:3]),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def check_scale_selection(record: QARecord) -> list[str]:
    m = _SELECTION_RE.search(record.question)
    if not m:
        return ["question-unparseable"]
    try:
        key = parse_key_display(m.group(1))
    except SheetQAError:
        return ["question-unparseable"]
    mode = "major" if key.mode == "major" else "natural_minor"
    spec = ScaleSpec((key.tonic_letter, key.tonic_accidental), mode, m.group(2))
    try:
        canonical = render_scale(spec)
    except SheetQAError:
        return ["spec-unsupported"]
    failures = []
    if record.abc_context != "None":
        failures.append("context-not-none")
    if record.correct_answer != canonical:
        failures.append("correct-spelling-mismatch")
    for i, payload in enumerate(record.incorrect_answers, 1):
        if payload == canonical:
            failures.append(f"distractor{i}-not-falsified")
    return failures
