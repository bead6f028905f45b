"""Interval templates: naming the interval between two notes and completing
a note pair to form a named interval."""

from __future__ import annotations

import random
import re
from fractions import Fraction

from ..errors import Ineligible, InsufficientCandidates, SheetQAError
from ..notation import Event, Pitch, Tune, parse_tune, serialize_events, serialize_header
from ..theory import (
    INTERVAL_NAMES,
    Interval,
    QUALITY_SEMITONES,
    interval_between,
    interval_from_name,
    semitone_index,
    sounding_pitch,
    transpose,
    written_form,
)
from .records import QARecord

INTERVAL_QUESTION = (
    "Given two notes with their ABC scores, select the correct name of the "
    "interval between them."
)
NOTE_COMPLETION_QUESTION = (
    "Select the correct note to make the following note in music score form "
    "the {interval} interval."
)

_NOTE_COMPLETION_RE = re.compile(r"form the (.+) interval\.$")


def note_pairs(tune: Tune) -> list[tuple[Event, Event, Pitch, Pitch]]:
    """Adjacent single-note events within a measure whose interval is nameable.

    Triplet members are skipped: extracting them would orphan the (3 group."""
    pairs = []
    for measure in tune.measures:
        state: dict[tuple[str, int], int] = {}
        sounded: list[Pitch | None] = []
        in_tuplet = 0
        for event in measure.events:
            if event.tuplet == 3:
                in_tuplet = 3
            if event.kind == "note" and not in_tuplet:
                sounded.append(sounding_pitch(event.notes[0], tune.header.key, state))
            else:
                for note in event.notes:
                    sounding_pitch(note, tune.header.key, state)
                sounded.append(None)
            if in_tuplet:
                in_tuplet -= 1
        for i in range(len(measure.events) - 1):
            a, b = sounded[i], sounded[i + 1]
            if a is None or b is None:
                continue
            low, high = (a, b) if semitone_index(a) <= semitone_index(b) else (b, a)
            try:
                interval_between(low, high)
            except SheetQAError:
                continue
            pairs.append((measure.events[i], measure.events[i + 1], a, b))
    return pairs


def interval_name_distractors(correct: str, rng: random.Random) -> tuple[str, str, str]:
    """Three wrong names, at least one sharing the number or quality."""
    target = interval_from_name(correct)
    near = [
        name
        for name in INTERVAL_NAMES
        if name != correct
        and (
            interval_from_name(name).number == target.number
            or interval_from_name(name).quality == target.quality
        )
    ]
    if not near:
        raise InsufficientCandidates("no near-miss interval name")
    first = near[rng.randrange(len(near))]
    rest = [name for name in INTERVAL_NAMES if name not in (correct, first)]
    picked = rng.sample(rest, 2)
    return (first, *picked)


def gen_interval_number(
    tune: Tune,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    pairs = note_pairs(tune)
    if not pairs:
        raise Ineligible("no adjacent note pair with a nameable interval")
    first, second, a, b = pairs[rng.randrange(len(pairs))]
    # Re-spell from the sounding pitches: accidentals that propagated from
    # notes outside the excerpt must become explicit in the standalone context.
    state: dict[tuple[str, int], int] = {}
    key = tune.header.key
    extracted = (
        Event("note", (written_form(a, key, state),), first.duration),
        Event("note", (written_form(b, key, state),), second.duration),
    )
    context = (
        serialize_header(tune.header, drop=("X", "T"))
        + "\n"
        + serialize_events(extracted)
    )
    low, high = (a, b) if semitone_index(a) <= semitone_index(b) else (b, a)
    correct = interval_between(low, high).name
    return QARecord(
        id=record_id,
        class_name="IntervalNumberQuestion",
        question=INTERVAL_QUESTION,
        abc_context=context,
        correct_answer=correct,
        incorrect_answers=interval_name_distractors(correct, rng),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def _context_pitches(context: Tune) -> list[Pitch]:
    state: dict[tuple[str, int], int] = {}
    out = []
    for event in context.events:
        for note in event.notes:
            out.append(sounding_pitch(note, context.header.key, state))
    return out


def check_interval_number(record: QARecord) -> list[str]:
    try:
        context = parse_tune(record.abc_context)
        pitches = _context_pitches(context)
        a, b = pitches
    except Exception:
        return ["context-unparseable"]
    low, high = (a, b) if semitone_index(a) <= semitone_index(b) else (b, a)
    try:
        name = interval_between(low, high).name
    except SheetQAError:
        return ["context-interval-unnameable"]
    failures = []
    if record.correct_answer != name:
        failures.append("correct-name-mismatch")
    for i, payload in enumerate(record.incorrect_answers, 1):
        if payload == name:
            failures.append(f"distractor{i}-not-falsified")
    return failures


# ---------------------------------------------------------------------------
# note completion


def _seed_events(tune: Tune) -> list[Pitch]:
    """Sounding pitches of the tune's single-note events."""
    out = []
    for measure in tune.measures:
        state: dict[tuple[str, int], int] = {}
        for event in measure.events:
            for note in event.notes:
                p = sounding_pitch(note, tune.header.key, state)
                if event.kind == "note":
                    out.append(p)
    return out


def _transposable_intervals(seed: Pitch) -> list[Interval]:
    out = []
    for number, quality in sorted(QUALITY_SEMITONES):
        iv = Interval(number, quality)
        try:
            transpose(seed, iv, "up")
        except SheetQAError:
            continue
        out.append(iv)
    return out


def _forms_interval(seed: Pitch, candidate: Pitch, target: Interval) -> bool:
    try:
        return interval_between(seed, candidate) == target
    except SheetQAError:
        return False


def gen_note_completion(
    tune: Tune,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    candidates = _seed_events(tune)
    if not candidates:
        raise Ineligible("tune has no single-note events")
    seed_pitch = candidates[rng.randrange(len(candidates))]
    intervals = _transposable_intervals(seed_pitch)
    if not intervals:
        raise Ineligible("seed note cannot be transposed anywhere")
    target = intervals[rng.randrange(len(intervals))]
    answer = transpose(seed_pitch, target, "up")
    key = tune.header.key
    header_text = serialize_header(tune.header, drop=("X", "T"))

    def snippet(second: Pitch) -> str:
        state: dict[tuple[str, int], int] = {}
        first = Event("note", (written_form(seed_pitch, key, state),), Fraction(1))
        rest = Event("note", (written_form(second, key, state),), Fraction(1))
        return header_text + "\n" + serialize_events((first, rest))

    context = header_text + "\n" + serialize_events(
        (Event("note", (written_form(seed_pitch, key, {}),), Fraction(1)),)
    )
    correct = snippet(answer)

    wrong: list[str] = []
    seen = {correct}

    def offer(candidate: Pitch | None) -> None:
        if candidate is None or len(wrong) >= 3:
            return
        if _forms_interval(seed_pitch, candidate, target):
            return
        payload = snippet(candidate)
        if payload in seen:
            return
        seen.add(payload)
        wrong.append(payload)

    def shifted_octave(delta: int) -> Pitch | None:
        try:
            return Pitch(answer.letter, answer.accidental, answer.octave + delta)
        except ValueError:
            return None

    def shifted_letter() -> Pitch | None:
        for number in (target.number + 1, target.number - 1, target.number + 2):
            for quality in ("major", "minor", "perfect", "augmented", "diminished"):
                if (number, quality) not in QUALITY_SEMITONES:
                    continue
                try:
                    return transpose(seed_pitch, Interval(number, quality), "up")
                except SheetQAError:
                    continue
        return None

    def shifted_accidental(delta: int) -> Pitch | None:
        acc = answer.accidental + delta
        if not -2 <= acc <= 2:
            return None
        return Pitch(answer.letter, acc, answer.octave)

    offer(shifted_octave(1))
    offer(shifted_octave(-1))
    offer(shifted_letter())
    offer(shifted_accidental(1))
    offer(shifted_accidental(-1))
    offer(shifted_octave(2))
    if len(wrong) < 3:
        raise Ineligible("could not build three falsified completions")

    return QARecord(
        id=record_id,
        class_name="NoteCompletionByInterval",
        question=NOTE_COMPLETION_QUESTION.format(interval=target.name),
        abc_context=context,
        correct_answer=correct,
        incorrect_answers=tuple(wrong[:3]),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def check_note_completion(record: QARecord) -> list[str]:
    m = _NOTE_COMPLETION_RE.search(record.question)
    if not m:
        return ["question-unparseable"]
    try:
        target = interval_from_name(m.group(1))
    except SheetQAError:
        return ["question-unparseable"]
    try:
        context = parse_tune(record.abc_context)
        (seed_pitch,) = _context_pitches(context)
    except Exception:
        return ["context-unparseable"]

    def option_forms(payload: str) -> bool | None:
        try:
            option = parse_tune(payload)
            first, second = _context_pitches(option)
        except Exception:
            return None
        if first != seed_pitch:
            return None
        return _forms_interval(first, second, target)

    failures = []
    if option_forms(record.correct_answer) is not True:
        failures.append("correct-does-not-form-interval")
    for i, payload in enumerate(record.incorrect_answers, 1):
        if option_forms(payload) is True:
            failures.append(f"distractor{i}-not-falsified")
    return failures
