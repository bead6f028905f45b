"""Chord templates: completion, root identification, and naming.

Chord material is synthesized directly (the melodic corpus rarely carries
multinotes); the source tune contributes provenance and, for root
identification, its key."""

from __future__ import annotations

import random
import re
from fractions import Fraction

from ..errors import Ineligible, NotATriad, SheetQAError
from ..notation import (
    LETTERS,
    Event,
    Header,
    Key,
    Pitch,
    Tune,
    WrittenNote,
    accidental_suffix,
    note_glyph,
    parse_tune,
    serialize_events,
    serialize_header,
)
from ..theory import (
    LETTER_INDEX,
    TRIAD_QUALITIES,
    Interval,
    Triad,
    identify_triad,
    key_signature,
    letter_position,
    note_display,
    sounding_pitch,
    transpose,
    written_form,
)
from .records import QARecord

CHORD_COMPLETION_QUESTION = (
    "Given several notes, select the correct Note to form a {chord} chord."
)
CHORD_ROOT_QUESTION = (
    "Identify the correct root note of the chord in the following sheet music."
)
CHORD_NAME_QUESTION = "Select the correct chord name based on the following music sheet."

_COMPLETION_RE = re.compile(r"form an? (.+) chord\.$")


def _chord_header(key: Key) -> str:
    return serialize_header(Header(unit_length=Fraction(1, 4), key=key), drop=("X", "T"))


def _raise_above(p: Pitch, floor: Pitch) -> Pitch:
    while letter_position(p) <= letter_position(floor):
        p = Pitch(p.letter, p.accidental, p.octave + 1)
    return p


def _voicing(triad: Triad, inversion: int = 0) -> list[Pitch]:
    """Close voicing with the chosen member in the bass at octave 0."""
    classes = list(triad.member_classes())
    order = classes[inversion:] + classes[:inversion]
    out = [Pitch(order[0][0], order[0][1], 0)]
    for letter, acc in order[1:]:
        out.append(_raise_above(Pitch(letter, acc, 0), out[-1]))
    return out


def _multinote_payload(key: Key, pitches: list[Pitch]) -> str:
    state: dict[tuple[str, int], int] = {}
    notes = tuple(written_form(p, key, state) for p in pitches)
    event = Event("multinote", notes, Fraction(1))
    return _chord_header(key) + "\n" + serialize_events((event,))


def _random_triad(rng: random.Random) -> Triad:
    """A spellable triad with conventional member accidentals.

    Members stay within single sharps/flats except the augmented fifth, which
    may need a double mark (B augmented ends on F##)."""
    while True:
        triad = Triad(
            (LETTERS[rng.randrange(7)], rng.choice((-1, 0, 1))),
            rng.choice(TRIAD_QUALITIES),
        )
        try:
            members = triad.member_classes()
        except SheetQAError:
            continue
        limit = 2 if triad.quality == "augmented" else 1
        if all(abs(acc) <= limit for _, acc in members):
            return triad


def _is_target(pitches, target: Triad) -> bool:
    try:
        return identify_triad(pitches) == target
    except SheetQAError:
        return False


def _chord_pitches(payload: str) -> tuple[list[WrittenNote], list[Pitch]]:
    tune = parse_tune(payload)
    events = tune.events
    if len(events) != 1 or events[0].kind != "multinote":
        raise NotATriad("expected a single multinote event")
    state: dict[tuple[str, int], int] = {}
    written = list(events[0].notes)
    sounding = [sounding_pitch(n, tune.header.key, state) for n in written]
    return written, sounding


# ---------------------------------------------------------------------------
# chord completion


def gen_chords_completion(
    tune: Tune | None,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    key = Key("C")
    target = _random_triad(rng)
    members = _voicing(target)
    omit = rng.randrange(3)
    given = [p for i, p in enumerate(members) if i != omit]
    missing = members[omit]

    def payload(candidate: Pitch) -> str:
        return _multinote_payload(key, [*given, candidate])

    correct = payload(missing)
    wrong: list[str] = []
    seen = {correct}

    def offer(candidate: Pitch | None) -> None:
        if candidate is None or len(wrong) >= 3:
            return
        if _is_target([*given, candidate], target):
            return
        try:
            text = payload(candidate)
        except ValueError:
            return  # written duplicate inside the multinote
        if text not in seen:
            seen.add(text)
            wrong.append(text)

    def off_by_semitone(delta: int) -> Pitch | None:
        acc = missing.accidental + delta
        if not -2 <= acc <= 2:
            return None
        return Pitch(missing.letter, acc, missing.octave)

    def duplicated_given() -> Pitch | None:
        base = given[0]
        return Pitch(base.letter, base.accidental, base.octave + 1) if base.octave < 4 else None

    def wrong_letter(step: int) -> Pitch | None:
        octave, idx = divmod(letter_position(missing) + step, 7)
        if not -4 <= octave <= 4:
            return None
        return Pitch(LETTERS[idx], 0, octave)

    for candidate in (
        off_by_semitone(-1),
        off_by_semitone(1),
        duplicated_given(),
        wrong_letter(-1),
        wrong_letter(1),
        wrong_letter(2),
    ):
        offer(candidate)
    if len(wrong) < 3:
        raise Ineligible("could not build three falsified chord completions")

    return QARecord(
        id=record_id,
        class_name="ChordsCompletionQuestion",
        question=CHORD_COMPLETION_QUESTION.format(chord=target.display),
        abc_context=_multinote_payload(key, given),
        correct_answer=correct,
        incorrect_answers=tuple(wrong[:3]),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def _triad_from_display(text: str) -> Triad:
    m = re.match(r"^([A-G])(##|bb|#|b)?\s+(major|minor|diminished|augmented)$", text.strip())
    if not m:
        raise NotATriad(f"cannot parse chord name {text!r}")
    letter, suffix, quality = m.groups()
    acc = {"#": 1, "##": 2, "b": -1, "bb": -2, None: 0}[suffix]
    return Triad((letter, acc), quality)


def check_chords_completion(record: QARecord) -> list[str]:
    m = _COMPLETION_RE.search(record.question)
    if not m:
        return ["question-unparseable"]
    try:
        target = _triad_from_display(m.group(1))
        _, given = _chord_pitches(record.abc_context)
    except SheetQAError:
        return ["context-unparseable"]
    given_classes = {p.pitch_class for p in given}

    def option_ok(payload: str) -> bool:
        try:
            _, pitches = _chord_pitches(payload)
        except SheetQAError:
            return False
        if not given_classes <= {p.pitch_class for p in pitches}:
            return False
        return _is_target(pitches, target)

    failures = []
    if not option_ok(record.correct_answer):
        failures.append("correct-not-target-triad")
    for i, payload in enumerate(record.incorrect_answers, 1):
        if option_ok(payload):
            failures.append(f"distractor{i}-not-falsified")
    return failures


# ---------------------------------------------------------------------------
# root identification


def _diatonic_triad(key: Key, degree: int) -> Triad:
    signature = key_signature(key)
    letters = [
        LETTERS[(LETTER_INDEX[key.tonic_letter] + degree + offset) % 7]
        for offset in (0, 2, 4)
    ]
    return identify_triad([Pitch(l, signature.get(l, 0), 0) for l in letters])


def gen_chord_root_id(
    tune: Tune | None,
    rng: random.Random,
    *,
    key: Key | None = None,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    if key is None:
        key = tune.header.key if tune is not None else Key("C")
    triad = _diatonic_triad(key, rng.randrange(7))
    pitches = _voicing(triad, rng.randrange(3))
    state: dict[tuple[str, int], int] = {}
    written = [written_form(p, key, state) for p in pitches]
    event = Event("multinote", tuple(written), Fraction(1))
    context = _chord_header(key) + "\n" + serialize_events((event,))

    root_at = next(i for i, p in enumerate(pitches) if p.pitch_class == triad.root)
    correct = note_display(written[root_at], pitches[root_at])
    root_glyph = note_glyph(pitches[root_at].letter, pitches[root_at].octave)

    # Distractor pool: the written (un-signatured) root name plus the
    # sounding and written names of the other members; accidental variants of
    # the root pad the pool when the signature leaves names identical.
    pool: list[str] = [root_glyph]
    for i, p in enumerate(pitches):
        if i == root_at:
            continue
        pool.append(note_display(written[i], p))
        pool.append(note_glyph(p.letter, p.octave))
    for acc in (1, -1, 2, -2):
        pool.append(root_glyph + accidental_suffix(acc))

    wrong: list[str] = []
    for name in pool:
        if name != correct and name not in wrong:
            wrong.append(name)
        if len(wrong) == 3:
            break
    if len(wrong) < 3:
        raise Ineligible("could not build three root-name distractors")

    return QARecord(
        id=record_id,
        class_name="ChordKeyRootIdentificationQuestion",
        question=CHORD_ROOT_QUESTION,
        abc_context=context,
        correct_answer=correct,
        incorrect_answers=tuple(wrong),
        seed=seed,
        source_tune_id=source_tune_id,
    )


def _root_display(payload: str) -> str:
    written, sounding = _chord_pitches(payload)
    triad = identify_triad(sounding)
    for note, pitch in zip(written, sounding):
        if pitch.pitch_class == triad.root:
            return note_display(note, pitch)
    raise NotATriad("root member not present")


def check_chord_root_id(record: QARecord) -> list[str]:
    try:
        root = _root_display(record.abc_context)
    except SheetQAError:
        return ["context-not-a-triad"]
    failures = []
    if record.correct_answer != root:
        failures.append("correct-root-mismatch")
    for i, payload in enumerate(record.incorrect_answers, 1):
        if payload == root:
            failures.append(f"distractor{i}-not-falsified")
    return failures


# ---------------------------------------------------------------------------
# chord naming


def gen_chord_id(
    tune: Tune | None,
    rng: random.Random,
    *,
    record_id: str = "",
    seed: int = 0,
    source_tune_id: str = "",
) -> QARecord:
    key = Key("C")
    while True:
        triad = _random_triad(rng)
        relative_dir = "up" if triad.quality in ("minor", "diminished") else "down"
        try:
            relative_root = transpose(
                Pitch(triad.root[0], triad.root[1], 0), Interval(3, "minor"), relative_dir
            ).pitch_class
        except SheetQAError:
            continue
        break
    context = _multinote_payload(key, _voicing(triad))
    others = [q for q in TRIAD_QUALITIES if q != triad.quality]
    first = others[rng.randrange(len(others))]
    second = next(q for q in others if q != first)
    wrong = (
        Triad(triad.root, first).symbol,
        Triad(triad.root, second).symbol,
        Triad(relative_root, triad.quality).symbol,
    )
    return QARecord(
        id=record_id,
        class_name="ChordIdentificationQuestion",
        question=CHORD_NAME_QUESTION,
        abc_context=context,
        correct_answer=triad.symbol,
        incorrect_answers=wrong,
        seed=seed,
        source_tune_id=source_tune_id,
    )


def check_chord_id(record: QARecord) -> list[str]:
    try:
        _, sounding = _chord_pitches(record.abc_context)
        symbol = identify_triad(sounding).symbol
    except SheetQAError:
        return ["context-not-a-triad"]
    failures = []
    if record.correct_answer != symbol:
        failures.append("correct-symbol-mismatch")
    for i, payload in enumerate(record.incorrect_answers, 1):
        if payload == symbol:
            failures.append(f"distractor{i}-not-falsified")
    return failures
