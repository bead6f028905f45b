"""Music-theory kernel: key signatures, pitch arithmetic, intervals, scales,
triads, and exact rational meter validation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (
    Ambiguous,
    NoCandidates,
    NonNameable,
    NotATriad,
    NotMembers,
    OutOfRange,
    UnsupportedKey,
    Unspellable,
)
from .notation import (
    BASE_SEMITONES,
    LETTERS,
    MAX_OCTAVE,
    MIN_OCTAVE,
    Key,
    Meter,
    Pitch,
    Tune,
    WrittenNote,
    accidental_suffix,
    key_fifths,
    note_glyph,
)

LETTER_INDEX = {letter: i for i, letter in enumerate(LETTERS)}

_SHARP_ORDER = "FCGDAEB"
_FLAT_ORDER = "BEADGCF"

QUALITIES = ("perfect", "major", "minor", "augmented", "diminished")
_PERFECT_NUMBERS = frozenset({1, 4, 5, 8})

# Semitone span of every nameable (number, quality) pair within the octave.
QUALITY_SEMITONES: dict[tuple[int, str], int] = {
    (1, "perfect"): 0,
    (1, "augmented"): 1,
    (2, "diminished"): 0,
    (2, "minor"): 1,
    (2, "major"): 2,
    (2, "augmented"): 3,
    (3, "diminished"): 2,
    (3, "minor"): 3,
    (3, "major"): 4,
    (3, "augmented"): 5,
    (4, "diminished"): 4,
    (4, "perfect"): 5,
    (4, "augmented"): 6,
    (5, "diminished"): 6,
    (5, "perfect"): 7,
    (5, "augmented"): 8,
    (6, "diminished"): 7,
    (6, "minor"): 8,
    (6, "major"): 9,
    (6, "augmented"): 10,
    (7, "diminished"): 9,
    (7, "minor"): 10,
    (7, "major"): 11,
    (7, "augmented"): 12,
    (8, "diminished"): 11,
    (8, "perfect"): 12,
    (8, "augmented"): 13,
}

_NUMBER_WORDS = {
    1: "unison",
    2: "second",
    3: "third",
    4: "fourth",
    5: "fifth",
    6: "sixth",
    7: "seventh",
    8: "octave",
}
_WORD_NUMBERS = {word: n for n, word in _NUMBER_WORDS.items()}


@dataclass(frozen=True)
class Interval:
    number: int  # 1 (unison) .. 8 (octave)
    quality: str

    def __post_init__(self):
        if (self.number, self.quality) not in QUALITY_SEMITONES:
            raise ValueError(f"no such interval: {self.quality} {self.number}")

    @property
    def semitones(self) -> int:
        return QUALITY_SEMITONES[(self.number, self.quality)]

    @property
    def name(self) -> str:
        return f"{self.quality} {_NUMBER_WORDS[self.number]}"


def interval_from_name(name: str) -> Interval:
    """Inverse of Interval.name ("perfect octave" -> Interval(8, "perfect"))."""
    try:
        quality, word = name.strip().lower().split()
        return Interval(_WORD_NUMBERS[word], quality)
    except (ValueError, KeyError) as exc:
        raise NonNameable(f"unknown interval name {name!r}") from exc


INTERVAL_NAMES = tuple(
    Interval(number, quality).name
    for (number, quality) in sorted(QUALITY_SEMITONES, key=lambda k: (k[0], QUALITY_SEMITONES[k]))
)


TRIAD_QUALITIES = ("major", "minor", "diminished", "augmented")

# (third semitones, fifth semitones) above the root, per quality.
_TRIAD_PATTERNS = {
    "major": (4, 7),
    "minor": (3, 7),
    "diminished": (3, 6),
    "augmented": (4, 8),
}

_TRIAD_INTERVALS = {
    "major": (Interval(3, "major"), Interval(5, "perfect")),
    "minor": (Interval(3, "minor"), Interval(5, "perfect")),
    "diminished": (Interval(3, "minor"), Interval(5, "diminished")),
    "augmented": (Interval(3, "major"), Interval(5, "augmented")),
}

_TRIAD_SUFFIX = {"major": "", "minor": "m", "diminished": "dim", "augmented": "aug"}


@dataclass(frozen=True)
class Triad:
    root: tuple[str, int]  # pitch class: (letter, accidental)
    quality: str

    def __post_init__(self):
        if self.quality not in _TRIAD_PATTERNS:
            raise ValueError(f"bad triad quality {self.quality!r}")

    @property
    def symbol(self) -> str:
        """Chord symbol: C, Fm, Cdim, Baug."""
        letter, acc = self.root
        return f"{letter}{accidental_suffix(acc)}{_TRIAD_SUFFIX[self.quality]}"

    @property
    def display(self) -> str:
        """Spoken name used in question text: "B augmented", "F minor"."""
        letter, acc = self.root
        return f"{letter}{accidental_suffix(acc)} {self.quality}"

    def member_classes(self) -> tuple[tuple[str, int], tuple[str, int], tuple[str, int]]:
        """Root, third, and fifth pitch classes with exact spelling."""
        third_iv, fifth_iv = _TRIAD_INTERVALS[self.quality]
        root = Pitch(self.root[0], self.root[1], 0)
        return (
            self.root,
            transpose(root, third_iv, "up").pitch_class,
            transpose(root, fifth_iv, "up").pitch_class,
        )


@dataclass(frozen=True)
class ScaleSpec:
    tonic: tuple[str, int]  # (letter, accidental)
    mode: str  # "major" | "natural_minor"
    direction: str = "ascending"

    def __post_init__(self):
        if self.mode not in ("major", "natural_minor"):
            raise ValueError(f"bad scale mode {self.mode!r}")
        if self.direction not in ("ascending", "descending"):
            raise ValueError(f"bad direction {self.direction!r}")

    @property
    def key(self) -> Key:
        mode = "major" if self.mode == "major" else "minor"
        return Key(self.tonic[0], self.tonic[1], mode)


# ---------------------------------------------------------------------------
# keys and signatures


signature_fifths = key_fifths


@lru_cache(maxsize=None)
def key_signature(key: Key) -> dict[str, int]:
    """Letters altered by the key, mapped to their accidental.

    Cached; treat the returned mapping as read-only."""
    count = signature_fifths(key)
    if abs(count) > 7:
        raise UnsupportedKey(f"{key.display} needs {abs(count)} accidentals")
    if count >= 0:
        return {letter: 1 for letter in _SHARP_ORDER[:count]}
    return {letter: -1 for letter in _FLAT_ORDER[:-count]}


@lru_cache(maxsize=1)
def supported_keys() -> tuple[Key, ...]:
    """All 30 keys whose signature stays within 7 sharps or flats."""
    keys = []
    for mode in ("major", "minor"):
        for letter in LETTERS:
            for acc in (-1, 0, 1):
                key = Key(letter, acc, mode)
                if abs(signature_fifths(key)) <= 7:
                    keys.append(key)
    return tuple(keys)


def sounding_pitch(
    note: WrittenNote, key: Key, measure_state: dict[tuple[str, int], int]
) -> Pitch:
    """Resolve a written note against the key signature and the measure's
    accidental memory.  Explicit accidentals are recorded into
    ``measure_state`` for that letter and octave until the measure ends."""
    place = (note.letter, note.octave)
    if note.accidental is not None:
        measure_state[place] = note.accidental
        accidental = note.accidental
    elif place in measure_state:
        accidental = measure_state[place]
    else:
        accidental = key_signature(key).get(note.letter, 0)
    return Pitch(note.letter, accidental, note.octave)


def sounding_pitches(tune: Tune) -> list[Pitch]:
    """All sounding pitches of the tune's note and multinote events, in order."""
    out: list[Pitch] = []
    for measure in tune.measures:
        state: dict[tuple[str, int], int] = {}
        for event in measure.events:
            for note in event.notes:
                out.append(sounding_pitch(note, tune.header.key, state))
    return out


# ---------------------------------------------------------------------------
# pitch arithmetic


def semitone_index(p: Pitch) -> int:
    return 12 * p.octave + BASE_SEMITONES[p.letter] + p.accidental


def letter_position(p: Pitch) -> int:
    """Diatonic staff position: 7 per octave, C at 0."""
    return 7 * p.octave + LETTER_INDEX[p.letter]


def interval_between(low: Pitch, high: Pitch) -> Interval:
    steps = letter_position(high) - letter_position(low)
    if not 0 <= steps <= 7:
        raise OutOfRange(f"letter distance {steps} is beyond the octave")
    semitones = semitone_index(high) - semitone_index(low)
    number = steps + 1
    for quality in QUALITIES:
        if QUALITY_SEMITONES.get((number, quality)) == semitones:
            return Interval(number, quality)
    raise NonNameable(f"{semitones} semitones over {steps} letter steps has no name")


def transpose(p: Pitch, iv: Interval, direction: str) -> Pitch:
    if direction not in ("up", "down"):
        raise ValueError(f"bad direction {direction!r}")
    sign = 1 if direction == "up" else -1
    position = letter_position(p) + sign * (iv.number - 1)
    octave, letter_idx = divmod(position, 7)
    letter = LETTERS[letter_idx]
    if not MIN_OCTAVE <= octave <= MAX_OCTAVE:
        raise OutOfRange(f"octave {octave} outside supported register")
    target = semitone_index(p) + sign * iv.semitones
    accidental = target - (12 * octave + BASE_SEMITONES[letter])
    if not -2 <= accidental <= 2:
        raise Unspellable(
            f"{p} {direction} a {iv.name} needs accidental {accidental:+d}"
        )
    return Pitch(letter, accidental, octave)


# ---------------------------------------------------------------------------
# scales

_MAJOR_STEPS = (2, 2, 1, 2, 2, 2, 1)
_MINOR_STEPS = (2, 1, 2, 2, 1, 2, 2)


def scale_pitches(spec: ScaleSpec) -> list[Pitch]:
    """Eight pitches, one per consecutive letter, tonic in octave 0."""
    key_signature(spec.key)  # raises UnsupportedKey outside the 30-key range
    steps = _MAJOR_STEPS if spec.mode == "major" else _MINOR_STEPS
    tonic = Pitch(spec.tonic[0], spec.tonic[1], 0)
    pitches = [tonic]
    semis = semitone_index(tonic)
    position = letter_position(tonic)
    for step in steps:
        semis += step
        position += 1
        octave, letter_idx = divmod(position, 7)
        letter = LETTERS[letter_idx]
        accidental = semis - (12 * octave + BASE_SEMITONES[letter])
        if not -2 <= accidental <= 2:
            raise UnsupportedKey(f"{spec.key.display} scale is not spellable")
        pitches.append(Pitch(letter, accidental, octave))
    if spec.direction == "descending":
        pitches.reverse()
    return pitches


# ---------------------------------------------------------------------------
# triads


def _fold_pitch_classes(pitches) -> list[tuple[str, int]]:
    classes = {p.pitch_class for p in pitches}
    return sorted(classes)


def _class_semitone(pc: tuple[str, int]) -> int:
    return (BASE_SEMITONES[pc[0]] + pc[1]) % 12


def identify_triad(pitches) -> Triad:
    """Name a 3-pitch-class set; invariant under inversion and doubling."""
    classes = _fold_pitch_classes(pitches)
    if len(classes) != 3:
        raise NotATriad(f"{len(classes)} distinct pitch classes, need exactly 3")
    by_letter = {LETTER_INDEX[letter]: (letter, acc) for letter, acc in classes}
    if len(by_letter) != 3:
        raise NotATriad("two members share a letter")
    for root in classes:
        root_idx = LETTER_INDEX[root[0]]
        third = by_letter.get((root_idx + 2) % 7)
        fifth = by_letter.get((root_idx + 4) % 7)
        if third is None or fifth is None:
            continue
        span3 = (_class_semitone(third) - _class_semitone(root)) % 12
        span5 = (_class_semitone(fifth) - _class_semitone(root)) % 12
        for quality, pattern in _TRIAD_PATTERNS.items():
            if (span3, span5) == pattern:
                return Triad(root, quality)
    raise NotATriad("no rotation matches a triad quality pattern")


def complete_triad(given: tuple[Pitch, Pitch], target: Triad) -> Pitch:
    """The unique missing member of ``target``, anchored to the given octaves."""
    first, second = given
    if first.pitch_class == second.pitch_class:
        raise Ambiguous("given pitches share a pitch class")
    members = target.member_classes()
    roles = {}
    for pitch in given:
        if pitch.pitch_class not in members:
            raise NotMembers(f"{pitch} is not in {target.symbol}")
        roles[members.index(pitch.pitch_class)] = pitch
    third_iv, fifth_iv = _TRIAD_INTERVALS[target.quality]
    missing = ({0, 1, 2} - set(roles)).pop()
    if missing == 0:
        return transpose(roles[1], third_iv, "down")
    if missing == 1:
        return transpose(roles[0], third_iv, "up")
    return transpose(roles[0], fifth_iv, "up")


# ---------------------------------------------------------------------------
# meter validation


@dataclass(frozen=True)
class MeasureCheck:
    index: int
    duration: Fraction  # in unit-note-length counts
    capacity: Fraction
    full: bool


@dataclass(frozen=True)
class MeasureReport:
    measures: tuple[MeasureCheck, ...]
    anacrusis_first: bool
    partial_last: bool

    @property
    def all_full(self) -> bool:
        return all(m.full for m in self.measures)

    @property
    def interior_full(self) -> bool:
        """Full except possibly a short pickup and a short final measure."""
        for check in self.measures:
            if check.full:
                continue
            is_pickup = check.index == 0 and self.anacrusis_first
            is_tail = check.index == len(self.measures) - 1 and self.partial_last
            if not (is_pickup or is_tail):
                return False
        return True


def measure_capacity(meter: Meter, unit: Fraction) -> Fraction:
    """Measure capacity in unit-note-length counts, exact."""
    return meter.capacity / unit


def validate_measures(tune: Tune, meter: Meter) -> MeasureReport:
    capacity = measure_capacity(meter, tune.header.unit_length)
    checks = tuple(
        MeasureCheck(i, m.duration, capacity, m.duration == capacity)
        for i, m in enumerate(tune.measures)
    )
    last = len(checks) - 1
    return MeasureReport(
        measures=checks,
        anacrusis_first=checks[0].duration < capacity,
        partial_last=last > 0 and checks[last].duration < capacity,
    )


# ---------------------------------------------------------------------------
# key inference


def infer_keys(tune: Tune) -> list[Key]:
    """Keys consistent with the tune's sounding accidentals, best first.

    Ties between keys sharing a signature break on tonic prominence: final
    note, then first note, then tonic frequency, then display name."""
    pitches = sounding_pitches(tune)
    if not pitches:
        raise NoCandidates("tune has no pitched events")
    used: dict[str, set[int]] = {}
    for p in pitches:
        used.setdefault(p.letter, set()).add(p.accidental)
    if any(len(accs) > 1 for accs in used.values()):
        raise NoCandidates("a letter is used with conflicting accidentals")
    usage = {letter: accs.pop() for letter, accs in used.items()}

    def consistent(key: Key) -> bool:
        signature = key_signature(key)
        return all(signature.get(letter, 0) == acc for letter, acc in usage.items())

    candidates = [key for key in supported_keys() if consistent(key)]
    if not candidates:
        raise NoCandidates("accidental usage matches no supported signature")

    first_pc, last_pc = pitches[0].pitch_class, pitches[-1].pitch_class
    counts: dict[tuple[str, int], int] = {}
    for p in pitches:
        counts[p.pitch_class] = counts.get(p.pitch_class, 0) + 1

    def rank(key: Key):
        tonic = (key.tonic_letter, key.tonic_accidental)
        return (
            0 if last_pc == tonic else 1,
            0 if first_pc == tonic else 1,
            -counts.get(tonic, 0),
            key.display,
        )

    return sorted(candidates, key=rank)


def enharmonic_equal(a: Key, b: Key) -> bool:
    """Same sounding tonic and mode, possibly spelled differently."""
    return (
        a.mode == b.mode
        and (BASE_SEMITONES[a.tonic_letter] + a.tonic_accidental) % 12
        == (BASE_SEMITONES[b.tonic_letter] + b.tonic_accidental) % 12
    )


def parse_key_display(text: str) -> Key:
    """Inverse of Key.display ("C#m" -> Key("C", 1, "minor"))."""
    text = text.strip()
    mode = "major"
    if text.endswith("m"):
        mode = "minor"
        text = text[:-1]
    letter = text[:1].upper()
    acc = {"#": 1, "b": -1, "": 0}.get(text[1:], None)
    if letter not in BASE_SEMITONES or acc is None:
        raise UnsupportedKey(f"cannot parse key name {text!r}")
    return Key(letter, acc, mode)


def note_display(note: WrittenNote, sounding: Pitch) -> str:
    """Answer-string form of a chord member: the written glyph plus the
    sounding accidental ("G" written in C# minor -> "G#")."""
    return note_glyph(note.letter, note.octave) + accidental_suffix(sounding.accidental)


def written_form(
    pitch: Pitch, key: Key, measure_state: dict[tuple[str, int], int]
) -> WrittenNote:
    """Write ``pitch`` with the minimal accidental mark under ``key``.

    The mark is omitted when the signature (or an earlier explicit accidental
    recorded in ``measure_state``) already implies the right alteration;
    otherwise an explicit mark is written and recorded."""
    place = (pitch.letter, pitch.octave)
    implied = measure_state.get(place, key_signature(key).get(pitch.letter, 0))
    if implied == pitch.accidental:
        return WrittenNote(pitch.letter, None, pitch.octave)
    measure_state[place] = pitch.accidental
    return WrittenNote(pitch.letter, pitch.accidental, pitch.octave)
