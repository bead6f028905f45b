"""Structured model and parser/serializer for a strict subset of ABC notation.

Supported subset: headers X, T, L, M, K, Q; notes with ^ ^^ _ __ = accidentals,
' and , octave marks, integer/fraction length suffixes; rests z and Z
(whole-measure); multinotes [...]; (3 triplets; bars | (plus || [| |] as plain
bars); ties -; decoration shorthand letters, slurs, and grace groups are
consumed and dropped.  Broken rhythm (> <), other tuplets, repeats, inline
fields, voices, and annotations are rejected so that every accepted tune is
exactly analyzable.  All durations are exact rationals; nothing in this module
touches floating point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EmptyBody, MalformedHeader, TooShort, UnsupportedToken

LETTERS = "CDEFGAB"

# Base chromatic value of each natural letter within one octave.
BASE_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

ACCIDENTAL_MARKS = {"^^": 2, "^": 1, "=": 0, "_": -1, "__": -2}
MARK_FOR_ACCIDENTAL = {2: "^^", 1: "^", 0: "=", -1: "_", -2: "__"}

MIN_OCTAVE = -4
MAX_OCTAVE = 4

# Decoration shorthand letters (plus staccato/roll marks) that may precede a
# note and carry no pitch or duration information.
DECORATIONS = set(".~HLMOPSTuv")


@dataclass(frozen=True)
class Pitch:
    """A sounding pitch: natural letter, chromatic alteration, register.

    Octave 0 is the ABC uppercase register (C..B), +1 the lowercase one;
    ' and , marks move further up/down.
    """

    letter: str
    accidental: int = 0
    octave: int = 0

    def __post_init__(self):
        if self.letter not in BASE_SEMITONES:
            raise ValueError(f"bad pitch letter {self.letter!r}")
        if not -2 <= self.accidental <= 2:
            raise ValueError(f"accidental {self.accidental} out of [-2, 2]")

    @property
    def pitch_class(self) -> tuple[str, int]:
        return (self.letter, self.accidental)

    def __str__(self) -> str:
        return f"{self.letter}{accidental_suffix(self.accidental)}(oct {self.octave})"


@dataclass(frozen=True)
class WrittenNote:
    """A note as written: explicit accidental only if the source carried one."""

    letter: str
    accidental: int | None = None
    octave: int = 0


@dataclass(frozen=True)
class Event:
    """One timed element of a measure.

    ``duration`` is in unit-note-length counts: under L:1/8 a bare note is 1,
    "e2" is 2.  Multiply by the header unit length for whole-note time.
    ``tuplet`` is 3 on the first member of a (3 group and 0 elsewhere.
    """

    kind: str  # "note" | "rest" | "multinote"
    notes: tuple[WrittenNote, ...]
    duration: Fraction
    tie: bool = False
    tuplet: int = 0

    def __post_init__(self):
        if self.kind not in ("note", "rest", "multinote"):
            raise ValueError(f"bad event kind {self.kind!r}")
        if self.duration <= 0:
            raise ValueError("event duration must be positive")
        if self.kind == "note" and len(self.notes) != 1:
            raise ValueError("note event needs exactly one written note")
        if self.kind == "rest" and self.notes:
            raise ValueError("rest event cannot carry notes")
        if self.kind == "multinote":
            if len(self.notes) < 2:
                raise ValueError("multinote needs at least two written notes")
            if len(set(self.notes)) != len(self.notes):
                raise ValueError("multinote written notes must be distinct")


@dataclass(frozen=True)
class Meter:
    beats: int
    beat_unit: int

    def __post_init__(self):
        if self.beats <= 0 or self.beat_unit <= 0:
            raise ValueError("meter parts must be positive")
        if self.beat_unit & (self.beat_unit - 1):
            raise ValueError("beat unit must be a power of two")

    @property
    def capacity(self) -> Fraction:
        """Measure length in whole notes."""
        return Fraction(self.beats, self.beat_unit)

    def __str__(self) -> str:
        return f"{self.beats}/{self.beat_unit}"


_FIFTHS_BY_LETTER = {"F": -1, "C": 0, "G": 1, "D": 2, "A": 3, "E": 4, "B": 5}


@dataclass(frozen=True)
class Key:
    tonic_letter: str
    tonic_accidental: int = 0  # -1 flat, 0 natural, +1 sharp
    mode: str = "major"

    def __post_init__(self):
        if self.tonic_letter not in BASE_SEMITONES:
            raise ValueError(f"bad tonic letter {self.tonic_letter!r}")
        if self.tonic_accidental not in (-1, 0, 1):
            raise ValueError("tonic accidental must be -1, 0, or +1")
        if self.mode not in ("major", "minor"):
            raise ValueError(f"unsupported mode {self.mode!r}")

    @property
    def display(self) -> str:
        """Short name as used in K: headers and answer strings ("C#m", "Eb")."""
        acc = {1: "#", -1: "b", 0: ""}[self.tonic_accidental]
        suffix = "m" if self.mode == "minor" else ""
        return f"{self.tonic_letter}{acc}{suffix}"


def key_fifths(key: Key) -> int:
    """Signed signature size: +n for n sharps, -n for n flats.

    Beyond ±7 the key has no standard signature; such keys are rejected at
    parse time but the Key value itself stays constructible (wrong-answer
    strings may name them)."""
    count = _FIFTHS_BY_LETTER[key.tonic_letter] + 7 * key.tonic_accidental
    return count - 3 if key.mode == "minor" else count


@dataclass(frozen=True)
class Header:
    unit_length: Fraction = Fraction(1, 8)
    meter: Meter | None = None
    key: Key = Key("C")
    tempo: str | None = None
    reference_number: int | None = None
    title: str | None = None


@dataclass(frozen=True)
class Measure:
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError("measure cannot be empty")

    @property
    def duration(self) -> Fraction:
        return sum((e.duration for e in self.events), Fraction(0))


@dataclass(frozen=True)
class Tune:
    header: Header
    measures: tuple[Measure, ...]
    raw_source: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.measures:
            raise ValueError("tune needs at least one measure")

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(e for m in self.measures for e in m.events)


def accidental_suffix(accidental: int) -> str:
    """Human-facing suffix: +1 -> '#', -2 -> 'bb', 0 -> ''."""
    if accidental >= 0:
        return "#" * accidental
    return "b" * -accidental


def note_glyph(letter: str, octave: int) -> str:
    """ABC register glyph without accidental: (C,0)->'C', (C,1)->'c', (C,2)->"c'"."""
    if octave >= 1:
        return letter.lower() + "'" * (octave - 1)
    return letter.upper() + "," * -octave


# ---------------------------------------------------------------------------
# header parsing


_KEY_RE = re.compile(r"^([A-Ga-g])([#b]?)\s*([A-Za-z]*)$")

_MODE_WORDS = {
    "": "major",
    "maj": "major",
    "major": "major",
    "m": "minor",
    "min": "minor",
    "minor": "minor",
}


def parse_key(text: str) -> Key:
    """Parse a K: header value such as "C", "C#m", "Ebm", "A major"."""
    m = _KEY_RE.match(text.strip())
    if not m:
        raise MalformedHeader(f"K:{text}", "unrecognized key")
    letter, acc, mode_word = m.groups()
    mode = _MODE_WORDS.get(mode_word.lower())
    if mode is None:
        raise MalformedHeader(f"K:{text}", f"unsupported mode {mode_word!r}")
    return Key(letter.upper(), {"#": 1, "b": -1, "": 0}[acc], mode)


def parse_meter(text: str) -> Meter | None:
    """Parse an M: header value; "C" is 4/4, "C|" is 2/2, "none" is no meter."""
    text = text.strip()
    if text.lower() == "none":
        return None
    if text == "C":
        return Meter(4, 4)
    if text == "C|":
        return Meter(2, 2)
    m = re.match(r"^(\d+)/(\d+)$", text)
    if not m:
        raise MalformedHeader(f"M:{text}", "unrecognized meter")
    try:
        return Meter(int(m.group(1)), int(m.group(2)))
    except ValueError as exc:
        raise MalformedHeader(f"M:{text}", str(exc)) from None


def parse_unit_length(text: str) -> Fraction:
    m = re.match(r"^(\d+)/(\d+)$", text.strip())
    if not m:
        raise MalformedHeader(f"L:{text}", "unit length must be n/d")
    value = Fraction(int(m.group(1)), int(m.group(2)))
    if value <= 0:
        raise MalformedHeader(f"L:{text}", "unit length must be positive")
    return value


# Metadata header letters that carry no musical content for our purposes and
# are dropped on ingestion (folk-tune corpus files are full of them).
_DROPPED_HEADERS = set("ABCDFGHINORSUWZmrsw")

_HEADER_LINE_RE = re.compile(r"^([A-Za-z]):(.*)$")


def _split_header_and_body(text: str) -> tuple[dict[str, str], list[str]]:
    headers: dict[str, str] = {}
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    body: list[str] = []
    in_header = True
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        m = _HEADER_LINE_RE.match(line)
        if in_header and m:
            letter, value = m.group(1), m.group(2).strip()
            if letter == "V":
                raise UnsupportedToken(0, "V:", "multi-voice scores are not supported")
            if letter in "XTLMKQ":
                if letter in headers:
                    raise MalformedHeader(line, f"duplicate {letter}: header")
                headers[letter] = value
                continue
            if letter in _DROPPED_HEADERS:
                continue
            raise MalformedHeader(line, "unknown header field")
        in_header = False
        if m and m.group(1) in ("w", "W"):
            continue  # lyrics
        body.append(line)
    return headers, body


def _build_header(headers: dict[str, str]) -> Header:
    unit = parse_unit_length(headers["L"]) if "L" in headers else Fraction(1, 8)
    meter = parse_meter(headers["M"]) if "M" in headers else None
    key = parse_key(headers["K"]) if "K" in headers else Key("C")
    if abs(key_fifths(key)) > 7:
        raise MalformedHeader(f"K:{headers['K']}", "beyond seven sharps or flats")
    ref = None
    if "X" in headers:
        try:
            ref = int(headers["X"])
        except ValueError:
            raise MalformedHeader(f"X:{headers['X']}", "reference number must be an integer") from None
    return Header(
        unit_length=unit,
        meter=meter,
        key=key,
        tempo=headers.get("Q") or None,
        reference_number=ref,
        title=headers.get("T") or None,
    )


# ---------------------------------------------------------------------------
# body tokenizer

_NOTE_RE = re.compile(r"(\^\^|__|[\^_=])?([A-Ga-g])([',]*)")
_LENGTH_RE = re.compile(r"(\d+)?(/+)(\d+)?|(\d+)")


def _parse_length(text: str, pos: int) -> tuple[Fraction, int]:
    """Parse the optional length suffix at ``pos``; returns (multiplier, new pos)."""
    m = _LENGTH_RE.match(text, pos)
    if not m:
        return Fraction(1), pos
    if m.group(4) is not None:
        return Fraction(int(m.group(4))), m.end()
    num = int(m.group(1)) if m.group(1) else 1
    slashes = m.group(2)
    if m.group(3) is not None:
        if len(slashes) != 1:
            raise UnsupportedToken(pos, m.group(0), "bad length")
        den = int(m.group(3))
    else:
        den = 2 ** len(slashes)
    if den == 0:
        raise UnsupportedToken(pos, m.group(0), "zero denominator")
    return Fraction(num, den), m.end()


def _parse_written_note(text: str, pos: int) -> tuple[WrittenNote, int]:
    m = _NOTE_RE.match(text, pos)
    if not m:
        raise UnsupportedToken(pos, text[pos : pos + 4])
    mark, letter, octs = m.groups()
    accidental = ACCIDENTAL_MARKS[mark] if mark else None
    octave = (1 if letter.islower() else 0) + octs.count("'") - octs.count(",")
    if not MIN_OCTAVE <= octave <= MAX_OCTAVE:
        raise UnsupportedToken(pos, m.group(0), "octave out of supported range")
    return WrittenNote(letter.upper(), accidental, octave), m.end()


class _BodyParser:
    def __init__(self, text: str, header: Header):
        self.text = text
        self.header = header
        self.pos = 0
        self.measures: list[Measure] = []
        self.current: list[Event] = []
        self.tuplet_left = 0  # events remaining in an open (3 group

    def fail(self, token: str, reason: str = "") -> UnsupportedToken:
        return UnsupportedToken(self.pos, token, reason)

    def close_measure(self) -> None:
        if self.tuplet_left:
            raise self.fail("|", "triplet group split by barline")
        if self.current:
            self.measures.append(Measure(tuple(self.current)))
            self.current = []

    def push(self, event: Event) -> None:
        if self.tuplet_left:
            duration = event.duration * Fraction(2, 3)
            tuplet = 3 if self.tuplet_left == 3 else 0
            event = Event(event.kind, event.notes, duration, event.tie, tuplet)
            self.tuplet_left -= 1
        self.current.append(event)

    def mark_tie(self) -> None:
        if not self.current or self.current[-1].kind == "rest":
            raise self.fail("-", "tie without a preceding note")
        last = self.current[-1]
        self.current[-1] = Event(last.kind, last.notes, last.duration, True, last.tuplet)

    def measure_rest(self, count: int) -> None:
        meter = self.header.meter
        if meter is None:
            raise self.fail("Z", "measure rest needs a meter")
        if self.current or self.tuplet_left:
            raise self.fail("Z", "measure rest must start its own measure")
        capacity = meter.capacity / self.header.unit_length
        for _ in range(count):
            self.measures.append(
                Measure((Event("rest", (), capacity),))
            )

    def parse(self) -> tuple[Measure, ...]:
        text = self.text
        n = len(text)
        while self.pos < n:
            ch = text[self.pos]
            if ch in " \t\\":
                self.pos += 1
            elif ch == "|" or (ch == "[" and text.startswith("[|", self.pos)):
                nxt = text[self.pos + 1 : self.pos + 2]
                if ch == "|" and nxt == ":":
                    raise self.fail("|:", "repeats are not supported")
                self.pos += 2 if text[self.pos : self.pos + 2] in ("||", "|]", "[|") else 1
                self.close_measure()
            elif ch == ":":
                raise self.fail(":|", "repeats are not supported")
            elif ch in "><":
                raise self.fail(ch, "broken rhythm is not supported")
            elif ch == "(":
                self.parse_paren()
            elif ch == ")":
                self.pos += 1  # slur close, dropped
            elif ch == "{":
                self.skip_grace()
            elif ch == "-":
                self.pos += 1
                self.mark_tie()
            elif ch == "z":
                self.pos += 1
                length, self.pos = _parse_length(text, self.pos)
                self.push(Event("rest", (), length))
            elif ch == "Z":
                self.pos += 1
                m = re.match(r"\d+", text[self.pos :])
                count = int(m.group(0)) if m else 1
                if m:
                    self.pos += m.end()
                self.measure_rest(count)
            elif ch == "[":
                self.parse_multinote()
            elif ch in DECORATIONS:
                self.pos += 1  # decoration shorthand, dropped
            elif _NOTE_RE.match(text, self.pos):
                note, self.pos = _parse_written_note(text, self.pos)
                length, self.pos = _parse_length(text, self.pos)
                self.push(Event("note", (note,), length))
            else:
                raise self.fail(text[self.pos : self.pos + 4].split()[0] or ch)
        if self.tuplet_left:
            raise self.fail("(3", "unterminated triplet group")
        self.close_measure()
        return tuple(self.measures)

    def parse_paren(self) -> None:
        nxt = self.text[self.pos + 1 : self.pos + 2]
        if nxt == "3":
            if self.tuplet_left:
                raise self.fail("(3", "nested tuplets are not supported")
            self.tuplet_left = 3
            self.pos += 2
        elif nxt.isdigit():
            raise self.fail(f"({nxt}", "only (3 tuplets are supported")
        else:
            self.pos += 1  # slur open, dropped

    def skip_grace(self) -> None:
        end = self.text.find("}", self.pos)
        if end < 0:
            raise self.fail("{", "unterminated grace group")
        self.pos = end + 1

    def parse_multinote(self) -> None:
        text = self.text
        start = self.pos
        if re.match(r"\[[A-Za-z]:", text[self.pos :]):
            raise self.fail(text[self.pos : self.pos + 3], "inline fields are not supported")
        self.pos += 1
        notes: list[WrittenNote] = []
        inner_lengths: set[Fraction] = set()
        while self.pos < len(text) and text[self.pos] != "]":
            note, self.pos = _parse_written_note(text, self.pos)
            length, self.pos = _parse_length(text, self.pos)
            inner_lengths.add(length)
            notes.append(note)
        if self.pos >= len(text):
            self.pos = start
            raise self.fail("[", "unterminated multinote")
        self.pos += 1
        outer, self.pos = _parse_length(text, self.pos)
        if len(notes) < 2:
            self.pos = start
            raise self.fail(text[start : self.pos + 1], "multinote needs two or more notes")
        if len(set(notes)) != len(notes):
            self.pos = start
            raise self.fail(text[start : self.pos], "duplicate note in multinote")
        if len(inner_lengths) > 1:
            self.pos = start
            raise self.fail(text[start : self.pos], "mixed durations in multinote")
        duration = inner_lengths.pop() * outer
        self.push(Event("multinote", tuple(notes), duration))


def parse_tune(text: str) -> Tune:
    """Parse ABC source into a Tune; rejects anything it cannot fully interpret."""
    headers, body_lines = _split_header_and_body(text)
    header = _build_header(headers)
    body = " ".join(body_lines)
    measures = _BodyParser(body, header).parse()
    if not measures:
        raise EmptyBody("tune has no measures")
    return Tune(header, measures, raw_source=text)


# ---------------------------------------------------------------------------
# serialization


def format_duration(value: Fraction) -> str:
    """Canonical ABC length suffix: 1 -> '', 2 -> '2', 1/2 -> '/2', 3/2 -> '3/2'."""
    if value == 1:
        return ""
    if value.denominator == 1:
        return str(value.numerator)
    if value.numerator == 1:
        return f"/{value.denominator}"
    return f"{value.numerator}/{value.denominator}"


def format_written_note(note: WrittenNote) -> str:
    mark = MARK_FOR_ACCIDENTAL[note.accidental] if note.accidental is not None else ""
    return mark + note_glyph(note.letter, note.octave)


def _format_single_event(event: Event, duration: Fraction) -> str:
    suffix = format_duration(duration)
    if event.kind == "rest":
        out = "z" + suffix
    elif event.kind == "note":
        out = format_written_note(event.notes[0]) + suffix
    else:
        out = "[" + "".join(format_written_note(n) for n in event.notes) + "]" + suffix
    return out + ("-" if event.tie else "")


def serialize_events(events: tuple[Event, ...] | list[Event]) -> str:
    """Canonical space-joined event sequence, re-emitting (3 groups."""
    parts: list[str] = []
    i = 0
    while i < len(events):
        event = events[i]
        if event.tuplet == 3:
            group = events[i : i + 3]
            written = "".join(
                _format_single_event(e, e.duration * Fraction(3, 2)) for e in group
            )
            parts.append("(3" + written)
            i += 3
        else:
            parts.append(_format_single_event(event, event.duration))
            i += 1
    return " ".join(parts)


def serialize_header(header: Header, *, drop: tuple[str, ...] = ()) -> str:
    """Header lines in canonical X, T, L, Q, M, K order."""
    lines: list[str] = []
    if header.reference_number is not None and "X" not in drop:
        lines.append(f"X:{header.reference_number}")
    if header.title and "T" not in drop:
        lines.append(f"T:{header.title}")
    if "L" not in drop:
        lines.append(f"L:{header.unit_length.numerator}/{header.unit_length.denominator}")
    if header.tempo and "Q" not in drop:
        lines.append(f"Q:{header.tempo}")
    if header.meter is not None and "M" not in drop:
        lines.append(f"M:{header.meter}")
    if "K" not in drop:
        lines.append(f"K:{header.key.display}")
    return "\n".join(lines)


def serialize_body(measures: tuple[Measure, ...] | list[Measure]) -> str:
    inner = " | ".join(serialize_events(m.events) for m in measures)
    return f"| {inner} |"


def serialize(tune: Tune) -> str:
    """Canonical ABC form; parse(serialize(t)) is structurally equal to t."""
    return serialize_header(tune.header) + "\n" + serialize_body(tune.measures)


# ---------------------------------------------------------------------------
# bar manipulation


def strip_bars(tune: Tune) -> tuple[Header, tuple[Event, ...]]:
    """Drop bar boundaries, keeping headers and the flat event sequence."""
    if len(tune.measures) < 2:
        raise TooShort("need at least two measures to strip bars")
    return tune.header, tune.events


def event_atoms(events: tuple[Event, ...]) -> tuple[tuple[Event, ...], ...]:
    """Group events into indivisible runs (a (3 group is one atom)."""
    atoms: list[tuple[Event, ...]] = []
    i = 0
    while i < len(events):
        if events[i].tuplet == 3:
            atoms.append(tuple(events[i : i + 3]))
            i += 3
        else:
            atoms.append((events[i],))
            i += 1
    return tuple(atoms)


def rebar(header: Header, events: tuple[Event, ...], sizes: tuple[int, ...]) -> Tune:
    """Build a tune from an event sequence and per-measure atom counts."""
    atoms = event_atoms(events)
    if sum(sizes) != len(atoms) or any(s <= 0 for s in sizes):
        raise ValueError("sizes must partition the atom sequence")
    measures: list[Measure] = []
    start = 0
    for size in sizes:
        chunk = atoms[start : start + size]
        measures.append(Measure(tuple(e for atom in chunk for e in atom)))
        start += size
    return Tune(header, tuple(measures))
