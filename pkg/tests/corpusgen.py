"""Deterministic synthetic ABC corpus for tests.

Tunes are built structurally (so measure sums are exact by construction) and
rendered with deliberately messy-but-legal surface syntax: beamed note runs,
decorations, metadata headers, comments, CRLF line endings, and final/double
barlines.  A fraction of tunes can carry unsupported tokens to exercise
rejection logging."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from sheetqa.notation import Key, note_glyph
from sheetqa.theory import key_signature, supported_keys

METER_CHOICES = ("4/4", "3/4", "2/4", "2/2", "6/8", "9/8", "3/8", "12/8")
UNIT_CHOICES = ("1/8", "1/8", "1/8", "1/4", "1/16")

BROKEN_BODIES = (
    "A2 > B2 cdef",
    "|: ABcd efga :|",
    "(5abcde fga2",
    '"Am" C2 E2 G2',
    "[K:G] abcd",
    "A2 ~B2 !trill!c4",
)

TITLES = ("Reel", "Jig", "Air", "March", "Waltz", "Polka", "Hornpipe")


def _fmt_duration(d: Fraction) -> str:
    if d == 1:
        return ""
    if d.denominator == 1:
        return str(d.numerator)
    if d.numerator == 1:
        return f"/{d.denominator}"
    return f"{d.numerator}/{d.denominator}"


class _TuneBuilder:
    def __init__(self, rng: random.Random, ref: int):
        self.rng = rng
        self.ref = ref
        keys = supported_keys()
        self.key: Key = keys[rng.randrange(len(keys))]
        self.signature = key_signature(self.key)
        self.unit = Fraction(UNIT_CHOICES[rng.randrange(len(UNIT_CHOICES))])
        self.has_meter = rng.random() > 0.05
        self.meter = METER_CHOICES[rng.randrange(len(METER_CHOICES))]
        beats, beat_unit = (int(p) for p in self.meter.split("/"))
        self.capacity = Fraction(beats, beat_unit) / self.unit
        # scale positions spanning two octaves, as (letter, accidental, octave)
        letters = "CDEFGAB"
        start = letters.index(self.key.tonic_letter)
        self.walk = [
            (letters[(start + i) % 7], self.signature.get(letters[(start + i) % 7], 0),
             ((start + i) // 7))
            for i in range(15)
        ]
        self.position = rng.randrange(4, 11)

    def _next_pitch(self, force_tonic: bool = False) -> tuple[str, int, int]:
        if force_tonic:
            self.position = 7 if self.position >= 6 else 0
        else:
            step = self.rng.choice((-3, -2, -1, -1, 0, 1, 1, 2, 3))
            self.position = min(len(self.walk) - 1, max(0, self.position + step))
        return self.walk[self.position]

    def _note_token(self, duration: Fraction, force_tonic: bool = False) -> str:
        letter, acc, octave = self._next_pitch(force_tonic)
        glyph = note_glyph(letter, octave)
        if not force_tonic and self.rng.random() < 0.04:
            glyph = self.rng.choice(("^", "_", "=")) + glyph  # chromatic color
        if self.rng.random() < 0.03:
            glyph = self.rng.choice("T~") + glyph  # decoration, dropped by parser
        return glyph + _fmt_duration(duration)

    def _fill(self, target: Fraction, *, closing: bool = False) -> str:
        tokens: list[str] = []
        remaining = target
        while remaining > 0:
            if remaining >= 2 and self.rng.random() < 0.06:
                notes = "".join(self._note_token(Fraction(1)) for _ in range(3))
                tokens.append("(3" + notes)
                remaining -= 2
                continue
            options = [d for d in (Fraction(4), Fraction(3), Fraction(2), Fraction(1))
                       if d <= remaining]
            if not options or (remaining.denominator > 1 and remaining < 1):
                duration = remaining if remaining <= Fraction(1, 2) else Fraction(1, 2)
            else:
                duration = options[self.rng.randrange(len(options))]
            remaining -= duration
            is_last = closing and remaining == 0
            if not is_last and self.rng.random() < 0.05:
                tokens.append("z" + _fmt_duration(duration))
            elif not is_last and self.rng.random() < 0.04:
                chord = self._diatonic_chord()
                tokens.append(chord + _fmt_duration(duration))
            else:
                tokens.append(self._note_token(duration, force_tonic=is_last))
        # beam some adjacent tokens together to vary the surface form
        out = []
        i = 0
        while i < len(tokens):
            if (
                i + 1 < len(tokens)
                and self.rng.random() < 0.5
                and not tokens[i].startswith(("(3", "z", "["))
                and not tokens[i + 1].startswith(("(3", "z", "["))
            ):
                out.append(tokens[i] + tokens[i + 1])
                i += 2
            else:
                out.append(tokens[i])
                i += 1
        return " ".join(out)

    def _diatonic_chord(self) -> str:
        letters = "CDEFGAB"
        start = self.rng.randrange(7)
        parts = []
        for offset in (0, 2, 4):
            letter = letters[(start + offset) % 7]
            octave = 0 if (start + offset) < 7 else 1
            parts.append(note_glyph(letter, octave))
        return "[" + "".join(parts) + "]"

    def build(self) -> str:
        rng = self.rng
        headers = [f"X:{self.ref}"]
        if rng.random() < 0.6:
            headers.append(f"T:{rng.choice(TITLES)} No. {self.ref}")
        if rng.random() < 0.3:
            headers.append(f"R:{rng.choice(TITLES).lower()}")
        headers.append(f"L:{self.unit}")
        if rng.random() < 0.4:
            headers.append("Q:1/4=120")
        if self.has_meter:
            headers.append(f"M:{self.meter}")
        if rng.random() < 0.15:
            headers.append("O:synthetic")
        headers.append(f"K:{self.key.display}")

        n_measures = rng.randrange(4, 11)
        measures = []
        if self.has_meter and rng.random() < 0.1:
            measures.append(self._fill(self.capacity / 2))  # anacrusis
        for i in range(n_measures):
            measures.append(self._fill(self.capacity, closing=(i == n_measures - 1)))
        body_parts = []
        for i, measure in enumerate(measures):
            body_parts.append(measure)
            if i < len(measures) - 1:
                body_parts.append("||" if rng.random() < 0.05 else "|")
        final_bar = rng.choice(("|", "|]", ""))
        body = "| " + " ".join(body_parts) + f" {final_bar}".rstrip()
        # split the body across lines at a bar sometimes
        if rng.random() < 0.3 and body.count("|") > 3:
            cut = body.index("|", len(body) // 2)
            body = body[:cut] + "\n" + body[cut:]
        lines = headers + body.split("\n")
        if rng.random() < 0.1:
            lines.insert(1, "% synthetic corpus tune")
        text = "\n".join(lines)
        if rng.random() < 0.1:
            text = text.replace("\n", "\r\n")
        return text


def synth_tune(rng: random.Random, ref: int) -> str:
    return _TuneBuilder(rng, ref).build()


def broken_tune(rng: random.Random, ref: int) -> str:
    body = BROKEN_BODIES[rng.randrange(len(BROKEN_BODIES))]
    return f"X:{ref}\nL:1/8\nM:4/4\nK:C\n| {body} |"


def write_corpus(
    directory: str | Path,
    n_tunes: int,
    seed: int = 0,
    broken_every: int = 0,
    tunes_per_file: int = 50,
) -> list[Path]:
    """Write ``n_tunes`` tunes (plus interleaved broken ones when
    ``broken_every`` > 0) under ``directory`` as blank-line-separated blocks."""
    rng = random.Random(seed)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blocks = []
    for i in range(n_tunes):
        blocks.append(synth_tune(rng, i + 1))
        if broken_every and (i + 1) % broken_every == 0:
            blocks.append(broken_tune(rng, 10_000 + i))
    paths = []
    for file_no, start in enumerate(range(0, len(blocks), tunes_per_file)):
        path = directory / f"corpus_{file_no:03d}.abc"
        path.write_text("\n\n".join(blocks[start : start + tunes_per_file]) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
