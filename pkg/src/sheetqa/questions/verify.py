"""Record verification: re-run each template's checker against a record."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from ..errors import InsufficientCandidates
from .chords import (
    check_chord_id,
    check_chord_root_id,
    check_chords_completion,
)
from .intervals import check_interval_number, check_note_completion, interval_name_distractors
from .records import ChoiceSet, QARecord
from .rhythm import check_bar_placement, check_time_signature, time_signature_distractors
from .scales import check_scale_id, check_scale_selection

_CHECKERS = {
    "TimeSignatureQuestion": check_time_signature,
    "BarLinePlacementQuestion": check_bar_placement,
    "IntervalNumberQuestion": check_interval_number,
    "NoteCompletionByInterval": check_note_completion,
    "ChordsCompletionQuestion": check_chords_completion,
    "ChordKeyRootIdentificationQuestion": check_chord_root_id,
    "ChordIdentificationQuestion": check_chord_id,
    "ScaleIdentificationFromAbcQuestion": check_scale_id,
    "ScaleSelectionQuestion": check_scale_selection,
}


@dataclass(frozen=True)
class Verdict:
    record_id: str
    passed: bool
    failures: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.passed


def verify_record(record: QARecord) -> Verdict:
    """Re-check that the labeled answer is correct and every distractor fails
    its template predicate; failures name the broken predicate."""
    failures: list[str] = []
    payloads = (record.correct_answer, *record.incorrect_answers)
    if len(set(payloads)) != 4:
        failures.append("duplicate")
    checker = _CHECKERS[record.class_name]
    failures.extend(checker(record))
    if "duplicate" not in failures:
        label = record.answer_label
        if record.choices[("A", "B", "C", "D").index(label)] != record.correct_answer:
            failures.append("label-mismatch")  # unreachable unless shuffle breaks
    return Verdict(record.id, not failures, tuple(failures))


def gen_distractors(template: str, correct: str, context, rng: random.Random) -> ChoiceSet:
    """Pool-based distractor sampling for the templates that use one.

    ``context`` is the unit note length (a Fraction) for
    TimeSignatureQuestion and is unused for IntervalNumberQuestion.  The
    remaining templates construct distractors inside their generators because
    the candidates are built, not sampled."""
    if template == "TimeSignatureQuestion":
        from ..notation import parse_meter

        meter = parse_meter(correct)
        unit = context if isinstance(context, Fraction) else Fraction(1, 8)
        return ChoiceSet(correct, time_signature_distractors(meter, unit, rng))
    if template == "IntervalNumberQuestion":
        return ChoiceSet(correct, interval_name_distractors(correct, rng))
    raise InsufficientCandidates(f"{template} builds distractors in its generator")
