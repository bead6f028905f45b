"""Record and choice-set types shared by all question templates."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

CATEGORIES = ("Rhythm", "Chord", "Interval", "Scale")

CATEGORY_BY_CLASS = {
    "TimeSignatureQuestion": "Rhythm",
    "BarLinePlacementQuestion": "Rhythm",
    "IntervalNumberQuestion": "Interval",
    "NoteCompletionByInterval": "Interval",
    "ChordsCompletionQuestion": "Chord",
    "ChordKeyRootIdentificationQuestion": "Chord",
    "ChordIdentificationQuestion": "Chord",
    "ScaleIdentificationFromAbcQuestion": "Scale",
    "ScaleSelectionQuestion": "Scale",
}

CLASSES_BY_CATEGORY: dict[str, tuple[str, ...]] = {}
for _name, _cat in CATEGORY_BY_CLASS.items():
    CLASSES_BY_CATEGORY.setdefault(_cat, ())
    CLASSES_BY_CATEGORY[_cat] += (_name,)

# Templates whose options are ABC snippets (rendered as score images in the
# visual modality) rather than plain text.
SCORE_CHOICE_CLASSES = frozenset(
    {
        "BarLinePlacementQuestion",
        "NoteCompletionByInterval",
        "ChordsCompletionQuestion",
        "ScaleSelectionQuestion",
    }
)

LABELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class ChoiceSet:
    correct: str
    distractors: tuple[str, str, str]

    def __post_init__(self):
        payloads = (self.correct, *self.distractors)
        if len(set(payloads)) != 4:
            raise ValueError("choice payloads must be pairwise distinct")


def shuffle_choices(cs: ChoiceSet, rng: random.Random) -> tuple[tuple[str, str, str, str], str]:
    """Uniformly permute the four payloads; returns (choices, answer label)."""
    order = [0, 1, 2, 3]
    rng.shuffle(order)
    pool = (cs.correct, *cs.distractors)
    choices = tuple(pool[i] for i in order)
    return choices, LABELS[order.index(0)]


@dataclass(frozen=True)
class QARecord:
    """One multiple-choice question with its verified answer material.

    The stored form keeps the correct answer and distractors in fixed fields;
    the presented option order is a pure function of ``seed`` so graders and
    files never disagree about which label is right."""

    id: str
    class_name: str
    question: str
    abc_context: str
    correct_answer: str
    incorrect_answers: tuple[str, str, str]
    seed: int = 0
    source_tune_id: str = ""
    category: str = field(default="")

    def __post_init__(self):
        if self.class_name not in CATEGORY_BY_CLASS:
            raise ValueError(f"unknown question class {self.class_name!r}")
        expected = CATEGORY_BY_CLASS[self.class_name]
        if not self.category:
            object.__setattr__(self, "category", expected)
        elif self.category != expected:
            raise ValueError(
                f"{self.class_name} belongs to category {expected}, not {self.category}"
            )

    @property
    def choice_set(self) -> ChoiceSet:
        return ChoiceSet(self.correct_answer, self.incorrect_answers)

    @property
    def shuffled(self) -> tuple[tuple[str, str, str, str], str]:
        return shuffle_choices(self.choice_set, random.Random(self.seed))

    @property
    def choices(self) -> tuple[str, str, str, str]:
        return self.shuffled[0]

    @property
    def answer_label(self) -> str:
        return self.shuffled[1]
