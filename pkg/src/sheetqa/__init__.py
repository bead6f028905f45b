"""sheetqa: synthesize verifiable sheet-music reasoning questions from ABC
notation and grade model answers for RL reward pipelines."""

from .errors import SheetQAError
from .notation import (
    Event,
    Header,
    Key,
    Measure,
    Meter,
    Pitch,
    Tune,
    WrittenNote,
    parse_tune,
    serialize,
    strip_bars,
)
from .theory import (
    Interval,
    ScaleSpec,
    Triad,
    complete_triad,
    identify_triad,
    infer_keys,
    interval_between,
    key_signature,
    measure_capacity,
    scale_pitches,
    sounding_pitch,
    transpose,
    validate_measures,
)
from .questions import ChoiceSet, QARecord, shuffle_choices, verify_record
from .grading import (
    AdvantageVector,
    GradeResult,
    RcVerdict,
    check_rhythmic_consistency,
    extract_answer,
    group_advantages,
    rc_score,
    score,
)

__version__ = "0.1.0"

__all__ = [
    "AdvantageVector",
    "ChoiceSet",
    "Event",
    "GradeResult",
    "Header",
    "Interval",
    "Key",
    "Measure",
    "Meter",
    "Pitch",
    "QARecord",
    "RcVerdict",
    "ScaleSpec",
    "SheetQAError",
    "Triad",
    "Tune",
    "WrittenNote",
    "check_rhythmic_consistency",
    "complete_triad",
    "extract_answer",
    "group_advantages",
    "identify_triad",
    "infer_keys",
    "interval_between",
    "key_signature",
    "measure_capacity",
    "parse_tune",
    "rc_score",
    "scale_pitches",
    "score",
    "serialize",
    "shuffle_choices",
    "sounding_pitch",
    "strip_bars",
    "transpose",
    "validate_measures",
    "verify_record",
]
