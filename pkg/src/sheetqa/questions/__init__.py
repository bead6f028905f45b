"""The nine question-template generators and their verification machinery."""

from .chords import (
    CHORD_COMPLETION_QUESTION,
    CHORD_NAME_QUESTION,
    CHORD_ROOT_QUESTION,
    gen_chord_id,
    gen_chord_root_id,
    gen_chords_completion,
)
from .intervals import (
    INTERVAL_QUESTION,
    NOTE_COMPLETION_QUESTION,
    gen_interval_number,
    gen_note_completion,
)
from .records import (
    CATEGORIES,
    CATEGORY_BY_CLASS,
    CLASSES_BY_CATEGORY,
    LABELS,
    SCORE_CHOICE_CLASSES,
    ChoiceSet,
    QARecord,
    shuffle_choices,
)
from .rhythm import (
    BAR_PLACEMENT_QUESTION,
    METER_POOL,
    TIME_SIGNATURE_QUESTION,
    full_measure_windows,
    gen_bar_placement,
    gen_time_signature,
)
from .scales import (
    MIN_MELODY_NOTES,
    SCALE_ID_QUESTION,
    SCALE_SELECTION_QUESTION,
    gen_scale_id,
    gen_scale_selection,
    render_scale,
    respell_over_c,
)
from .verify import Verdict, gen_distractors, verify_record

GENERATORS = {
    "TimeSignatureQuestion": gen_time_signature,
    "BarLinePlacementQuestion": gen_bar_placement,
    "IntervalNumberQuestion": gen_interval_number,
    "NoteCompletionByInterval": gen_note_completion,
    "ChordsCompletionQuestion": gen_chords_completion,
    "ChordKeyRootIdentificationQuestion": gen_chord_root_id,
    "ChordIdentificationQuestion": gen_chord_id,
    "ScaleIdentificationFromAbcQuestion": gen_scale_id,
    "ScaleSelectionQuestion": gen_scale_selection,
}

__all__ = [
    "CATEGORIES",
    "CATEGORY_BY_CLASS",
    "CLASSES_BY_CATEGORY",
    "GENERATORS",
    "LABELS",
    "METER_POOL",
    "SCORE_CHOICE_CLASSES",
    "ChoiceSet",
    "QARecord",
    "Verdict",
    "gen_bar_placement",
    "gen_chord_id",
    "gen_chord_root_id",
    "gen_chords_completion",
    "gen_distractors",
    "gen_interval_number",
    "gen_note_completion",
    "gen_scale_id",
    "gen_scale_selection",
    "gen_time_signature",
    "full_measure_windows",
    "render_scale",
    "respell_over_c",
    "shuffle_choices",
    "verify_record",
]
