"""Corpus ingestion, deterministic sampling, and JSONL persistence."""

from __future__ import annotations

import hashlib
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import (
    ConfigError,
    EmptyCorpus,
    GenerationError,
    Ineligible,
    InsufficientCorpus,
    SchemaError,
    SheetQAError,
)
from .notation import Tune, parse_tune
from .questions import (
    CATEGORIES,
    CATEGORY_BY_CLASS,
    CLASSES_BY_CATEGORY,
    GENERATORS,
    MIN_MELODY_NOTES,
    QARecord,
    full_measure_windows,
    verify_record,
)
from .questions.intervals import note_pairs
from .theory import ScaleSpec

MODALITIES = ("textual", "visual", "both")
SPLITS = ("benchmark", "train")

# Reference per-template proportions of each 400-question category.
DEFAULT_TEMPLATE_WEIGHTS: dict[str, Fraction] = {
    "TimeSignatureQuestion": Fraction(217, 400),
    "BarLinePlacementQuestion": Fraction(183, 400),
    "IntervalNumberQuestion": Fraction(199, 400),
    "NoteCompletionByInterval": Fraction(201, 400),
    "ChordsCompletionQuestion": Fraction(156, 400),
    "ChordKeyRootIdentificationQuestion": Fraction(200, 400),
    "ChordIdentificationQuestion": Fraction(44, 400),
    "ScaleIdentificationFromAbcQuestion": Fraction(352, 400),
    "ScaleSelectionQuestion": Fraction(48, 400),
}

DEFAULT_BENCHMARK_COUNT = 400
DEFAULT_TRAIN_COUNT = 2000

_MAX_DRAWS = 32


def category_slug(category: str) -> str:
    """Image/id slug: Chord -> "chords" (the naming images follow)."""
    return category.lower() + "s"


def derive_seed(*parts) -> int:
    """Stable 64-bit substream seed from the master seed and record identity."""
    text = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class DatasetConfig:
    category_counts: dict[str, int] = field(
        default_factory=lambda: {c: DEFAULT_BENCHMARK_COUNT for c in CATEGORIES}
    )
    template_weights: dict[str, Fraction] = field(
        default_factory=lambda: dict(DEFAULT_TEMPLATE_WEIGHTS)
    )
    master_seed: int = 0
    modality: str = "textual"
    split: str = "benchmark"
    context_measures: int = 4
    benchmark_fraction: float = 0.25

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ConfigError(f"modality must be one of {MODALITIES}")
        if self.split not in SPLITS:
            raise ConfigError(f"split must be one of {SPLITS}")
        if not 0 < self.benchmark_fraction < 1:
            raise ConfigError("benchmark_fraction must be in (0, 1)")
        for category, count in self.category_counts.items():
            if category not in CATEGORIES:
                raise ConfigError(f"unknown category {category!r}")
            if count <= 0:
                raise ConfigError(f"count for {category} must be positive")
        for name in self.template_weights:
            if name not in CATEGORY_BY_CLASS:
                raise ConfigError(f"unknown template {name!r}")
        for category in self.category_counts:
            total = sum(
                Fraction(w)
                for name, w in self.template_weights.items()
                if CATEGORY_BY_CLASS[name] == category
            )
            if abs(total - 1) > Fraction(1, 10**9):
                raise ConfigError(f"{category} template weights sum to {total}, not 1")

    def template_counts(self) -> dict[str, int]:
        """Exact per-template counts via largest-remainder apportionment."""
        counts: dict[str, int] = {}
        for category, total in self.category_counts.items():
            names = CLASSES_BY_CATEGORY[category]
            raw = {n: Fraction(self.template_weights[n]) * total for n in names}
            base = {n: int(raw[n]) for n in names}
            short = total - sum(base.values())
            by_remainder = sorted(names, key=lambda n: (base[n] - raw[n], names.index(n)))
            for n in by_remainder[:short]:
                base[n] += 1
            counts.update(base)
        return counts


def benchmark_config(seed: int = 0, **overrides) -> DatasetConfig:
    return replace(DatasetConfig(master_seed=seed), **overrides)


def train_config(seed: int = 0, **overrides) -> DatasetConfig:
    cfg = DatasetConfig(
        category_counts={c: DEFAULT_TRAIN_COUNT for c in CATEGORIES},
        master_seed=seed,
        split="train",
    )
    return replace(cfg, **overrides)


def _parse_fraction(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def parse_config_text(text: str, base: DatasetConfig | None = None) -> DatasetConfig:
    """Key-value config: "seed = 7", "count.Rhythm = 400",
    "weight.TimeSignatureQuestion = 217/400", one per line, # comments."""
    cfg = base or DatasetConfig()
    counts = dict(cfg.category_counts)
    weights = dict(cfg.template_weights)
    fields: dict = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "seed":
                fields["master_seed"] = int(value)
            elif key in ("modality", "split"):
                fields[key] = value
            elif key == "context_measures":
                fields["context_measures"] = int(value)
            elif key == "benchmark_fraction":
                fields["benchmark_fraction"] = float(value)
            elif key == "count_per_category":
                counts = {c: int(value) for c in CATEGORIES}
            elif key.startswith("count."):
                counts[key[6:]] = int(value)
            elif key.startswith("weight."):
                weights[key[7:]] = _parse_fraction(value)
            else:
                raise ConfigError(f"line {line_no}: unknown key {key!r}")
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {line_no}: {exc}") from None
    return replace(cfg, category_counts=counts, template_weights=weights, **fields)


def load_config(path: str | Path, base: DatasetConfig | None = None) -> DatasetConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), base)


# ---------------------------------------------------------------------------
# corpus ingestion


@dataclass(frozen=True)
class TuneEntry:
    tune_id: str
    tune: Tune
    path: str
    eligible: frozenset[str]


@dataclass
class CorpusIndex:
    entries: list[TuneEntry]
    rejects: list[tuple[str, str]]
    duplicates: list[str]
    content_hash: str

    def eligible_entries(self, class_name: str) -> list[TuneEntry]:
        return [e for e in self.entries if class_name in e.eligible]


def eligibility_flags(tune: Tune, context_measures: int = 4) -> frozenset[str]:
    flags = {
        "ChordsCompletionQuestion",
        "ChordKeyRootIdentificationQuestion",
        "ChordIdentificationQuestion",
        "ScaleSelectionQuestion",
    }
    if full_measure_windows(tune, context_measures):
        flags.add("TimeSignatureQuestion")
        flags.add("BarLinePlacementQuestion")
    if note_pairs(tune):
        flags.add("IntervalNumberQuestion")
    if any(e.kind == "note" for e in tune.events):
        flags.add("NoteCompletionByInterval")
    if sum(1 for e in tune.events if e.kind == "note") >= MIN_MELODY_NOTES:
        flags.add("ScaleIdentificationFromAbcQuestion")
    return frozenset(flags)


def _tune_blocks(text: str) -> list[str]:
    blocks = [b.strip() for b in re.split(r"\n\s*\n", text)]
    return [b for b in blocks if b]


def ingest_corpus(directory: str | Path, jobs: int = 1) -> CorpusIndex:
    """Parse every .abc file under ``directory``; files may hold several tunes
    separated by blank lines.  Rejects are logged with their reason and
    byte-identical tunes are indexed once."""
    root = Path(directory)
    files = sorted(p for p in root.rglob("*.abc") if p.is_file())

    def read_blocks(path: Path) -> list[tuple[str, str, str]]:
        text = path.read_text(encoding="utf-8")
        stem = str(path.relative_to(root)).removesuffix(".abc")
        blocks = _tune_blocks(text)
        out = []
        for i, block in enumerate(blocks):
            tune_id = stem if len(blocks) == 1 else f"{stem}:{i}"
            out.append((tune_id, block, str(path)))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_file = list(pool.map(read_blocks, files))
    else:
        per_file = [read_blocks(p) for p in files]

    entries: list[TuneEntry] = []
    rejects: list[tuple[str, str]] = []
    duplicates: list[str] = []
    seen: dict[str, str] = {}
    hashed: list[tuple[str, str]] = []
    for blocks in per_file:
        for tune_id, block, path in blocks:
            digest = hashlib.sha256(block.encode()).hexdigest()
            hashed.append((tune_id, digest))
            if digest in seen:
                duplicates.append(tune_id)
                continue
            seen[digest] = tune_id
            try:
                tune = parse_tune(block)
            except SheetQAError as exc:
                rejects.append((tune_id, str(exc)))
                continue
            entries.append(
                TuneEntry(tune_id, tune, path, eligibility_flags(tune))
            )
    if not entries:
        raise EmptyCorpus(f"no parseable tunes under {root}")
    entries.sort(key=lambda e: e.tune_id)
    corpus_hash = hashlib.sha256(
        "\n".join(f"{tid}:{h}" for tid, h in sorted(hashed)).encode()
    ).hexdigest()
    return CorpusIndex(entries, rejects, duplicates, corpus_hash)


def split_of(tune_id: str, benchmark_fraction: float) -> str:
    """Stable hash partition keeping benchmark and train tune pools disjoint."""
    h = int.from_bytes(hashlib.sha256(f"split:{tune_id}".encode()).digest()[:4], "big")
    return "benchmark" if h / 2**32 < benchmark_fraction else "train"


# ---------------------------------------------------------------------------
# set assembly


def _scale_spec_for(rng: random.Random) -> ScaleSpec:
    from .theory import supported_keys

    keys = supported_keys()
    key = keys[rng.randrange(len(keys))]
    mode = "major" if key.mode == "major" else "natural_minor"
    direction = "ascending" if rng.random() < 0.5 else "descending"
    return ScaleSpec((key.tonic_letter, key.tonic_accidental), mode, direction)


def _generate_record(
    class_name: str,
    pool: list[TuneEntry],
    rng: random.Random,
    record_id: str,
    seed: int,
    cfg: DatasetConfig,
    needed: int,
) -> QARecord:
    if class_name == "ScaleSelectionQuestion":
        return GENERATORS[class_name](
            _scale_spec_for(rng),
            rng,
            record_id=record_id,
            seed=seed,
            source_tune_id="synthetic",
        )
    category = CATEGORY_BY_CLASS[class_name]
    if not pool:
        raise InsufficientCorpus(category, needed, 0)
    kwargs = {}
    if class_name in ("TimeSignatureQuestion", "BarLinePlacementQuestion"):
        kwargs["context_measures"] = cfg.context_measures

    def attempt(entry: TuneEntry) -> QARecord:
        return GENERATORS[class_name](
            entry.tune,
            rng,
            record_id=record_id,
            seed=seed,
            source_tune_id=entry.tune_id,
            **kwargs,
        )

    for _ in range(_MAX_DRAWS):
        try:
            return attempt(pool[rng.randrange(len(pool))])
        except Ineligible:
            continue
    start = rng.randrange(len(pool))
    for offset in range(len(pool)):
        try:
            return attempt(pool[(start + offset) % len(pool)])
        except Ineligible:
            continue
    raise InsufficientCorpus(category, needed, len(pool))


def build_set(index: CorpusIndex, cfg: DatasetConfig) -> list[QARecord]:
    """Assemble the configured record counts; every record passes
    verify_record and benchmark/train runs draw from disjoint tune pools."""
    pools: dict[str, list[TuneEntry]] = {}
    for class_name in CATEGORY_BY_CLASS:
        pools[class_name] = [
            e
            for e in index.eligible_entries(class_name)
            if split_of(e.tune_id, cfg.benchmark_fraction) == cfg.split
        ]
    counts = cfg.template_counts()
    records: list[QARecord] = []
    record_index = 0
    for category in CATEGORIES:
        if category not in cfg.category_counts:
            continue
        category_index = 0
        slug = category_slug(category)
        for class_name in CLASSES_BY_CATEGORY[category]:
            pool = pools[class_name]
            needed = counts[class_name]
            if class_name != "ScaleSelectionQuestion" and not pool:
                raise InsufficientCorpus(category, needed, 0)
            for _ in range(needed):
                record_id = f"{slug}-{category_index:04d}"
                seed = derive_seed(cfg.master_seed, cfg.split, class_name, record_index)
                rng = random.Random(seed)
                record = _generate_record(class_name, pool, rng, record_id, seed, cfg, needed)
                verdict = verify_record(record)
                if not verdict.passed:
                    raise GenerationError(
                        f"{record_id} failed verification: {verdict.failures}"
                    )
                records.append(record)
                category_index += 1
                record_index += 1
    return records


# ---------------------------------------------------------------------------
# JSONL persistence


def record_to_object(record: QARecord, modality: str = "textual") -> dict:
    obj = {
        "id": record.id,
        "class_name": record.class_name,
        "question": record.question,
        "abc_context": record.abc_context,
        "correct_answer": record.correct_answer,
        "incorrect_answer1": record.incorrect_answers[0],
        "incorrect_answer2": record.incorrect_answers[1],
        "incorrect_answer3": record.incorrect_answers[2],
        "category": record.category,
        "seed": record.seed,
        "source_tune_id": record.source_tune_id,
    }
    if modality == "visual":
        from .rendering import choice_image_names, context_image_name

        obj["context_image"] = context_image_name(record)
        choices = choice_image_names(record)
        if choices:
            obj["choice_images"] = list(choices)
    return obj


def write_jsonl(records, path: str | Path, modality: str = "textual") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record_to_object(record, modality), ensure_ascii=False))
            fh.write("\n")
    return path


_REQUIRED_FIELDS = (
    "class_name",
    "question",
    "abc_context",
    "correct_answer",
    "incorrect_answer1",
    "incorrect_answer2",
    "incorrect_answer3",
    "category",
)


def object_to_record(obj: dict, line_number: int = 0) -> QARecord:
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise SchemaError(line_number, f"missing field {name!r}")
    try:
        record = QARecord(
            id=str(obj.get("id", f"line-{line_number}")),
            class_name=obj["class_name"],
            question=obj["question"],
            abc_context=obj["abc_context"],
            correct_answer=obj["correct_answer"],
            incorrect_answers=(
                obj["incorrect_answer1"],
                obj["incorrect_answer2"],
                obj["incorrect_answer3"],
            ),
            seed=int(obj.get("seed", 0)),
            source_tune_id=str(obj.get("source_tune_id", "")),
            category=obj["category"],
        )
    except (ValueError, TypeError) as exc:
        raise SchemaError(line_number, str(exc)) from None
    return record


def read_jsonl(path: str | Path) -> list[QARecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(line_number, f"bad JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise SchemaError(line_number, "line is not a JSON object")
            records.append(object_to_record(obj, line_number))
    return records


def counts_by_class(records) -> dict[str, int]:
    out: dict[str, int] = {}
    for record in records:
        out[record.class_name] = out.get(record.class_name, 0) + 1
    return out
