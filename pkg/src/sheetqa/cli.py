"""Command-line entry point: dataset generation, rendering, grading, the
rhythmic-consistency check, and dataset statistics.

Exit codes: 0 success, 2 usage error, 3 data error, 4 external-tool error."""

from __future__ import annotations

import hashlib
import json
import shutil
import sys
from dataclasses import asdict
from pathlib import Path

import click

from . import dataset as ds
from .errors import RenderError, SheetQAError
from .grading import check_rhythmic_consistency, rc_score, score
from .notation import parse_meter, parse_unit_length
from .questions import CATEGORIES, CLASSES_BY_CATEGORY, QARecord
from .rendering import RenderConfig, build_visual_set, tool_versions

EXIT_DATA_ERROR = 3
EXIT_TOOL_ERROR = 4


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _config_snapshot(cfg: ds.DatasetConfig) -> dict:
    snap = asdict(cfg)
    snap["template_weights"] = {k: str(v) for k, v in cfg.template_weights.items()}
    return snap


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Synthesize and grade verifiable sheet-music reasoning questions."""


@main.command("gen")
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="Master seed (overrides config).")
@click.option("--modality", type=click.Choice(ds.MODALITIES), default=None)
@click.option("--split", type=click.Choice(ds.SPLITS), default=None)
@click.option("--count", type=int, default=None, help="Records per category.")
@click.option("--categories", default=None, help="Comma-separated category subset.")
@click.option("--jobs", type=int, default=1, help="Parallel corpus ingestion workers.")
def cmd_gen(corpus, config_path, out, seed, modality, split, count, categories, jobs):
    """Generate a question set from an ABC corpus directory."""
    try:
        cfg = ds.load_config(config_path) if config_path else ds.DatasetConfig()
        overrides = {}
        if seed is not None:
            overrides["master_seed"] = seed
        if modality is not None:
            overrides["modality"] = modality
        if split is not None:
            overrides["split"] = split
        counts = dict(cfg.category_counts)
        if split == "train" and count is None and config_path is None:
            counts = {c: ds.DEFAULT_TRAIN_COUNT for c in counts}
        if count is not None:
            counts = {c: count for c in counts}
        if categories:
            wanted = [c.strip() for c in categories.split(",") if c.strip()]
            for name in wanted:
                if name not in CATEGORIES:
                    raise ds.ConfigError(f"unknown category {name!r}")
            counts = {c: n for c, n in counts.items() if c in wanted}
        cfg = ds.DatasetConfig(
            category_counts=counts,
            template_weights=cfg.template_weights,
            master_seed=overrides.get("master_seed", cfg.master_seed),
            modality=overrides.get("modality", cfg.modality),
            split=overrides.get("split", cfg.split),
            context_measures=cfg.context_measures,
            benchmark_fraction=cfg.benchmark_fraction,
        )
        index = ds.ingest_corpus(corpus, jobs=jobs)
        records = ds.build_set(index, cfg)
        out = Path(out)
        if cfg.modality == "both":
            stem, suffix = out.stem, out.suffix or ".jsonl"
            paths = [
                ds.write_jsonl(records, out.with_name(f"{stem}-textual{suffix}"), "textual"),
                ds.write_jsonl(records, out.with_name(f"{stem}-visual{suffix}"), "visual"),
            ]
        else:
            paths = [ds.write_jsonl(records, out, cfg.modality)]
        manifest = {
            "command": "gen",
            "config": _config_snapshot(cfg),
            "master_seed": cfg.master_seed,
            "corpus_hash": index.content_hash,
            "corpus_rejects": len(index.rejects),
            "tool_versions": tool_versions(),
            "outputs": {str(p): _sha256(p) for p in paths},
        }
        manifest_path = Path(str(paths[0]) + ".manifest.json")
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        click.echo(f"wrote {len(records)} records to {', '.join(map(str, paths))}")
        for tune_id, reason in index.rejects:
            click.echo(f"rejected {tune_id}: {reason}", err=True)
    except SheetQAError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))


@main.command("render")
@click.argument("in_jsonl", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--dpi", type=int, default=150)
@click.option("--jobs", type=int, default=4)
@click.option("--engraver", default=None, help="Path to the abcm2ps binary.")
@click.option("--raster", default=None, help="Path to the ImageMagick binary.")
def cmd_render(in_jsonl, out_dir, dpi, jobs, engraver, raster):
    """Render context and choice images for a generated question set."""
    try:
        records = ds.read_jsonl(in_jsonl)
    except SheetQAError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))
    kwargs = {"dpi": dpi, "jobs": jobs}
    if engraver:
        kwargs["engraver"] = engraver
    if raster:
        kwargs["raster"] = raster
    config = RenderConfig(**kwargs)
    for binary in (config.engraver, config.raster):
        if shutil.which(binary) is None:
            _fail(EXIT_TOOL_ERROR, f"{binary!r} not found on PATH")
    try:
        visuals, failures = build_visual_set(records, out_dir, config)
    except RenderError as exc:
        _fail(EXIT_TOOL_ERROR, str(exc))
    click.echo(f"rendered {len(visuals)} records into {out_dir}")
    if failures:
        click.echo(f"failed {len(failures)} records:", err=True)
        for record_id, reason in failures:
            click.echo(f"  {record_id}: {reason}", err=True)


def _accuracy_table(results, gold_by_id: dict[str, QARecord]) -> str:
    per_category: dict[str, list[int]] = {c: [] for c in CATEGORIES}
    for result in results:
        record = gold_by_id[result.record_id]
        per_category[record.category].append(result.reward)
    cells = []
    for category in CATEGORIES:
        rewards = per_category[category]
        cells.append(100 * sum(rewards) / len(rewards) if rewards else None)
    total = [r for rs in per_category.values() for r in rs]
    overall = 100 * sum(total) / len(total) if total else 0.0
    header = "".join(f"{c:>10}" for c in (*CATEGORIES, "Overall"))
    row = "".join(
        f"{cell:>10.2f}" if cell is not None else f"{'-':>10}" for cell in cells
    ) + f"{overall:>10.2f}"
    return header + "\n" + row


@main.command("grade")
@click.argument("pred_jsonl", type=click.Path(exists=True, dir_okay=False))
@click.argument("gold_jsonl", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_jsonl", type=click.Path(dir_okay=False), required=False)
def cmd_grade(pred_jsonl, gold_jsonl, out_jsonl):
    """Score boxed responses against a gold set; accuracy only, no partial credit."""
    try:
        gold_by_id = {r.id: r for r in ds.read_jsonl(gold_jsonl)}
        results = []
        with open(pred_jsonl, encoding="utf-8") as fh:
            for line_number, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ds.SchemaError(line_number, f"bad JSON: {exc}") from None
                if "record_id" not in obj or "response_text" not in obj:
                    raise ds.SchemaError(line_number, "need record_id and response_text")
                record = gold_by_id.get(obj["record_id"])
                if record is None:
                    raise ds.SchemaError(line_number, f"unknown record_id {obj['record_id']!r}")
                results.append(score(obj["response_text"], record))
        if out_jsonl:
            with open(out_jsonl, "w", encoding="utf-8", newline="\n") as fh:
                for result in results:
                    fh.write(
                        json.dumps(
                            {
                                "record_id": result.record_id,
                                "reward": result.reward,
                                "extracted": result.extracted,
                                "reason": result.failure_reason,
                            }
                        )
                        + "\n"
                    )
        click.echo(_accuracy_table(results, gold_by_id))
    except SheetQAError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))


@main.command("check-rhythm")
@click.argument("continuations_jsonl", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_jsonl", type=click.Path(dir_okay=False), default=None)
def cmd_check_rhythm(continuations_jsonl, out_jsonl):
    """Rhythmic-consistency score for four-measure ABC continuations.

    Input lines: {"sample_id": ..., "abc": ..., "meter": "3/4", "unit": "1/8"}."""
    try:
        verdicts = []
        with open(continuations_jsonl, encoding="utf-8") as fh:
            for line_number, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ds.SchemaError(line_number, f"bad JSON: {exc}") from None
                for name in ("sample_id", "abc", "meter"):
                    if name not in obj:
                        raise ds.SchemaError(line_number, f"missing field {name!r}")
                meter = parse_meter(obj["meter"])
                if meter is None:
                    raise ds.SchemaError(line_number, "meter cannot be 'none'")
                unit = parse_unit_length(obj.get("unit", "1/8"))
                verdicts.append(
                    check_rhythmic_consistency(
                        obj["abc"], meter, unit, sample_id=str(obj["sample_id"])
                    )
                )
        if out_jsonl:
            with open(out_jsonl, "w", encoding="utf-8", newline="\n") as fh:
                for v in verdicts:
                    fh.write(
                        json.dumps(
                            {
                                "sample_id": v.sample_id,
                                "score": v.score,
                                "syntax_ok": v.syntax_ok,
                                "failure": v.failure,
                                "measures": [
                                    [str(m.duration), str(m.capacity), m.ok]
                                    for m in v.per_measure
                                ],
                            }
                        )
                        + "\n"
                    )
        click.echo(f"RC: {100 * rc_score(verdicts):.2f}")
    except SheetQAError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))


@main.command("stats")
@click.argument("in_jsonl", type=click.Path(exists=True, dir_okay=False))
def cmd_stats(in_jsonl):
    """Per-class and per-category counts of a question set."""
    try:
        records = ds.read_jsonl(in_jsonl)
    except SheetQAError as exc:
        _fail(EXIT_DATA_ERROR, str(exc))
    counts = ds.counts_by_class(records)
    click.echo(f"{'Domain':<10}{'Question Class':<38}{'Counts':>8}{'Total':>8}")
    for category in CATEGORIES:
        names = CLASSES_BY_CATEGORY[category]
        total = sum(counts.get(n, 0) for n in names)
        for i, name in enumerate(names):
            domain = category if i == 0 else ""
            total_cell = str(total) if i == 0 else ""
            click.echo(f"{domain:<10}{name:<38}{counts.get(name, 0):>8}{total_cell:>8}")
    click.echo(f"{'':<10}{'All':<38}{len(records):>8}{len(records):>8}")


if __name__ == "__main__":
    main()
