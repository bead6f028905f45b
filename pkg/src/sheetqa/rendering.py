"""Visual modality: drive an external engraver (abcm2ps) plus a raster
converter (ImageMagick) to turn ABC snippets into trimmed PNGs.

The textual pipeline never needs these tools; everything here degrades to a
reported failure when they are absent."""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ToolFailed, ToolMissing, ToolTimeout
from .questions import SCORE_CHOICE_CLASSES, QARecord

ENGRAVER_ENV = "SHEETQA_ABCM2PS"
RASTER_ENV = "SHEETQA_MAGICK"

_CHOICE_SUFFIXES = ("a", "b", "c", "d")

# Format directives that suppress page furniture so only the staff appears.
_BARE_STAFF_DIRECTIVES = "%%topspace 0\n%%titlespace 0\n%%composerspace 0\n"


@dataclass(frozen=True)
class RenderConfig:
    engraver: str = field(default_factory=lambda: os.environ.get(ENGRAVER_ENV, "abcm2ps"))
    raster: str = field(default_factory=lambda: os.environ.get(RASTER_ENV, "magick"))
    dpi: int = 150
    timeout: float = 30.0
    jobs: int = 4

    def __post_init__(self):
        if not 72 <= self.dpi <= 600:
            raise ValueError("dpi must be within [72, 600]")


@dataclass(frozen=True)
class RenderJob:
    abc_text: str
    output_path: Path
    dpi: int = 150
    trim: bool = True

    def __post_init__(self):
        if not 72 <= self.dpi <= 600:
            raise ValueError("dpi must be within [72, 600]")


@dataclass(frozen=True)
class VisualQARecord:
    base: QARecord
    context_image: str | None
    choice_images: tuple[str, str, str, str] | None


def context_image_name(record: QARecord) -> str | None:
    if record.abc_context == "None":
        return None
    return f"image/visual-{record.id}.png"


def choice_image_names(record: QARecord) -> tuple[str, str, str, str] | None:
    """Per-choice images for templates whose options are scores; the a..d
    suffixes follow the shuffled presentation order."""
    if record.class_name not in SCORE_CHOICE_CLASSES:
        return None
    return tuple(f"image/visual-{record.id}-{s}.png" for s in _CHOICE_SUFFIXES)


def tool_versions(config: RenderConfig | None = None) -> dict[str, str | None]:
    config = config or RenderConfig()
    versions: dict[str, str | None] = {}
    for name, binary in (("engraver", config.engraver), ("raster", config.raster)):
        path = shutil.which(binary)
        if path is None:
            versions[name] = None
            continue
        try:
            proc = subprocess.run(
                [binary, "--version" if name == "raster" else "-V"],
                capture_output=True,
                text=True,
                timeout=10,
            )
            first = (proc.stdout or proc.stderr).strip().splitlines()
            versions[name] = first[0] if first else path
        except (OSError, subprocess.TimeoutExpired):
            versions[name] = path
    return versions


def _prepare_source(abc_text: str) -> str:
    text = abc_text.strip("\n")
    if not any(line.startswith("X:") for line in text.splitlines()):
        text = "X:1\n" + text
    return _BARE_STAFF_DIRECTIVES + text + "\n"


def render_snippet(job: RenderJob, config: RenderConfig | None = None) -> Path:
    """Engrave one snippet to a PNG at ``job.output_path``; idempotent."""
    config = config or RenderConfig()
    for binary in (config.engraver, config.raster):
        if shutil.which(binary) is None:
            raise ToolMissing(f"{binary!r} not found on PATH")
    job.output_path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="sheetqa-render-") as tmp:
        tmp_dir = Path(tmp)
        source = tmp_dir / "snippet.abc"
        source.write_text(_prepare_source(job.abc_text), encoding="utf-8")
        postscript = tmp_dir / "snippet.ps"
        _run(
            [config.engraver, "-O", str(postscript), str(source)],
            config.engraver,
            config.timeout,
        )
        if not postscript.exists():
            raise ToolFailed(config.engraver, "no PostScript output produced")
        raster_cmd = [config.raster, "-density", str(job.dpi)]
        raster_cmd += [str(postscript)]
        if job.trim:
            raster_cmd += ["-trim"]
        raster_cmd += ["-background", "white", "-flatten", str(job.output_path)]
        _run(raster_cmd, config.raster, config.timeout)
    if not job.output_path.exists():
        raise ToolFailed(config.raster, "no PNG output produced")
    return job.output_path


def _run(cmd: list[str], tool: str, timeout: float) -> None:
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise ToolTimeout(f"{tool} exceeded {timeout}s") from exc
    except OSError as exc:
        raise ToolFailed(tool, str(exc)) from exc
    if proc.returncode != 0:
        raise ToolFailed(tool, proc.stderr)


def _record_jobs(record: QARecord, out_dir: Path, dpi: int) -> list[tuple[str, RenderJob]]:
    jobs = []
    context_name = context_image_name(record)
    if context_name is not None:
        jobs.append(
            ("context", RenderJob(record.abc_context, out_dir / context_name, dpi))
        )
    choice_names = choice_image_names(record)
    if choice_names is not None:
        for name, payload in zip(choice_names, record.choices):
            jobs.append(("choice", RenderJob(payload, out_dir / name, dpi)))
    return jobs


def build_visual_set(
    records,
    out_dir: str | Path,
    config: RenderConfig | None = None,
    renderer=None,
) -> tuple[list[VisualQARecord], list[tuple[str, str]]]:
    """Render images for every record, write a manifest, and report failures
    per record without aborting the batch.

    ``renderer`` is injectable (tests substitute a stub) and defaults to
    render_snippet with ``config``."""
    config = config or RenderConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if renderer is None:
        renderer = lambda job: render_snippet(job, config)

    records = list(records)
    all_jobs: list[tuple[int, RenderJob]] = []
    for i, record in enumerate(records):
        for _, job in _record_jobs(record, out_dir, config.dpi):
            all_jobs.append((i, job))

    failed: dict[int, str] = {}

    def run_one(item: tuple[int, RenderJob]) -> None:
        i, job = item
        try:
            renderer(job)
        except Exception as exc:  # keep the batch alive, summarize later
            failed.setdefault(i, str(exc))

    if all_jobs:
        with ThreadPoolExecutor(max_workers=max(1, config.jobs)) as pool:
            list(pool.map(run_one, all_jobs))

    visuals: list[VisualQARecord] = []
    failures: list[tuple[str, str]] = []
    manifest: dict[str, dict] = {}
    for i, record in enumerate(records):
        if i in failed:
            failures.append((record.id, failed[i]))
            continue
        visual = VisualQARecord(
            record, context_image_name(record), choice_image_names(record)
        )
        visuals.append(visual)
        manifest[record.id] = {
            "context": visual.context_image,
            "choices": list(visual.choice_images) if visual.choice_images else None,
        }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(
            {"records": manifest, "failures": [list(f) for f in failures]},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return visuals, failures
