"""Visual pipeline: naming scheme, manifest, failure isolation, tool errors.

The real engraver toolchain is exercised only when installed; everything else
runs against an injected stub renderer."""

from __future__ import annotations

import json
import shutil

import pytest

from sheetqa.dataset import benchmark_config, build_set
from sheetqa.errors import ToolMissing
from sheetqa.rendering import (
    RenderConfig,
    RenderJob,
    build_visual_set,
    choice_image_names,
    context_image_name,
    render_snippet,
)

PNG_STUB = b"\x89PNG\r\n\x1a\nstub"


def stub_renderer(job: RenderJob):
    job.output_path.parent.mkdir(parents=True, exist_ok=True)
    job.output_path.write_bytes(PNG_STUB)
    return job.output_path


@pytest.fixture(scope="module")
def sample_records(small_index):
    counts = {c: 5 for c in ("Rhythm", "Chord", "Interval", "Scale")}
    return build_set(small_index, benchmark_config(seed=8, category_counts=counts))


def test_naming_scheme(sample_records):
    for record in sample_records:
        name = context_image_name(record)
        if record.abc_context == "None":
            assert name is None
        else:
            assert name == f"image/visual-{record.id}.png"
        choices = choice_image_names(record)
        if record.class_name in ("BarLinePlacementQuestion", "NoteCompletionByInterval",
                                 "ChordsCompletionQuestion", "ScaleSelectionQuestion"):
            assert choices == tuple(
                f"image/visual-{record.id}-{s}.png" for s in "abcd"
            )
        else:
            assert choices is None


def test_build_visual_set_writes_images_and_manifest(sample_records, tmp_path):
    visuals, failures = build_visual_set(sample_records, tmp_path, renderer=stub_renderer)
    assert not failures
    assert len(visuals) == len(sample_records)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert set(manifest["records"]) == {r.id for r in sample_records}
    for visual in visuals:
        if visual.context_image:
            assert (tmp_path / visual.context_image).read_bytes() == PNG_STUB
        if visual.choice_images:
            for name in visual.choice_images:
                assert (tmp_path / name).exists()
    # images never alter the records themselves
    assert [v.base for v in visuals] == sample_records


def test_build_visual_set_deterministic_manifest(sample_records, tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    build_visual_set(sample_records, a_dir, renderer=stub_renderer)
    build_visual_set(sample_records, b_dir, renderer=stub_renderer)
    assert (a_dir / "manifest.json").read_bytes() == (b_dir / "manifest.json").read_bytes()


def test_failure_injection_leaves_other_records_intact(sample_records, tmp_path):
    victim = sample_records[3].id

    def flaky(job: RenderJob):
        if victim in str(job.output_path):
            raise RuntimeError("engraver exploded")
        return stub_renderer(job)

    visuals, failures = build_visual_set(sample_records, tmp_path, renderer=flaky)
    assert [record_id for record_id, _ in failures] == [victim]
    assert len(visuals) == len(sample_records) - 1
    assert all(v.base.id != victim for v in visuals)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert victim not in manifest["records"]
    assert manifest["failures"][0][0] == victim


def test_empty_batch_is_success(tmp_path):
    visuals, failures = build_visual_set([], tmp_path, renderer=stub_renderer)
    assert visuals == [] and failures == []
    assert (tmp_path / "manifest.json").exists()


def test_render_snippet_tool_missing(tmp_path):
    config = RenderConfig(engraver="definitely-not-a-real-engraver")
    with pytest.raises(ToolMissing):
        render_snippet(RenderJob("L:1/4\nK:C\nC D E F", tmp_path / "x.png"), config)


def test_render_config_validates_dpi():
    with pytest.raises(ValueError):
        RenderConfig(dpi=30)


@pytest.mark.skipif(
    shutil.which("abcm2ps") is None or shutil.which("magick") is None,
    reason="engraving toolchain not installed",
)
def test_render_snippet_real_toolchain(tmp_path):
    out = render_snippet(RenderJob("L:1/4\nK:C\nC D E F", tmp_path / "real.png"))
    assert out.stat().st_size > 0
