import json
import math
from collections import Counter
from pathlib import Path

import pytest

from sentidistill.prompts.knowdist import (
    METHODS,
    PERSPECTIVES,
    TemplateError,
    build_knowdist,
    load_templates,
)
from sentidistill.records import TextRecord
from conftest import synth_records

GOLDEN = Path(__file__).parent / "golden" / "knowdist"
FIXTURE_TEXT = "The new camera focuses quickly, but the battery barely lasts a day."


def _record(text=FIXTURE_TEXT, id="fix:1"):
    return TextRecord.from_text(id, "other", text)


def test_ten_templates_pinned():
    templates = load_templates()
    assert len(templates) == 10
    assert {t.method for t in templates} == set(METHODS)
    assert {t.perspective for t in templates} == set(PERSPECTIVES)
    for t in templates:
        assert t.body.count("{Text}") == 1


def test_tampered_asset_rejected(tmp_path):
    data = json.loads(
        (Path("src/sentidistill/prompts/assets/knowdist_templates.json")).read_text()
    )
    data[0]["body"] = data[0]["body"].replace("overall", "general")
    bad = tmp_path / "templates.json"
    bad.write_text(json.dumps(data))
    with pytest.raises(TemplateError, match="hash mismatch"):
        load_templates(bad)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("perspective", PERSPECTIVES)
def test_rendering_matches_golden(method, perspective):
    templates = {t.template_id: t for t in load_templates()}
    rendered = templates[f"{method}/{perspective}"].render(FIXTURE_TEXT)
    golden = (GOLDEN / f"{method}_{perspective}.txt").read_text(encoding="utf-8")
    assert rendered == golden


def test_full_grid_counts():
    specs = list(build_knowdist([_record()], METHODS, PERSPECTIVES, seed=1))
    assert len(specs) == 10
    assert len({s.prompt_id for s in specs}) == 10
    for spec in specs:
        assert spec.gen_params.temperature == 0.7
        assert spec.gen_params.max_tokens == 1024
        assert len(spec.messages) == 1 and spec.messages[0]["role"] == "user"


def test_basic_prompts_match_expected_openers():
    specs = {(s.provenance["method"], s.provenance["perspective"]): s
             for s in build_knowdist([_record(text="X")], METHODS, PERSPECTIVES)}
    analyzing = specs[("analyzing", "basic")].messages[0]["content"]
    assert analyzing.startswith("Analyze the overall sentiment of the following text.")
    assert "Text: X" in analyzing
    rewriting = specs[("rewriting", "basic")].messages[0]["content"]
    assert rewriting.startswith(
        "Rewrite the following text to ensure it retains the original sentiment"
    )


def test_rendering_is_pure():
    a = [s.messages for s in build_knowdist([_record()], seed=3)]
    b = [s.messages for s in build_knowdist([_record()], seed=3)]
    assert a == b


def test_empty_record_skipped():
    empty = TextRecord("e:1", "other", "   ", "x", 1, 1)
    counters = Counter()
    specs = list(build_knowdist([empty], counters=counters))
    assert specs == [] and counters["skipped_empty"] == 1


def test_provenance_reconstructs_record_set():
    records = synth_records(25, seed=4, n_tokens=10)
    specs = list(build_knowdist(records, seed=2))
    grouped = {}
    for spec in specs:
        prov = spec.provenance
        grouped.setdefault(prov["record_id"], set()).add((prov["method"], prov["perspective"]))
    assert set(grouped) == {r.id for r in records}
    full_grid = {(m, p) for m in METHODS for p in PERSPECTIVES}
    assert all(grid == full_grid for grid in grouped.values())


def test_subsample_ratio_within_three_sigma():
    # 1000 records x 10 templates at r=0.5: Binomial(10000, 0.5), sigma=50
    records = synth_records(1000, seed=6, n_tokens=8)
    emitted = sum(1 for _ in build_knowdist(records, ratio=0.5, seed=11))
    sigma = math.sqrt(10_000 * 0.25)
    assert abs(emitted - 5000) <= 3 * sigma


def test_selection_validation():
    with pytest.raises(ValueError):
        list(build_knowdist([_record()], methods=()))
    with pytest.raises(ValueError):
        list(build_knowdist([_record()], methods=("paraphrasing",)))
