"""Knowledge-stage prompt construction: 2 methods x 5 perspectives.

Templates ship as a versioned asset whose SHA-256 is pinned here; a build
refuses to start if the asset was edited without re-pinning, so template
drift can never silently change a corpus.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from ..records import TextRecord
from .spec import GenParams, PromptSpec, make_prompt_id

logger = logging.getLogger(__name__)

METHODS = ("analyzing", "rewriting")
PERSPECTIVES = ("basic", "expression", "target", "emotion", "background")

TEMPLATE_ASSET = "knowdist_templates.json"
PINNED_TEMPLATE_SHA256 = "a8b1c7c7256c31576b066d44dacad2f709e6ffb9d20c82587d8294267a9743e3"

DEFAULT_GEN_PARAMS = GenParams(temperature=0.7, max_tokens=1024)

_PLACEHOLDER_RE = re.compile(r"\{[A-Za-z_]+\}")


class TemplateError(Exception):
    pass


@dataclass(frozen=True)
class KnowTemplate:
    method: str
    perspective: str
    body: str

    @property
    def template_id(self) -> str:
        return f"{self.method}/{self.perspective}"

    def render(self, text: str) -> str:
        return self.body.replace("{Text}", text)


def load_templates(path: str | Path | None = None) -> list[KnowTemplate]:
    """Load and verify the template asset against the pinned hash."""
    if path is None:
        data = resources.files("sentidistill.prompts").joinpath(f"assets/{TEMPLATE_ASSET}").read_bytes()
    else:
        data = Path(path).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != PINNED_TEMPLATE_SHA256:
        raise TemplateError(
            f"template asset hash mismatch: got {digest}, pinned {PINNED_TEMPLATE_SHA256}"
        )
    templates = [KnowTemplate(**obj) for obj in json.loads(data.decode("utf-8"))]
    _validate(templates)
    return templates


def _validate(templates: Sequence[KnowTemplate]) -> None:
    if len(templates) != len(METHODS) * len(PERSPECTIVES):
        raise TemplateError(f"expected {len(METHODS) * len(PERSPECTIVES)} templates, got {len(templates)}")
    seen = set()
    for tpl in templates:
        if tpl.method not in METHODS or tpl.perspective not in PERSPECTIVES:
            raise TemplateError(f"unknown method/perspective: {tpl.template_id}")
        if tpl.template_id in seen:
            raise TemplateError(f"duplicate template: {tpl.template_id}")
        seen.add(tpl.template_id)
        placeholders = _PLACEHOLDER_RE.findall(tpl.body)
        if placeholders != ["{Text}"]:
            raise TemplateError(f"{tpl.template_id}: expected exactly one {{Text}} slot, got {placeholders}")


def build_knowdist(
    records: Iterable[TextRecord],
    methods: Sequence[str] = METHODS,
    perspectives: Sequence[str] = PERSPECTIVES,
    ratio: float = 1.0,
    seed: int = 0,
    templates: Sequence[KnowTemplate] | None = None,
    counters: Counter | None = None,
    gen_params: GenParams = DEFAULT_GEN_PARAMS,
) -> Iterator[PromptSpec]:
    """One prompt per (record, method, perspective), optionally subsampled.

    With ratio r < 1 each (record, template) pair is kept independently with
    probability r under the seeded RNG, so any target corpus size is
    reachable from any record count.
    """
    if not methods or not perspectives:
        raise ValueError("methods and perspectives must be non-empty")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method: {m}")
    for p in perspectives:
        if p not in PERSPECTIVES:
            raise ValueError(f"unknown perspective: {p}")
    if templates is None:
        templates = load_templates()
    by_id = {t.template_id: t for t in templates}
    selected = [by_id[f"{m}/{p}"] for m in methods for p in perspectives]
    rng = random.Random(seed)
    counters = counters if counters is not None else Counter()
    for rec in records:
        if not rec.text.strip():
            counters["skipped_empty"] += 1
            continue
        for tpl in selected:
            if ratio < 1.0 and rng.random() >= ratio:
                counters["subsampled_out"] += 1
                continue
            counters["emitted"] += 1
            yield PromptSpec(
                prompt_id=make_prompt_id(
                    "knowdist", template=tpl.template_id, record_id=rec.id, seed=seed
                ),
                stage="knowdist",
                messages=[{"role": "user", "content": tpl.render(rec.text)}],
                gen_params=gen_params,
                provenance={
                    "stage": "knowdist",
                    "method": tpl.method,
                    "perspective": tpl.perspective,
                    "record_id": rec.id,
                    "source": rec.source,
                },
            )
