"""Fixtures: exported stage corpora produced through the primary package's
external interfaces (synthesized collect-format samples + the export CLI)."""

import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

_RESPONSES = [
    "The sentiment is positive because the wording stays warm and generous throughout.",
    "The sentiment is negative because the complaints pile up without relief.",
    "The sentiment is neutral because the text only reports plain facts.",
]

_SNIPPETS = [
    "the corner cafe kept the espresso flowing all morning",
    "the delivery arrived late and the box was dented",
    "the manual lists the setup steps in order",
    "the movie dragged but the score was lovely",
    "the hotel desk sorted the mixup in minutes",
]


def _sample_row(stage: str, i: int, rng: random.Random) -> dict:
    snippet = f"{rng.choice(_SNIPPETS)} case {i:03d}"
    if stage == "knowdist":
        prompt = ("Analyze the overall sentiment of the following text. Provide a "
                  f"brief explanation supporting your conclusion.\n\nText: {snippet}")
        provenance = {"stage": stage, "method": "analyzing", "perspective": "basic",
                      "record_id": f"r{i}", "source": "other"}
    elif stage == "icldist":
        prompt = (f"Please perform sentiment classification task.\n\nSentence: {snippet}"
                  "\nOutput:")
        provenance = {"stage": stage, "task": "sentiment_cls", "strategy": "basic",
                      "variant": None, "demo_ids": ["d1"], "query_id": f"q{i}", "k": 1}
    else:
        prompt = f"Count the vowels.\n\nSentence: {snippet}\nOutput:"
        provenance = {"stage": "icl_general", "task": "task900", "strategy": "general",
                      "variant": None, "demo_ids": ["task900#0"],
                      "query_id": f"task900#{i}", "k": 1}
    return {
        "prompt_id": f"{stage}-{i:04d}",
        "messages": [{"role": "user", "content": prompt}],
        "response": _RESPONSES[i % len(_RESPONSES)],
        "finish_reason": "stop",
        "usage": {"prompt_tokens": 30, "completion_tokens": 14},
        "provenance": provenance,
        "timestamp": 0.0,
    }


def _write_samples(path: Path, stage: str, n: int, seed: int) -> Path:
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n):
            fh.write(json.dumps(_sample_row(stage, i, rng)) + "\n")
    return path


def _export(args: list[str]) -> None:
    subprocess.run([sys.executable, "-m", "sentidistill.cli", *args],
                   check=True, capture_output=True, text=True)


@pytest.fixture(scope="session")
def corpus_root(tmp_path_factory) -> Path:
    """knowdist/ and icldist/ stage exports, 100 samples each."""
    tmp = tmp_path_factory.mktemp("corpora")
    kd = _write_samples(tmp / "kd_samples.jsonl", "knowdist", 100, seed=1)
    icl = _write_samples(tmp / "icl_samples.jsonl", "icldist", 80, seed=2)
    gen = _write_samples(tmp / "gen_samples.jsonl", "icl_general", 20, seed=3)
    root = tmp / "corpus"
    _export(["export", "--stage", "knowdist", "--in", str(kd),
             "--profile", "llama-1.2b", "--seed", "17",
             "--out-dir", str(root / "knowdist")])
    _export(["export", "--stage", "icldist", "--in", str(icl), "--in", str(gen),
             "--profile", "llama-1.2b", "--seed", "17", "--target", "100",
             "--out-dir", str(root / "icldist")])
    return root
