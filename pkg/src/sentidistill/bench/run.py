"""Evaluation runs: few-shot queries at temperature 0 over 3 seeds.

Raw model outputs are persisted (with their golds) before any scoring, so
``score`` can recompute every number from disk without network access.
"""

from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..client.api import TeacherClient, TeacherClientError
from ..scoring.metrics import ScoreCard, macro_f1, micro_f1_tuples, sentiment_graph_f1
from ..scoring.parse import Prediction, parse_label, parse_tuples
from .data import read_split
from .prompts import EVAL_DEMO_COUNT, build_eval_prompt
from .registry import TASK_ORDER, get_spec

logger = logging.getLogger(__name__)

DEFAULT_SEEDS = (13, 17, 19)


class EvalError(Exception):
    pass


@dataclass
class EvalResult:
    task_id: str
    seed: int
    card: ScoreCard
    raw_path: Path
    preds_path: Path


def _draw_demos(dev: list, rng: random.Random, query_id: str | None = None) -> list:
    pool = [inst for inst in dev if inst.instance_id != query_id]
    if len(pool) < EVAL_DEMO_COUNT:
        raise EvalError(f"dev split too small: need {EVAL_DEMO_COUNT} demos, have {len(pool)}")
    return rng.sample(pool, EVAL_DEMO_COUNT)


def _gold_payload(spec, instance) -> object:
    return instance.label if spec.is_classification else [list(t) for t in instance.tuples or []]


def run_task_eval(
    client: TeacherClient,
    bench_dir: str | Path,
    out_dir: str | Path,
    task_id: str,
    seed: int,
    max_in_flight: int = 8,
    per_instance_demos: bool = False,
) -> EvalResult:
    spec = get_spec(task_id)
    dev = read_split(bench_dir, task_id, "dev")
    test = read_split(bench_dir, task_id, "test")
    rng = random.Random(f"{seed}:{task_id}")
    fixed_demos = None if per_instance_demos else _draw_demos(dev, rng)

    prompts = []
    for inst in test:
        demos = _draw_demos(dev, rng, inst.instance_id) if per_instance_demos else fixed_demos
        prompts.append((inst, build_eval_prompt(task_id, inst, demos, seed=seed)))

    rows: list[dict] = []
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        futures = [pool.submit(client.complete, spec_) for _, spec_ in prompts]
        for (inst, spec_), future in zip(prompts, futures):
            row = {
                "instance_id": inst.instance_id,
                "prompt_id": spec_.prompt_id,
                "gold": _gold_payload(spec, inst),
            }
            try:
                sample = future.result()
                row["raw"] = sample.response
                row["finish_reason"] = sample.finish_reason
            except TeacherClientError as exc:
                # transport failures score as unparsed predictions, never dropped
                row["raw"] = None
                row["finish_reason"] = "error"
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)

    run_dir = Path(out_dir) / task_id / f"seed{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    raw_path = run_dir / "raw.jsonl"
    with open(raw_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    card, preds = score_raw_rows(task_id, seed, rows)
    preds_path = run_dir / "preds.jsonl"
    with open(preds_path, "w", encoding="utf-8") as fh:
        for pred in preds:
            fh.write(json.dumps(pred.to_json(), ensure_ascii=False) + "\n")
    (run_dir / "score.json").write_text(
        json.dumps(card.to_json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return EvalResult(task_id, seed, card, raw_path, preds_path)


def score_raw_rows(task_id: str, seed: int, rows: Sequence[dict]) -> tuple[ScoreCard, list[Prediction]]:
    """Parse raw rows and compute the task metric (pure, no network)."""
    spec = get_spec(task_id)
    preds: list[Prediction] = []
    for row in rows:
        raw = row.get("raw")
        if spec.is_classification:
            pred = parse_label(raw, spec.label_set)
        else:
            pred = parse_tuples(raw, spec.tuple_arity, spec.null_slots)
        pred.instance_id = row["instance_id"]
        preds.append(pred)
    unparsed = sum(1 for p in preds if p.unparsed)
    if spec.is_classification:
        golds = [row["gold"] for row in rows]
        value, details = macro_f1(golds, preds, spec.label_set)
    else:
        golds = [[tuple(t) for t in row["gold"]] for row in rows]
        pred_sets = [p.tuples for p in preds]
        if spec.metric == "sentiment_graph_f1":
            value, details = sentiment_graph_f1(golds, pred_sets)
        else:
            value, details = micro_f1_tuples(golds, pred_sets)
    card = ScoreCard(task_id=task_id, seed=seed, metric=spec.metric, value=value,
                     counts=details, unparsed_count=unparsed)
    return card, preds


def score_raw_file(raw_path: str | Path, task_id: str, seed: int) -> tuple[ScoreCard, list[Prediction]]:
    rows = []
    with open(raw_path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return score_raw_rows(task_id, seed, rows)


def run_eval(
    endpoint: str,
    model: str,
    bench_dir: str | Path,
    out_dir: str | Path,
    task_ids: Sequence[str] | None = None,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    max_in_flight: int = 8,
    per_instance_demos: bool = False,
    cache_dir: str | Path | None = None,
    api_key_env: str = "TEACHER_API_KEY",
) -> list[EvalResult]:
    """Evaluate every (task, seed) pair and persist raw outputs + scores."""
    task_ids = list(task_ids or TASK_ORDER)
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise EvalError("seeds must be distinct")
    out_dir = Path(out_dir)
    client = TeacherClient(endpoint, model, cache_dir or out_dir / "cache",
                           api_key_env=api_key_env)
    results = []
    for task_id in task_ids:
        for seed in seeds:
            result = run_task_eval(
                client, bench_dir, out_dir, task_id, seed,
                max_in_flight=max_in_flight, per_instance_demos=per_instance_demos,
            )
            logger.info("%s seed=%d %s=%.4f", task_id, seed, result.card.metric,
                        result.card.value)
            results.append(result)
    return results
