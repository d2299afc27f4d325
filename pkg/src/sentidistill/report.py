"""Aggregation of per-(task, seed) scorecards into the benchmark report.

Per-task scores are seed means; category means average their four member
tasks; the overall average weights all 12 tasks equally.  Values are carried
at full precision and rendered at two decimals (as percentages); the JSON
emission is the source of truth.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .bench.registry import CATEGORIES, CATEGORY_TASKS, TASK_ORDER, get_spec
from .scoring.metrics import ScoreCard

MAX_SEEDS = 3


class ReportError(Exception):
    pass


@dataclass
class BenchReport:
    model: str
    per_task: dict[str, dict] = field(default_factory=dict)  # task -> {"seeds": {}, "mean": float}
    category_means: dict[str, float | None] = field(default_factory=dict)
    overall: float | None = None
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "per_task": self.per_task,
            "category_means": self.category_means,
            "overall": self.overall,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BenchReport":
        return cls(
            model=obj["model"],
            per_task=obj["per_task"],
            category_means=obj["category_means"],
            overall=obj["overall"],
            metadata=obj.get("metadata", {}),
        )


def aggregate(cards: Sequence[ScoreCard], model: str = "model",
              partial: bool = False) -> BenchReport:
    """Seed means per task, category means, equal-weight overall mean."""
    by_task: dict[str, dict[int, ScoreCard]] = {}
    for card in cards:
        seeds = by_task.setdefault(card.task_id, {})
        if card.seed in seeds:
            raise ReportError(f"duplicate (task, seed) card: ({card.task_id}, {card.seed})")
        seeds[card.seed] = card
    unknown = set(by_task) - set(TASK_ORDER)
    if unknown:
        raise ReportError(f"unknown tasks in scorecards: {sorted(unknown)}")
    missing = [t for t in TASK_ORDER if t not in by_task]
    if missing and not partial:
        raise ReportError(
            f"missing tasks: {missing} (pass partial=True for an incomplete report)"
        )
    per_task: dict[str, dict] = {}
    for task_id, seeds in by_task.items():
        if not 1 <= len(seeds) <= MAX_SEEDS:
            raise ReportError(f"{task_id}: expected 1-{MAX_SEEDS} seed cards, got {len(seeds)}")
        values = {str(seed): card.value for seed, card in sorted(seeds.items())}
        per_task[task_id] = {
            "display": get_spec(task_id).display,
            "category": get_spec(task_id).category,
            "metric": next(iter(seeds.values())).metric,
            "seeds": values,
            "mean": sum(values.values()) / len(values),
            "unparsed": {str(seed): card.unparsed_count for seed, card in sorted(seeds.items())},
        }
    category_means: dict[str, float | None] = {}
    for category in CATEGORIES:
        members = CATEGORY_TASKS[category]
        if all(t in per_task for t in members):
            category_means[category] = sum(per_task[t]["mean"] for t in members) / len(members)
        else:
            category_means[category] = None
    overall = None
    if not missing:
        overall = sum(per_task[t]["mean"] for t in TASK_ORDER) / len(TASK_ORDER)
    seed_set = sorted({int(s) for info in per_task.values() for s in info["seeds"]})
    config_hash = hashlib.sha256(json.dumps(
        [(t, sorted(info["seeds"])) for t, info in sorted(per_task.items())]
    ).encode()).hexdigest()[:12]
    return BenchReport(
        model=model,
        per_task=per_task,
        category_means=category_means,
        overall=overall,
        metadata={"seeds": seed_set, "config_hash": config_hash, "timestamp": time.time(),
                  "partial": bool(missing)},
    )


def _fmt(value: float | None) -> str:
    return "N/A" if value is None else f"{value * 100:.2f}"


def render_markdown(report: BenchReport) -> str:
    header = ["Model"] + [get_spec(t).display for t in TASK_ORDER] + ["Avg"]
    row = [report.model]
    for task_id in TASK_ORDER:
        info = report.per_task.get(task_id)
        row.append(_fmt(info["mean"]) if info else "N/A")
    row.append(_fmt(report.overall))
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join(["---"] * len(header)) + " |",
        "| " + " | ".join(row) + " |",
        "",
        "| Category | " + " | ".join(CATEGORIES) + " |",
        "| --- | " + " | ".join(["---"] * len(CATEGORIES)) + " |",
        "| " + report.model + " | "
        + " | ".join(_fmt(report.category_means.get(c)) for c in CATEGORIES) + " |",
    ]
    return "\n".join(lines) + "\n"


def render_csv(report: BenchReport) -> str:
    seeds = [str(s) for s in report.metadata.get("seeds", [])]
    header = ["task_id", "display", "category", "metric"] + [f"seed_{s}" for s in seeds] + ["mean"]
    lines = [",".join(header)]
    for task_id in TASK_ORDER:
        info = report.per_task.get(task_id)
        if info is None:
            continue
        row = [task_id, info["display"], info["category"], info["metric"]]
        row += [repr(info["seeds"][s]) if s in info["seeds"] else "" for s in seeds]
        row.append(repr(info["mean"]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit(report: BenchReport, formats: Sequence[str], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt in ("md", "markdown"):
            path = out_dir / "report.md"
            path.write_text(render_markdown(report), encoding="utf-8")
        elif fmt == "csv":
            path = out_dir / "report.csv"
            path.write_text(render_csv(report), encoding="utf-8")
        elif fmt == "json":
            path = out_dir / "report.json"
            path.write_text(json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n",
                            encoding="utf-8")
        else:
            raise ReportError(f"unknown format: {fmt}")
        written.append(path)
    return written


def load_scorecards(scores_dir: str | Path) -> list[ScoreCard]:
    """Collect ``score.json`` files (and any ``*.scorecard.json``) recursively."""
    cards = []
    for path in sorted(Path(scores_dir).rglob("*.json")):
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict) and {"task_id", "seed", "metric", "value"} <= obj.keys():
            cards.append(ScoreCard.from_json(obj))
    return cards
