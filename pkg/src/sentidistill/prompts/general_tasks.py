"""Reader for instruction-dataset task files (task diversification input).

Each task file is a JSON object with (at least):

  Definition   list of strings (or a single string); the first entry is the
               task instruction.
  Categories   list of category tags; tasks whose tags contain any exclusion
               keyword are removed.
  Instances    list of {"input": str, "output": [str] or str}; the first
               output is used.

Field-by-field notes live in docs/formats.md.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

logger = logging.getLogger(__name__)

DEFAULT_EXCLUSION_TAGS = ("sentiment", "emotion", "polarity", "stance", "irony", "aspect")
DEFAULT_TARGET_TASK_COUNT = 100


@dataclass
class GeneralTask:
    task_id: str
    instruction: str
    instances: list[tuple[str, str]]
    categories: list[str] = field(default_factory=list)


def _first(value) -> str:
    if isinstance(value, list):
        return str(value[0]) if value else ""
    return str(value)


def _parse_task(path: Path) -> GeneralTask:
    obj = json.loads(path.read_text(encoding="utf-8"))
    instruction = _first(obj.get("Definition", "")).strip()
    if not instruction:
        raise ValueError("missing Definition")
    categories = [str(c) for c in obj.get("Categories", [])]
    instances = []
    for inst in obj.get("Instances", []):
        text_in = str(inst.get("input", "")).strip()
        text_out = _first(inst.get("output", "")).strip()
        if text_in and text_out:
            instances.append((text_in, text_out))
    if not instances:
        raise ValueError("no usable instances")
    return GeneralTask(task_id=path.stem, instruction=instruction,
                       instances=instances, categories=categories)


def is_excluded(task: GeneralTask, exclusion_tags: Sequence[str]) -> bool:
    lowered = [tag.lower() for tag in exclusion_tags]
    for category in task.categories:
        cat = category.lower()
        if any(tag in cat for tag in lowered):
            return True
    return False


def ingest_general_tasks(
    task_files: Sequence[str | Path],
    exclusion_tags: Sequence[str] = DEFAULT_EXCLUSION_TAGS,
    target_task_count: int = DEFAULT_TARGET_TASK_COUNT,
    seed: int = 0,
) -> list[GeneralTask]:
    """Parse, filter, and downsample instruction tasks.

    Malformed files are skipped with a warning; tasks carrying any exclusion
    tag are removed; the survivors are sampled down to ``target_task_count``
    with the seeded RNG (sorted by task id first, for determinism).
    """
    tasks = []
    for file in task_files:
        path = Path(file)
        try:
            task = _parse_task(path)
        except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
            logger.warning("skipping malformed task file %s: %s", path, exc)
            continue
        if is_excluded(task, exclusion_tags):
            logger.debug("excluding task %s (tags %s)", task.task_id, task.categories)
            continue
        tasks.append(task)
    if not tasks:
        raise ValueError("no tasks survived parsing and exclusion filtering")
    tasks.sort(key=lambda t: t.task_id)
    if len(tasks) > target_task_count:
        rng = random.Random(seed)
        tasks = rng.sample(tasks, target_task_count)
        tasks.sort(key=lambda t: t.task_id)
    return tasks
