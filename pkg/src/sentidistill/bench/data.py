"""Canonical task files and the split sampler.

Canonical task JSONL: one instance per line,
``{"id", "text", "label"}`` for classification tasks (stance adds
``"target"``), ``{"id", "text", "tuples": [[...], ...]}`` for extraction
tasks.  Layout on disk: ``<dir>/<task_id>/{train,dev,test}.jsonl``.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .registry import REGISTRY, DatasetSpec, get_spec

logger = logging.getLogger(__name__)

SPLITS = ("train", "dev", "test")


class BenchDataError(Exception):
    pass


@dataclass
class TaskInstance:
    instance_id: str
    task_id: str
    split: str
    text: str
    label: str | None = None
    tuples: list[tuple[str, ...]] | None = None
    target: str | None = None

    def to_json(self) -> dict:
        obj: dict = {"id": self.instance_id, "text": self.text}
        if self.label is not None:
            obj["label"] = self.label
        if self.tuples is not None:
            obj["tuples"] = [list(t) for t in self.tuples]
        if self.target is not None:
            obj["target"] = self.target
        return obj

    @classmethod
    def from_json(cls, obj: dict, task_id: str, split: str) -> "TaskInstance":
        return cls(
            instance_id=str(obj["id"]),
            task_id=task_id,
            split=split,
            text=obj["text"],
            label=obj.get("label"),
            tuples=[tuple(t) for t in obj["tuples"]] if "tuples" in obj else None,
            target=obj.get("target"),
        )


def validate_instance(inst: TaskInstance, spec: DatasetSpec) -> None:
    if spec.is_classification:
        if inst.label is None or inst.label not in spec.label_set:
            raise BenchDataError(
                f"{spec.task_id}/{inst.instance_id}: label {inst.label!r} not in {spec.label_set}"
            )
        if spec.needs_target and not inst.target:
            raise BenchDataError(f"{spec.task_id}/{inst.instance_id}: missing stance target")
    else:
        if inst.tuples is None:
            raise BenchDataError(f"{spec.task_id}/{inst.instance_id}: missing tuples")
        for t in inst.tuples:
            if len(t) != spec.tuple_arity:
                raise BenchDataError(
                    f"{spec.task_id}/{inst.instance_id}: tuple arity {len(t)} != {spec.tuple_arity}"
                )
            for i, slot in enumerate(t):
                if not slot:
                    raise BenchDataError(
                        f"{spec.task_id}/{inst.instance_id}: empty slot {i}"
                    )
                if slot == "NULL" and i not in spec.null_slots:
                    raise BenchDataError(
                        f"{spec.task_id}/{inst.instance_id}: NULL not permitted in slot {i}"
                    )


def read_split(dir: str | Path, task_id: str, split: str, validate: bool = True) -> list[TaskInstance]:
    path = Path(dir) / task_id / f"{split}.jsonl"
    if not path.exists():
        raise BenchDataError(f"missing split file: {path}")
    spec = get_spec(task_id)
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                inst = TaskInstance.from_json(json.loads(line), task_id, split)
                if validate:
                    validate_instance(inst, spec)
                out.append(inst)
    return out


def write_split(dir: str | Path, task_id: str, split: str, instances: Sequence[TaskInstance]) -> Path:
    path = Path(dir) / task_id / f"{split}.jsonl"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_json(), ensure_ascii=False) + "\n")
    return path


def sample_splits(
    raw_dir: str | Path,
    out_dir: str | Path,
    seed: int,
    task_ids: Sequence[str] | None = None,
) -> dict[str, dict[str, int]]:
    """Downsample raw splits to the registry targets.

    Fine-grained tasks pass through unsampled; elsewhere a split larger than
    its target is sampled uniformly without replacement (deterministic per
    (seed, task, split)), and a smaller one is kept whole with a warning.
    Returns the resulting per-task split sizes.
    """
    sizes: dict[str, dict[str, int]] = {}
    for task_id in task_ids or REGISTRY.keys():
        spec = get_spec(task_id)
        targets = {"train": spec.train_size, "dev": spec.dev_size, "test": spec.test_size}
        sizes[task_id] = {}
        for split in SPLITS:
            instances = read_split(raw_dir, task_id, split)
            target = targets[split]
            if spec.category == "FSA":
                selected = instances
            elif len(instances) > target:
                rng = random.Random(f"{seed}:{task_id}:{split}")
                selected = rng.sample(instances, target)
            else:
                if len(instances) < target:
                    logger.warning(
                        "%s/%s: only %d instances available (target %d); keeping all",
                        task_id, split, len(instances), target,
                    )
                selected = instances
            write_split(out_dir, task_id, split, selected)
            sizes[task_id][split] = len(selected)
    return sizes
