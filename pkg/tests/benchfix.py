"""Synthetic benchmark fixtures: tiny, deterministic, schema-valid task files.

Texts use a vocabulary disjoint from the ingest fixtures so decontamination
control checks stay clean.  Every text has >= 8 distinct-ish tokens.
"""

from __future__ import annotations

import random
from pathlib import Path

from sentidistill.bench.data import TaskInstance, write_split
from sentidistill.bench.registry import (
    ASQP_CATEGORIES,
    ACSA_CATEGORIES,
    POLARITY3,
    REGISTRY,
    TASK_ORDER,
)

_ADJ = ("quiet", "bustling", "dim", "sunlit", "cramped", "airy", "vintage", "modern")
_NOUN = ("bistro", "arcade", "terrace", "lounge", "parlor", "kiosk", "atrium", "stall")
_VERB = ("greeted", "served", "ignored", "charmed", "rushed", "surprised", "welcomed", "bored")
_TAIL = ("during the evening shift", "on a rainy tuesday", "before the noon rush",
         "after the long weekend", "near the harbor gates", "under the paper lanterns")

STANCE_TARGETS = ("Bernie Sanders", "Donald Trump", "Joe Biden")

_ASPECTS = ("ravioli", "espresso", "terrace seating", "house wine", "service desk", "cheesecake")
_OPINIONS = ("delightful", "sluggish", "crisp", "overpriced", "generous", "bland")
_HOLDERS = ("NULL", "the reviewer", "my partner", "NULL", "the locals")
_SSA_TARGETS = ("wellness hotel", "night train", "tasting menu", "city tour", "NULL")


def _text(task_id: str, split: str, i: int, rng: random.Random) -> str:
    return (
        f"the {rng.choice(_ADJ)} {rng.choice(_NOUN)} {rng.choice(_VERB)} us "
        f"{rng.choice(_TAIL)} case {task_id} {split} {i:04d}"
    )


def _make_instance(task_id: str, split: str, i: int, rng: random.Random) -> TaskInstance:
    spec = REGISTRY[task_id]
    text = _text(task_id, split, i, rng)
    iid = f"{task_id}-{split}-{i:04d}"
    if spec.is_classification:
        label = spec.label_set[i % len(spec.label_set)]
        target = STANCE_TARGETS[i % len(STANCE_TARGETS)] if spec.needs_target else None
        return TaskInstance(iid, task_id, split, text, label=label, target=target)
    n_tuples = (i % 3) if task_id == "ssa" else (i % 3) or 1
    tuples = []
    for j in range(n_tuples):
        if task_id == "atsa":
            tuples.append((_ASPECTS[(i + j) % len(_ASPECTS)], POLARITY3[(i + j) % 3]))
        elif task_id == "acsa":
            tuples.append((ACSA_CATEGORIES[(i + j) % len(ACSA_CATEGORIES)], POLARITY3[(i + j) % 3]))
        elif task_id == "asqp":
            aspect = "NULL" if (i + j) % 4 == 0 else _ASPECTS[(i + j) % len(_ASPECTS)]
            tuples.append((
                ASQP_CATEGORIES[(i + j) % len(ASQP_CATEGORIES)],
                aspect,
                _OPINIONS[(i + j) % len(_OPINIONS)],
                POLARITY3[(i + j) % 3],
            ))
        else:  # ssa
            tuples.append((
                _HOLDERS[(i + j) % len(_HOLDERS)],
                _SSA_TARGETS[(i + j) % len(_SSA_TARGETS)],
                _OPINIONS[(i + j) % len(_OPINIONS)],
                POLARITY3[(i + j) % 3],
            ))
    return TaskInstance(iid, task_id, split, text, tuples=tuples)


def make_bench_dir(
    dir: str | Path,
    sizes: dict[str, tuple[int, int, int]] | None = None,
    default_sizes: tuple[int, int, int] = (8, 6, 5),
    task_ids=None,
    seed: int = 0,
) -> Path:
    """Write canonical task files; sizes are (train, dev, test) per task."""
    dir = Path(dir)
    rng = random.Random(seed)
    for task_id in task_ids or TASK_ORDER:
        n_train, n_dev, n_test = (sizes or {}).get(task_id, default_sizes)
        counter = 0
        for split, n in (("train", n_train), ("dev", n_dev), ("test", n_test)):
            instances = [_make_instance(task_id, split, counter + i, rng) for i in range(n)]
            counter += n
            write_split(dir, task_id, split, instances)
    return dir


def registry_sized_raw(dir: str | Path, extra: int = 37, seed: int = 1) -> Path:
    """Raw sets sized for the sampler: oversized where sampling applies,
    exactly the registry sizes for pass-through tasks."""
    sizes = {}
    for task_id in TASK_ORDER:
        spec = REGISTRY[task_id]
        if spec.category == "FSA":
            sizes[task_id] = (spec.train_size, spec.dev_size, spec.test_size)
        else:
            sizes[task_id] = (spec.train_size + extra, spec.dev_size + extra,
                              spec.test_size + extra)
    # the registry keeps SST2's original test set; model that raw contract here
    spec = REGISTRY["sst2"]
    sizes["sst2"] = (spec.train_size + extra, spec.dev_size + extra, spec.test_size)
    for retained in ("irony18", "emotion20", "pstance", "mint"):
        spec = REGISTRY[retained]
        sizes[retained] = (sizes[retained][0], sizes[retained][1], spec.test_size)
    sizes["mint"] = (REGISTRY["mint"].train_size, sizes["mint"][1], REGISTRY["mint"].test_size)
    return make_bench_dir(dir, sizes=sizes, seed=seed)


def gold_reply(bench_dir: str | Path):
    """Mock reply callable answering every eval query with its gold rendering."""
    from sentidistill.bench.data import read_split
    from sentidistill.bench.registry import get_spec
    from sentidistill.scoring.parse import serialize_tuples
    from mockserver import last_sentence

    answers: dict[str, str] = {}
    for task_id in TASK_ORDER:
        spec = get_spec(task_id)
        for split in ("dev", "test"):
            try:
                instances = read_split(bench_dir, task_id, split)
            except Exception:
                continue
            for inst in instances:
                if spec.is_classification:
                    answers[inst.text] = str(inst.label)
                else:
                    answers[inst.text] = serialize_tuples(inst.tuples or [])

    def reply(payload: dict) -> str:
        query = last_sentence(payload["messages"][-1]["content"])
        return answers.get(query, "unknown")

    return reply


def make_general_task_files(dir: str | Path, n_tasks: int = 5, n_instances: int = 20,
                            excluded_specs: tuple = ()) -> list[Path]:
    """Instruction-dataset JSON files; excluded_specs adds tagged tasks."""
    import json

    dir = Path(dir)
    dir.mkdir(parents=True, exist_ok=True)
    paths = []
    themes = ("count the vowels in", "reverse the word order of", "uppercase every noun in",
              "extract the year mentioned in", "summarize in three words")
    for t in range(n_tasks):
        theme = themes[t % len(themes)]
        task = {
            "Definition": [f"Given a sentence, {theme} it and return the result."],
            "Categories": ["Text Transformation"],
            "Instances": [
                {
                    "input": f"sample input {t:02d}-{i:03d} with steady filler words attached",
                    "output": [f"answer-{t:02d}-{i:03d}"],
                }
                for i in range(n_instances)
            ],
        }
        path = dir / f"task{900 + t}_transform_{t}.json"
        path.write_text(json.dumps(task, indent=1), encoding="utf-8")
        paths.append(path)
    for name, tag in excluded_specs:
        task = {
            "Definition": [f"Classify the {name} of the given sentence."],
            "Categories": [tag],
            "Instances": [
                {"input": f"excluded input {i}", "output": ["label"]} for i in range(6)
            ],
        }
        path = dir / f"task{990}_{name}.json"
        path.write_text(json.dumps(task, indent=1), encoding="utf-8")
        paths.append(path)
    return paths
