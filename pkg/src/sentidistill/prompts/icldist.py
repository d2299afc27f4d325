"""Alignment-stage prompt construction with format diversification.

Two distillation tasks (sentiment classification, emotion recognition) are
rendered under four format strategies: the basic instruction, alternative
label words, alternative label taxonomies (emotion only), and minimized
instructions.  General NLU tasks from an instruction dataset are mixed in for
task diversification; see ``general_tasks``.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from ..records import TextRecord
from .general_tasks import GeneralTask
from .spec import GenParams, PromptSpec, make_prompt_id

logger = logging.getLogger(__name__)

SENTIMENT_LABELS = ("positive", "negative", "neutral")
EKMAN7 = ("happiness", "sad", "fear", "anger", "surprise", "disgust", "neutral")
GOEMOTIONS28 = (
    "neutral", "curiosity", "confusion", "amusement", "gratitude", "admiration",
    "pride", "approval", "realization", "surprise", "excitement", "joy",
    "relief", "caring", "optimism", "desire", "love", "fear", "nervousness",
    "grief", "sadness", "remorse", "disapproval", "disappointment", "anger",
    "annoyance", "embarrassment", "disgust",
)

LABEL_WORD_MAPS = {
    "+1/-1/0": {"positive": "+1", "negative": "-1", "neutral": "0"},
    "POS/NEG/NEU": {"positive": "POS", "negative": "NEG", "neutral": "NEU"},
    "good/bad/ok": {"positive": "good", "negative": "bad", "neutral": "ok"},
}
TAXONOMIES = {"ekman7": EKMAN7, "goemotions28": GOEMOTIONS28}

TASKS = ("sentiment_cls", "emotion_rec")
STRATEGY_KINDS = ("basic", "label_words", "label_taxonomy", "minimized_instruction")

MIN_DEMOS, MAX_DEMOS = 1, 16

DEFAULT_GEN_PARAMS = GenParams(temperature=0.7, max_tokens=1024)

_SC_INSTRUCTION = (
    "Please perform sentiment classification task. The label should be one of the "
    "following: {labels}. In your classification, consider the overall content, tone, "
    "emotional language, and any contextual clues that indicate the sentiment behind "
    "the sentence. Do not provide any reasoning or explanation and directly output "
    "the final answer."
)
_ER_INSTRUCTION = (
    "Please perform emotion detection task. Identify and extract all emotions present "
    "in the sentence. The emotions to consider are from the following list: {labels}. "
    "In your analysis, take into account the language used, context, and any emotional "
    "expressions or cues that indicate multiple emotions. Do not provide any reasoning "
    "or explanation and directly output the final answer."
)
MINIMIZED_INSTRUCTION = (
    "Please complete the task according to the following examples. Do not provide any "
    "reasoning or explanation and directly output the final answer."
)


def render_label_list(labels: Sequence[str]) -> str:
    return "[" + ", ".join(f"'{label}'" for label in labels) + "]"


def compose_prompt(instruction: str, demo_blocks: Sequence[str], query_text: str) -> str:
    parts = [instruction, *demo_blocks, f"Sentence: {query_text}\nOutput:"]
    return "\n\n".join(parts)


@dataclass(frozen=True)
class FormatStrategy:
    kind: str
    variant: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind: {self.kind}")
        if self.kind == "label_words" and self.variant not in LABEL_WORD_MAPS:
            raise ValueError(f"unknown label-word variant: {self.variant}")
        if self.kind == "label_taxonomy" and self.variant not in TAXONOMIES:
            raise ValueError(f"unknown taxonomy: {self.variant}")

    @property
    def strategy_id(self) -> str:
        return self.kind if self.variant is None else f"{self.kind}:{self.variant}"


def valid_for_task(strategy: FormatStrategy, task: str) -> bool:
    if strategy.kind == "label_taxonomy":
        return task == "emotion_rec"
    if strategy.kind == "label_words":
        return task == "sentiment_cls"
    return True


@dataclass
class Demo:
    id: str
    text: str
    sentiment: str
    emotions: list[str]
    goemotions: list[str] | None = None


@dataclass
class DemoPool:
    demos: list[Demo] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.demos)

    def eligible(self, strategy: FormatStrategy, exclude_id: str | None = None,
                 exclude_text: str | None = None) -> list[Demo]:
        need_goemotions = strategy.kind == "label_taxonomy" and strategy.variant == "goemotions28"
        out = []
        for demo in self.demos:
            if exclude_id is not None and demo.id == exclude_id:
                continue
            if exclude_text is not None and demo.text == exclude_text:
                continue
            if need_goemotions and not demo.goemotions:
                continue
            out.append(demo)
        return out


def load_demo_pool(path: str | Path) -> DemoPool:
    """Read a demo pool JSONL file, enforcing label-set membership."""
    demos = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            demo = Demo(
                id=str(obj["id"]),
                text=obj["text"],
                sentiment=obj["sentiment"],
                emotions=list(obj["emotions"]),
                goemotions=list(obj["goemotions"]) if obj.get("goemotions") else None,
            )
            if demo.id in seen_ids:
                raise ValueError(f"{path}:{lineno}: duplicate demo id {demo.id}")
            seen_ids.add(demo.id)
            if demo.sentiment not in SENTIMENT_LABELS:
                raise ValueError(f"{path}:{lineno}: bad sentiment {demo.sentiment!r}")
            if not demo.emotions:
                raise ValueError(f"{path}:{lineno}: demo needs at least one emotion label")
            for emo in demo.emotions:
                if emo not in EKMAN7:
                    raise ValueError(f"{path}:{lineno}: emotion {emo!r} outside taxonomy")
            if demo.goemotions:
                for emo in demo.goemotions:
                    if emo not in GOEMOTIONS28:
                        raise ValueError(f"{path}:{lineno}: goemotions label {emo!r} unknown")
            demos.append(demo)
    return DemoPool(demos)


def _sentiment_output(demo: Demo, strategy: FormatStrategy) -> str:
    if strategy.kind == "label_words":
        return LABEL_WORD_MAPS[strategy.variant][demo.sentiment]
    return demo.sentiment


def _emotion_output(demo: Demo, strategy: FormatStrategy) -> str:
    if strategy.kind == "label_taxonomy" and strategy.variant == "goemotions28":
        if not demo.goemotions:
            raise ValueError("demo/taxonomy mismatch")
        labels = demo.goemotions
    else:
        labels = demo.emotions
    return render_label_list(labels)


def render_icl_prompt(task: str, strategy: FormatStrategy, demos: Sequence[Demo],
                      query_text: str) -> str:
    """Instruction + demo blocks + query, as a single user message."""
    if task not in TASKS:
        raise ValueError(f"unknown task: {task}")
    if not valid_for_task(strategy, task):
        raise ValueError(f"strategy {strategy.strategy_id} not valid for {task}")
    if not demos:
        raise ValueError("at least one demonstration is required")
    if strategy.kind == "minimized_instruction":
        instruction = MINIMIZED_INSTRUCTION
    elif task == "sentiment_cls":
        if strategy.kind == "label_words":
            words = [LABEL_WORD_MAPS[strategy.variant][label] for label in SENTIMENT_LABELS]
        else:
            words = list(SENTIMENT_LABELS)
        instruction = _SC_INSTRUCTION.format(labels=render_label_list(words))
    else:
        taxonomy = TAXONOMIES[strategy.variant] if strategy.kind == "label_taxonomy" else EKMAN7
        instruction = _ER_INSTRUCTION.format(labels=render_label_list(taxonomy))
    blocks = []
    for demo in demos:
        output = _sentiment_output(demo, strategy) if task == "sentiment_cls" else _emotion_output(demo, strategy)
        blocks.append(f"Sentence: {demo.text}\nOutput: {output}")
    return compose_prompt(instruction, blocks, query_text)


def build_icl_prompt(task: str, strategy: FormatStrategy, demos: Sequence[Demo],
                     query: TextRecord, seed: int = 0,
                     gen_params: GenParams = DEFAULT_GEN_PARAMS) -> PromptSpec:
    for demo in demos:
        if demo.id == query.id or demo.text == query.text:
            raise ValueError(f"query {query.id} appears among demonstrations")
    content = render_icl_prompt(task, strategy, demos, query.text)
    demo_ids = [d.id for d in demos]
    return PromptSpec(
        prompt_id=make_prompt_id(
            "icldist", task=task, strategy=strategy.strategy_id,
            query_id=query.id, demo_ids=demo_ids, seed=seed,
        ),
        stage="icldist",
        messages=[{"role": "user", "content": content}],
        gen_params=gen_params,
        provenance={
            "stage": "icldist",
            "task": task,
            "strategy": strategy.kind,
            "variant": strategy.variant,
            "demo_ids": demo_ids,
            "query_id": query.id,
            "k": len(demos),
        },
    )


def build_general_prompt(task: GeneralTask, query_index: int, demo_indices: Sequence[int],
                         seed: int = 0,
                         gen_params: GenParams = DEFAULT_GEN_PARAMS) -> PromptSpec:
    """General-task prompt in the same instruction + demos + query layout."""
    if query_index in demo_indices:
        raise ValueError("query instance appears among demonstrations")
    query_input, _ = task.instances[query_index]
    blocks = [
        f"Sentence: {task.instances[i][0]}\nOutput: {task.instances[i][1]}"
        for i in demo_indices
    ]
    content = compose_prompt(task.instruction, blocks, query_input)
    demo_ids = [f"{task.task_id}#{i}" for i in demo_indices]
    query_id = f"{task.task_id}#{query_index}"
    return PromptSpec(
        prompt_id=make_prompt_id(
            "icl_general", task=task.task_id, query_id=query_id,
            demo_ids=demo_ids, seed=seed,
        ),
        stage="icl_general",
        messages=[{"role": "user", "content": content}],
        gen_params=gen_params,
        provenance={
            "stage": "icl_general",
            "task": task.task_id,
            "strategy": "general",
            "variant": None,
            "demo_ids": demo_ids,
            "query_id": query_id,
            "k": len(demo_indices),
        },
    )


def sample_demo_count(rng: random.Random) -> int:
    """Demo count drawn uniformly from 1..16."""
    return rng.randint(MIN_DEMOS, MAX_DEMOS)


def _max_unique_senti(n_records: int, pool: DemoPool) -> int:
    """Distinct (query, config) pairs, config = (task, strategy, variant, k, demo set)."""
    pool_n = pool.size
    go_n = sum(1 for d in pool.demos if d.goemotions)
    eligibles = (
        [pool_n] * len(TASKS)  # basic
        + [pool_n] * len(LABEL_WORD_MAPS)  # label_words (sentiment only)
        + [pool_n, go_n]  # label_taxonomy: ekman7, goemotions28
        + [pool_n] * len(TASKS)  # minimized_instruction
    )
    per_record = sum(
        math.comb(eligible, k)
        for eligible in eligibles
        for k in range(MIN_DEMOS, min(MAX_DEMOS, eligible) + 1)
    )
    return n_records * per_record


def _max_unique_general(tasks: Sequence[GeneralTask]) -> int:
    """Distinct (task, query, k, demo set) keys; k clamps to the instance count."""
    total = 0
    for task in tasks:
        others = len(task.instances) - 1
        total += len(task.instances) * sum(
            math.comb(others, k) for k in range(MIN_DEMOS, min(MAX_DEMOS, others) + 1)
        )
    return total


def build_icl_corpus(
    records: Sequence[TextRecord],
    pool: DemoPool,
    general_tasks: Sequence[GeneralTask],
    target_count: int,
    task_mix: tuple[float, float] = (0.8, 0.2),
    strategy_weights: dict[str, float] | None = None,
    seed: int = 0,
    gen_params: GenParams = DEFAULT_GEN_PARAMS,
) -> Iterator[PromptSpec]:
    """Seeded sequential corpus generator.

    The strategy is drawn first from the configured weights (so emitted
    strategy frequencies match the weights); the task follows from strategy
    validity (label words -> sentiment, taxonomies -> emotion) or a fair coin.
    """
    senti_frac, general_frac = task_mix
    if abs(senti_frac + general_frac - 1.0) > 1e-9:
        raise ValueError("task_mix fractions must sum to 1")
    if not pool.demos:
        raise ValueError("demo pool is empty")
    weights = strategy_weights or {kind: 1.0 for kind in STRATEGY_KINDS}
    kinds = [k for k in STRATEGY_KINDS if weights.get(k, 0) > 0]
    kind_weights = [weights[k] for k in kinds]

    n_general = round(target_count * general_frac)
    n_senti = target_count - n_general
    usable_tasks = [t for t in general_tasks if len(t.instances) >= 2]
    if n_general > 0 and not usable_tasks:
        raise ValueError("general-task fraction requested but no usable tasks (need >= 2 instances)")

    max_senti = _max_unique_senti(len(records), pool)
    max_general = _max_unique_general(usable_tasks)
    if n_senti > max_senti or n_general > max_general:
        raise ValueError(
            f"target_count {target_count} exceeds achievable maximum "
            f"({max_senti} sentiment-task + {max_general} general-task prompts)"
        )

    rng = random.Random(seed)
    emissions = ["senti"] * n_senti + ["general"] * n_general
    rng.shuffle(emissions)
    seen_keys: set = set()

    for emission in emissions:
        for _attempt in range(1000):
            if emission == "senti":
                kind = rng.choices(kinds, weights=kind_weights, k=1)[0]
                if kind == "label_words":
                    task = "sentiment_cls"
                    strategy = FormatStrategy(kind, rng.choice(sorted(LABEL_WORD_MAPS)))
                elif kind == "label_taxonomy":
                    task = "emotion_rec"
                    strategy = FormatStrategy(kind, rng.choice(sorted(TAXONOMIES)))
                else:
                    task = rng.choice(TASKS)
                    strategy = FormatStrategy(kind)
                query = records[rng.randrange(len(records))]
                k = sample_demo_count(rng)
                eligible = pool.eligible(strategy, exclude_id=query.id, exclude_text=query.text)
                if len(eligible) < k:
                    raise ValueError(
                        f"demo pool too small: need {k} demos for {strategy.strategy_id}, "
                        f"have {len(eligible)}"
                    )
                demos = rng.sample(eligible, k)
                key = (task, strategy.strategy_id, k, query.id, tuple(d.id for d in demos))
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                yield build_icl_prompt(task, strategy, demos, query, seed=seed, gen_params=gen_params)
            else:
                task_obj = usable_tasks[rng.randrange(len(usable_tasks))]
                query_index = rng.randrange(len(task_obj.instances))
                others = [i for i in range(len(task_obj.instances)) if i != query_index]
                k = sample_demo_count(rng)
                if k > len(others):
                    logger.debug("%s: clamping demo count %d -> %d", task_obj.task_id, k, len(others))
                    k = len(others)
                demo_indices = rng.sample(others, k)
                key = (task_obj.task_id, query_index, k, tuple(demo_indices))
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                yield build_general_prompt(task_obj, query_index, demo_indices, seed=seed,
                                           gen_params=gen_params)
            break
        else:
            raise ValueError("could not draw a fresh (query, config) pair; corpus saturated")
