from .data import BenchDataError, TaskInstance, read_split, sample_splits, write_split
from .prompts import build_eval_prompt, render_eval_prompt
from .registry import CATEGORY_TASKS, REGISTRY, TASK_ORDER, DatasetSpec, get_spec
from .run import DEFAULT_SEEDS, EvalResult, run_eval, run_task_eval, score_raw_file

__all__ = [
    "BenchDataError",
    "TaskInstance",
    "read_split",
    "sample_splits",
    "write_split",
    "build_eval_prompt",
    "render_eval_prompt",
    "CATEGORY_TASKS",
    "REGISTRY",
    "TASK_ORDER",
    "DatasetSpec",
    "get_spec",
    "DEFAULT_SEEDS",
    "EvalResult",
    "run_eval",
    "run_task_eval",
    "score_raw_file",
]
