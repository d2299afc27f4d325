from importlib import resources
from pathlib import Path

from .spec import GenParams, PromptSpec, make_prompt_id, read_prompts, write_prompts

__all__ = [
    "GenParams",
    "PromptSpec",
    "make_prompt_id",
    "read_prompts",
    "write_prompts",
    "default_demo_pool_path",
]


def default_demo_pool_path() -> Path:
    """Location of the demo pool example asset shipped with the package."""
    return Path(str(resources.files("sentidistill.prompts").joinpath("assets/demo_pool.jsonl")))
