"""Shared prompt representation used by every prompt-producing module."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

STAGES = ("knowdist", "icldist", "icl_general", "eval")
ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class GenParams:
    temperature: float
    max_tokens: int
    stop: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "stop": list(self.stop) if self.stop else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenParams":
        stop = obj.get("stop")
        return cls(obj["temperature"], obj["max_tokens"], tuple(stop) if stop else None)


@dataclass
class PromptSpec:
    prompt_id: str
    stage: str
    messages: list[dict]
    gen_params: GenParams
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage: {self.stage}")
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[-1]["role"] != "user":
            raise ValueError("messages must end with a user turn")
        for msg in self.messages:
            if msg["role"] not in ROLES:
                raise ValueError(f"unknown role: {msg['role']}")

    def to_json(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "stage": self.stage,
            "messages": self.messages,
            "gen_params": self.gen_params.to_json(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PromptSpec":
        return cls(
            prompt_id=obj["prompt_id"],
            stage=obj["stage"],
            messages=obj["messages"],
            gen_params=GenParams.from_json(obj["gen_params"]),
            provenance=obj.get("provenance", {}),
        )


def make_prompt_id(stage: str, **key_fields) -> str:
    """Stable 16-hex-digit id from the identifying fields of a prompt."""
    material = json.dumps({"stage": stage, **key_fields}, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(material.encode("utf-8")).hexdigest()[:16]


def write_prompts(path: str | Path, specs: Iterable[PromptSpec]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for spec in specs:
            fh.write(json.dumps(spec.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_prompts(path: str | Path) -> Iterator[PromptSpec]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield PromptSpec.from_json(json.loads(line))
