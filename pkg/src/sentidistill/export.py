"""Assemble collected samples into stage corpora plus trainer manifests.

Exported lines are chat-format JSONL (prompt messages + the assistant
response); the manifest records bucket counts, mixing ratios, file hashes and
the per-model-profile optimizer settings the downstream trainer must use.
Training targets the assistant turn only ("loss_on": "assistant").
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .client.api import DistillSample, read_samples

logger = logging.getLogger(__name__)

STAGES = ("knowdist", "icldist")
DEFAULT_ICL_RATIO = (4, 1)  # icldist : icl_general

# Optimizer settings per (stage, model profile); the trainer reads these from
# the manifest, never from its own config, so the two can not drift apart.
HYPERPARAMETERS: dict[tuple[str, str], dict] = {
    ("knowdist", "llama-1.2b"): {
        "batch_size": 128, "learning_rate": 5e-6, "epochs": 4,
        "lr_decay": "cosine", "warmup_ratio": 0.01, "weight_decay": 0.1,
        "adam_beta1": 0.9, "adam_beta2": 0.95,
    },
    ("icldist", "llama-1.2b"): {
        "batch_size": 128, "learning_rate": 1e-5, "epochs": 4,
        "lr_decay": "linear", "warmup_ratio": 0.02, "weight_decay": 0.01,
        "adam_beta1": 0.9, "adam_beta2": 0.999,
    },
    ("knowdist", "qwen-1.5b"): {
        "batch_size": 128, "learning_rate": 5e-5, "epochs": 4,
        "lr_decay": "cosine", "warmup_ratio": 0.0, "weight_decay": 0.1,
        "adam_beta1": 0.9, "adam_beta2": 0.999,
    },
    ("icldist", "qwen-1.5b"): {
        "batch_size": 128, "learning_rate": 3e-5, "epochs": 4,
        "lr_decay": "cosine", "warmup_ratio": 0.0, "weight_decay": 0.1,
        "adam_beta1": 0.9, "adam_beta2": 0.999,
    },
    ("knowdist", "llama-3.2b"): {
        "batch_size": 128, "learning_rate": 5e-5, "epochs": 4,
        "lr_decay": "cosine", "warmup_ratio": 0.0, "weight_decay": 0.1,
        "adam_beta1": 0.9, "adam_beta2": 0.999,
    },
    ("icldist", "llama-3.2b"): {
        "batch_size": 128, "learning_rate": 2e-5, "epochs": 4,
        "lr_decay": "cosine", "warmup_ratio": 0.0, "weight_decay": 0.1,
        "adam_beta1": 0.9, "adam_beta2": 0.999,
    },
}

MODEL_PROFILES = ("llama-1.2b", "qwen-1.5b", "llama-3.2b")

# Full-run sample budgets per profile (the smaller student trains on a subset).
PROFILE_TARGETS = {
    "llama-1.2b": {"knowdist": 1_000_000, "icldist": 500_000},
    "qwen-1.5b": {"knowdist": 1_000_000, "icldist": 500_000},
    "llama-3.2b": {"knowdist": 200_000, "icldist": 100_000},
}


class ExportError(Exception):
    pass


def _bucket(provenance: dict) -> str:
    stage = provenance.get("stage")
    if stage == "knowdist":
        return f"{provenance.get('method')}/{provenance.get('perspective')}"
    if stage == "icldist":
        return f"icl/{provenance.get('strategy')}"
    if stage == "icl_general":
        return "general"
    return str(stage)


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def export_stage(
    sample_files: Sequence[str | Path],
    stage: str,
    out_dir: str | Path,
    profile: str = "llama-1.2b",
    shuffle_seed: int = 0,
    ratio: tuple[int, int] = DEFAULT_ICL_RATIO,
    target_count: int | None = None,
    include_truncated: bool = False,
) -> tuple[Path, Path]:
    """Write ``train.jsonl`` + ``manifest.json`` for one stage.

    The icldist stage mixes task-alignment and general-task samples at the
    configured ratio (default 4:1); the knowdist stage accepts knowdist
    provenance only.  Returns (train_path, manifest_path).
    """
    if stage not in STAGES:
        raise ExportError(f"unknown stage: {stage}")
    if profile not in MODEL_PROFILES:
        raise ExportError(f"unknown model profile: {profile}")
    samples: list[DistillSample] = []
    for file in sample_files:
        samples.extend(read_samples(file))
    n_truncated = sum(1 for s in samples if s.truncated)
    if not include_truncated and n_truncated:
        logger.info("excluding %d truncated samples", n_truncated)
        samples = [s for s in samples if not s.truncated]

    allowed = {"knowdist"} if stage == "knowdist" else {"icldist", "icl_general"}
    stages_seen = {s.provenance.get("stage") for s in samples}
    if not stages_seen <= allowed:
        raise ExportError(
            f"mixed-stage input: stage {stage} accepts {sorted(allowed)}, "
            f"got {sorted(str(x) for x in stages_seen)}"
        )

    if stage == "icldist":
        icl = [s for s in samples if s.provenance.get("stage") == "icldist"]
        general = [s for s in samples if s.provenance.get("stage") == "icl_general"]
        r_icl, r_gen = ratio
        if target_count is not None:
            unit, rem = divmod(target_count, r_icl + r_gen)
            if rem:
                raise ExportError(
                    f"target_count {target_count} not divisible by ratio {r_icl}:{r_gen}"
                )
            need_icl, need_gen = unit * r_icl, unit * r_gen
        else:
            unit = len(icl) // r_icl
            if r_gen:
                unit = min(unit, len(general) // r_gen)
            need_icl, need_gen = unit * r_icl, unit * r_gen
        if need_icl > len(icl) or need_gen > len(general) or (need_icl + need_gen) == 0:
            achievable = len(icl) // r_icl
            if r_gen:
                achievable = min(achievable, len(general) // r_gen)
            raise ExportError(
                f"ratio {r_icl}:{r_gen} unattainable: have {len(icl)} icldist and "
                f"{len(general)} general samples (achievable total: {achievable * (r_icl + r_gen)})"
            )
        selected = icl[:need_icl] + general[:need_gen]
        ratios = {"icldist": r_icl, "icl_general": r_gen}
    else:
        selected = samples if target_count is None else samples[:target_count]
        if target_count is not None and len(selected) < target_count:
            raise ExportError(
                f"target_count {target_count} exceeds available {len(selected)} samples"
            )
        ratios = None

    rng = random.Random(shuffle_seed)
    rng.shuffle(selected)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_path = out_dir / "train.jsonl"
    counts: dict[str, int] = {}
    with open(train_path, "w", encoding="utf-8") as fh:
        for sample in selected:
            counts[_bucket(sample.provenance)] = counts.get(_bucket(sample.provenance), 0) + 1
            line = {
                "messages": sample.messages + [{"role": "assistant", "content": sample.response}],
                "meta": {**sample.provenance, "prompt_id": sample.prompt_id},
            }
            fh.write(json.dumps(line, ensure_ascii=False) + "\n")

    manifest = {
        "stage": stage,
        "profile": profile,
        "counts": counts,
        "ratios": ratios,
        "shuffle_seed": shuffle_seed,
        "loss_on": "assistant",
        "files": {
            "train.jsonl": {"sha256": _sha256_file(train_path), "lines": len(selected)},
        },
        "hyperparameters": {
            p: HYPERPARAMETERS[(stage, p)] for p in MODEL_PROFILES
        },
        "target_counts": PROFILE_TARGETS,
        "excluded_truncated": 0 if include_truncated else n_truncated,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
                             encoding="utf-8")
    return train_path, manifest_path


@dataclass
class Finding:
    severity: str  # "error" | "warning" | "info"
    line: int
    message: str

    def to_json(self) -> dict:
        return {"severity": self.severity, "line": self.line, "message": self.message}


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)
    lines: int = 0
    token_percentiles: dict = field(default_factory=dict)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    def to_json(self) -> dict:
        return {
            "lines": self.lines,
            "errors": len(self.errors),
            "warnings": len(self.warnings),
            "token_percentiles": self.token_percentiles,
            "findings": [f.to_json() for f in self.findings],
        }


def validate_corpus(path: str | Path) -> ValidationReport:
    """Structural validation of an exported chat corpus."""
    report = ValidationReport()
    token_counts: list[int] = []
    prompt_ids: dict[str, int] = {}
    file_stage: str | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            report.lines += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                report.findings.append(Finding("error", lineno, f"invalid JSON: {exc}"))
                continue
            messages = obj.get("messages")
            if not isinstance(messages, list) or not messages:
                report.findings.append(Finding("error", lineno, "messages missing or empty"))
                continue
            roles = [m.get("role") for m in messages]
            expected = "user"
            body = roles[1:] if roles and roles[0] == "system" else roles
            ok_roles = True
            for role in body:
                if role != expected:
                    ok_roles = False
                    break
                expected = "assistant" if expected == "user" else "user"
            if not ok_roles:
                report.findings.append(Finding("error", lineno, f"illegal role sequence {roles}"))
            if roles and roles[-1] != "assistant":
                report.findings.append(Finding("error", lineno, "no assistant target"))
            for i, msg in enumerate(messages):
                content = msg.get("content")
                if not isinstance(content, str) or not content.strip():
                    report.findings.append(Finding("error", lineno, f"empty content in turn {i}"))
            meta = obj.get("meta", {})
            line_stage = meta.get("stage")
            # general-task samples ride inside an icldist-stage corpus
            normalized = "icldist" if line_stage == "icl_general" else line_stage
            if file_stage is None:
                file_stage = normalized
            elif normalized != file_stage:
                report.findings.append(
                    Finding("error", lineno, f"stage {line_stage!r} inconsistent with file stage {file_stage!r}")
                )
            pid = meta.get("prompt_id")
            if pid:
                if pid in prompt_ids:
                    report.findings.append(Finding(
                        "warning", lineno,
                        f"duplicate prompt_id {pid} (first seen at line {prompt_ids[pid]})",
                    ))
                else:
                    prompt_ids[pid] = lineno
            token_counts.append(sum(len(str(m.get("content", "")).split()) for m in messages))
    if token_counts:
        ordered = sorted(token_counts)
        qs = statistics.quantiles(ordered, n=100, method="inclusive") if len(ordered) > 1 else [ordered[0]] * 99
        report.token_percentiles = {
            "p50": qs[49], "p90": qs[89], "p99": qs[98], "max": ordered[-1],
        }
    return report
