"""Two-stage supervised fine-tuning driven by corpus manifests.

Stage sequencing: ``two_stage`` trains on the knowledge corpus first, then
the alignment corpus, with optimizer and schedule reset at the boundary;
``unified`` trains once on the shuffled concatenation; the ``*_only`` modes
run a single stage.

Optimizer settings (epochs, decay shape, warmup ratio, weight decay, Adam
betas, base learning rate, batch size) come from the manifest.  Desk scaling
adapts them to tiny models and corpora without touching the manifest: the
effective batch is capped for tiny datasets (gradient accumulation preserves
whichever effective batch applies) and the learning rate is multiplied by a
documented size ratio.  Both knobs are recorded in the metrics output.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from .data import StageCorpus, collate, encode_samples, load_stage
from .model import MODEL_PROFILES, ModelConfig, TinyCausalLM
from .tokenizer import IGNORE_INDEX

logger = logging.getLogger(__name__)

MODES = ("two_stage", "unified", "knowdist_only", "icldist_only")

# reference scale the manifest learning rates were written for
REFERENCE_PARAMS = 1.2e9


class TrainError(Exception):
    pass


@dataclass
class DeskScale:
    """Adaptation of manifest settings to desk-size models and corpora."""

    micro_batch: int = 4
    # cap on effective batch for tiny datasets: max(min_effective, n // 8)
    min_effective_batch: int = 8
    lr_scale: float | None = None  # None = auto by parameter-count ratio
    max_lr_scale: float = 200.0

    def effective_batch(self, manifest_batch: int, n_samples: int) -> int:
        cap = max(self.min_effective_batch, n_samples // 8)
        return min(manifest_batch, cap) if manifest_batch > n_samples else manifest_batch

    def learning_rate(self, base_lr: float, model_params: int) -> float:
        scale = self.lr_scale
        if scale is None:
            scale = min(self.max_lr_scale, REFERENCE_PARAMS / max(model_params, 1))
        return base_lr * scale


@dataclass
class TrainRun:
    mode: str
    corpus_root: Path
    model_profile: str
    out_dir: Path
    trainer_profile: str = "llama-1.2b"  # manifest hyperparameter block to use
    seed: int = 17
    max_len: int = 256
    desk: DeskScale = field(default_factory=DeskScale)
    manifest_name: str = "manifest.json"

    def stage_sequence(self) -> list[str]:
        if self.mode == "two_stage":
            return ["knowdist", "icldist"]
        if self.mode == "knowdist_only":
            return ["knowdist"]
        if self.mode == "icldist_only":
            return ["icldist"]
        if self.mode == "unified":
            return ["unified"]
        raise TrainError(f"unknown mode: {self.mode} (expected one of {MODES})")


def _make_schedule(optimizer, decay: str, warmup_steps: int, total_steps: int):
    def factor(step: int) -> float:
        if warmup_steps and step < warmup_steps:
            return (step + 1) / warmup_steps
        span = max(1, total_steps - warmup_steps)
        progress = min(1.0, (step - warmup_steps) / span)
        if decay == "cosine":
            return 0.5 * (1.0 + math.cos(math.pi * progress))
        if decay == "linear":
            return 1.0 - progress
        raise TrainError(f"unknown lr decay: {decay!r}")

    return torch.optim.lr_scheduler.LambdaLR(optimizer, factor)


def _batches(order: Sequence[int], encoded, micro_batch: int):
    for start in range(0, len(order), micro_batch):
        yield [encoded[i] for i in order[start : start + micro_batch]]


@dataclass
class StageResult:
    stage: str
    epoch_mean_losses: list[float]
    steps: int
    settings: dict


def train_stage(
    model: TinyCausalLM,
    corpus: StageCorpus,
    run: TrainRun,
    stage_label: str,
    metrics_fh,
    generator: torch.Generator,
) -> StageResult:
    settings = dict(corpus.hyperparameters(run.trainer_profile))
    encoded = encode_samples(corpus.samples, run.max_len)
    n = len(encoded)
    effective = run.desk.effective_batch(settings["batch_size"], n)
    micro = min(run.desk.micro_batch, effective)
    accum = max(1, math.ceil(effective / micro))
    lr = run.desk.learning_rate(settings["learning_rate"], model.parameter_count())
    epochs = settings["epochs"]
    steps_per_epoch = math.ceil(n / (micro * accum))
    total_steps = steps_per_epoch * epochs
    warmup_steps = int(round(settings["warmup_ratio"] * total_steps))

    # fresh optimizer per stage: state is reset at stage boundaries
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=lr,
        betas=(settings["adam_beta1"], settings["adam_beta2"]),
        weight_decay=settings["weight_decay"],
    )
    schedule = _make_schedule(optimizer, settings["lr_decay"], warmup_steps, total_steps)
    loss_fn = nn.CrossEntropyLoss(ignore_index=IGNORE_INDEX)

    applied = {
        **settings,
        "applied_learning_rate": lr,
        "effective_batch": effective,
        "micro_batch": micro,
        "grad_accum": accum,
        "steps_per_epoch": steps_per_epoch,
        "samples": n,
    }
    logger.info("stage %s: %s", stage_label, applied)

    epoch_means: list[float] = []
    global_step = 0
    for epoch in range(epochs):
        order = torch.randperm(n, generator=generator).tolist()
        losses: list[float] = []
        optimizer.zero_grad()
        micro_in_step = 0
        for batch in _batches(order, encoded, micro):
            input_ids, labels = collate(batch)
            logits = model(input_ids)
            loss = loss_fn(
                logits[:, :-1].reshape(-1, logits.size(-1)),
                labels[:, 1:].reshape(-1),
            )
            if not torch.isfinite(loss):
                raise TrainError(
                    f"non-finite loss at stage {stage_label} step {global_step}"
                )
            losses.append(loss.item())
            (loss / accum).backward()
            micro_in_step += 1
            if micro_in_step == accum:
                optimizer.step()
                schedule.step()
                optimizer.zero_grad()
                micro_in_step = 0
                global_step += 1
                metrics_fh.write(json.dumps({
                    "stage": stage_label, "epoch": epoch, "step": global_step,
                    "loss": losses[-1], "lr": schedule.get_last_lr()[0],
                }) + "\n")
        if micro_in_step:
            optimizer.step()
            schedule.step()
            optimizer.zero_grad()
            global_step += 1
        epoch_mean = sum(losses) / len(losses)
        epoch_means.append(epoch_mean)
        metrics_fh.write(json.dumps({
            "stage": stage_label, "epoch": epoch, "epoch_mean_loss": epoch_mean,
        }) + "\n")
        metrics_fh.flush()
        logger.info("stage %s epoch %d: mean loss %.4f", stage_label, epoch, epoch_mean)
    return StageResult(stage_label, epoch_means, global_step, applied)


def train(run: TrainRun) -> dict:
    """Execute the configured run; returns the summary written to disk."""
    torch.manual_seed(run.seed)
    generator = torch.Generator().manual_seed(run.seed)

    sequence = run.stage_sequence()
    if run.mode == "unified":
        knowdist = load_stage(run.corpus_root / "knowdist", run.manifest_name)
        icldist = load_stage(run.corpus_root / "icldist", run.manifest_name)
        mixed = knowdist.samples + icldist.samples
        order = torch.randperm(len(mixed), generator=generator).tolist()
        unified = StageCorpus(
            stage="unified",
            samples=[mixed[i] for i in order],
            manifest=icldist.manifest,  # alignment-stage settings govern the mix
        )
        corpora = {"unified": unified}
    else:
        corpora = {
            stage: load_stage(run.corpus_root / stage, run.manifest_name)
            for stage in sequence
        }
    for stage, corpus in corpora.items():
        if stage != "unified" and corpus.manifest.get("stage") != stage:
            raise TrainError(
                f"{stage}: manifest says stage {corpus.manifest.get('stage')!r}"
            )

    config = MODEL_PROFILES.get(run.model_profile)
    if config is None:
        raise TrainError(
            f"unknown model profile {run.model_profile!r} "
            f"(known: {sorted(MODEL_PROFILES)})"
        )
    config = ModelConfig(config.name, config.d_model, config.n_layers, config.n_heads,
                         max_seq=max(config.max_seq, run.max_len))
    model = TinyCausalLM(config)

    run.out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    results: list[StageResult] = []
    with open(run.out_dir / "metrics.jsonl", "w", encoding="utf-8") as metrics_fh:
        for stage in sequence:
            results.append(
                train_stage(model, corpora[stage], run, stage, metrics_fh, generator)
            )

    torch.save(model.state_dict(), run.out_dir / "model.pt")
    summary = {
        "mode": run.mode,
        "model_profile": run.model_profile,
        "model_parameters": model.parameter_count(),
        "trainer_profile": run.trainer_profile,
        "seed": run.seed,
        "stages": [
            {"stage": r.stage, "epoch_mean_losses": r.epoch_mean_losses,
             "steps": r.steps, "settings": r.settings}
            for r in results
        ],
        "wall_seconds": time.time() - started,
    }
    (run.out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    return summary
