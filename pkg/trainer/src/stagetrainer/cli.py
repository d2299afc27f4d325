"""Trainer CLI."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from .train import MODES, DeskScale, TrainRun, train


@click.group()
def main() -> None:
    """Desk-scale SFT over exported stage corpora."""


@main.command("train")
@click.option("--corpus-dir", required=True, type=click.Path(exists=True),
              help="Directory holding <stage>/train.jsonl + <stage>/manifest.json.")
@click.option("--manifest", default="manifest.json", show_default=True,
              help="Manifest filename inside each stage directory.")
@click.option("--model", "model_profile", default="tiny-1m", show_default=True)
@click.option("--profile", "trainer_profile", default="llama-1.2b", show_default=True,
              help="Which manifest hyperparameter block to apply.")
@click.option("--mode", type=click.Choice(MODES), default="two_stage", show_default=True)
@click.option("--seed", default=17, show_default=True)
@click.option("--max-len", default=256, show_default=True)
@click.option("--micro-batch", default=4, show_default=True)
@click.option("--lr-scale", default=None, type=float,
              help="Override the automatic desk learning-rate multiplier.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--verbose", "-v", is_flag=True)
def train_cmd(corpus_dir, manifest, model_profile, trainer_profile, mode, seed, max_len,
              micro_batch, lr_scale, out_dir, verbose):
    """Run manifest-driven SFT over exported stage corpora."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    run = TrainRun(
        mode=mode,
        corpus_root=Path(corpus_dir),
        model_profile=model_profile,
        trainer_profile=trainer_profile,
        out_dir=Path(out_dir),
        seed=seed,
        max_len=max_len,
        desk=DeskScale(micro_batch=micro_batch, lr_scale=lr_scale),
        manifest_name=manifest,
    )
    summary = train(run)
    click.echo(json.dumps({
        "stages": {s["stage"]: s["epoch_mean_losses"] for s in summary["stages"]},
        "model_parameters": summary["model_parameters"],
        "out": out_dir,
    }))


if __name__ == "__main__":
    main()
