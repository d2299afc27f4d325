"""Exported-corpus loading: manifest checks, encoding, batching.

The trainer consumes the exporter's files exactly as written: ``train.jsonl``
(chat lines with an assistant turn last) plus ``manifest.json`` carrying the
corpus hash and the per-profile optimizer settings.  Hyperparameters are
always read from the manifest, never from trainer-side configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .tokenizer import IGNORE_INDEX, PAD, EncodedSample, encode_chat


class CorpusError(Exception):
    pass


@dataclass
class StageCorpus:
    stage: str
    samples: list[list[dict]]  # message lists
    manifest: dict

    def hyperparameters(self, profile: str) -> dict:
        try:
            return self.manifest["hyperparameters"][profile]
        except KeyError:
            known = sorted(self.manifest.get("hyperparameters", {}))
            raise CorpusError(f"profile {profile!r} not in manifest (known: {known})")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_stage(corpus_dir: str | Path, manifest_name: str = "manifest.json") -> StageCorpus:
    """Read one stage directory, enforcing the manifest's corpus hash."""
    corpus_dir = Path(corpus_dir)
    manifest_path = corpus_dir / manifest_name
    train_path = corpus_dir / "train.jsonl"
    if not manifest_path.exists():
        raise CorpusError(f"missing manifest: {manifest_path}")
    if not train_path.exists():
        raise CorpusError(f"missing corpus: {train_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    recorded = manifest["files"]["train.jsonl"]["sha256"]
    actual = _sha256(train_path)
    if actual != recorded:
        raise CorpusError(
            f"corpus/manifest hash mismatch for {train_path}: "
            f"manifest {recorded}, file {actual}"
        )
    if manifest.get("loss_on") != "assistant":
        raise CorpusError(f"unsupported loss_on: {manifest.get('loss_on')!r}")
    samples = []
    with open(train_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            messages = obj.get("messages")
            if not messages or messages[-1].get("role") != "assistant":
                raise CorpusError(f"{train_path}:{lineno}: no assistant target")
            samples.append(messages)
    if not samples:
        raise CorpusError(f"{train_path}: empty corpus")
    return StageCorpus(stage=manifest.get("stage", "?"), samples=samples, manifest=manifest)


def encode_samples(samples: list[list[dict]], max_len: int) -> list[EncodedSample]:
    return [encode_chat(messages, max_len) for messages in samples]


def collate(batch: list[EncodedSample]) -> tuple[torch.Tensor, torch.Tensor]:
    """Pad to the batch max; labels carry IGNORE_INDEX off the loss mask."""
    width = max(len(s.input_ids) for s in batch)
    input_ids = torch.full((len(batch), width), PAD, dtype=torch.long)
    labels = torch.full((len(batch), width), IGNORE_INDEX, dtype=torch.long)
    for row, sample in enumerate(batch):
        n = len(sample.input_ids)
        input_ids[row, :n] = torch.tensor(sample.input_ids, dtype=torch.long)
        labels[row, :n] = torch.tensor(sample.labels(), dtype=torch.long)
    return input_ids, labels


def reference_loss_mask(messages: list[dict], max_len: int) -> list[bool]:
    """Brute-force recomputation of the supervised positions (audit helper).

    Independently walks the serialization: a position is supervised iff it
    belongs to an assistant turn's content bytes or its end-of-turn token.
    """
    flags: list[bool] = [False]  # BOS
    for msg in messages:
        flags.append(False)  # role marker
        is_target = msg["role"] == "assistant"
        flags.extend([is_target] * len(msg["content"].encode("utf-8")))
        flags.append(is_target)  # end of turn
    if len(flags) > max_len:
        flags = flags[-max_len:]
    return flags
