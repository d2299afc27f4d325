"""Benchmark decontamination via hashed word n-gram overlap.

The index holds every n-gram (default n=8) of every benchmark dev/test text,
hashed with the same seeded 64-bit hash used for fingerprinting.  A corpus
record is dropped iff any of its n-grams is present in the index.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import kernels
from .records import TextRecord, normalize_text

logger = logging.getLogger(__name__)

DEFAULT_NGRAM_SIZE = 8


class DecontamError(Exception):
    pass


@dataclass(frozen=True)
class ContamEntry:
    record_id: str
    ngram_hash: int

    def to_json(self) -> dict:
        return {"record_id": self.record_id, "ngram_hash": f"{self.ngram_hash:016x}"}


@dataclass
class ContaminationIndex:
    ngram_size: int
    ngrams: set[int] = field(default_factory=set)
    source_counts: dict[str, int] = field(default_factory=dict)

    def add_text(self, text: str, source: str) -> int:
        added = 0
        for h in text_ngram_hashes(normalize_text(text), self.ngram_size):
            self.ngrams.add(h)
            added += 1
        self.source_counts[source] = self.source_counts.get(source, 0) + added
        return added

    def __contains__(self, ngram_hash: int) -> bool:
        return ngram_hash in self.ngrams


def text_ngram_hashes(norm_text: str, n: int, seed: int = kernels.DEFAULT_SEED) -> Iterable[int]:
    """Hashes of all word n-grams of a normalized text (none if < n tokens)."""
    tokens = norm_text.split()
    for i in range(len(tokens) - n + 1):
        yield kernels.fnv1a64(" ".join(tokens[i : i + n]).encode("utf-8"), seed)


def build_index(
    texts_by_source: Iterable[tuple[str, str]], ngram_size: int = DEFAULT_NGRAM_SIZE
) -> ContaminationIndex:
    index = ContaminationIndex(ngram_size=ngram_size)
    for source, text in texts_by_source:
        index.add_text(text, source)
    return index


def build_index_from_dir(bench_dir: str | Path, ngram_size: int = DEFAULT_NGRAM_SIZE) -> ContaminationIndex:
    """Index all ``dev.jsonl``/``test.jsonl`` files found under a benchmark dir.

    Layout is ``<bench_dir>/<task>/{dev,test}.jsonl`` with a "text" field per
    line (the canonical task schema).
    """
    bench_dir = Path(bench_dir)
    index = ContaminationIndex(ngram_size=ngram_size)
    n_files = 0
    for split in ("dev", "test"):
        for path in sorted(bench_dir.glob(f"*/{split}.jsonl")):
            n_files += 1
            dataset = path.parent.name
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        index.add_text(json.loads(line)["text"], dataset)
    if n_files == 0:
        raise DecontamError(f"no dev/test splits found under {bench_dir}")
    logger.info(
        "contamination index: %d n-grams from %d files", len(index.ngrams), n_files
    )
    return index


def decontaminate(
    records: Sequence[TextRecord], index: ContaminationIndex
) -> tuple[list[TextRecord], list[ContamEntry]]:
    """Drop records sharing any n-gram with the index; log the first hit."""
    if not index.ngrams:
        raise DecontamError("decontamination index not built")
    kept: list[TextRecord] = []
    dropped: list[ContamEntry] = []
    for rec in records:
        hit = None
        for h in text_ngram_hashes(rec.norm_text, index.ngram_size):
            if h in index.ngrams:
                hit = h
                break
        if hit is None:
            kept.append(rec)
        else:
            dropped.append(ContamEntry(rec.id, hit))
    return kept, dropped
