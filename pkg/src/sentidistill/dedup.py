"""Near-duplicate removal over simhash fingerprints.

A sequential first-occurrence-wins scan: a record is dropped iff some earlier
*kept* record's fingerprint lies within the Hamming threshold.  Candidate
lookup splits the 64 fingerprint bits into ``threshold + 1`` blocks; by the
pigeonhole principle two fingerprints within the threshold share at least one
exact block, so the bucketed scan returns exactly the all-pairs result.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from . import kernels
from .records import TextRecord

MAX_THRESHOLD = 16


@dataclass(frozen=True)
class DropEntry:
    dropped_id: str
    kept_id: str
    distance: int

    def to_json(self) -> dict:
        return {"dropped_id": self.dropped_id, "kept_id": self.kept_id, "distance": self.distance}


def block_bounds(threshold: int) -> list[tuple[int, int]]:
    """(offset, width) pairs splitting 64 bits into threshold+1 blocks."""
    n_blocks = threshold + 1
    base, rem = divmod(64, n_blocks)
    bounds = []
    offset = 0
    for i in range(n_blocks):
        width = base + (1 if i < rem else 0)
        bounds.append((offset, width))
        offset += width
    return bounds


def _block_keys(fp: int, bounds: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    return [(i, (fp >> off) & ((1 << width) - 1)) for i, (off, width) in enumerate(bounds)]


def dedup(
    records: Sequence[TextRecord], hamming_threshold: int
) -> tuple[list[TextRecord], list[DropEntry]]:
    """First-occurrence-wins dedup; equals the all-pairs sequential scan.

    The drop log references the *earliest* kept record within the threshold,
    which makes the output independent of bucket iteration order.
    """
    if not 0 <= hamming_threshold <= MAX_THRESHOLD:
        raise ValueError(f"hamming_threshold must be in [0, {MAX_THRESHOLD}]")
    bounds = block_bounds(hamming_threshold)
    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    kept: list[TextRecord] = []
    kept_fps: list[int] = []
    dropped: list[DropEntry] = []
    for rec in records:
        fp = rec.fingerprint
        best: tuple[int, int] | None = None  # (kept position, distance)
        seen: set[int] = set()
        for key in _block_keys(fp, bounds):
            for pos in buckets.get(key, ()):
                if pos in seen:
                    continue
                seen.add(pos)
                dist = kernels.hamming64(fp, kept_fps[pos])
                if dist <= hamming_threshold and (best is None or pos < best[0]):
                    best = (pos, dist)
        if best is not None:
            dropped.append(DropEntry(rec.id, kept[best[0]].id, best[1]))
            continue
        pos = len(kept)
        kept.append(rec)
        kept_fps.append(fp)
        for key in _block_keys(fp, bounds):
            buckets[key].append(pos)
    return kept, dropped
