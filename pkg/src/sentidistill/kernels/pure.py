"""Pure-Python simhash kernels.

Semantics are identical to the compiled twin in ``_simhash.pyx``; this module
is the fallback selected at import time when the extension is not built (or
when ``SENTIDISTILL_PURE=1``).

Hash function: 64-bit FNV-1a over the UTF-8 bytes of each shingle, with the
state initialised to ``offset_basis XOR seed`` (seed 0 is plain FNV-1a).
"""

from __future__ import annotations

from typing import Sequence

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes, seed: int = 0) -> int:
    h = (FNV_OFFSET ^ seed) & _MASK64
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def fingerprint_tokens(tokens: Sequence[str], shingle_size: int, seed: int = 0) -> int:
    """64-bit simhash over overlapping word shingles.

    Texts with fewer than ``shingle_size`` tokens use the whole text as one
    shingle.  Bit ``i`` of the result is set iff at least half of the shingle
    hashes have bit ``i`` set (ties round up).
    """
    n = len(tokens)
    if n == 0:
        raise ValueError("empty token list")
    if n < shingle_size:
        windows = [" ".join(tokens)]
    else:
        windows = [" ".join(tokens[i : i + shingle_size]) for i in range(n - shingle_size + 1)]
    counts = [0] * 64
    for window in windows:
        h = fnv1a64(window.encode("utf-8"), seed)
        for bit in range(64):
            if (h >> bit) & 1:
                counts[bit] += 1
    total = len(windows)
    fp = 0
    for bit in range(64):
        if 2 * counts[bit] >= total:
            fp |= 1 << bit
    return fp


def hamming64(a: int, b: int) -> int:
    return ((a ^ b) & _MASK64).bit_count()


def hamming_within(fp: int, candidates: Sequence[int], threshold: int) -> int:
    """Index of the first candidate within ``threshold`` Hamming bits, else -1."""
    for i, cand in enumerate(candidates):
        if hamming64(fp, cand) <= threshold:
            return i
    return -1
