#!/usr/bin/env python3
"""Benchmark the compiled fingerprint kernels against the pure-Python twin.

Micro-benchmarks call both kernel modules directly; the end-to-end dedup row
re-runs this script in a subprocess with SENTIDISTILL_PURE=1 so the whole
pipeline path (import-time backend selection included) is measured.

    python benchmarks/bench_simhash.py --records 20000 --tokens 40
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import time


def synth_corpus(n: int, tokens: int, seed: int = 0) -> list[list[str]]:
    rng = random.Random(seed)
    vocab = [f"w{i:03d}" for i in range(500)]
    return [[rng.choice(vocab) for _ in range(tokens)] for _ in range(n)]


def time_fingerprints(module, corpus) -> float:
    start = time.perf_counter()
    for tokens in corpus:
        module.fingerprint_tokens(tokens, 3, 0)
    return time.perf_counter() - start


def time_dedup(records: int, tokens: int) -> float:
    from sentidistill.dedup import dedup
    from sentidistill.records import TextRecord

    texts = [" ".join(t) for t in synth_corpus(records, tokens)]
    start = time.perf_counter()
    recs = [TextRecord.from_text(f"r{i}", "other", text)
            for i, text in enumerate(texts)]
    dedup(recs, 3)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=20_000)
    parser.add_argument("--tokens", type=int, default=40)
    parser.add_argument("--dedup-only", action="store_true",
                        help="internal: print the dedup wall time and exit")
    args = parser.parse_args()

    if args.dedup_only:
        print(json.dumps({"seconds": time_dedup(args.records, args.tokens)}))
        return

    from sentidistill.kernels import BACKEND, pure

    corpus = synth_corpus(args.records, args.tokens)
    rows = []

    pure_s = time_fingerprints(pure, corpus)
    rows.append(("fingerprint", "python", pure_s, args.records / pure_s))
    if BACKEND == "cython":
        from sentidistill.kernels import _simhash

        fast_s = time_fingerprints(_simhash, corpus)
        rows.append(("fingerprint", "cython", fast_s, args.records / fast_s))

    for env_value, label in (("1", "python"), ("0", "cython")):
        if label == "cython" and BACKEND != "cython":
            continue
        env = dict(os.environ, SENTIDISTILL_PURE=env_value)
        out = subprocess.run(
            [sys.executable, __file__, "--dedup-only",
             "--records", str(args.records), "--tokens", str(args.tokens)],
            env=env, capture_output=True, text=True, check=True,
        )
        seconds = json.loads(out.stdout)["seconds"]
        rows.append(("ingest+dedup", label, seconds, args.records / seconds))

    print(f"{'stage':<14}{'backend':<9}{'seconds':>9}{'records/s':>12}")
    for stage, backend, seconds, rate in rows:
        print(f"{stage:<14}{backend:<9}{seconds:>9.3f}{rate:>12.0f}")
    by_key = {(s, b): sec for s, b, sec, _ in rows}
    if ("fingerprint", "cython") in by_key:
        speedup = by_key[("fingerprint", "python")] / by_key[("fingerprint", "cython")]
        print(f"\nfingerprint speedup: {speedup:.1f}x")
    if ("ingest+dedup", "cython") in by_key:
        speedup = by_key[("ingest+dedup", "python")] / by_key[("ingest+dedup", "cython")]
        print(f"ingest+dedup speedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
