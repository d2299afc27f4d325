"""Content-addressed on-disk response cache.

One JSON file per cache key under a two-level fan-out directory, plus an
append-only index manifest.  Keys are hashes of (model, messages,
gen_params); the full key material is stored alongside the sample so hash
collisions are detected instead of silently returning a wrong response.
Writes are serialized and atomic (tmp file + rename); reads are lock-free.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path


class CacheCollisionError(Exception):
    pass


def cache_key(model: str, messages: list[dict], gen_params: dict) -> tuple[str, dict]:
    material = {"model": model, "messages": messages, "gen_params": gen_params}
    canonical = json.dumps(material, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest(), material


class ResponseCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / key[2:4] / f"{key}.json"

    @property
    def index_path(self) -> Path:
        return self.root / "index.jsonl"

    def get(self, key: str, key_material: dict, include_truncated: bool = False) -> dict | None:
        """Stored sample for the key, or None.

        Truncated (length-stopped) samples are skipped unless the caller opts
        in, so a larger max_tokens run naturally re-queries them.
        """
        path = self._path(key)
        if not path.exists():
            return None
        entry = json.loads(path.read_text(encoding="utf-8"))
        if entry["key_material"] != key_material:
            raise CacheCollisionError(f"cache key {key} maps to different request material")
        sample = entry["sample"]
        if sample.get("finish_reason") != "stop" and not include_truncated:
            return None
        return sample

    def put(self, key: str, key_material: dict, sample: dict, prompt_id: str | None = None) -> None:
        path = self._path(key)
        entry = {"cache_key": key, "key_material": key_material, "sample": sample}
        payload = json.dumps(entry, ensure_ascii=False)
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(payload, encoding="utf-8")
            os.replace(tmp, path)
            with open(self.index_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "cache_key": key,
                    "prompt_id": prompt_id,
                    "created_at": time.time(),
                }) + "\n")
