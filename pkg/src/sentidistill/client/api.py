"""HTTP client for chat-completions endpoints with retries, caching, and
bounded-concurrency collection.

Wire protocol (request/response fixtures in docs/wire_protocol.md):

  POST {endpoint}/v1/chat/completions
  {"model": ..., "messages": [{"role", "content"}, ...],
   "temperature": ..., "max_tokens": ..., "stop": [...]}

  response: {"choices": [{"message": {"content": ...},
                          "finish_reason": "stop"|"length"}],
             "usage": {"prompt_tokens": n, "completion_tokens": m}}
"""

from __future__ import annotations

import json
import logging
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import requests

from ..prompts.spec import PromptSpec
from .cache import ResponseCache, cache_key

logger = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "TEACHER_API_KEY"
DEFAULT_MAX_ATTEMPTS = 5
DEFAULT_BACKOFF_BASE = 1.0
DEFAULT_BACKOFF_CAP = 30.0
DEFAULT_TIMEOUT = 120.0

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class TeacherClientError(Exception):
    pass


class PermanentError(TeacherClientError):
    def __init__(self, prompt_id: str, status: int, body: str):
        super().__init__(f"{prompt_id}: HTTP {status}: {body[:200]}")
        self.prompt_id = prompt_id
        self.status = status
        self.body_excerpt = body[:500]


class TransientExhausted(TeacherClientError):
    pass


class ProtocolError(TeacherClientError):
    pass


class EndpointDown(TeacherClientError):
    pass


@dataclass
class GenRequest:
    prompt_id: str
    endpoint: str
    model: str
    messages: list[dict]
    gen_params: dict

    @property
    def cache_key(self) -> tuple[str, dict]:
        return cache_key(self.model, self.messages, self.gen_params)


@dataclass
class DistillSample:
    prompt_id: str
    messages: list[dict]
    response: str
    finish_reason: str
    usage: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    timestamp: float = 0.0

    @property
    def truncated(self) -> bool:
        return self.finish_reason != "stop"

    def to_json(self) -> dict:
        return {
            "prompt_id": self.prompt_id,
            "messages": self.messages,
            "response": self.response,
            "finish_reason": self.finish_reason,
            "usage": self.usage,
            "provenance": self.provenance,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DistillSample":
        return cls(
            prompt_id=obj["prompt_id"],
            messages=obj["messages"],
            response=obj["response"],
            finish_reason=obj["finish_reason"],
            usage=obj.get("usage", {}),
            provenance=obj.get("provenance", {}),
            timestamp=obj.get("timestamp", 0.0),
        )


@dataclass
class CollectStats:
    total: int = 0
    completed: int = 0
    cached: int = 0
    failed: int = 0
    skipped_done: int = 0


def _completions_url(endpoint: str) -> str:
    endpoint = endpoint.rstrip("/")
    if endpoint.endswith("/chat/completions"):
        return endpoint
    return endpoint + "/v1/chat/completions"


class TeacherClient:
    def __init__(
        self,
        endpoint: str,
        model: str,
        cache_dir: str | Path,
        api_key_env: str = DEFAULT_API_KEY_ENV,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        backoff_base: float = DEFAULT_BACKOFF_BASE,
        backoff_cap: float = DEFAULT_BACKOFF_CAP,
        timeout: float = DEFAULT_TIMEOUT,
        include_truncated: bool = False,
        sleeper: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self.endpoint = endpoint
        self.url = _completions_url(endpoint)
        self.model = model
        self.cache = ResponseCache(cache_dir)
        self.api_key = os.environ.get(api_key_env)
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self.timeout = timeout
        self.include_truncated = include_truncated
        self.sleeper = sleeper
        self.rng = rng or random.Random()
        self.sleeps_recorded: list[float] = []
        self._session = requests.Session()

    # -- single request ----------------------------------------------------

    def request_for(self, spec: PromptSpec) -> GenRequest:
        return GenRequest(
            prompt_id=spec.prompt_id,
            endpoint=self.endpoint,
            model=self.model,
            messages=spec.messages,
            gen_params=spec.gen_params.to_json(),
        )

    def complete(self, spec: PromptSpec) -> DistillSample:
        """Resolve one prompt, via cache when possible."""
        request = self.request_for(spec)
        key, material = request.cache_key
        cached = self.cache.get(key, material, include_truncated=self.include_truncated)
        if cached is not None:
            sample = DistillSample.from_json(cached)
            sample.provenance = spec.provenance
            return sample
        sample = self._post_with_retries(request)
        sample.provenance = spec.provenance
        self.cache.put(key, material, sample.to_json(), prompt_id=spec.prompt_id)
        return sample

    def _post_with_retries(self, request: GenRequest) -> DistillSample:
        payload = {
            "model": request.model,
            "messages": request.messages,
            "temperature": request.gen_params["temperature"],
            "max_tokens": request.gen_params["max_tokens"],
        }
        if request.gen_params.get("stop"):
            payload["stop"] = request.gen_params["stop"]
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self._session.post(self.url, json=payload, headers=headers,
                                          timeout=self.timeout)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = exc
                self._backoff(attempt)
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = TransientExhausted(f"HTTP {resp.status_code}")
                self._backoff(attempt)
                continue
            if resp.status_code != 200:
                raise PermanentError(request.prompt_id, resp.status_code, resp.text)
            return self._parse_response(request, resp)
        raise TransientExhausted(
            f"{request.prompt_id}: retry budget exhausted after {self.max_attempts} attempts "
            f"(last error: {last_error})"
        )

    def _parse_response(self, request: GenRequest, resp) -> DistillSample:
        try:
            body = resp.json()
            choice = body["choices"][0]
            content = choice["message"]["content"]
            finish_reason = choice.get("finish_reason", "stop")
        except (json.JSONDecodeError, requests.exceptions.JSONDecodeError,
                KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"{request.prompt_id}: malformed response: {exc}") from exc
        if not isinstance(content, str):
            raise ProtocolError(f"{request.prompt_id}: non-string content")
        usage = body.get("usage", {}) or {}
        return DistillSample(
            prompt_id=request.prompt_id,
            messages=request.messages,
            response=content,
            finish_reason=finish_reason,
            usage={
                "prompt_tokens": usage.get("prompt_tokens", 0),
                "completion_tokens": usage.get("completion_tokens", 0),
            },
            timestamp=time.time(),
        )

    def _backoff(self, attempt: int) -> None:
        if attempt >= self.max_attempts:
            return
        # full jitter: uniform over (0, min(cap, base * 2^(attempt-1)))
        ceiling = min(self.backoff_cap, self.backoff_base * (2 ** (attempt - 1)))
        delay = self.rng.uniform(0, ceiling)
        self.sleeps_recorded.append(delay)
        self.sleeper(delay)

    # -- batch collection --------------------------------------------------

    def probe(self) -> None:
        """Fail fast when the endpoint is unreachable (any HTTP answer is fine)."""
        try:
            self._session.get(self.endpoint, timeout=min(self.timeout, 10.0))
        except requests.RequestException as exc:
            raise EndpointDown(f"endpoint {self.endpoint} unreachable: {exc}") from exc

    def _is_cached(self, spec: PromptSpec) -> bool:
        key, material = self.request_for(spec).cache_key
        return self.cache.get(key, material, include_truncated=self.include_truncated) is not None

    def collect(
        self,
        specs: Sequence[PromptSpec] | Iterable[PromptSpec],
        out_path: str | Path,
        failures_path: str | Path,
        max_in_flight: int = 8,
    ) -> CollectStats:
        """Resolve a prompt stream into a corpus file.

        Output rows appear in input order regardless of completion order.
        Prompts already present in the output file are skipped, so a killed
        run can be restarted; the cache guarantees no prompt is sent over the
        network twice.  Failures go to a sidecar file and never abort the run.
        """
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        specs = list(specs)
        stats = CollectStats(total=len(specs))
        out_path, failures_path = Path(out_path), Path(failures_path)
        done_ids = _existing_prompt_ids(out_path)
        stats.skipped_done = sum(1 for s in specs if s.prompt_id in done_ids)
        todo = [s for s in specs if s.prompt_id not in done_ids]
        if any(not self._is_cached(s) for s in todo):
            self.probe()
        journal = Journal(out_path.with_suffix(out_path.suffix + ".journal"), stats)
        with open(out_path, "a", encoding="utf-8") as out_fh, \
                open(failures_path, "a", encoding="utf-8") as fail_fh, \
                ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            window: list[tuple[PromptSpec, bool, object]] = []

            def drain_one() -> None:
                spec, cached_before, future = window.pop(0)
                try:
                    sample = future.result()
                except TeacherClientError as exc:
                    stats.failed += 1
                    fail_fh.write(json.dumps({
                        "prompt_id": spec.prompt_id,
                        "error_type": type(exc).__name__,
                        "detail": str(exc),
                    }, ensure_ascii=False) + "\n")
                    fail_fh.flush()
                else:
                    stats.completed += 1
                    if cached_before:
                        stats.cached += 1
                    out_fh.write(json.dumps(sample.to_json(), ensure_ascii=False) + "\n")
                    out_fh.flush()
                journal.update()

            for spec in todo:
                if len(window) >= max_in_flight:
                    drain_one()
                window.append((spec, self._is_cached(spec), pool.submit(self.complete, spec)))
            while window:
                drain_one()
        journal.update(force=True)
        return stats


class Journal:
    """Progress journal rewritten alongside the output file."""

    def __init__(self, path: Path, stats: CollectStats, every: int = 20):
        self.path = path
        self.stats = stats
        self.every = every
        self._since = 0

    def update(self, force: bool = False) -> None:
        self._since += 1
        if not force and self._since < self.every:
            return
        self._since = 0
        self.path.write_text(json.dumps({
            "total": self.stats.total,
            "completed": self.stats.completed,
            "failed": self.stats.failed,
            "skipped_done": self.stats.skipped_done,
            "updated_at": time.time(),
        }) + "\n", encoding="utf-8")


def _existing_prompt_ids(path: Path) -> set[str]:
    ids: set[str] = set()
    if path.exists():
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    try:
                        ids.add(json.loads(line)["prompt_id"])
                    except (json.JSONDecodeError, KeyError):
                        continue
    return ids


def read_samples(path: str | Path) -> list[DistillSample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(DistillSample.from_json(json.loads(line)))
    return out
