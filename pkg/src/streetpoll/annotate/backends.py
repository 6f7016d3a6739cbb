"""Annotation backends: mock, scripted, cassette replay and live HTTP.

Any object with a ``backend_id`` and ``complete(turns) -> str`` works as a
backend. Live traffic is refused whenever offline mode is on (the
``STREETPOLL_OFFLINE`` environment variable, set by the test suite).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from ..captions import ProcessedTranscript, RawCaptionDocument
from ..corpus import Candidate
from .mock import mock_rows, mock_rows_raw
from .parse import render_reply, render_rows
from .ratelimit import TokenBucket
from .types import (
    AnnotationRow,
    BackendTransportError,
    ChatTurn,
    LiveBackendDisabled,
    MissingFixture,
)

log = logging.getLogger(__name__)

OFFLINE_ENV = "STREETPOLL_OFFLINE"
BACKEND_KINDS = ("mock", "replay", "live")
DEFAULT_LIVE_RATE = 3.0


def offline_mode() -> bool:
    return os.environ.get(OFFLINE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


def fetch_url(url: str, timeout: float = 60.0) -> str:
    """Download a caption file given by direct URL."""
    if offline_mode():
        raise LiveBackendDisabled(f"network access disabled ({OFFLINE_ENV} is set): {url}")
    with urllib.request.urlopen(url, timeout=timeout) as resp:  # noqa: S310 - user-supplied corpus URL
        return resp.read().decode("utf-8")


class Backend(Protocol):
    backend_id: str

    def complete(self, turns: Sequence[ChatTurn]) -> str: ...


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"
    model_name: str = "mock"
    endpoint: str | None = None
    max_continuations: int = 3
    rate_limit: float | None = None
    concurrency_cap: int = 1
    api_key_env: str = "OPENAI_API_KEY"
    cassette: str | None = None
    error_rate: float = 0.0
    rows_per_turn: int | None = None
    timeout: float = 120.0
    retries: int = 2
    strict: bool = False

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"backend kind must be one of {BACKEND_KINDS}, got {self.kind!r}")
        if self.max_continuations < 0:
            raise ValueError("max_continuations must be >= 0")
        if self.concurrency_cap < 1:
            raise ValueError("concurrency_cap must be >= 1")
        if self.kind == "live" and not self.endpoint:
            raise ValueError("live backend requires an endpoint")
        if self.kind == "replay" and not self.cassette:
            raise ValueError("replay backend requires a cassette path")

    @property
    def effective_rate_limit(self) -> float | None:
        if self.rate_limit is not None:
            return self.rate_limit if self.rate_limit > 0 else None
        return DEFAULT_LIVE_RATE if self.kind == "live" else None


def request_digest(model_name: str, turns: Sequence[ChatTurn]) -> str:
    payload = {"model": model_name, "messages": [t.as_message() for t in turns]}
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Cassette:
    """Append-only JSON-lines log of ``{"request": digest, "response": text}``.

    On duplicate digests the first recorded response wins.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, str] = {}
        if self.path.is_file():
            for lineno, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    self._records.setdefault(rec["request"], rec["response"])
                except (json.JSONDecodeError, KeyError, TypeError):
                    raise ValueError(f"{self.path}:{lineno}: bad cassette record") from None

    def get(self, digest: str) -> str | None:
        return self._records.get(digest)

    def __contains__(self, digest: str) -> bool:
        return digest in self._records

    def __len__(self) -> int:
        return len(self._records)

    def append(self, digest: str, response: str) -> None:
        with self._lock:
            if digest in self._records:
                return
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"request": digest, "response": response}, ensure_ascii=False) + "\n")
            self._records[digest] = response


class MockBackend:
    """Serves precomputed rows, at most ``rows_per_turn`` per reply."""

    def __init__(self, rows: Sequence[AnnotationRow], rows_per_turn: int | None = None, backend_id: str = "mock"):
        if rows_per_turn is not None and rows_per_turn < 1:
            raise ValueError("rows_per_turn must be >= 1")
        self.rows = list(rows)
        self.rows_per_turn = rows_per_turn
        self.backend_id = backend_id

    @classmethod
    def for_transcript(
        cls,
        transcript: ProcessedTranscript | RawCaptionDocument,
        error_rate: float = 0.0,
        seed: int = 0,
        overrides: Mapping[Candidate, Candidate] | None = None,
        rows_per_turn: int | None = None,
    ) -> "MockBackend":
        if isinstance(transcript, RawCaptionDocument):
            rows = mock_rows_raw(transcript, error_rate, seed, overrides)
        else:
            rows = mock_rows(transcript, error_rate, seed, overrides)
        return cls(rows, rows_per_turn)

    def complete(self, turns: Sequence[ChatTurn]) -> str:
        turn = sum(1 for t in turns if t.role == "user") - 1
        k = self.rows_per_turn or max(len(self.rows), 1)
        chunk = self.rows[turn * k : (turn + 1) * k]
        if turn == 0:
            return render_reply(len(self.rows), chunk)
        return render_rows(chunk)


class ScriptedBackend:
    """Returns canned replies in order, then repeats ``fallback``."""

    def __init__(self, replies: Sequence[str], fallback: str = "", backend_id: str = "scripted"):
        self.replies = list(replies)
        self.fallback = fallback
        self.backend_id = backend_id
        self.calls = 0

    def complete(self, turns: Sequence[ChatTurn]) -> str:
        i = self.calls
        self.calls += 1
        return self.replies[i] if i < len(self.replies) else self.fallback


class ReplayBackend:
    def __init__(self, cassette: Cassette, model_name: str):
        self.cassette = cassette
        self.model_name = model_name
        self.backend_id = f"replay:{model_name}"

    def complete(self, turns: Sequence[ChatTurn]) -> str:
        digest = request_digest(self.model_name, turns)
        reply = self.cassette.get(digest)
        if reply is None:
            raise MissingFixture(f"cassette {self.cassette.path} has no response for request {digest[:12]}")
        return reply


def build_payload(model_name: str, turns: Sequence[ChatTurn]) -> dict:
    return {"model": model_name, "messages": [t.as_message() for t in turns]}


def extract_content(body: Mapping) -> str:
    """Assistant text from a chat-completion style response body."""
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise BackendTransportError(f"unexpected response shape: {json.dumps(body)[:200]}") from None
    if not isinstance(content, str):
        raise BackendTransportError("response content is not text")
    return content


class LiveBackend:
    """HTTP chat-completion client; every exchange is appended to the cassette."""

    def __init__(
        self,
        config: BackendConfig,
        limiter: TokenBucket | None = None,
        cassette: Cassette | None = None,
        opener: Callable | None = None,
    ):
        if offline_mode():
            raise LiveBackendDisabled(f"live backend refused: {OFFLINE_ENV} is set")
        if config.kind != "live" or not config.endpoint:
            raise ValueError("LiveBackend needs a live config with an endpoint")
        api_key = os.environ.get(config.api_key_env)
        if not api_key:
            raise ValueError(f"credential environment variable {config.api_key_env} is not set")
        self.config = config
        self._api_key = api_key
        self.limiter = limiter
        self.cassette = cassette
        self._open = opener or urllib.request.urlopen
        self.backend_id = f"live:{config.model_name}"

    def complete(self, turns: Sequence[ChatTurn]) -> str:
        data = json.dumps(build_payload(self.config.model_name, turns)).encode("utf-8")
        req = urllib.request.Request(
            self.config.endpoint,
            data=data,
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {self._api_key}"},
            method="POST",
        )
        last_exc: Exception | None = None
        for attempt in range(self.config.retries + 1):
            if self.limiter is not None:
                self.limiter.acquire()
            try:
                with self._open(req, timeout=self.config.timeout) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                break
            except (urllib.error.URLError, TimeoutError, json.JSONDecodeError, OSError) as exc:
                last_exc = exc
                log.warning("backend request failed (attempt %d): %s", attempt + 1, exc)
                if attempt < self.config.retries:
                    time.sleep(min(2**attempt, 30))
        else:
            raise BackendTransportError(f"backend unreachable: {last_exc}")
        text = extract_content(body)
        if self.cassette is not None:
            self.cassette.append(request_digest(self.config.model_name, turns), text)
        return text


def make_backend(
    config: BackendConfig,
    transcript: ProcessedTranscript | RawCaptionDocument | None = None,
    seed: int = 0,
    overrides: Mapping[Candidate, Candidate] | None = None,
    limiter: TokenBucket | None = None,
    cassette: Cassette | None = None,
) -> Backend:
    if config.kind == "mock":
        if transcript is None:
            raise ValueError("mock backend needs the transcript it simulates")
        return MockBackend.for_transcript(transcript, config.error_rate, seed, overrides, config.rows_per_turn)
    if config.kind == "replay":
        return ReplayBackend(cassette or Cassette(config.cassette), config.model_name)
    if cassette is None and config.cassette:
        cassette = Cassette(config.cassette)
    return LiveBackend(config, limiter, cassette)
