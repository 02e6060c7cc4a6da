"""Uniform access to chat and embedding services.

Every natural-language dependency in the engine goes through the two small
interfaces here, so the whole pipeline runs offline against deterministic
stubs and recorded sessions. Request hashes are exact over the canonical
serialized request: editing a prompt intentionally invalidates recordings.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol

from .model import DebateError

log = logging.getLogger(__name__)

RECORDING_VERSION = 1


class ProviderError(DebateError):
    """A provider call failed after exhausting retries."""


class ReplayMissError(ProviderError):
    """Replay mode saw a request with no recorded entry left."""


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    temperature: float = 0.0
    seed: Optional[int] = None
    max_tokens: int = 4096
    #: stage/module that issued the request; logging metadata only, so it
    #: does not participate in the canonical form or the request hash
    issuer: str = ""

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be nonempty")

    def canonical(self) -> str:
        return json.dumps(
            {
                "kind": "chat",
                "prompt": self.prompt,
                "temperature": self.temperature,
                "seed": self.seed,
                "max_tokens": self.max_tokens,
            },
            sort_keys=True,
            ensure_ascii=False,
        )

    @property
    def request_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def chat_exchange(provider: "ChatProvider", request: ChatRequest) -> str:
    """Send one chat request, logging both directions with the issuer."""
    issuer = request.issuer or "unattributed"
    log.debug("chat -> [%s] %s", issuer, request.request_hash[:12])
    response = provider.chat(request)
    log.debug("chat <- [%s] %s (%d chars)", issuer, request.request_hash[:12],
              len(response))
    return response


def embed_request_hash(text: str, model_tag: str) -> str:
    canonical = json.dumps(
        {"kind": "embed", "model_tag": model_tag, "text": text},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ChatProvider(Protocol):
    def chat(self, request: ChatRequest) -> str: ...


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension embedding tagged with the model that produced it."""

    values: tuple[float, ...]
    model_tag: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("embedding must be non-empty")
        if all(v == 0.0 for v in self.values):
            raise ValueError("embedding must not be all-zero")

    @property
    def dimension(self) -> int:
        return len(self.values)


class Embedder(Protocol):
    model_tag: str

    def embed(self, text: str) -> EmbeddingVector: ...


# ---------------------------------------------------------------------------
# Deterministic stubs


class ScriptedChatProvider:
    """Serves pre-scripted replies keyed by request hash.

    Entries for a hash are consumed in order; a request with no entry left is
    a scripting error, never a silent default.
    """

    def __init__(self) -> None:
        self._entries: dict[str, list[str]] = {}
        self.calls = 0

    def script(self, request: ChatRequest, response: str) -> None:
        self._entries.setdefault(request.request_hash, []).append(response)

    def chat(self, request: ChatRequest) -> str:
        self.calls += 1
        queue = self._entries.get(request.request_hash)
        if not queue:
            raise ReplayMissError(
                f"no scripted reply for request hash {request.request_hash[:12]}"
            )
        return queue.pop(0)


class RoutedStubProvider:
    """Routes requests to handlers by prompt substring; first match wins."""

    def __init__(self) -> None:
        self._routes: list[tuple[str, Callable[[ChatRequest], str]]] = []
        self.calls = 0

    def route(self, marker: str, handler: Callable[[ChatRequest], str]) -> None:
        self._routes.append((marker, handler))

    def chat(self, request: ChatRequest) -> str:
        self.calls += 1
        for marker, handler in self._routes:
            if marker in request.prompt:
                return handler(request)
        raise ProviderError(
            f"no route matched prompt starting {request.prompt[:80]!r}"
        )


class HashEmbedder:
    """Pure hash-derived embeddings: equal texts map to equal vectors."""

    def __init__(self, dimension: int = 32, model_tag: str = "hash-32-v1") -> None:
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        self.dimension = dimension
        self.model_tag = model_tag

    def embed(self, text: str) -> EmbeddingVector:
        values: list[float] = []
        counter = 0
        data = text.encode("utf-8")
        while len(values) < self.dimension:
            digest = hashlib.sha256(data + b"\x00" + str(counter).encode()).digest()
            for i in range(0, 32, 4):
                raw = int.from_bytes(digest[i : i + 4], "big")
                values.append(raw / 2**31 - 1.0)  # maps to [-1, 1)
            counter += 1
        return EmbeddingVector(tuple(values[: self.dimension]), self.model_tag)


class GuardChatProvider:
    """Raises on any call; proves a code path performs no live requests."""

    def __init__(self, reason: str = "live provider call forbidden") -> None:
        self.reason = reason

    def chat(self, request: ChatRequest) -> str:
        raise ProviderError(self.reason)


# ---------------------------------------------------------------------------
# Record / replay


@dataclass
class RecordingEntry:
    request_hash: str
    response: str
    latency: float = 0.0
    kind: str = "chat"  # "chat" | "embed"


@dataclass
class ProviderRecording:
    """Append-only log of (request hash, response) pairs for one session."""

    provider_tag: str = "unknown"
    entries: list[RecordingEntry] = field(default_factory=list)

    def append(self, entry: RecordingEntry) -> None:
        self.entries.append(entry)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        lines = [
            json.dumps(
                {"schema_version": RECORDING_VERSION, "kind": "provider_recording",
                 "provider_tag": self.provider_tag},
                sort_keys=True,
            )
        ]
        for e in self.entries:
            lines.append(
                json.dumps(
                    {"request_hash": e.request_hash, "response": e.response,
                     "latency": e.latency, "kind": e.kind},
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> ProviderRecording:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ProviderError(f"empty recording file {path}")
        header = json.loads(lines[0])
        if header.get("schema_version") != RECORDING_VERSION:
            raise ProviderError(
                f"recording version mismatch: {header.get('schema_version')!r}"
            )
        rec = cls(provider_tag=header.get("provider_tag", "unknown"))
        for line in lines[1:]:
            if not line.strip():
                continue
            raw = json.loads(line)
            rec.append(RecordingEntry(raw["request_hash"], raw["response"],
                                      raw.get("latency", 0.0), raw.get("kind", "chat")))
        return rec


class RecordingChatProvider:
    """Wraps a live provider and logs every exchange into a recording."""

    def __init__(self, inner: ChatProvider, recording: ProviderRecording) -> None:
        self.inner = inner
        self.recording = recording
        self._lock = threading.Lock()

    def chat(self, request: ChatRequest) -> str:
        start = time.monotonic()
        response = self.inner.chat(request)
        latency = time.monotonic() - start
        with self._lock:
            self.recording.append(
                RecordingEntry(request.request_hash, response, latency, "chat")
            )
        return response


class RecordingEmbedder:
    def __init__(self, inner: Embedder, recording: ProviderRecording) -> None:
        self.inner = inner
        self.recording = recording
        self.model_tag = inner.model_tag
        self._lock = threading.Lock()

    def embed(self, text: str) -> EmbeddingVector:
        vec = self.inner.embed(text)
        with self._lock:
            self.recording.append(
                RecordingEntry(
                    embed_request_hash(text, self.model_tag),
                    json.dumps(list(vec.values)),
                    0.0,
                    "embed",
                )
            )
        return vec


class ReplayChatProvider:
    """Serves recorded responses by request hash, consuming entries FIFO.

    Order-independent across distinct requests; a hash with no entry left is
    a hard miss, never a fallthrough to a live provider.
    """

    def __init__(self, recording: ProviderRecording) -> None:
        self._queues: dict[str, list[str]] = {}
        for e in recording.entries:
            if e.kind == "chat":
                self._queues.setdefault(e.request_hash, []).append(e.response)
        self._lock = threading.Lock()
        self.calls = 0

    def chat(self, request: ChatRequest) -> str:
        with self._lock:
            self.calls += 1
            queue = self._queues.get(request.request_hash)
            if not queue:
                raise ReplayMissError(
                    f"replay miss for request hash {request.request_hash[:12]}"
                )
            return queue.pop(0)


class ReplayEmbedder:
    def __init__(self, recording: ProviderRecording, model_tag: str) -> None:
        self.model_tag = model_tag
        self._queues: dict[str, list[str]] = {}
        for e in recording.entries:
            if e.kind == "embed":
                self._queues.setdefault(e.request_hash, []).append(e.response)
        self._lock = threading.Lock()

    def embed(self, text: str) -> EmbeddingVector:
        key = embed_request_hash(text, self.model_tag)
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                raise ReplayMissError(f"replay miss for embed hash {key[:12]}")
            values = json.loads(queue.pop(0))
        return EmbeddingVector(tuple(values), self.model_tag)


# ---------------------------------------------------------------------------
# Retry and live access


class RetryingChatProvider:
    """Bounded retry wrapper; attempts are logged, failures re-raised."""

    def __init__(self, inner: ChatProvider, retries: int = 2) -> None:
        self.inner = inner
        self.retries = retries
        self.attempt_log: list[tuple[str, bool]] = []

    def chat(self, request: ChatRequest) -> str:
        last: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            try:
                response = self.inner.chat(request)
            except ReplayMissError:
                raise  # scripting errors are not transient
            except Exception as exc:  # noqa: BLE001 - provider faults vary
                last = exc
                self.attempt_log.append((request.request_hash, False))
                log.warning("chat attempt %d failed: %s", attempt + 1, exc)
                continue
            self.attempt_log.append((request.request_hash, True))
            return response
        raise ProviderError(f"chat failed after {self.retries + 1} attempts: {last}")


class OpenAICompatibleChatProvider:
    """Minimal chat client for OpenAI-compatible HTTP endpoints.

    Configuration comes from the caller; credentials only via environment
    (`DEBATEKIT_API_KEY`). Never exercised by the offline test suite.
    """

    def __init__(self, endpoint: str, model: str, timeout: float = 60.0) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.timeout = timeout

    def chat(self, request: ChatRequest) -> str:
        import os

        import httpx

        headers = {}
        api_key = os.environ.get("DEBATEKIT_API_KEY")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        resp = httpx.post(
            f"{self.endpoint}/chat/completions",
            json=payload,
            headers=headers,
            timeout=self.timeout,
        )
        resp.raise_for_status()
        data = resp.json()
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        if not text:
            raise ProviderError("provider returned empty text")
        return text
