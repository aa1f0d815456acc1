"""Core generation/embedding types shared by all backend implementations."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence, TypeVar

from ..errors import BackendError


@dataclass(frozen=True)
class DecodingMode:
    """One of random_sampling(temperature, seed), greedy, or beam(width)."""

    kind: str
    temperature: float = 1.0
    seed: int = 0
    width: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("random_sampling", "greedy", "beam"):
            raise BackendError(f"unknown decoding kind {self.kind!r}")
        if self.kind == "random_sampling" and self.temperature <= 0:
            raise BackendError("random_sampling needs temperature > 0")
        if self.kind == "beam" and self.width < 1:
            raise BackendError("beam width must be >= 1")

    @classmethod
    def random_sampling(cls, temperature: float = 1.0, seed: int = 0) -> "DecodingMode":
        return cls(kind="random_sampling", temperature=temperature, seed=seed)

    @classmethod
    def greedy(cls) -> "DecodingMode":
        return cls(kind="greedy")

    @classmethod
    def beam(cls, width: int) -> "DecodingMode":
        return cls(kind="beam", width=width)

    def to_payload(self) -> dict:
        payload: dict = {"kind": self.kind}
        if self.kind == "random_sampling":
            payload["temperature"] = self.temperature
            payload["seed"] = self.seed
        elif self.kind == "beam":
            payload["width"] = self.width
        return payload


@dataclass(frozen=True)
class StopCondition:
    """Client-side completion truncation.

    `at_whitespace` implements the stop-at-space rule for single-word
    generation: leading whitespace is ignored, the text is cut at the first
    internal whitespace. `substrings` cut at the earliest occurrence of any
    entry; the stop text itself is excluded from the result.
    """

    substrings: tuple[str, ...] = ()
    at_whitespace: bool = False

    @classmethod
    def whitespace(cls) -> "StopCondition":
        return cls(at_whitespace=True)

    @classmethod
    def at(cls, *substrings: str) -> "StopCondition":
        return cls(substrings=tuple(substrings))

    def truncate(self, text: str) -> str:
        if self.at_whitespace:
            parts = text.split()
            return parts[0] if parts else ""
        cut = len(text)
        for stop in self.substrings:
            pos = text.find(stop)
            if pos != -1:
                cut = min(cut, pos)
        return text[:cut].strip()

    def to_payload(self) -> dict:
        return {"substrings": list(self.substrings), "at_whitespace": self.at_whitespace}


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    num_samples: int = 1
    mode: DecodingMode = DecodingMode.greedy()
    stop: StopCondition = StopCondition()
    max_new_tokens: int = 64

    def __post_init__(self) -> None:
        if not self.prompt:
            raise BackendError("prompt must be non-empty")
        if self.num_samples < 1:
            raise BackendError("num_samples must be >= 1")
        if self.mode.kind == "greedy" and self.num_samples != 1:
            raise BackendError("greedy decoding yields exactly one sample")
        if self.max_new_tokens < 1:
            raise BackendError("max_new_tokens must be >= 1")

    def to_payload(self) -> dict:
        return {
            "prompt": self.prompt,
            "num_samples": self.num_samples,
            "mode": self.mode.to_payload(),
            "stop": self.stop.to_payload(),
            "max_new_tokens": self.max_new_tokens,
        }


@dataclass(frozen=True)
class ScoredCompletion:
    text: str
    sequence_score: float


def finalize_completions(
    raw: Sequence[ScoredCompletion], request: GenerationRequest
) -> list[ScoredCompletion]:
    """Apply the stop condition, drop empties, sort by descending score.

    Sorting is stable, so ties keep generation order. At most
    request.num_samples completions are returned.
    """
    truncated = [
        ScoredCompletion(request.stop.truncate(c.text), c.sequence_score) for c in raw
    ]
    kept = [c for c in truncated if c.text]
    kept.sort(key=lambda c: -c.sequence_score)
    return kept[: request.num_samples]


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise BackendError("embedding vector must be non-empty")
        if any(not math.isfinite(v) for v in self.values):
            raise BackendError("embedding vector contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    if u.dim != v.dim:
        raise BackendError(f"dim mismatch: {u.dim} vs {v.dim}")
    dot = math.fsum(a * b for a, b in zip(u.values, v.values))
    norm_u = math.sqrt(math.fsum(a * a for a in u.values))
    norm_v = math.sqrt(math.fsum(b * b for b in v.values))
    if norm_u == 0.0 or norm_v == 0.0:
        raise BackendError("cosine undefined for a zero vector")
    return max(-1.0, min(1.0, dot / (norm_u * norm_v)))


class LLMBackend(Protocol):
    backend_id: str
    model_id: str

    def generate(self, request: GenerationRequest) -> list[ScoredCompletion]: ...


class EmbeddingBackend(Protocol):
    backend_id: str
    model_id: str

    def embed(self, text: str) -> EmbeddingVector: ...


class SimilarityScorer:
    """sim(x, y) = cosine(embed(x), embed(y)), with embeddings memoized."""

    def __init__(self, embedder: EmbeddingBackend):
        self.embedder = embedder
        self._memo: dict[str, EmbeddingVector] = {}

    def embedding(self, text: str) -> EmbeddingVector:
        if not text:
            raise BackendError("cannot embed empty text")
        cached = self._memo.get(text)
        if cached is None:
            cached = self.embedder.embed(text)
            self._memo[text] = cached
        return cached

    def sim(self, x: str, y: str) -> float:
        return cosine(self.embedding(x), self.embedding(y))


T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1
) -> list[R]:
    """Order-preserving map; max_workers bounds in-flight backend requests."""
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))
