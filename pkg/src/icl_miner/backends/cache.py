"""Persistent response cache keyed by request fingerprints.

One JSON file per fingerprint under the cache root. Writes go through a
temp file plus atomic rename so concurrent workers never observe partial
entries; corrupt entries are treated as misses with a warning.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

from .base import (
    EmbeddingBackend,
    EmbeddingVector,
    GenerationRequest,
    LLMBackend,
    ScoredCompletion,
)

log = logging.getLogger(__name__)


def fingerprint(backend_id: str, model_id: str, payload: dict) -> str:
    """SHA-256 over the canonical JSON of (backend, model, request fields)."""
    canonical = json.dumps(
        {"backend": backend_id, "model": model_id, "request": payload},
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ResponseCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        try:
            raw = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        except OSError as exc:
            log.warning("cache read failed for %s: %s", key, exc)
            return None
        try:
            return json.loads(raw)
        except ValueError:
            log.warning("corrupt cache entry %s treated as a miss", key)
            return None

    def put(self, key: str, payload: dict) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise


class CachingLLM:
    """LLM wrapper that serves repeated requests from the cache."""

    def __init__(self, backend: LLMBackend, cache: ResponseCache):
        self.backend = backend
        self.cache = cache
        self.backend_id = backend.backend_id
        self.model_id = backend.model_id

    def generate(self, request: GenerationRequest) -> list[ScoredCompletion]:
        key = fingerprint(self.backend_id, self.model_id, request.to_payload())
        hit = self.cache.get(key)
        if hit is not None:
            return [
                ScoredCompletion(c["text"], float(c["score"]))
                for c in hit["completions"]
            ]
        completions = self.backend.generate(request)
        self.cache.put(
            key,
            {
                "completions": [
                    {"text": c.text, "score": c.sequence_score} for c in completions
                ]
            },
        )
        return completions


class CachingEmbedder:
    """Embedding wrapper with the same persistent-cache discipline."""

    def __init__(self, backend: EmbeddingBackend, cache: ResponseCache):
        self.backend = backend
        self.cache = cache
        self.backend_id = backend.backend_id
        self.model_id = backend.model_id

    def embed(self, text: str) -> EmbeddingVector:
        key = fingerprint(self.backend_id, self.model_id, {"embed": text})
        hit = self.cache.get(key)
        if hit is not None:
            return EmbeddingVector(tuple(float(v) for v in hit["vector"]))
        vector = self.backend.embed(text)
        self.cache.put(key, {"vector": list(vector.values)})
        return vector
