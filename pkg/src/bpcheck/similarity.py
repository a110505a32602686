"""Phrase similarity providers backing ``match``."""
from __future__ import annotations

import math
import threading
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import normalize_label

DEFAULT_EPSILON = 0.5


class SimilarityServiceError(RuntimeError):
    """The remote embedding service failed; distinct from "no match"."""


def _tokens(phrase: str) -> list[str]:
    return phrase.split()


def _trigrams(phrase: str) -> Counter:
    padded = f" {phrase} "
    return Counter(padded[i : i + 3] for i in range(len(padded) - 2))


def _cosine(u: Sequence[float], v: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(u, v))
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(y * y for y in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def _clip(score: float) -> float:
    return min(1.0, max(0.0, score))


def lexical_similarity(x: str, y: str) -> float:
    """0.5 * token Dice + 0.5 * character-trigram cosine on normalized phrases."""
    x, y = normalize_label(x), normalize_label(y)
    if x == y:
        return 1.0
    tx, ty = set(_tokens(x)), set(_tokens(y))
    dice = 2 * len(tx & ty) / (len(tx) + len(ty)) if tx or ty else 0.0
    gx, gy = _trigrams(x), _trigrams(y)
    dot = sum(gx[g] * gy[g] for g in gx.keys() & gy.keys())
    norm = math.sqrt(sum(c * c for c in gx.values())) * math.sqrt(sum(c * c for c in gy.values()))
    tri = dot / norm if norm else 0.0
    return _clip(0.5 * dice + 0.5 * tri)


class SimilarityProvider:
    """Base class: symmetric, cached similarity in [0, 1] with ``sim(x, x) == 1``."""

    mode = "abstract"

    def __init__(self) -> None:
        self._cache: dict[tuple[str, str], float] = {}
        self._lock = threading.Lock()

    def _score(self, x: str, y: str) -> float:
        raise NotImplementedError

    def prefetch(self, phrases: Iterable[str]) -> None:
        """Hook for providers that benefit from batching; no-op by default."""

    def sim(self, x: str, y: str) -> float:
        x, y = normalize_label(x), normalize_label(y)
        if x == y:
            return 1.0
        key = (x, y) if x <= y else (y, x)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        score = _clip(self._score(*key))
        with self._lock:
            self._cache[key] = score
        return score

    def match(self, x_model: str, x_log: str, epsilon: float = DEFAULT_EPSILON) -> bool:
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        return self.sim(x_model, x_log) > epsilon

    def describe(self) -> dict:
        return {"mode": self.mode}


class LexicalSimilarity(SimilarityProvider):
    mode = "lexical-fallback"

    def _score(self, x: str, y: str) -> float:
        return lexical_similarity(x, y)


class VectorFileSimilarity(SimilarityProvider):
    """Cosine similarity over phrase vectors read from ``phrase<TAB>v1 v2 ... vd`` lines.

    Unknown phrases fall back to the mean of their known word vectors; if a
    phrase has no known words at all, the lexical measure is used for the pair.
    """

    mode = "vector-file"

    def __init__(self, path: str | Path):
        super().__init__()
        self.path = str(path)
        self.vectors: dict[str, list[float]] = {}
        dim: Optional[int] = None
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    phrase, values = line.rstrip("\n").split("\t")
                    vec = [float(v) for v in values.split()]
                except ValueError:
                    raise ValueError(f"{path}:{n}: expected 'phrase<TAB>v1 v2 ... vd'") from None
                if dim is None:
                    dim = len(vec)
                elif len(vec) != dim:
                    raise ValueError(f"{path}:{n}: vector has {len(vec)} components, expected {dim}")
                self.vectors[normalize_label(phrase)] = vec
        self.dim = dim or 0

    def vector(self, phrase: str) -> Optional[list[float]]:
        phrase = normalize_label(phrase)
        if phrase in self.vectors:
            return self.vectors[phrase]
        known = [self.vectors[w] for w in _tokens(phrase) if w in self.vectors]
        if not known:
            return None
        return [sum(col) / len(known) for col in zip(*known)]

    def _score(self, x: str, y: str) -> float:
        vx, vy = self.vector(x), self.vector(y)
        if vx is None or vy is None:
            return lexical_similarity(x, y)
        return _cosine(vx, vy)

    def describe(self) -> dict:
        return {"mode": self.mode, "path": self.path}


class RemoteEmbeddingSimilarity(SimilarityProvider):
    """Embeds phrases through ``POST {"phrases": [...]}`` -> ``{"vectors": [[...], ...]}``.

    Cosine similarity is computed locally; vectors are cached per phrase and at
    most ``max_in_flight`` requests run concurrently.
    """

    mode = "remote-service"

    def __init__(self, endpoint: str, timeout: float = 10.0, max_in_flight: int = 4, client=None):
        super().__init__()
        import httpx

        self.endpoint = endpoint
        self.timeout = timeout
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._vectors: dict[str, list[float]] = {}
        self._vec_lock = threading.Lock()

    def _embed(self, phrases: list[str]) -> None:
        import httpx

        with self._slots:
            try:
                response = self._client.post(self.endpoint, json={"phrases": phrases})
                response.raise_for_status()
                vectors = response.json()["vectors"]
            except (httpx.HTTPError, KeyError, TypeError, ValueError) as exc:
                raise SimilarityServiceError(f"embedding service {self.endpoint} failed: {exc}") from exc
        if len(vectors) != len(phrases):
            raise SimilarityServiceError(
                f"embedding service returned {len(vectors)} vectors for {len(phrases)} phrases"
            )
        with self._vec_lock:
            for phrase, vec in zip(phrases, vectors):
                self._vectors[phrase] = [float(v) for v in vec]

    def prefetch(self, phrases: Iterable[str]) -> None:
        wanted = sorted({normalize_label(p) for p in phrases} - self._vectors.keys())
        if wanted:
            self._embed(wanted)

    def _score(self, x: str, y: str) -> float:
        self.prefetch([x, y])
        return _cosine(self._vectors[x], self._vectors[y])

    def describe(self) -> dict:
        return {"mode": self.mode, "endpoint": self.endpoint, "timeout": self.timeout}


def match(provider: SimilarityProvider, x_model: str, x_log: str, epsilon: float = DEFAULT_EPSILON) -> bool:
    return provider.match(x_model, x_log, epsilon)
