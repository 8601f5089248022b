"""Embedding backends, tokenization, and cosine similarity.

Two backends share one contract: an HTTP client for any service speaking the
common embeddings wire shape, and a hermetic hash-based embedder for tests
and desk-scale runs. The hash embedder maps equal tokens to identical unit
vectors and distinct tokens to near-orthogonal ones (|cos| ~ 1/sqrt(dim)),
which makes greedy token-matching scores behave like soft token overlap.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import threading

import numpy as np

from .errors import IntegrityError
from .transport import DEFAULT_IN_FLIGHT, RetryPolicy, post_json

logger = logging.getLogger(__name__)

EMBED_API_KEY_ENV = "SPECRAG_EMBED_API_KEY"

# Lowercased words; hyphenated compounds stay whole, as do dotted numbers
# (so a standard number like "23.002" is one token).
_TOKEN_RE = re.compile(r"\d+(?:\.\d+)+|[0-9a-z_]+(?:-[0-9a-z_]+)*")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def l2_normalize(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v
    return v / norm


def cosine(u, v) -> float:
    """u.v / (|u||v|), 0.0 when either norm is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise IntegrityError(f"cosine dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


class Embedder:
    """Shared batching/validation layer over a backend's raw embed call."""

    dim: int

    def _embed_batch(self, texts: list[str]) -> np.ndarray:
        raise NotImplementedError

    def embed_texts(self, texts: list[str]) -> list[np.ndarray]:
        """One L2-normalized vector per text, in input order."""
        if not texts:
            raise ValueError("texts must be non-empty")
        if any(not t for t in texts):
            raise ValueError("every text must be non-empty")
        matrix = self._embed_batch(list(texts))
        if matrix.shape != (len(texts), self.dim):
            raise IntegrityError(
                f"embedder returned shape {matrix.shape}, expected {(len(texts), self.dim)}"
            )
        out = []
        for row in matrix:
            normalized = l2_normalize(np.asarray(row, dtype=np.float64))
            if float(np.linalg.norm(normalized)) == 0.0:
                logger.warning("embedding is the zero vector; stored as-is")
            out.append(normalized)
        return out

    def embed_tokens(self, text: str) -> list[tuple[str, np.ndarray]]:
        """(token, vector) pairs; identical tokens share identical vectors."""
        if not text:
            raise ValueError("text must be non-empty")
        tokens = tokenize(text)
        if not tokens:
            return []
        unique = sorted(set(tokens))
        vectors = self.embed_texts(unique)
        by_token = dict(zip(unique, vectors))
        return [(t, by_token[t]) for t in tokens]


class HashEmbedder(Embedder):
    """Deterministic test embedder: token bytes -> seeded PRNG -> unit vector.

    A pure function of (case-folded token bytes, dim, seed); reproducible
    across processes and platforms. Text vectors are the normalized mean of
    the text's token vectors; a text with no tokens maps to the zero vector.
    """

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def token_vector(self, token: str) -> np.ndarray:
        with self._lock:
            cached = self._cache.get(token)
        if cached is not None:
            return cached
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        vec = l2_normalize(rng.standard_normal(self.dim))
        vec.setflags(write=False)
        with self._lock:
            self._cache[token] = vec
        return vec

    def _embed_batch(self, texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            tokens = tokenize(text)
            if not tokens:
                rows.append(np.zeros(self.dim))
                continue
            rows.append(np.mean([self.token_vector(t) for t in tokens], axis=0))
        return np.stack(rows)


class RemoteEmbedder(Embedder):
    """Client for an embeddings endpoint speaking the common wire shape.

    Request ``{"model": ..., "input": [...]}``; response rows under ``data``
    with ``index`` and ``embedding``. The API key is read from the
    SPECRAG_EMBED_API_KEY environment variable at call time.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        dim: int,
        *,
        timeout: float = 60.0,
        max_batch: int = 128,
        max_in_flight: int = DEFAULT_IN_FLIGHT,
        policy: RetryPolicy | None = None,
        client=None,
    ):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.timeout = timeout
        self.max_batch = max_batch
        self.policy = policy or RetryPolicy(max_attempts=4)
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._client = client  # injectable for tests

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(EMBED_API_KEY_ENV, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _embed_batch(self, texts: list[str]) -> np.ndarray:
        rows: list[list[float]] = []
        for start in range(0, len(texts), self.max_batch):
            batch = texts[start : start + self.max_batch]
            data = post_json(
                self.endpoint,
                {"model": self.model, "input": batch},
                headers=self._headers(),
                timeout=self.timeout,
                policy=self.policy,
                semaphore=self._semaphore,
                client=self._client,
            )
            try:
                items = sorted(data["data"], key=lambda item: item["index"])
                vectors = [item["embedding"] for item in items]
            except (KeyError, TypeError) as exc:
                raise IntegrityError(f"malformed embeddings response: {exc}") from exc
            if len(vectors) != len(batch):
                raise IntegrityError(
                    f"embeddings response has {len(vectors)} rows for {len(batch)} inputs"
                )
            rows.extend(vectors)
        matrix = np.asarray(rows, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.dim:
            raise IntegrityError(
                f"embedding dimension {matrix.shape[-1] if matrix.ndim == 2 else '?'} "
                f"does not match configured dim {self.dim}"
            )
        return matrix


def build_embedder(spec: dict) -> Embedder:
    """Construct an embedder from a config mapping (see PipelineConfig)."""
    kind = spec.get("kind", "deterministic")
    if kind == "deterministic":
        return HashEmbedder(dim=int(spec.get("dim", 256)), seed=int(spec.get("seed", 0)))
    if kind == "remote":
        return RemoteEmbedder(
            endpoint=spec["endpoint"],
            model=spec.get("model", ""),
            dim=int(spec["dim"]),
            timeout=float(spec.get("timeout", 60.0)),
        )
    raise ValueError(f"unknown embedder kind {kind!r}")
