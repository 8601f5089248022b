"""Exact top-k cosine retrieval over chunk embeddings, with persistence.

A flat scan is exact and fast enough at standards-corpus scale (BLAS matmul
over a few hundred thousand rows); approximate indexes are a non-goal behind
the same search contract. Vectors are L2-normalized on insert and held as
little-endian float32, which makes the on-disk round-trip bitwise lossless.

File layout: magic ``VSTR``, format version u32 LE, dim u32 LE, count u64 LE,
then per record: chunk_id length u16 LE + UTF-8 bytes, metadata JSON length
u32 LE + UTF-8 bytes, dim x f32 LE vector values. Records are written in
ascending chunk_id order so identical stores serialize identically.

Concurrency: many readers or one writer. Insert/save/load take the writer
lock; search reads an immutable snapshot and never mutates the store.
"""

from __future__ import annotations

import json
import logging
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptStoreError, IntegrityError
from .embeddings import l2_normalize

logger = logging.getLogger(__name__)

MAGIC = b"VSTR"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class StoreRecord:
    chunk_id: str
    vector: np.ndarray
    metadata: dict = field(default_factory=dict)  # doc_id, char_span, text


@dataclass(frozen=True)
class RetrievalHit:
    chunk_id: str
    score: float
    metadata: dict

    @property
    def doc_id(self) -> str:
        return self.metadata.get("doc_id", "")

    @property
    def text(self) -> str:
        return self.metadata.get("text", "")


class VectorStore:
    def __init__(self, dim: int):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim
        self._records: dict[str, tuple[np.ndarray, dict]] = {}
        self._lock = threading.RLock()
        self._snapshot: tuple[list[str], np.ndarray, np.ndarray, list[dict]] | None = None

    def __len__(self) -> int:
        return len(self._records)

    def insert(self, records: list[StoreRecord]) -> int:
        """Upsert records; an existing chunk_id is replaced, size unchanged."""
        prepared = []
        for rec in records:
            vec = np.asarray(rec.vector, dtype=np.float64)
            if vec.shape != (self.dim,):
                raise IntegrityError(
                    f"record {rec.chunk_id!r} has dim {vec.shape}, store dim is {self.dim}"
                )
            normalized = l2_normalize(vec)
            if float(np.linalg.norm(normalized)) == 0.0:
                logger.warning("record %s has a zero vector", rec.chunk_id)
            prepared.append((rec.chunk_id, normalized.astype("<f4"), dict(rec.metadata)))
        with self._lock:
            for chunk_id, vec32, metadata in prepared:
                self._records[chunk_id] = (vec32, metadata)
            self._snapshot = None
        return len(records)

    def _get_snapshot(self):
        with self._lock:
            if self._snapshot is None:
                ids = sorted(self._records)
                if ids:
                    matrix = np.stack(
                        [self._records[i][0] for i in ids]
                    ).astype(np.float64)
                    norms = np.linalg.norm(matrix, axis=1)
                else:
                    matrix = np.zeros((0, self.dim))
                    norms = np.zeros(0)
                metas = [self._records[i][1] for i in ids]
                self._snapshot = (ids, matrix, norms, metas)
            return self._snapshot

    def search(self, query, k: int) -> list[RetrievalHit]:
        """Exact top-k by cosine; ties broken by ascending chunk_id."""
        if k <= 0:
            raise ValueError(f"k must be positive, got {k}")
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise IntegrityError(f"query dim {q.shape} does not match store dim {self.dim}")
        ids, matrix, norms, metas = self._get_snapshot()
        if not ids:
            return []

        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            scores = np.zeros(len(ids))
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                scores = (matrix @ q) / (norms * qnorm)
            scores = np.where(norms == 0.0, 0.0, scores)

        k = min(k, len(ids))
        # Partition by score, then widen to the full tied group at the k-th
        # value so the chunk_id tie-break stays exact.
        threshold = np.partition(scores, len(ids) - k)[len(ids) - k]
        candidates = np.flatnonzero(scores >= threshold)
        order = sorted(candidates, key=lambda i: (-scores[i], ids[i]))[:k]
        return [
            RetrievalHit(chunk_id=ids[i], score=float(scores[i]), metadata=metas[i])
            for i in order
        ]

    def records(self) -> list[StoreRecord]:
        """Records in ascending chunk_id order (float32 vectors, read-only)."""
        with self._lock:
            return [
                StoreRecord(chunk_id=cid, vector=vec, metadata=dict(meta))
                for cid, (vec, meta) in sorted(self._records.items())
            ]

    def save(self, path: str | Path) -> None:
        with self._lock:
            items = sorted(self._records.items())
            with open(path, "wb") as f:
                f.write(MAGIC)
                f.write(struct.pack("<I", FORMAT_VERSION))
                f.write(struct.pack("<I", self.dim))
                f.write(struct.pack("<Q", len(items)))
                for chunk_id, (vec32, metadata) in items:
                    cid = chunk_id.encode("utf-8")
                    if len(cid) > 0xFFFF:
                        raise ValueError(f"chunk_id too long to serialize: {chunk_id[:40]}...")
                    meta = json.dumps(
                        metadata, sort_keys=True, ensure_ascii=False, separators=(",", ":")
                    ).encode("utf-8")
                    f.write(struct.pack("<H", len(cid)))
                    f.write(cid)
                    f.write(struct.pack("<I", len(meta)))
                    f.write(meta)
                    f.write(vec32.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "VectorStore":
        def read_exactly(f, n: int) -> bytes:
            data = f.read(n)
            if len(data) != n:
                raise CorruptStoreError(f"{path}: truncated store file")
            return data

        with open(path, "rb") as f:
            if read_exactly(f, 4) != MAGIC:
                raise CorruptStoreError(f"{path}: bad magic bytes")
            (version,) = struct.unpack("<I", read_exactly(f, 4))
            if version != FORMAT_VERSION:
                raise CorruptStoreError(f"{path}: unsupported format version {version}")
            (dim,) = struct.unpack("<I", read_exactly(f, 4))
            if dim == 0:
                raise CorruptStoreError(f"{path}: zero dimension")
            (count,) = struct.unpack("<Q", read_exactly(f, 8))
            store = cls(dim)
            for _ in range(count):
                (cid_len,) = struct.unpack("<H", read_exactly(f, 2))
                chunk_id = read_exactly(f, cid_len).decode("utf-8")
                (meta_len,) = struct.unpack("<I", read_exactly(f, 4))
                try:
                    metadata = json.loads(read_exactly(f, meta_len).decode("utf-8"))
                except ValueError as exc:
                    raise CorruptStoreError(f"{path}: bad metadata JSON") from exc
                vec = np.frombuffer(read_exactly(f, 4 * dim), dtype="<f4").copy()
                store._records[chunk_id] = (vec, metadata)
            if f.read(1):
                raise CorruptStoreError(f"{path}: trailing bytes after last record")
        return store
