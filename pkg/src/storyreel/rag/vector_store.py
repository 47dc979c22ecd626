"""Shared retrieval core for the append-only stores.

Both stores keep their entries in insertion order next to a lazily rebuilt
embedding matrix. Retrieval is an exact brute-force scan: score every entry,
keep those at or above ``min_score``, sort by score descending with ties
broken by ascending insertion order, return at most ``k``.
"""

from __future__ import annotations

import json
import math
import threading
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from storyreel.errors import StoreFailureError
from storyreel.rag.embedding import Embedding, embed
from storyreel.rag.records import RetrievalHit

DEFAULT_K = 3
DEFAULT_MIN_SCORE = 0.25


def _score_rows(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    # fsum keeps each dot product exactly rounded. Summation-order noise from
    # a plain matmul can split two mathematically equal scores by one ulp,
    # which would turn the documented insertion-order tie-break into a
    # platform accident.
    products = matrix * query
    scores = np.fromiter(
        (math.fsum(row) for row in products.tolist()), dtype=np.float64, count=len(products)
    )
    return np.clip(scores, -1.0, 1.0)


def rank_hits(
    ids: Sequence[str],
    scores: Sequence[float],
    k: int,
    min_score: float,
) -> list[RetrievalHit]:
    order = sorted(
        (i for i in range(len(ids)) if scores[i] >= min_score),
        key=lambda i: (-scores[i], i),
    )
    return [
        RetrievalHit(entry_id=ids[i], score=float(scores[i]), rank=rank + 1)
        for rank, i in enumerate(order[:k])
    ]


class VectorStore:
    """Base: in-memory entries + embedding matrix + append-only JSONL log."""

    def __init__(self, path: Path | None, dim: int) -> None:
        self.dim = dim
        self._path = Path(path) if path is not None else None
        self._lock = threading.RLock()
        self._ids: list[str] = []
        self._vectors: list[tuple[float, ...]] = []
        self._matrix: np.ndarray | None = None

    # -- persistence -------------------------------------------------------

    def _replay(self) -> None:
        if self._path is None or not self._path.exists():
            return
        with self._path.open("r", encoding="utf-8") as fh:
            for raw in fh:
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    record = json.loads(raw)
                except json.JSONDecodeError:
                    # A torn final line from an interrupted write is dropped;
                    # anything before it is intact because writes are whole lines.
                    continue
                self._apply(record)

    def _apply(self, record: dict) -> None:  # pragma: no cover - overridden
        raise NotImplementedError

    def _append_records(self, records: Iterable[dict]) -> None:
        if self._path is None:
            return
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with self._path.open("a", encoding="utf-8") as fh:
                for record in records:
                    fh.write(json.dumps(record, sort_keys=True, ensure_ascii=True) + "\n")
        except OSError as exc:
            raise StoreFailureError(f"cannot append to {self._path}: {exc}") from exc

    # -- index maintenance --------------------------------------------------

    def _track(self, entry_id: str, embedding: Embedding) -> None:
        self._ids.append(entry_id)
        self._vectors.append(embedding.values)
        self._matrix = None

    def _replace_vector(self, entry_id: str, embedding: Embedding) -> None:
        idx = self._ids.index(entry_id)
        self._vectors[idx] = embedding.values
        self._matrix = None

    def _matrix_view(self) -> np.ndarray:
        if self._matrix is None:
            if self._vectors:
                self._matrix = np.asarray(self._vectors, dtype=np.float64)
            else:
                self._matrix = np.empty((0, self.dim), dtype=np.float64)
        return self._matrix

    # -- retrieval -----------------------------------------------------------

    def retrieve(
        self,
        query: str,
        k: int = DEFAULT_K,
        min_score: float = DEFAULT_MIN_SCORE,
        entry_filter: Callable[[str], bool] | None = None,
    ) -> list[RetrievalHit]:
        query_vec = embed(query, self.dim).as_array()
        with self._lock:
            ids = list(self._ids)
            matrix = self._matrix_view()
        if not ids:
            return []
        scores = _score_rows(matrix, query_vec)
        if entry_filter is not None:
            keep = [i for i in range(len(ids)) if entry_filter(ids[i])]
            ids = [ids[i] for i in keep]
            scores = scores[keep] if keep else np.empty(0)
        return rank_hits(ids, scores, k, min_score)

    def __len__(self) -> int:
        with self._lock:
            return len(self._ids)


def retrieve(
    store: VectorStore,
    query: str,
    k: int = DEFAULT_K,
    min_score: float = DEFAULT_MIN_SCORE,
) -> list[RetrievalHit]:
    """Module-level convenience wrapper over ``store.retrieve``."""
    return store.retrieve(query, k=k, min_score=min_score)
