"""Deterministic hash embedder.

The test-mode embedder must be bitwise stable across machines, so it avoids
anything platform dependent:

* lowercase the text and take maximal runs of ASCII ``[a-z0-9]`` as tokens;
* hash each token with 64-bit FNV-1a;
* add +1 or -1 (bit 6 of the hash clear means +1) to component ``hash mod D``;
* L2-normalize the accumulated vector.

If every bucket cancels out to zero (possible when opposite-signed tokens
collide), the embedding falls back to a unit vector on the bucket of the
whole joined token string, keeping the result well defined and deterministic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from storyreel.errors import DimensionMismatchError, EmptyTextError

EMBEDDING_DIM = 64

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def fnv1a64_text(text: str) -> int:
    return fnv1a64(text.encode("utf-8"))


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Embedding:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def embed(text: str, dim: int = EMBEDDING_DIM) -> Embedding:
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError("text has no alphanumeric tokens", text=text[:80])
    counts = [0] * dim
    for token in tokens:
        h = fnv1a64(token.encode("utf-8"))
        sign = 1 if ((h >> 6) & 1) == 0 else -1
        counts[h % dim] += sign
    norm_sq = sum(c * c for c in counts)
    if norm_sq == 0:
        values = [0.0] * dim
        values[fnv1a64(" ".join(tokens).encode("utf-8")) % dim] = 1.0
        return Embedding(tuple(values))
    norm = math.sqrt(norm_sq)
    return Embedding(tuple(c / norm for c in counts))


def cosine(a: Embedding, b: Embedding) -> float:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"embedding dims differ: {a.dim} vs {b.dim}")
    score = float(np.dot(a.as_array(), b.as_array()))
    return max(-1.0, min(1.0, score))
