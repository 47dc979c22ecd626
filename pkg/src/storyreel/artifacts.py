"""Content-addressed artifact store.

Blobs live at ``artifacts/<hash[:2]>/<hash[2:]>/blob`` where the name is the
SHA-256 of the bytes. Writes are idempotent (same bytes, same address), and
reads verify the digest so silent corruption surfaces as ``IntegrityError``.
An append-only index log records media type, size, and creation time per hash.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from storyreel.clocks import SystemClock
from storyreel.domain.model import ArtifactRef, MediaType
from storyreel.errors import IntegrityError, NotFoundError, StoreFailureError


@dataclass(frozen=True)
class ArtifactStat:
    content_hash: str
    media_type: MediaType
    size: int
    created_at: int


class ArtifactStore:
    def __init__(self, root: Path, clock=None) -> None:
        self.root = Path(root)
        self._clock = clock or SystemClock()
        self._lock = threading.Lock()
        self._index: dict[str, ArtifactStat] = {}
        self._index_path = self.root / "index.log"
        self._load_index()

    def _load_index(self) -> None:
        if not self._index_path.exists():
            return
        with self._index_path.open("r", encoding="utf-8") as fh:
            for raw in fh:
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    rec = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                stat = ArtifactStat(
                    content_hash=rec["content_hash"],
                    media_type=MediaType(rec["media_type"]),
                    size=rec["size"],
                    created_at=rec["created_at"],
                )
                self._index[stat.content_hash] = stat

    def _blob_path(self, content_hash: str) -> Path:
        return self.root / content_hash[:2] / content_hash[2:] / "blob"

    def put(self, data: bytes, media_type: MediaType) -> ArtifactRef:
        digest = hashlib.sha256(data).hexdigest()
        ref = ArtifactRef(digest, media_type)
        with self._lock:
            if digest in self._index:
                return ref
            blob = self._blob_path(digest)
            try:
                blob.parent.mkdir(parents=True, exist_ok=True)
                tmp = blob.with_suffix(".tmp")
                tmp.write_bytes(data)
                os.replace(tmp, blob)
                stat = ArtifactStat(digest, media_type, len(data), self._clock.now())
                with self._index_path.open("a", encoding="utf-8") as fh:
                    fh.write(
                        json.dumps(
                            {
                                "content_hash": stat.content_hash,
                                "media_type": stat.media_type.value,
                                "size": stat.size,
                                "created_at": stat.created_at,
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )
            except OSError as exc:
                raise StoreFailureError(f"artifact write failed: {exc}") from exc
            self._index[digest] = stat
        return ref

    def get(self, ref: ArtifactRef | str) -> bytes:
        content_hash = ref.content_hash if isinstance(ref, ArtifactRef) else ref
        blob = self._blob_path(content_hash)
        if not blob.exists():
            raise NotFoundError(f"artifact {content_hash} not found", content_hash=content_hash)
        data = blob.read_bytes()
        actual = hashlib.sha256(data).hexdigest()
        if actual != content_hash:
            raise IntegrityError(
                f"artifact {content_hash} failed digest verification",
                expected=content_hash,
                actual=actual,
            )
        return data

    def stat(self, content_hash: str) -> ArtifactStat:
        with self._lock:
            if content_hash not in self._index:
                raise NotFoundError(f"artifact {content_hash} not indexed", content_hash=content_hash)
            return self._index[content_hash]

    def exists(self, content_hash: str) -> bool:
        with self._lock:
            return content_hash in self._index

    def put_json(self, value) -> ArtifactRef:
        from storyreel import canonical

        return self.put(canonical.dump_bytes(value), MediaType.JSON)

    def put_text(self, text: str) -> ArtifactRef:
        return self.put(text.encode("utf-8"), MediaType.TEXT)

    def get_json(self, ref: ArtifactRef | str):
        return json.loads(self.get(ref))

    def get_text(self, ref: ArtifactRef | str) -> str:
        return self.get(ref).decode("utf-8")
