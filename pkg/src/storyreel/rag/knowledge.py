"""Append-only knowledge store.

Documents are chunked at paragraph boundaries: adjacent paragraphs merge
until a chunk reaches 200 whitespace tokens, with a hard cap of 400; a single
paragraph longer than 400 tokens is split at token 400. Chunks are embedded
once at indexing time and never mutated afterwards.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from storyreel.clocks import SystemClock
from storyreel.errors import DuplicateDocError, EmptyTextError
from storyreel.rag.embedding import EMBEDDING_DIM, Embedding, embed
from storyreel.rag.records import KnowledgeEntry
from storyreel.rag.vector_store import VectorStore

CHUNK_TARGET_TOKENS = 200
CHUNK_CAP_TOKENS = 400


def _paragraph_pieces(paragraph: str) -> list[tuple[str, int]]:
    """Break an overlong paragraph into <=400-token pieces (text, token count)."""
    tokens = paragraph.split()
    pieces = []
    while len(tokens) > CHUNK_CAP_TOKENS:
        pieces.append((" ".join(tokens[:CHUNK_CAP_TOKENS]), CHUNK_CAP_TOKENS))
        tokens = tokens[CHUNK_CAP_TOKENS:]
    if tokens:
        pieces.append((paragraph if len(pieces) == 0 else " ".join(tokens), len(tokens)))
    return pieces


def chunk_document(text: str) -> list[str]:
    paragraphs = [p.strip() for p in text.replace("\r\n", "\n").split("\n\n")]
    pieces: list[tuple[str, int]] = []
    for paragraph in paragraphs:
        if paragraph:
            pieces.extend(_paragraph_pieces(paragraph))

    chunks: list[str] = []
    current: list[str] = []
    current_tokens = 0
    for piece_text, piece_tokens in pieces:
        if current and current_tokens + piece_tokens > CHUNK_CAP_TOKENS:
            chunks.append("\n\n".join(current))
            current, current_tokens = [], 0
        current.append(piece_text)
        current_tokens += piece_tokens
        if current_tokens >= CHUNK_TARGET_TOKENS:
            chunks.append("\n\n".join(current))
            current, current_tokens = [], 0
    if current:
        chunks.append("\n\n".join(current))
    return chunks


class KnowledgeStore(VectorStore):
    def __init__(
        self,
        path: Path | None = None,
        *,
        dim: int = EMBEDDING_DIM,
        clock=None,
    ) -> None:
        super().__init__(path, dim)
        self._clock = clock or SystemClock()
        self._entries: dict[str, KnowledgeEntry] = {}
        self._doc_ids: set[str] = set()
        self._replay()

    def _apply(self, record: dict) -> None:
        entry = KnowledgeEntry(
            id=record["id"],
            doc_id=record["doc_id"],
            chunk_index=record["chunk_index"],
            text=record["text"],
            tags=tuple(record["tags"]),
            embedding=Embedding(tuple(record["embedding"])),
            created_at=record["created_at"],
        )
        self._entries[entry.id] = entry
        self._doc_ids.add(entry.doc_id)
        self._track(entry.id, entry.embedding)

    def add_document(self, doc_id: str, text: str, tags: Sequence[str] = ()) -> list[KnowledgeEntry]:
        """Chunk, embed, and append one document. ``doc_id`` must be new."""
        if not text.strip():
            raise EmptyTextError("document text is empty", doc_id=doc_id)
        with self._lock:
            if doc_id in self._doc_ids:
                raise DuplicateDocError(f"document {doc_id!r} already indexed", doc_id=doc_id)
            chunks = chunk_document(text)
            if not chunks:
                raise EmptyTextError("document has no indexable paragraphs", doc_id=doc_id)
            now = self._clock.now()
            entries = []
            for index, chunk in enumerate(chunks):
                entry = KnowledgeEntry(
                    id=f"k:{doc_id}:{index}",
                    doc_id=doc_id,
                    chunk_index=index,
                    text=chunk,
                    tags=tuple(tags),
                    embedding=embed(chunk, self.dim),
                    created_at=now,
                )
                entries.append(entry)
            self._append_records(
                {
                    "id": e.id,
                    "doc_id": e.doc_id,
                    "chunk_index": e.chunk_index,
                    "text": e.text,
                    "tags": list(e.tags),
                    "embedding": list(e.embedding.values),
                    "created_at": e.created_at,
                }
                for e in entries
            )
            for entry in entries:
                self._entries[entry.id] = entry
                self._track(entry.id, entry.embedding)
            self._doc_ids.add(doc_id)
            return entries

    def get(self, entry_id: str) -> KnowledgeEntry:
        return self._entries[entry_id]

    def entries(self, tag: str | None = None) -> list[KnowledgeEntry]:
        with self._lock:
            all_entries = [self._entries[i] for i in self._ids]
        if tag is None:
            return all_entries
        return [e for e in all_entries if tag in e.tags]

    def has_document(self, doc_id: str) -> bool:
        with self._lock:
            return doc_id in self._doc_ids
