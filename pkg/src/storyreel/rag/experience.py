"""Evolving experience store.

Routing a feedback record either updates the single most similar entry of the
same category (when its cosine reaches the update threshold) or inserts a new
entry. Updates rewrite the entry text in place via a synthesizer, bump the
version, append to provenance, and archive the superseded text in a sidecar
history log. The whole retrieve-synthesize-commit span holds the writer lock,
and a synthesizer failure leaves both log files byte-identical.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Protocol

from storyreel.clocks import SystemClock
from storyreel.errors import NotFoundError, SynthesizerFailureError
from storyreel.rag.embedding import EMBEDDING_DIM, Embedding, embed
from storyreel.rag.records import (
    ExperienceCategory,
    ExperienceEntry,
    ExperienceUpdate,
    FeedbackRecord,
)
from storyreel.rag.vector_store import VectorStore

UPDATE_THRESHOLD = 0.60


class ExperienceSynthesizer(Protocol):
    def create(self, feedback_text: str) -> str:
        """Distill a brand-new experience text from feedback."""

    def merge(self, feedback_text: str, existing_text: str) -> str:
        """Fold feedback into an existing experience, returning the new text."""


class PassthroughSynthesizer:
    """Deterministic default: create keeps the feedback verbatim; merge keeps
    the existing lesson and appends the new feedback after a separator."""

    def create(self, feedback_text: str) -> str:
        return feedback_text.strip()

    def merge(self, feedback_text: str, existing_text: str) -> str:
        addition = feedback_text.strip()
        if addition and addition in existing_text:
            return existing_text
        return f"{existing_text} | {addition}"


class ExperienceStore(VectorStore):
    def __init__(
        self,
        path: Path | None = None,
        history_path: Path | None = None,
        *,
        dim: int = EMBEDDING_DIM,
        clock=None,
        update_threshold: float = UPDATE_THRESHOLD,
    ) -> None:
        super().__init__(path, dim)
        self.update_threshold = update_threshold
        self._clock = clock or SystemClock()
        self._history_path = Path(history_path) if history_path else None
        self._entries: dict[str, ExperienceEntry] = {}
        self._versions: dict[str, list[tuple[int, str, str]]] = {}
        self._next_seq = 1
        self._replay()

    # -- log replay ----------------------------------------------------------

    def _apply(self, record: dict) -> None:
        if record["op"] == "insert":
            entry = ExperienceEntry(
                id=record["id"],
                category=ExperienceCategory(record["category"]),
                text=record["text"],
                embedding=Embedding(tuple(record["embedding"])),
                version=1,
                provenance=(record["feedback_id"],),
                created_at=record["created_at"],
                updated_at=record["created_at"],
            )
            self._entries[entry.id] = entry
            self._versions[entry.id] = [(1, entry.text, record["feedback_id"])]
            self._track(entry.id, entry.embedding)
            self._next_seq += 1
        elif record["op"] == "update":
            entry = self._entries[record["id"]]
            updated = replace(
                entry,
                text=record["text"],
                embedding=Embedding(tuple(record["embedding"])),
                version=entry.version + 1,
                provenance=entry.provenance + (record["feedback_id"],),
                updated_at=record["updated_at"],
            )
            self._entries[entry.id] = updated
            self._versions[entry.id].append((updated.version, updated.text, record["feedback_id"]))
            self._replace_vector(entry.id, updated.embedding)

    def _append_history(self, record: dict) -> None:
        if self._history_path is None:
            return
        import json

        self._history_path.parent.mkdir(parents=True, exist_ok=True)
        with self._history_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=True) + "\n")

    # -- evolution -----------------------------------------------------------

    def update_experience(
        self,
        feedback: FeedbackRecord,
        synthesizer: ExperienceSynthesizer | None = None,
    ) -> ExperienceUpdate:
        synthesizer = synthesizer or PassthroughSynthesizer()
        with self._lock:
            hits = self.retrieve(
                feedback.text,
                k=1,
                min_score=self.update_threshold,
                entry_filter=lambda eid: self._entries[eid].category == feedback.category,
            )
            now = self._clock.now()
            if hits:
                entry = self._entries[hits[0].entry_id]
                try:
                    new_text = synthesizer.merge(feedback.text, entry.text)
                except Exception as exc:
                    raise SynthesizerFailureError(
                        f"synthesizer merge failed: {exc}", entry_id=entry.id
                    ) from exc
                new_embedding = embed(new_text, self.dim)
                updated = replace(
                    entry,
                    text=new_text,
                    embedding=new_embedding,
                    version=entry.version + 1,
                    provenance=entry.provenance + (feedback.id,),
                    updated_at=now,
                )
                self._append_records(
                    [
                        {
                            "op": "update",
                            "id": entry.id,
                            "text": new_text,
                            "embedding": list(new_embedding.values),
                            "feedback_id": feedback.id,
                            "updated_at": now,
                        }
                    ]
                )
                self._append_history(
                    {
                        "entry_id": entry.id,
                        "version": entry.version,
                        "text": entry.text,
                        "feedback_id": entry.provenance[-1],
                        "superseded_at": now,
                    }
                )
                self._entries[entry.id] = updated
                self._versions[entry.id].append((updated.version, updated.text, feedback.id))
                self._replace_vector(entry.id, new_embedding)
                return ExperienceUpdate(outcome="updated", entry=updated, previous_text=entry.text)

            try:
                text = synthesizer.create(feedback.text)
            except Exception as exc:
                raise SynthesizerFailureError(f"synthesizer create failed: {exc}") from exc
            embedding = embed(text, self.dim)
            entry = ExperienceEntry(
                id=f"e:{self._next_seq}",
                category=feedback.category,
                text=text,
                embedding=embedding,
                version=1,
                provenance=(feedback.id,),
                created_at=now,
                updated_at=now,
            )
            self._append_records(
                [
                    {
                        "op": "insert",
                        "id": entry.id,
                        "category": entry.category.value,
                        "text": entry.text,
                        "embedding": list(embedding.values),
                        "feedback_id": feedback.id,
                        "created_at": now,
                    }
                ]
            )
            self._next_seq += 1
            self._entries[entry.id] = entry
            self._versions[entry.id] = [(1, entry.text, feedback.id)]
            self._track(entry.id, embedding)
            return ExperienceUpdate(outcome="inserted", entry=entry)

    # -- reads ----------------------------------------------------------------

    def get(self, entry_id: str) -> ExperienceEntry:
        with self._lock:
            if entry_id not in self._entries:
                raise NotFoundError(f"experience entry {entry_id!r} not found", entry_id=entry_id)
            return self._entries[entry_id]

    def history(self, entry_id: str) -> list[tuple[int, str, str]]:
        """All versions oldest first as (version, text, feedback_id)."""
        with self._lock:
            if entry_id not in self._versions:
                raise NotFoundError(f"experience entry {entry_id!r} not found", entry_id=entry_id)
            return list(self._versions[entry_id])

    def entries(self, category: ExperienceCategory | None = None) -> list[ExperienceEntry]:
        with self._lock:
            all_entries = [self._entries[i] for i in self._ids]
        if category is None:
            return all_entries
        return [e for e in all_entries if e.category == category]

    def retrieve_category(
        self,
        query: str,
        category: ExperienceCategory,
        k: int,
        min_score: float,
    ):
        return self.retrieve(
            query,
            k=k,
            min_score=min_score,
            entry_filter=lambda eid: self._entries[eid].category == category,
        )
