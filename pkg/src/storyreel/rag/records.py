"""Record types shared by the knowledge and experience stores."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from storyreel.rag.embedding import Embedding


class ExperienceCategory(str, Enum):
    WORKFLOW = "workflow"
    PROMPT = "prompt"
    UTILITY = "utility"
    IMAGE = "image"


class Author(str, Enum):
    HUMAN_REVIEWER = "human_reviewer"
    MULTIMODAL_CRITIC = "multimodal_critic"
    SYSTEM = "system"


@dataclass(frozen=True)
class KnowledgeEntry:
    id: str
    doc_id: str
    chunk_index: int
    text: str
    tags: tuple[str, ...]
    embedding: Embedding
    created_at: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "tags", tuple(self.tags))


@dataclass(frozen=True)
class ExperienceEntry:
    """One evolving lesson. ``provenance`` lists the feedback id behind each
    version, oldest first, so ``len(provenance) == version`` always holds."""

    id: str
    category: ExperienceCategory
    text: str
    embedding: Embedding
    version: int
    provenance: tuple[str, ...]
    created_at: int
    updated_at: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "category", ExperienceCategory(self.category))
        object.__setattr__(self, "provenance", tuple(self.provenance))


@dataclass(frozen=True)
class FeedbackRecord:
    id: str
    category: ExperienceCategory
    text: str
    author: Author
    created_at: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "category", ExperienceCategory(self.category))
        object.__setattr__(self, "author", Author(self.author))


@dataclass(frozen=True)
class RetrievalHit:
    entry_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class ExperienceUpdate:
    """Outcome of routing one feedback record into the experience store."""

    outcome: str  # "inserted" | "updated"
    entry: ExperienceEntry
    previous_text: str | None = None

    @property
    def inserted(self) -> bool:
        return self.outcome == "inserted"

    @property
    def updated(self) -> bool:
        return self.outcome == "updated"
