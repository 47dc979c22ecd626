from storyreel.rag.embedding import EMBEDDING_DIM, Embedding, cosine, embed, fnv1a64, tokenize
from storyreel.rag.records import (
    Author,
    ExperienceCategory,
    ExperienceEntry,
    ExperienceUpdate,
    FeedbackRecord,
    KnowledgeEntry,
    RetrievalHit,
)
from storyreel.rag.experience import ExperienceStore
from storyreel.rag.knowledge import KnowledgeStore, chunk_document
from storyreel.rag.vector_store import retrieve

__all__ = [
    "EMBEDDING_DIM",
    "Embedding",
    "cosine",
    "embed",
    "fnv1a64",
    "tokenize",
    "Author",
    "ExperienceCategory",
    "ExperienceEntry",
    "ExperienceUpdate",
    "FeedbackRecord",
    "KnowledgeEntry",
    "RetrievalHit",
    "ExperienceStore",
    "KnowledgeStore",
    "chunk_document",
    "retrieve",
]
