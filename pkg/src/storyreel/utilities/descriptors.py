"""Utility registry.

Descriptors document what each capability does; their usage instructions are
indexed into the knowledge store so ``suggest`` can match a task goal against
them by embedding similarity. A goal that matches nothing above the threshold
yields a gap report instead of a ranking, flagging that an external search
for a new tool is needed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum

from storyreel.errors import DuplicateUtilityError, NotFoundError
from storyreel.rag.knowledge import KnowledgeStore

SUGGEST_THRESHOLD = 0.35
UTILITY_DOC_TAG = "utility-doc"


class Capability(str, Enum):
    TEXT_GENERATION = "text_generation"
    TEXT_TO_IMAGE = "text_to_image"
    SEGMENTATION = "segmentation"
    INPAINTING = "inpainting"
    DEPTH_ESTIMATION = "depth_estimation"
    STYLE_TRANSFER = "style_transfer"
    TEXT_TO_SPEECH = "text_to_speech"
    MUSIC_SELECTION = "music_selection"
    MULTIMODAL_CRITIQUE = "multimodal_critique"
    VIDEO_CLIP_GENERATION = "video_clip_generation"


@dataclass(frozen=True)
class UtilityDescriptor:
    id: str
    capability: Capability
    display_name: str
    usage_instructions: str
    provider_kinds: tuple[str, ...] = ("mock", "http")

    def __post_init__(self) -> None:
        object.__setattr__(self, "capability", Capability(self.capability))
        object.__setattr__(self, "provider_kinds", tuple(self.provider_kinds))


@dataclass(frozen=True)
class UtilityGapReport:
    task_goal: str
    best_utility_id: str | None
    best_score: float | None
    threshold: float
    suggestion: str = "no registered utility covers this goal; search for an external tool"


@dataclass(frozen=True)
class UtilitySuggestion:
    ranking: tuple[tuple[UtilityDescriptor, float], ...]


def builtin_descriptors() -> list[UtilityDescriptor]:
    d = UtilityDescriptor
    return [
        d(
            "text_generation",
            Capability.TEXT_GENERATION,
            "Text generation",
            "Generate structured text from a prompt: story scripts, titles, action plans, "
            "shot lists, and JSON planning documents.",
        ),
        d(
            "text_to_image",
            Capability.TEXT_TO_IMAGE,
            "Text to image",
            "Generate an image from a text description. Honors framing magic words and "
            "character layout boxes to generate the described scene as an image.",
        ),
        d(
            "segmentation",
            Capability.SEGMENTATION,
            "Character segmentation",
            "Segment a rendered image into character regions, returning one binary mask "
            "per requested character label.",
        ),
        d(
            "inpainting",
            Capability.INPAINTING,
            "Inpainting",
            "Repaint masked regions of an image so each character matches its own separate "
            "description while pixels outside the masks stay untouched.",
        ),
        d(
            "depth_estimation",
            Capability.DEPTH_ESTIMATION,
            "Depth estimation",
            "Estimate a depth map from an image to guide structure preserving edits.",
        ),
        d(
            "style_transfer",
            Capability.STYLE_TRANSFER,
            "Style transfer",
            "Keep the image style consistent across shots: transfer the global story style "
            "onto an image, guided by its depth map and an edit strength weight.",
        ),
        d(
            "text_to_speech",
            Capability.TEXT_TO_SPEECH,
            "Narration speech",
            "Synthesize narration speech audio from text with a chosen voice.",
        ),
        d(
            "music_selection",
            Capability.MUSIC_SELECTION,
            "Music selection",
            "Select background music matching a mood tag and a target duration.",
        ),
        d(
            "multimodal_critique",
            Capability.MULTIMODAL_CRITIQUE,
            "Image critique",
            "Critique a generated image against its description and suggest concrete "
            "prompt improvements.",
        ),
        d(
            "video_clip_generation",
            Capability.VIDEO_CLIP_GENERATION,
            "Clip animation",
            "Animate a still image into a short video clip of a given duration.",
        ),
    ]


class UtilityRegistry:
    """Descriptor catalog backed by a knowledge store for goal matching."""

    def __init__(
        self,
        knowledge: KnowledgeStore,
        *,
        threshold: float = SUGGEST_THRESHOLD,
        seed_builtins: bool = True,
    ) -> None:
        self._knowledge = knowledge
        self._threshold = threshold
        self._lock = threading.Lock()
        self._descriptors: dict[str, UtilityDescriptor] = {}
        if seed_builtins:
            for descriptor in builtin_descriptors():
                self.register(descriptor)

    def register(self, descriptor: UtilityDescriptor) -> None:
        with self._lock:
            if descriptor.id in self._descriptors:
                raise DuplicateUtilityError(
                    f"utility {descriptor.id!r} already registered", utility_id=descriptor.id
                )
            doc_id = f"utility:{descriptor.id}"
            if not self._knowledge.has_document(doc_id):
                self._knowledge.add_document(
                    doc_id, descriptor.usage_instructions, tags=[UTILITY_DOC_TAG]
                )
            self._descriptors[descriptor.id] = descriptor

    def get(self, utility_id: str) -> UtilityDescriptor:
        with self._lock:
            if utility_id not in self._descriptors:
                raise NotFoundError(f"utility {utility_id!r} not registered", utility_id=utility_id)
            return self._descriptors[utility_id]

    def descriptors(self) -> list[UtilityDescriptor]:
        with self._lock:
            return list(self._descriptors.values())

    def suggest(self, task_goal: str) -> UtilitySuggestion | UtilityGapReport:
        """Rank utilities by best-chunk similarity; gap report below threshold."""
        with self._lock:
            ordered = list(self._descriptors.values())
        hits = self._knowledge.retrieve(
            task_goal,
            k=len(self._knowledge),
            min_score=-1.0,
            entry_filter=lambda eid: eid.startswith("k:utility:"),
        )
        best: dict[str, float] = {}
        for hit in hits:
            utility_id = hit.entry_id.split(":", 2)[2].rsplit(":", 1)[0]
            if utility_id not in best:
                best[utility_id] = hit.score  # hits arrive ranked, first is the max
        scored = [(d, best[d.id]) for d in ordered if d.id in best]
        scored.sort(key=lambda pair: (-pair[1], ordered.index(pair[0])))
        if not scored or scored[0][1] < self._threshold:
            top = scored[0] if scored else None
            return UtilityGapReport(
                task_goal=task_goal,
                best_utility_id=top[0].id if top else None,
                best_score=top[1] if top else None,
                threshold=self._threshold,
            )
        return UtilitySuggestion(ranking=tuple(scored))
