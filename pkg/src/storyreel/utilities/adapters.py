"""Provider adapter protocols.

Each model-backed capability hides behind one small protocol. Adapters are
pure with respect to their inputs plus an explicit seed; their only side
effect is writing result blobs to the artifact store they were built with.
Two providers exist: deterministic mocks (the normative test providers) and
HTTP-backed implementations for real services.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from storyreel.domain.model import ArtifactRef, BoundingBox, StyleSpec


@runtime_checkable
class TextGenerationAdapter(Protocol):
    def generate(self, prompt: str, *, seed: int) -> str: ...


@runtime_checkable
class TextToImageAdapter(Protocol):
    def generate(
        self,
        description: str,
        magic_words: Sequence[str],
        layout: Sequence[tuple[str, BoundingBox]],
        seed: int,
    ) -> ArtifactRef: ...


@runtime_checkable
class SegmentationAdapter(Protocol):
    def segment(self, image: ArtifactRef, character_labels: Sequence[str]) -> ArtifactRef: ...


@runtime_checkable
class InpaintingAdapter(Protocol):
    def inpaint(
        self,
        image: ArtifactRef,
        masks: ArtifactRef,
        descriptions: Sequence[str],
    ) -> ArtifactRef: ...


@runtime_checkable
class DepthAdapter(Protocol):
    def estimate(self, image: ArtifactRef) -> ArtifactRef: ...


@runtime_checkable
class StyleTransferAdapter(Protocol):
    def transfer(
        self,
        style: StyleSpec,
        description: str,
        image: ArtifactRef,
        depth: ArtifactRef,
        edit_strength: float,
    ) -> ArtifactRef: ...


@runtime_checkable
class SpeechAdapter(Protocol):
    def synthesize(self, text: str, voice_id: str) -> tuple[ArtifactRef, int]:
        """Returns (audio artifact, duration in ms)."""


@runtime_checkable
class MusicAdapter(Protocol):
    def select(self, mood_tag: str, duration_ms: int) -> tuple[ArtifactRef, int]: ...


@runtime_checkable
class CritiqueAdapter(Protocol):
    def critique(self, image: ArtifactRef, description: str) -> list[str]:
        """Improvement suggestions; empty list means the image passes."""


@runtime_checkable
class AnimateAdapter(Protocol):
    def animate(self, image: ArtifactRef, duration_ms: int) -> ArtifactRef: ...


@dataclass
class AdapterSuite:
    """Bundle of every provider the pipeline can call."""

    text: TextGenerationAdapter
    text_to_image: TextToImageAdapter
    segmentation: SegmentationAdapter
    inpainting: InpaintingAdapter
    depth: DepthAdapter
    style_transfer: StyleTransferAdapter
    speech: SpeechAdapter
    music: MusicAdapter
    critique: CritiqueAdapter
    animate: AnimateAdapter
