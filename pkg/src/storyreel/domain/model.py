"""Core value types for the production pipeline.

Everything here is an immutable value. The script tree (Script, Action, Shot
and friends) is deliberately permissive at construction time: invariants are
collected by :func:`storyreel.domain.validation.validate_script` so a parsed
document can be inspected and reported on instead of blowing up field by
field. Types that never travel inside a script (proposals, styles, artifact
references) validate eagerly and raise ``ValueError``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

from storyreel.canonical import q6


class CameraKind(str, Enum):
    STATIC = "static"
    PUSH = "push"
    PULL = "pull"
    ROTATE = "rotate"
    ZOOM = "zoom"


class TransitionKind(str, Enum):
    CUT = "cut"
    DISSOLVE = "dissolve"
    WIPE = "wipe"
    SLIDE = "slide"


class MediaType(str, Enum):
    IMAGE_RASTER = "image_raster"
    DEPTH_MAP = "depth_map"
    MASK_SET = "mask_set"
    AUDIO_WAVE = "audio_wave"
    JSON = "json"
    TEXT = "text"


_HASH_RE = re.compile(r"^[0-9a-f]{64}$")


@dataclass(frozen=True)
class ArtifactRef:
    """Content-addressed pointer: SHA-256 of the bytes plus the media type."""

    content_hash: str
    media_type: MediaType

    def __post_init__(self) -> None:
        if not _HASH_RE.match(self.content_hash):
            raise ValueError(f"content_hash must be 64 lowercase hex chars, got {self.content_hash!r}")
        object.__setattr__(self, "media_type", MediaType(self.media_type))

    def to_doc(self) -> dict[str, str]:
        return {"content_hash": self.content_hash, "media_type": self.media_type.value}

    @staticmethod
    def from_doc(doc: Mapping[str, str]) -> "ArtifactRef":
        return ArtifactRef(doc["content_hash"], MediaType(doc["media_type"]))


@dataclass(frozen=True)
class BoundingBox:
    """Normalized image-space rectangle; coordinates quantized to 6 decimals."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, q6(getattr(self, name)))


@dataclass(frozen=True)
class CameraMove:
    kind: CameraKind = CameraKind.STATIC
    magnitude: float = 1.0
    duration_ms: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CameraKind(self.kind))
        object.__setattr__(self, "magnitude", q6(self.magnitude))


@dataclass(frozen=True)
class Transition:
    kind: TransitionKind = TransitionKind.CUT
    duration_ms: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TransitionKind(self.kind))


@dataclass(frozen=True)
class CharacterPlacement:
    character_id: str
    box: BoundingBox


@dataclass(frozen=True)
class Character:
    id: str
    name: str
    attached_description: str
    separate_description: str


@dataclass(frozen=True)
class Shot:
    # camera_move / transition_out may be None, meaning "not specified";
    # material planning substitutes a static camera and a 500 ms dissolve.
    id: str
    image_description: str
    narration: str = ""
    magic_words: tuple[str, ...] = ()
    character_placements: tuple[CharacterPlacement, ...] = ()
    camera_move: CameraMove | None = None
    transition_out: Transition | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "magic_words", tuple(self.magic_words))
        object.__setattr__(self, "character_placements", tuple(self.character_placements))


@dataclass(frozen=True)
class Action:
    id: str
    description: str
    shots: tuple[Shot, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "shots", tuple(self.shots))


@dataclass(frozen=True)
class Script:
    title: str
    characters: tuple[Character, ...]
    actions: tuple[Action, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "characters", tuple(self.characters))
        object.__setattr__(self, "actions", tuple(self.actions))

    def shots(self) -> tuple[Shot, ...]:
        return tuple(s for a in self.actions for s in a.shots)

    def character_by_id(self) -> dict[str, Character]:
        return {c.id: c for c in self.characters}


@dataclass(frozen=True)
class StoryProposal:
    id: str
    text: str
    style_id: str
    target_shot_budget: int

    def __post_init__(self) -> None:
        if not self.id.strip():
            raise ValueError("proposal id must be non-empty")
        if not self.text.strip():
            raise ValueError("proposal text must be non-empty")
        if not self.style_id.strip():
            raise ValueError("style_id must be non-empty")
        if not isinstance(self.target_shot_budget, int) or self.target_shot_budget < 1:
            raise ValueError("target_shot_budget must be an integer >= 1")


@dataclass(frozen=True)
class StyleSpec:
    """Global visual style. ``edit_strength`` in [0, 1] controls how strongly
    the style pass pulls pixels toward the style (0 leaves the image as-is)."""

    id: str
    display_name: str
    adapter_params: Mapping[str, Any] = field(default_factory=dict)
    edit_strength: float = 0.6

    def __post_init__(self) -> None:
        if not self.id.strip():
            raise ValueError("style id must be non-empty")
        strength = q6(self.edit_strength)
        if not 0.0 <= strength <= 1.0:
            raise ValueError("edit_strength must be within [0, 1]")
        object.__setattr__(self, "edit_strength", strength)
        object.__setattr__(self, "adapter_params", dict(self.adapter_params))


def normalize_ws(text: str) -> str:
    """Collapse runs of whitespace; used by the substring-based script rules."""
    return " ".join(text.split())


def boxes_overlap(a: BoundingBox, b: BoundingBox) -> bool:
    """True when the interiors intersect; shared edges do not count."""
    return a.x < b.x + b.w and b.x < a.x + a.w and a.y < b.y + b.h and b.y < a.y + a.h


def placements_from(pairs: Sequence[tuple[str, BoundingBox]]) -> tuple[CharacterPlacement, ...]:
    return tuple(CharacterPlacement(character_id=c, box=b) for c, b in pairs)
