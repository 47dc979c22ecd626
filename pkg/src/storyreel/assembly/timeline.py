"""Timeline alignment.

With shot durations ``d_i`` and outgoing transition overlaps ``t_i``, shot
``i+1`` starts at ``start_i + d_i - t_i``: a transition overlaps the tail of
one shot with the head of the next. Total duration is therefore
``sum(d) - sum(t)``. An overlap as long as either adjacent shot would make a
shot vanish inside its transitions, so ``t_i >= min(d_i, d_{i+1})`` is
rejected. All arithmetic is integer milliseconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from storyreel.assembly.materials import MaterialPlan, shot_visual_duration
from storyreel.domain.model import ArtifactRef
from storyreel.errors import NegativeOverlapError


class TrackKind(str, Enum):
    VIDEO = "video"
    NARRATION = "narration"
    MUSIC = "music"


@dataclass(frozen=True)
class Clip:
    track: TrackKind
    artifact: ArtifactRef
    start_ms: int
    duration_ms: int
    label: str
    params: dict[str, Any] = field(default_factory=dict)

    def to_doc(self) -> dict[str, Any]:
        return {
            "track": self.track.value,
            "artifact": self.artifact.to_doc(),
            "start_ms": self.start_ms,
            "duration_ms": self.duration_ms,
            "label": self.label,
            "params": self.params,
        }


@dataclass(frozen=True)
class Timeline:
    clips: tuple[Clip, ...]
    total_duration_ms: int

    def track(self, kind: TrackKind) -> tuple[Clip, ...]:
        return tuple(c for c in self.clips if c.track is kind)

    def to_doc(self) -> dict[str, Any]:
        return {
            "clips": [c.to_doc() for c in self.clips],
            "total_duration_ms": self.total_duration_ms,
        }


def clip_from_doc(doc: dict[str, Any]) -> Clip:
    return Clip(
        track=TrackKind(doc["track"]),
        artifact=ArtifactRef.from_doc(doc["artifact"]),
        start_ms=int(doc["start_ms"]),
        duration_ms=int(doc["duration_ms"]),
        label=doc["label"],
        params=dict(doc["params"]),
    )


def timeline_from_doc(doc: dict[str, Any]) -> Timeline:
    return Timeline(
        clips=tuple(clip_from_doc(c) for c in doc["clips"]),
        total_duration_ms=int(doc["total_duration_ms"]),
    )


def align_timeline(plan: MaterialPlan) -> Timeline:
    durations = [shot_visual_duration(m, min_shot_ms=plan.min_shot_ms) for m in plan.shots]
    overlaps = [m.transition_out.duration_ms for m in plan.shots[:-1]]
    for i, overlap in enumerate(overlaps):
        limit = min(durations[i], durations[i + 1])
        if overlap >= limit:
            raise NegativeOverlapError(
                f"transition after shot {plan.shots[i].shot_id} lasts {overlap} ms "
                f"but the shorter adjacent shot is only {limit} ms",
                shot_id=plan.shots[i].shot_id,
            )

    starts = [0]
    for i in range(1, len(plan.shots)):
        starts.append(starts[i - 1] + durations[i - 1] - overlaps[i - 1])
    total = sum(durations) - sum(overlaps)

    clips: list[Clip] = []
    for i, material in enumerate(plan.shots):
        move = material.camera_move
        transition = material.transition_out
        clips.append(
            Clip(
                track=TrackKind.VIDEO,
                artifact=material.visual,
                start_ms=starts[i],
                duration_ms=durations[i],
                label=material.shot_id,
                params={
                    "camera": {
                        "kind": move.kind.value,
                        "magnitude": move.magnitude,
                        "duration_ms": move.duration_ms,
                    },
                    "transition_out": {
                        "kind": transition.kind.value,
                        "duration_ms": transition.duration_ms,
                    },
                },
            )
        )
    for i, material in enumerate(plan.shots):
        if material.narration is None:
            continue
        clips.append(
            Clip(
                track=TrackKind.NARRATION,
                artifact=material.narration.audio,
                start_ms=starts[i],
                duration_ms=material.narration.duration_ms,
                label=f"{material.shot_id}:narration",
            )
        )
    clips.append(
        Clip(
            track=TrackKind.MUSIC,
            artifact=plan.music.audio,
            start_ms=0,
            duration_ms=plan.music.duration_ms,
            label=f"music:{plan.music.mood_tag}",
            params={"mood": plan.music.mood_tag},
        )
    )
    return Timeline(clips=tuple(clips), total_duration_ms=total)
