"""Per-shot material gathering ahead of timeline alignment.

Narration audio is synthesized for shots that carry narration text; camera
moves and transitions come from the script with fallbacks (static camera,
500 ms dissolve) when a shot leaves them unspecified. The last shot always
ends on a hard cut, and forcing that is recorded as an adjustment so review
surfaces can show what changed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from storyreel.domain.model import (
    ArtifactRef,
    CameraMove,
    Script,
    Transition,
    TransitionKind,
)
from storyreel.errors import NotFoundError
from storyreel.rag.embedding import fnv1a64_text
from storyreel.utilities.adapters import AdapterSuite

DEFAULT_MIN_SHOT_MS = 2000
DEFAULT_VOICE = "narrator"
FALLBACK_TRANSITION_MS = 500

_MOODS = ("adventure", "calm", "wonder", "dusk")


def mood_from_title(title: str) -> str:
    return _MOODS[fnv1a64_text(title) % len(_MOODS)]


@dataclass(frozen=True)
class NarrationMaterial:
    audio: ArtifactRef
    duration_ms: int
    text: str


@dataclass(frozen=True)
class ShotMaterial:
    shot_id: str
    visual: ArtifactRef
    camera_move: CameraMove
    transition_out: Transition
    narration: NarrationMaterial | None = None


@dataclass(frozen=True)
class MusicMaterial:
    audio: ArtifactRef
    duration_ms: int
    mood_tag: str


@dataclass(frozen=True)
class MaterialPlan:
    shots: tuple[ShotMaterial, ...]
    music: MusicMaterial
    min_shot_ms: int
    adjustments: tuple[str, ...] = ()


def _camera_doc(camera: CameraMove) -> dict:
    return {
        "kind": camera.kind.value,
        "magnitude": camera.magnitude,
        "duration_ms": camera.duration_ms,
    }


def _transition_doc(transition: Transition) -> dict:
    return {"kind": transition.kind.value, "duration_ms": transition.duration_ms}


def material_plan_to_doc(plan: MaterialPlan) -> dict:
    shots = []
    for m in plan.shots:
        shot_doc: dict = {
            "shot_id": m.shot_id,
            "visual": m.visual.to_doc(),
            "camera_move": _camera_doc(m.camera_move),
            "transition_out": _transition_doc(m.transition_out),
            "narration": None
            if m.narration is None
            else {
                "audio": m.narration.audio.to_doc(),
                "duration_ms": m.narration.duration_ms,
                "text": m.narration.text,
            },
        }
        shots.append(shot_doc)
    return {
        "shots": shots,
        "music": {
            "audio": plan.music.audio.to_doc(),
            "duration_ms": plan.music.duration_ms,
            "mood_tag": plan.music.mood_tag,
        },
        "min_shot_ms": plan.min_shot_ms,
        "adjustments": list(plan.adjustments),
    }


def material_plan_from_doc(doc: Mapping) -> MaterialPlan:
    shots = []
    for shot_doc in doc["shots"]:
        narration = None
        if shot_doc["narration"] is not None:
            n = shot_doc["narration"]
            narration = NarrationMaterial(
                audio=ArtifactRef.from_doc(n["audio"]),
                duration_ms=int(n["duration_ms"]),
                text=n["text"],
            )
        cam = shot_doc["camera_move"]
        trans = shot_doc["transition_out"]
        shots.append(
            ShotMaterial(
                shot_id=shot_doc["shot_id"],
                visual=ArtifactRef.from_doc(shot_doc["visual"]),
                camera_move=CameraMove(cam["kind"], cam["magnitude"], int(cam["duration_ms"])),
                transition_out=Transition(trans["kind"], int(trans["duration_ms"])),
                narration=narration,
            )
        )
    music_doc = doc["music"]
    return MaterialPlan(
        shots=tuple(shots),
        music=MusicMaterial(
            audio=ArtifactRef.from_doc(music_doc["audio"]),
            duration_ms=int(music_doc["duration_ms"]),
            mood_tag=music_doc["mood_tag"],
        ),
        min_shot_ms=int(doc["min_shot_ms"]),
        adjustments=tuple(doc["adjustments"]),
    )


def shot_visual_duration(material: ShotMaterial, *, min_shot_ms: int = DEFAULT_MIN_SHOT_MS) -> int:
    """A shot stays on screen long enough for its narration, its camera move,
    and the floor duration, whichever is longest."""
    narration_ms = material.narration.duration_ms if material.narration else 0
    return max(narration_ms, material.camera_move.duration_ms, min_shot_ms)


def plan_materials(
    script: Script,
    visuals: Mapping[str, ArtifactRef],
    adapters: AdapterSuite,
    *,
    min_shot_ms: int = DEFAULT_MIN_SHOT_MS,
    voice_id: str = DEFAULT_VOICE,
) -> MaterialPlan:
    shots = script.shots()
    if not shots:
        raise NotFoundError("script has no shots")
    materials: list[ShotMaterial] = []
    adjustments: list[str] = []
    for shot in shots:
        if shot.id not in visuals:
            raise NotFoundError(f"no visual for shot {shot.id}", shot_id=shot.id)
        narration = None
        if shot.narration.strip():
            audio, duration = adapters.speech.synthesize(shot.narration, voice_id)
            narration = NarrationMaterial(audio=audio, duration_ms=duration, text=shot.narration)
        camera = shot.camera_move or CameraMove()
        transition = shot.transition_out or Transition(
            TransitionKind.DISSOLVE, FALLBACK_TRANSITION_MS
        )
        materials.append(
            ShotMaterial(
                shot_id=shot.id,
                visual=visuals[shot.id],
                camera_move=camera,
                transition_out=transition,
                narration=narration,
            )
        )

    last = materials[-1]
    if last.transition_out.kind is not TransitionKind.CUT:
        materials[-1] = ShotMaterial(
            shot_id=last.shot_id,
            visual=last.visual,
            camera_move=last.camera_move,
            transition_out=Transition(TransitionKind.CUT, 0),
            narration=last.narration,
        )
        adjustments.append(f"{last.shot_id}: trailing transition forced to cut")

    durations = [shot_visual_duration(m, min_shot_ms=min_shot_ms) for m in materials]
    overlaps = [m.transition_out.duration_ms for m in materials[:-1]]
    total = sum(durations) - sum(overlaps)
    mood = mood_from_title(script.title)
    audio, music_ms = adapters.music.select(mood, total)
    return MaterialPlan(
        shots=tuple(materials),
        music=MusicMaterial(audio=audio, duration_ms=music_ms, mood_tag=mood),
        min_shot_ms=min_shot_ms,
        adjustments=tuple(adjustments),
    )
