"""Render manifest emission.

The manifest is the handoff to an external encoder: the aligned clips plus a
list of command templates that would realize them. Commands reference inputs
through ``{artifact:<hash>}`` and outputs through ``{out:<name>}``
placeholders; a placeholder table maps each one to a relative path, so the
document stays byte-identical across machines. Re-emitting the same timeline
stores the same bytes and returns the same artifact hash.
"""

from __future__ import annotations

from typing import Any

from storyreel import canonical
from storyreel.artifacts import ArtifactStore
from storyreel.assembly.timeline import Timeline, TrackKind
from storyreel.domain.model import ArtifactRef, MediaType
from storyreel.errors import NotFoundError

MANIFEST_SCHEMA_VERSION = 1
FRAME_RATE = 30

_XFADE_NAMES = {"dissolve": "fade", "wipe": "wipeleft", "slide": "slideleft"}


def _seconds(ms: int) -> str:
    return f"{ms / 1000:.3f}"


def _camera_filter(camera: dict[str, Any], duration_ms: int) -> str:
    frames = max(1, duration_ms * FRAME_RATE // 1000)
    kind = camera["kind"]
    magnitude = camera["magnitude"]
    if kind == "push":
        return f"zoompan=z='1+{magnitude:.6f}*on/{frames}':d={frames}:fps={FRAME_RATE}"
    if kind == "pull":
        return (
            f"zoompan=z='{1 + magnitude:.6f}-{magnitude:.6f}*on/{frames}'"
            f":d={frames}:fps={FRAME_RATE}"
        )
    if kind == "zoom":
        return (
            f"zoompan=z='1+{magnitude:.6f}*on/{frames}'"
            f":x='iw/2-(iw/zoom/2)':y='ih/2-(ih/zoom/2)'"
            f":d={frames}:fps={FRAME_RATE}"
        )
    if kind == "rotate":
        return f"rotate='{magnitude:.6f}*t*PI/8'"
    return "null"


def build_render_manifest(timeline: Timeline) -> dict[str, Any]:
    video = timeline.track(TrackKind.VIDEO)
    if not video:
        raise NotFoundError("timeline has no video clips")
    narration = timeline.track(TrackKind.NARRATION)
    music = timeline.track(TrackKind.MUSIC)

    commands: list[str] = []
    placeholders: dict[str, str] = {}

    def artifact_token(ref: ArtifactRef) -> str:
        token = f"{{artifact:{ref.content_hash}}}"
        placeholders[token] = f"artifacts/{ref.content_hash[:2]}/{ref.content_hash[2:]}/blob"
        return token

    def out_token(name: str) -> str:
        token = f"{{out:{name}}}"
        placeholders[token] = f"render/{name}"
        return token

    shot_outs: list[str] = []
    for index, clip in enumerate(video):
        out = out_token(f"shot_{index:03d}.mp4")
        shot_outs.append(out)
        vf = _camera_filter(clip.params["camera"], clip.duration_ms)
        commands.append(
            f"ffmpeg -y -loop 1 -framerate {FRAME_RATE} -t {_seconds(clip.duration_ms)} "
            f"-i {artifact_token(clip.artifact)} -vf \"{vf}\" -pix_fmt yuv420p {out}"
        )

    chain = shot_outs[0]
    for index in range(1, len(video)):
        out = out_token(f"chain_{index:03d}.mp4")
        transition = video[index - 1].params["transition_out"]
        overlap_ms = transition["duration_ms"]
        if overlap_ms > 0:
            name = _XFADE_NAMES.get(transition["kind"], "fade")
            offset = _seconds(video[index].start_ms)
            commands.append(
                f"ffmpeg -y -i {chain} -i {shot_outs[index]} -filter_complex "
                f"\"xfade=transition={name}:duration={_seconds(overlap_ms)}:offset={offset}\" "
                f"{out}"
            )
        else:
            commands.append(
                f"ffmpeg -y -i {chain} -i {shot_outs[index]} -filter_complex "
                f"\"concat=n=2:v=1:a=0\" {out}"
            )
        chain = out

    audio_inputs = []
    filters = []
    mixed = []
    for index, clip in enumerate(narration):
        audio_inputs.append(f"-i {artifact_token(clip.artifact)}")
        filters.append(f"[{index + 1}:a]adelay={clip.start_ms}:all=1[n{index}]")
        mixed.append(f"[n{index}]")
    music_index = len(narration) + 1
    for clip in music:
        audio_inputs.append(f"-i {artifact_token(clip.artifact)}")
        filters.append(f"[{music_index}:a]volume=0.3[music]")
        mixed.append("[music]")
    final = out_token("final.mp4")
    mix = f"{''.join(mixed)}amix=inputs={len(mixed)}:duration=first[aud]" if mixed else ""
    filter_complex = ";".join(filters + ([mix] if mix else []))
    audio_map = "-map \"[aud]\" " if mixed else ""
    commands.append(
        f"ffmpeg -y -i {chain} {' '.join(audio_inputs)} "
        f"-filter_complex \"{filter_complex}\" -map 0:v {audio_map}"
        f"-t {_seconds(timeline.total_duration_ms)} {final}".replace("  ", " ")
    )

    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "total_duration_ms": timeline.total_duration_ms,
        "frame_rate": FRAME_RATE,
        "clips": [clip.to_doc() for clip in timeline.clips],
        "encoder": {
            "commands": commands,
            "placeholders": placeholders,
        },
    }


def emit_manifest(timeline: Timeline, store: ArtifactStore) -> tuple[dict[str, Any], ArtifactRef]:
    doc = build_render_manifest(timeline)
    ref = store.put(canonical.dump_bytes(doc), MediaType.JSON)
    return doc, ref
