"""Script validation.

``validate_script`` walks the whole tree and returns every violation it finds
(never just the first), each with a path such as
``actions[1].shots[0].character_placements[2]``. Unknown magic words are
reported as warnings, not violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from storyreel.domain.model import (
    BoundingBox,
    CameraKind,
    Script,
    Shot,
    TransitionKind,
    boxes_overlap,
    normalize_ws,
)

_EPS = 1e-9


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))

    def warn(self, path: str, message: str) -> None:
        self.warnings.append(Violation(path, message))


def _check_box(box: BoundingBox, path: str, report: ValidationReport) -> None:
    if box.x < 0 or box.y < 0:
        report.add(path, "box origin must be non-negative")
    if box.w <= 0 or box.h <= 0:
        report.add(path, "box width and height must be positive")
    if box.x + box.w > 1.0 + _EPS:
        report.add(path, "box exceeds right edge (x + w > 1)")
    if box.y + box.h > 1.0 + _EPS:
        report.add(path, "box exceeds bottom edge (y + h > 1)")


def _check_shot(
    shot: Shot,
    path: str,
    report: ValidationReport,
    characters: dict[str, str],
    known_magic_words: Iterable[str] | None,
    max_characters_per_shot: int,
) -> None:
    if not shot.image_description.strip():
        report.add(f"{path}.image_description", "image description must be non-empty")

    narration = normalize_ws(shot.narration)
    if narration and narration in normalize_ws(shot.image_description):
        report.add(
            f"{path}.narration",
            "narration must not repeat the image description verbatim",
        )

    if known_magic_words is not None:
        known = set(known_magic_words)
        for i, word in enumerate(shot.magic_words):
            if word not in known:
                report.warn(f"{path}.magic_words[{i}]", f"unknown magic word {word!r}")

    if len(shot.character_placements) > max_characters_per_shot:
        report.add(
            f"{path}.character_placements",
            f"shot places {len(shot.character_placements)} characters, cap is {max_characters_per_shot}",
        )

    seen_ids: set[str] = set()
    for i, placement in enumerate(shot.character_placements):
        ppath = f"{path}.character_placements[{i}]"
        if placement.character_id not in characters:
            report.add(ppath, f"unknown character {placement.character_id!r}")
        elif placement.character_id in seen_ids:
            report.add(ppath, f"character {placement.character_id!r} placed twice")
        else:
            seen_ids.add(placement.character_id)
            attached = normalize_ws(characters[placement.character_id])
            if attached and attached not in normalize_ws(shot.image_description):
                report.add(
                    f"{path}.image_description",
                    f"attached description of {placement.character_id!r} missing from image description",
                )
        _check_box(placement.box, f"{ppath}.box", report)

    for i in range(len(shot.character_placements)):
        for j in range(i + 1, len(shot.character_placements)):
            if boxes_overlap(shot.character_placements[i].box, shot.character_placements[j].box):
                report.add(
                    f"{path}.character_placements[{j}]",
                    f"box overlaps placement [{i}]",
                )

    move = shot.camera_move
    if move is not None:
        if not 0.0 < move.magnitude <= 1.0:
            report.add(f"{path}.camera_move.magnitude", "magnitude must be within (0, 1]")
        if move.duration_ms < 0:
            report.add(f"{path}.camera_move.duration_ms", "duration must be non-negative")
        elif move.kind is not CameraKind.STATIC and move.duration_ms == 0:
            report.add(f"{path}.camera_move.duration_ms", "moving camera needs a positive duration")

    transition = shot.transition_out
    if transition is not None:
        if (transition.kind is TransitionKind.CUT) != (transition.duration_ms == 0):
            report.add(
                f"{path}.transition_out",
                "cut transitions must have duration 0 and non-cut transitions a positive duration",
            )
        if transition.duration_ms < 0:
            report.add(f"{path}.transition_out.duration_ms", "duration must be non-negative")


def validate_script(
    script: Script,
    *,
    max_characters_per_shot: int = 6,
    known_magic_words: Iterable[str] | None = None,
) -> ValidationReport:
    report = ValidationReport()

    if not script.title.strip():
        report.add("title", "title must be non-empty")

    characters: dict[str, str] = {}
    for i, ch in enumerate(script.characters):
        path = f"characters[{i}]"
        if not ch.id.strip():
            report.add(f"{path}.id", "character id must be non-empty")
        if ch.id in characters:
            report.add(f"{path}.id", f"duplicate character id {ch.id!r}")
        if not ch.name.strip():
            report.add(f"{path}.name", "character name must be non-empty")
        if not ch.attached_description.strip():
            report.add(f"{path}.attached_description", "attached description must be non-empty")
        if not ch.separate_description.strip():
            report.add(f"{path}.separate_description", "separate description must be non-empty")
        characters.setdefault(ch.id, ch.attached_description)

    if not script.actions:
        report.add("actions", "script must contain at least one action")

    action_ids: set[str] = set()
    shot_ids: set[str] = set()
    for i, action in enumerate(script.actions):
        apath = f"actions[{i}]"
        if not action.description.strip():
            report.add(f"{apath}.description", "action description must be non-empty")
        if action.id in action_ids:
            report.add(f"{apath}.id", f"duplicate action id {action.id!r}")
        action_ids.add(action.id)
        if not action.shots:
            report.add(f"{apath}.shots", "action must contain at least one shot")
        for j, shot in enumerate(action.shots):
            spath = f"{apath}.shots[{j}]"
            if shot.id in shot_ids:
                report.add(f"{spath}.id", f"duplicate shot id {shot.id!r}")
            shot_ids.add(shot.id)
            _check_shot(shot, spath, report, characters, known_magic_words, max_characters_per_shot)

    return report
