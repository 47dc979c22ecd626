"""Canonical script document.

The script exchange format is a single JSON document with a schema version.
Serialization is byte-deterministic (sorted keys, six-decimal coordinates);
``parse_script(serialize_script(s)) == s`` for every script built from
quantized coordinates, which the constructors guarantee.
"""

from __future__ import annotations

import json
from typing import Any

from storyreel import canonical
from storyreel.domain.model import (
    Action,
    BoundingBox,
    CameraMove,
    Character,
    CharacterPlacement,
    Script,
    Shot,
    Transition,
)
from storyreel.errors import SchemaError

SCRIPT_SCHEMA_VERSION = 1


def script_to_doc(script: Script) -> dict[str, Any]:
    return {
        "schema_version": SCRIPT_SCHEMA_VERSION,
        "title": script.title,
        "characters": [
            {
                "id": c.id,
                "name": c.name,
                "attached_description": c.attached_description,
                "separate_description": c.separate_description,
            }
            for c in script.characters
        ],
        "actions": [
            {
                "id": a.id,
                "description": a.description,
                "shots": [_shot_to_doc(s) for s in a.shots],
            }
            for a in script.actions
        ],
    }


def _shot_to_doc(shot: Shot) -> dict[str, Any]:
    return {
        "id": shot.id,
        "image_description": shot.image_description,
        "narration": shot.narration,
        "magic_words": list(shot.magic_words),
        "character_placements": [
            {
                "character_id": p.character_id,
                "box": {"x": p.box.x, "y": p.box.y, "w": p.box.w, "h": p.box.h},
            }
            for p in shot.character_placements
        ],
        "camera_move": None
        if shot.camera_move is None
        else {
            "kind": shot.camera_move.kind.value,
            "magnitude": shot.camera_move.magnitude,
            "duration_ms": shot.camera_move.duration_ms,
        },
        "transition_out": None
        if shot.transition_out is None
        else {
            "kind": shot.transition_out.kind.value,
            "duration_ms": shot.transition_out.duration_ms,
        },
    }


def serialize_script(script: Script) -> str:
    return canonical.dumps(script_to_doc(script))


class _Walker:
    """Strict structural reader that tracks a dotted field path for errors."""

    def __init__(self, value: Any, path: str = "") -> None:
        self.value = value
        self.path = path

    def fail(self, message: str) -> SchemaError:
        return SchemaError(message, field=self.path or "<root>")

    def as_dict(self, allowed: set[str], required: set[str]) -> dict[str, Any]:
        if not isinstance(self.value, dict):
            raise self.fail(f"expected object, got {type(self.value).__name__}")
        unknown = set(self.value) - allowed
        if unknown:
            raise self.fail(f"unknown fields: {sorted(unknown)}")
        missing = required - set(self.value)
        if missing:
            raise SchemaError(
                f"missing required fields: {sorted(missing)}",
                field=self._child(sorted(missing)[0]),
            )
        return self.value

    def child(self, key: str) -> "_Walker":
        return _Walker(self.value[key], self._child(key))

    def _child(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def items(self) -> list["_Walker"]:
        if not isinstance(self.value, list):
            raise self.fail(f"expected array, got {type(self.value).__name__}")
        return [_Walker(v, f"{self.path}[{i}]") for i, v in enumerate(self.value)]

    def str_(self) -> str:
        if not isinstance(self.value, str):
            raise self.fail(f"expected string, got {type(self.value).__name__}")
        return self.value

    def int_(self) -> int:
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise self.fail(f"expected integer, got {type(self.value).__name__}")
        return self.value

    def num(self) -> float:
        if isinstance(self.value, bool) or not isinstance(self.value, (int, float)):
            raise self.fail(f"expected number, got {type(self.value).__name__}")
        return float(self.value)

    def str_list(self) -> list[str]:
        return [w.str_() for w in self.items()]


def _parse_box(w: _Walker) -> BoundingBox:
    w.as_dict({"x", "y", "w", "h"}, {"x", "y", "w", "h"})
    return BoundingBox(
        x=w.child("x").num(),
        y=w.child("y").num(),
        w=w.child("w").num(),
        h=w.child("h").num(),
    )


def _parse_shot(w: _Walker) -> Shot:
    fields = {
        "id",
        "image_description",
        "narration",
        "magic_words",
        "character_placements",
        "camera_move",
        "transition_out",
    }
    w.as_dict(fields, fields)
    placements = []
    for p in w.child("character_placements").items():
        p.as_dict({"character_id", "box"}, {"character_id", "box"})
        placements.append(
            CharacterPlacement(
                character_id=p.child("character_id").str_(),
                box=_parse_box(p.child("box")),
            )
        )
    camera: CameraMove | None = None
    cam = w.child("camera_move")
    if cam.value is not None:
        cam.as_dict({"kind", "magnitude", "duration_ms"}, {"kind", "magnitude", "duration_ms"})
        try:
            camera = CameraMove(
                kind=cam.child("kind").str_(),
                magnitude=cam.child("magnitude").num(),
                duration_ms=cam.child("duration_ms").int_(),
            )
        except ValueError as exc:
            raise SchemaError(str(exc), field=cam.path) from exc
    transition: Transition | None = None
    trans = w.child("transition_out")
    if trans.value is not None:
        trans.as_dict({"kind", "duration_ms"}, {"kind", "duration_ms"})
        try:
            transition = Transition(
                kind=trans.child("kind").str_(),
                duration_ms=trans.child("duration_ms").int_(),
            )
        except ValueError as exc:
            raise SchemaError(str(exc), field=trans.path) from exc
    return Shot(
        id=w.child("id").str_(),
        image_description=w.child("image_description").str_(),
        narration=w.child("narration").str_(),
        magic_words=tuple(w.child("magic_words").str_list()),
        character_placements=tuple(placements),
        camera_move=camera,
        transition_out=transition,
    )


def doc_to_script(doc: Any) -> Script:
    root = _Walker(doc)
    root.as_dict(
        {"schema_version", "title", "characters", "actions"},
        {"schema_version", "title", "characters", "actions"},
    )
    version = root.child("schema_version").int_()
    if version != SCRIPT_SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version}", field="schema_version")

    characters = []
    for c in root.child("characters").items():
        fields = {"id", "name", "attached_description", "separate_description"}
        c.as_dict(fields, fields)
        characters.append(
            Character(
                id=c.child("id").str_(),
                name=c.child("name").str_(),
                attached_description=c.child("attached_description").str_(),
                separate_description=c.child("separate_description").str_(),
            )
        )

    actions = []
    for a in root.child("actions").items():
        a.as_dict({"id", "description", "shots"}, {"id", "description", "shots"})
        actions.append(
            Action(
                id=a.child("id").str_(),
                description=a.child("description").str_(),
                shots=tuple(_parse_shot(s) for s in a.child("shots").items()),
            )
        )

    return Script(title=root.child("title").str_(), characters=tuple(characters), actions=tuple(actions))


def parse_script(text: str | bytes) -> Script:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return doc_to_script(doc)
