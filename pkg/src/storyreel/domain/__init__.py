from storyreel.domain.model import (
    Action,
    ArtifactRef,
    BoundingBox,
    CameraKind,
    CameraMove,
    Character,
    CharacterPlacement,
    MediaType,
    Script,
    Shot,
    StoryProposal,
    StyleSpec,
    Transition,
    TransitionKind,
)
from storyreel.domain.script_doc import SCRIPT_SCHEMA_VERSION, parse_script, serialize_script
from storyreel.domain.validation import ValidationReport, Violation, validate_script

__all__ = [
    "Action",
    "ArtifactRef",
    "BoundingBox",
    "CameraKind",
    "CameraMove",
    "Character",
    "CharacterPlacement",
    "MediaType",
    "Script",
    "Shot",
    "StoryProposal",
    "StyleSpec",
    "Transition",
    "TransitionKind",
    "SCRIPT_SCHEMA_VERSION",
    "parse_script",
    "serialize_script",
    "ValidationReport",
    "Violation",
    "validate_script",
]
