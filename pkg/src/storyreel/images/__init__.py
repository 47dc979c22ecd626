from storyreel.images.magic import (
    SEEDED_MAGIC_WORDS,
    MagicWord,
    MagicWordRegistry,
    default_magic_slots,
)
from storyreel.images.pipeline import (
    RefineOutcome,
    ShotImageSet,
    compose_prompt,
    critique_and_refine,
    enforce_character_consistency,
    enforce_style,
    generate_composed,
    generate_shot_images,
)

__all__ = [
    "SEEDED_MAGIC_WORDS",
    "MagicWord",
    "MagicWordRegistry",
    "default_magic_slots",
    "RefineOutcome",
    "ShotImageSet",
    "compose_prompt",
    "critique_and_refine",
    "enforce_character_consistency",
    "enforce_style",
    "generate_composed",
    "generate_shot_images",
]
