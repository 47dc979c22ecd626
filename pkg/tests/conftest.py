"""Shared builders for the test suite."""

from __future__ import annotations

import random
import string

import pytest

from storyreel.domain import (
    Action,
    BoundingBox,
    CameraKind,
    CameraMove,
    Character,
    CharacterPlacement,
    Script,
    Shot,
    Transition,
    TransitionKind,
)

WORDS = (
    "dragon castle moat knight lantern forest river bridge ember stone "
    "cloud meadow tower gate harbor compass saddle banner valley peak "
    "story shot scene frame light shadow wind rain morning dusk"
).split()


def random_text(rng: random.Random, min_words: int = 3, max_words: int = 12) -> str:
    n = rng.randint(min_words, max_words)
    return " ".join(rng.choice(WORDS) for _ in range(n))


def random_token(rng: random.Random, length: int = 6) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(length))


def make_character(idx: int = 1) -> Character:
    return Character(
        id=f"char-{idx}",
        name=f"Character {idx}",
        attached_description=f"character {idx} with silver hair and a blue cloak",
        separate_description=f"Full portrait of character {idx}: silver hair, blue cloak, calm eyes.",
    )


def make_shot(idx: int = 1, character: Character | None = None, **overrides) -> Shot:
    character = character or make_character()
    defaults = dict(
        id=f"shot-{idx}",
        image_description=(
            f"Scene {idx} in the castle courtyard, {character.attached_description}, banners in the wind"
        ),
        narration=f"Voice over line {idx} about the journey ahead",
        magic_words=("Middle view",),
        character_placements=(
            CharacterPlacement(character.id, BoundingBox(0.1, 0.3, 0.25, 0.5)),
        ),
        camera_move=CameraMove(CameraKind.STATIC, 1.0, 0),
        transition_out=Transition(TransitionKind.DISSOLVE, 500),
    )
    defaults.update(overrides)
    return Shot(**defaults)


def make_script(n_shots: int = 2) -> Script:
    character = make_character()
    shots = tuple(make_shot(i + 1, character) for i in range(n_shots))
    return Script(
        title="The Courtyard Tale",
        characters=(character,),
        actions=(Action(id="action-1", description="The journey begins", shots=shots),),
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(42)
