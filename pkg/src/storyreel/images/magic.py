"""Controlled "magic word" vocabulary for image prompts.

Each phrase carries a registry-assigned corner slot; the mock renderer flips
the reserved pixel for that slot so tests can verify a phrase actually
reached the image model. Slot ``k`` maps to the pixel at raster position
``(k % width, k // width)``, counting from the top-left corner.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

SEEDED_MAGIC_WORDS: tuple[str, ...] = ("Middle view", "Close view", "Low Angle", "High Angle")


@dataclass(frozen=True)
class MagicWord:
    id: str
    phrase: str
    corner_slot: int


def _word_id(phrase: str) -> str:
    return "mw:" + "-".join(phrase.lower().split())


class MagicWordRegistry:
    def __init__(self, phrases: tuple[str, ...] = SEEDED_MAGIC_WORDS) -> None:
        self._lock = threading.Lock()
        self._by_phrase: dict[str, MagicWord] = {}
        for phrase in phrases:
            self.register(phrase)

    def register(self, phrase: str) -> MagicWord:
        with self._lock:
            if phrase in self._by_phrase:
                return self._by_phrase[phrase]
            word = MagicWord(id=_word_id(phrase), phrase=phrase, corner_slot=len(self._by_phrase))
            self._by_phrase[phrase] = word
            return word

    def is_known(self, phrase: str) -> bool:
        with self._lock:
            return phrase in self._by_phrase

    def phrases(self) -> list[str]:
        with self._lock:
            return list(self._by_phrase)

    def slots(self) -> dict[str, int]:
        with self._lock:
            return {p: w.corner_slot for p, w in self._by_phrase.items()}

    def get(self, phrase: str) -> MagicWord | None:
        with self._lock:
            return self._by_phrase.get(phrase)


def default_magic_slots() -> dict[str, int]:
    return {phrase: slot for slot, phrase in enumerate(SEEDED_MAGIC_WORDS)}
