"""Deterministic mock providers.

These are the normative test implementations of every adapter: pure functions
of their inputs plus the explicit seed, with artifact-store writes as the only
side effect. Pixel and byte level behaviour is part of their contract:

* ``text_to_image`` renders a solid background whose color is
  ``hash(description + "|" + seed)``, draws each layout box as a filled
  rectangle colored ``hash(label)``, then flips the reserved corner pixel of
  every known magic word (slot ``k`` is pixel ``(k % W, k // W)``).
* ``segment`` recovers each label's rectangle from its box color (a flipped
  reserved pixel inside a box still counts as the box).
* ``inpaint`` fills mask regions with ``hash(description)`` per label and
  leaves every other pixel byte-identical.
* ``depth`` is a horizontal gradient; ``style_transfer`` blends each channel
  toward ``hash(style.id)`` with the edit strength, rounding half up.
* ``tts`` returns 60 ms per whitespace word plus 500 ms of silence.
* ``critique`` returns fixture suggestions keyed by ``hash(description)``.

The text-generation mock reads ``TASK:`` and ``KEY: value`` slot lines from
the prompt (first occurrence wins) and emits procedurally derived JSON, so
any story produces a parseable, contract-honoring script.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from storyreel import canonical
from storyreel.artifacts import ArtifactStore
from storyreel.domain.model import ArtifactRef, BoundingBox, MediaType, StyleSpec
from storyreel.errors import AdapterFailureError, NotSupportedError
from storyreel.rag.embedding import fnv1a64_text, tokenize
from storyreel.utilities import ppm, wave
from storyreel.utilities.adapters import AdapterSuite
from storyreel.utilities.masks import LabeledMask, MaskSet, mask_set_from_bytes, mask_set_to_bytes
from storyreel.workflow.canon import canonical_nodes_doc

DEFAULT_WIDTH = 512
DEFAULT_HEIGHT = 288

_MAGIC_CYCLE = ("Middle view", "Close view", "Low Angle", "High Angle")
_NAMES = ("Aria", "Bram", "Cleo", "Dorn", "Elia", "Finn", "Gale", "Hale")
_ROLES = ("young wanderer", "old keeper", "river pilot", "mountain scout")
_HAIR = ("silver", "copper", "black", "golden")
_GARB = ("blue cloak", "green tunic", "red scarf", "grey coat")
_EYES = ("amber", "grey", "green", "dark")
_SCENES = (
    "first light breaks over",
    "a sudden storm gathers near",
    "a quiet pact is made beneath",
    "the long road winds past",
)
_PROPS = ("stone bridge", "lantern rows", "cedar gate", "mossy wall")
_LIGHT = ("amber", "pale", "golden", "silver")
_NARR = ("hills", "river", "gates", "pines")


def split_allocations(budget: int, actions: int) -> list[int]:
    base, rem = divmod(budget, actions)
    return [base + 1] * rem + [base] * (actions - rem)


def action_count_for_budget(budget: int) -> int:
    return max(1, min(4, budget // 3))


# ---------------------------------------------------------------------------
# text generation


def _slot_lines(prompt: str) -> dict[str, str]:
    slots: dict[str, str] = {}
    for line in prompt.splitlines():
        if ":" not in line:
            continue
        key, _, value = line.partition(":")
        key = key.strip()
        if key and key.replace("_", "").isupper() and key not in slots:
            slots[key] = value.strip()
    return slots


class MockTextGeneration:
    """Procedural script/planner fixtures, keyed by the TASK line."""

    def generate(self, prompt: str, *, seed: int) -> str:
        slots = _slot_lines(prompt)
        task = slots.get("TASK")
        if task == "plan_workflow":
            wants_budget = "shot number planning" in prompt.lower()
            return canonical.dumps(canonical_nodes_doc(include_budget_binding=wants_budget))
        if task == "generate_title":
            return canonical.dumps({"title": self._title(slots.get("STORY", ""))})
        if task == "design_characters":
            return canonical.dumps({"characters": self._characters(slots.get("STORY", ""), seed)})
        if task == "plan_actions":
            return canonical.dumps(
                {
                    "actions": self._actions(
                        slots.get("STORY", ""), int(slots.get("SHOT_BUDGET", "12"))
                    )
                }
            )
        if task == "generate_shots":
            return canonical.dumps(
                {
                    "shots": self._shots(
                        action=slots.get("ACTION", ""),
                        action_id=slots.get("ACTION_ID", "action-1"),
                        allocation=int(slots.get("ALLOCATION", "1")),
                        characters=canonical.loads(slots.get("CHARACTERS", "[]")),
                        offset=int(slots.get("SHOT_OFFSET", "0")),
                    )
                }
            )
        raise AdapterFailureError(f"mock text generation has no fixture for task {task!r}")

    @staticmethod
    def _keywords(story: str) -> list[str]:
        words = [t for t in tokenize(story) if len(t) >= 4]
        return words or ["untold", "tale"]

    def _title(self, story: str) -> str:
        words = self._keywords(story)[:2]
        return "The Tale of " + " ".join(w.capitalize() for w in words)

    def _characters(self, story: str, seed: int) -> list[dict]:
        h = fnv1a64_text(f"{story}|{seed}")
        first = h % len(_NAMES)
        second = (h >> 8) % len(_NAMES)
        if second == first:
            second = (second + 1) % len(_NAMES)
        characters = []
        for i, name_idx in enumerate((first, second)):
            name = _NAMES[name_idx]
            role = _ROLES[(h >> (4 * i + 16)) % len(_ROLES)]
            hair = _HAIR[(h >> (4 * i + 24)) % len(_HAIR)]
            garb = _GARB[(h >> (4 * i + 32)) % len(_GARB)]
            eyes = _EYES[(h >> (4 * i + 40)) % len(_EYES)]
            characters.append(
                {
                    "id": f"char-{name.lower()}",
                    "name": name,
                    "attached_description": f"{name} the {role} with {hair} hair in a {garb}",
                    "separate_description": (
                        f"Full portrait of {name} the {role}: {hair} hair, {garb}, "
                        f"{eyes} eyes, weathered boots, soft studio light."
                    ),
                }
            )
        return characters

    def _actions(self, story: str, budget: int) -> list[dict]:
        keywords = self._keywords(story)
        n = action_count_for_budget(budget)
        allocations = split_allocations(budget, n)
        return [
            {
                "id": f"action-{i + 1}",
                "description": (
                    f"Action {i + 1}: {_SCENES[i % len(_SCENES)]} the {keywords[i % len(keywords)]}"
                ),
                "allocation": allocations[i],
            }
            for i in range(n)
        ]

    def _shots(
        self,
        action: str,
        action_id: str,
        allocation: int,
        characters: list[dict],
        offset: int,
    ) -> list[dict]:
        shots = []
        for j in range(allocation):
            g = offset + j
            cast = characters[: 1 + (g % 2)] if len(characters) > 1 else characters[:1]
            attached = ". ".join(c["attached_description"] for c in cast)
            description = (
                f"{action}. {attached}. Detail {g + 1}: the {_PROPS[g % 4]} "
                f"in {_LIGHT[(g + 1) % 4]} light."
            )
            narration = (
                ""
                if g % 5 == 2
                else f"Narrator line {g + 1}: the journey continues beyond the {_NARR[g % 4]}."
            )
            if len(cast) == 1:
                boxes = [(0.375, 0.25, 0.25, 0.55)]
            else:
                boxes = [(0.10, 0.30, 0.25, 0.50), (0.62, 0.28, 0.25, 0.52)]
            camera = (
                {"kind": "static", "magnitude": 1.0, "duration_ms": 0},
                {"kind": "push", "magnitude": 0.30, "duration_ms": 1500},
                {"kind": "zoom", "magnitude": 0.50, "duration_ms": 2500},
                {"kind": "rotate", "magnitude": 0.25, "duration_ms": 2000},
            )[g % 4]
            transition = (
                {"kind": "dissolve", "duration_ms": 500},
                {"kind": "cut", "duration_ms": 0},
                {"kind": "wipe", "duration_ms": 400},
            )[g % 3]
            shots.append(
                {
                    "id": f"{action_id}-shot-{j + 1}",
                    "image_description": description,
                    "narration": narration,
                    "magic_words": [_MAGIC_CYCLE[g % 4]],
                    "character_placements": [
                        {
                            "character_id": c["id"],
                            "box": {"x": b[0], "y": b[1], "w": b[2], "h": b[3]},
                        }
                        for c, b in zip(cast, boxes)
                    ],
                    "camera_move": camera,
                    "transition_out": transition,
                }
            )
        return shots


# ---------------------------------------------------------------------------
# image stack


class MockTextToImage:
    def __init__(
        self,
        store: ArtifactStore,
        magic_slots: Mapping[str, int] | None = None,
        width: int = DEFAULT_WIDTH,
        height: int = DEFAULT_HEIGHT,
    ) -> None:
        self._store = store
        self._slots = dict(magic_slots) if magic_slots is not None else None
        self.width = width
        self.height = height

    def _slot_of(self, phrase: str) -> int | None:
        if self._slots is None:
            try:
                return _MAGIC_CYCLE.index(phrase)
            except ValueError:
                return None
        return self._slots.get(phrase)

    def generate(
        self,
        description: str,
        magic_words: Sequence[str],
        layout: Sequence[tuple[str, BoundingBox]],
        seed: int,
    ) -> ArtifactRef:
        background = ppm.color_from_text(f"{description}|{seed}")
        raster = ppm.new_raster(self.width, self.height, background)
        for label, box in layout:
            rect = ppm.pixel_rect(box.x, box.y, box.w, box.h, self.width, self.height)
            ppm.fill_rect(raster, rect, ppm.color_from_text(label))
        for phrase in magic_words:
            slot = self._slot_of(phrase)
            if slot is None:
                continue  # unknown words are a validation warning upstream
            x, y = slot % self.width, slot // self.width
            raster.pixels[y, x] = ppm.flip_color(tuple(raster.pixels[y, x]))
        return self._store.put(ppm.encode_ppm(raster), MediaType.IMAGE_RASTER)


class MockSegmentation:
    def __init__(self, store: ArtifactStore) -> None:
        self._store = store

    def segment(self, image: ArtifactRef, character_labels: Sequence[str]) -> ArtifactRef:
        raster = ppm.decode_ppm(self._store.get(image))
        masks = []
        for label in character_labels:
            color = ppm.color_from_text(label)
            rect = ppm.bounding_rect_of_color(raster, {color, ppm.flip_color(color)})
            masks.append(LabeledMask(label=label, rects=(rect,) if rect else ()))
        mask_set = MaskSet(width=raster.width, height=raster.height, masks=tuple(masks))
        return self._store.put(mask_set_to_bytes(mask_set), MediaType.MASK_SET)


class MockInpainting:
    def __init__(self, store: ArtifactStore) -> None:
        self._store = store

    def inpaint(
        self,
        image: ArtifactRef,
        masks: ArtifactRef,
        descriptions: Sequence[str],
    ) -> ArtifactRef:
        mask_set = mask_set_from_bytes(self._store.get(masks))
        if len(descriptions) != len(mask_set.masks):
            raise AdapterFailureError(
                f"{len(descriptions)} descriptions for {len(mask_set.masks)} masks"
            )
        if all(mask.empty for mask in mask_set.masks):
            return image
        raster = ppm.decode_ppm(self._store.get(image))
        for mask, description in zip(mask_set.masks, descriptions):
            color = ppm.color_from_text(description)
            for rect in mask.rects:
                ppm.fill_rect(raster, rect, color)
        return self._store.put(ppm.encode_ppm(raster), MediaType.IMAGE_RASTER)


class MockDepth:
    def __init__(self, store: ArtifactStore) -> None:
        self._store = store

    def estimate(self, image: ArtifactRef) -> ArtifactRef:
        import numpy as np

        raster = ppm.decode_ppm(self._store.get(image))
        if raster.width > 1:
            row = (np.arange(raster.width, dtype=np.int64) * 255) // (raster.width - 1)
        else:
            row = np.zeros(1, dtype=np.int64)
        plane = np.repeat(row[np.newaxis, :], raster.height, axis=0).astype(np.uint8)
        out = ppm.Raster(raster.width, raster.height, np.stack([plane] * 3, axis=2))
        return self._store.put(ppm.encode_ppm(out), MediaType.DEPTH_MAP)


class MockStyleTransfer:
    def __init__(self, store: ArtifactStore) -> None:
        self._store = store

    def transfer(
        self,
        style: StyleSpec,
        description: str,
        image: ArtifactRef,
        depth: ArtifactRef,
        edit_strength: float,
    ) -> ArtifactRef:
        import numpy as np

        raster = ppm.decode_ppm(self._store.get(image))
        target = np.array(ppm.color_from_text(style.id), dtype=np.float64)
        pixels = raster.pixels.astype(np.float64)
        blended = np.floor(pixels + (target - pixels) * float(edit_strength) + 0.5)
        out = ppm.Raster(raster.width, raster.height, blended.astype(np.uint8))
        return self._store.put(ppm.encode_ppm(out), MediaType.IMAGE_RASTER)


# ---------------------------------------------------------------------------
# audio and critique


class MockSpeech:
    def __init__(self, store: ArtifactStore) -> None:
        self._store = store

    def synthesize(self, text: str, voice_id: str) -> tuple[ArtifactRef, int]:
        duration_ms = 60 * len(text.split()) + 500
        ref = self._store.put(wave.make_wave(duration_ms), MediaType.AUDIO_WAVE)
        return ref, duration_ms


class MockMusic:
    def __init__(self, store: ArtifactStore) -> None:
        self._store = store

    def select(self, mood_tag: str, duration_ms: int) -> tuple[ArtifactRef, int]:
        sample = (fnv1a64_text(mood_tag) % 2001) - 1000
        ref = self._store.put(wave.make_wave(duration_ms, sample), MediaType.AUDIO_WAVE)
        return ref, duration_ms


class MockCritique:
    """Suggestion fixtures keyed by the FNV-1a hash of the description text.

    ``always_suggest`` makes the critic return the same suggestions for every
    description, which is how tests pin the refine loop at its round bound.
    """

    def __init__(
        self,
        fixtures: Mapping[str, Sequence[str]] | None = None,
        always_suggest: Sequence[str] | None = None,
    ) -> None:
        self._fixtures = {
            fnv1a64_text(text): list(suggestions) for text, suggestions in (fixtures or {}).items()
        }
        self._always = list(always_suggest) if always_suggest else None

    def critique(self, image: ArtifactRef, description: str) -> list[str]:
        if self._always is not None:
            return list(self._always)
        return list(self._fixtures.get(fnv1a64_text(description), []))


class MockAnimate:
    def animate(self, image: ArtifactRef, duration_ms: int) -> ArtifactRef:
        raise NotSupportedError("the mock provider cannot animate stills")


def build_mock_suite(
    store: ArtifactStore,
    *,
    magic_slots: Mapping[str, int] | None = None,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
    critique_fixtures: Mapping[str, Sequence[str]] | None = None,
    critique_always: Sequence[str] | None = None,
) -> AdapterSuite:
    return AdapterSuite(
        text=MockTextGeneration(),
        text_to_image=MockTextToImage(store, magic_slots, width, height),
        segmentation=MockSegmentation(store),
        inpainting=MockInpainting(store),
        depth=MockDepth(store),
        style_transfer=MockStyleTransfer(store),
        speech=MockSpeech(store),
        music=MockMusic(store),
        critique=MockCritique(critique_fixtures, critique_always),
        animate=MockAnimate(),
    )
