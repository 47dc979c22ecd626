"""Storyboard image pipeline.

Each shot flows through three stages that each yield a stored artifact:

1. compose: text-to-image from the composed prompt (magic words, shot
   description, retrieved image-category experience),
2. character consistency: segment the named characters, then inpaint every
   recovered region from the character's standalone portrait description,
3. style: estimate a depth map and run depth-guided style transfer with the
   configured edit strength.

A critique loop inspects the styled frame, converts critic suggestions into
image-category feedback, folds them into the experience store, and retries
the whole chain with the enriched guidance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from storyreel.artifacts import ArtifactStore
from storyreel.clocks import Clock
from storyreel.domain.model import ArtifactRef, Character, Shot, StyleSpec
from storyreel.rag.experience import ExperienceStore, ExperienceSynthesizer
from storyreel.rag.records import (
    Author,
    ExperienceCategory,
    ExperienceUpdate,
    FeedbackRecord,
)
from storyreel.utilities.adapters import AdapterSuite
from storyreel.utilities.masks import MaskSet, mask_set_from_bytes

DEFAULT_GUIDANCE_K = 3
# Critic suggestions rarely share vocabulary with the shot description, so
# image guidance keeps every ranked clause instead of score-gating it.
DEFAULT_GUIDANCE_MIN_SCORE = 0.0
DEFAULT_MAX_ROUNDS = 2

_AVOID_PHRASE = re.compile(r"\bavoid[^\"']*[\"']([^\"']+)[\"']", re.IGNORECASE)


def _strip_phrase(text: str, phrase: str) -> str:
    cleaned = re.sub(re.escape(phrase), "", text, flags=re.IGNORECASE)
    cleaned = re.sub(r"\s{2,}", " ", cleaned)
    cleaned = re.sub(r"\s+([,.;:])", r"\1", cleaned)
    cleaned = re.sub(r"([,;])(?:\s*[,;])+", r"\1", cleaned)
    return cleaned.strip(" ,;")


def compose_prompt(
    shot: Shot,
    experience: ExperienceStore,
    *,
    k: int = DEFAULT_GUIDANCE_K,
    min_score: float = DEFAULT_GUIDANCE_MIN_SCORE,
) -> str:
    """Build the text-to-image prompt for a shot.

    Layout is ``<magic words>, <description>[; <experience clauses>]``.
    When a retrieved clause demands avoiding a quoted phrase, that phrase is
    removed from the base text; the clause itself still rides along so the
    generator sees the instruction.
    """
    base = shot.image_description
    if shot.magic_words:
        base = ", ".join(shot.magic_words) + ", " + base
    clauses: list[str] = []
    for hit in experience.retrieve_category(
        shot.image_description, ExperienceCategory.IMAGE, k=k, min_score=min_score
    ):
        clauses.append(experience.get(hit.entry_id).text)
    for clause in clauses:
        for match in _AVOID_PHRASE.finditer(clause):
            base = _strip_phrase(base, match.group(1))
    if clauses:
        return base + "; " + "; ".join(clauses)
    return base


@dataclass(frozen=True)
class ShotImageSet:
    """All artifacts produced for one shot, plus the prompt that drove them."""

    shot_id: str
    prompt: str
    composed: ArtifactRef
    character_consistent: ArtifactRef
    styled: ArtifactRef
    depth: ArtifactRef
    masks: ArtifactRef | None = None
    missing_labels: tuple[str, ...] = ()
    attempts: int = 1

    def to_doc(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "prompt": self.prompt,
            "composed": self.composed.to_doc(),
            "character_consistent": self.character_consistent.to_doc(),
            "styled": self.styled.to_doc(),
            "depth": self.depth.to_doc(),
            "masks": self.masks.to_doc() if self.masks is not None else None,
            "missing_labels": list(self.missing_labels),
            "attempts": self.attempts,
        }

    @staticmethod
    def from_doc(doc: Mapping) -> "ShotImageSet":
        masks = doc.get("masks")
        return ShotImageSet(
            shot_id=doc["shot_id"],
            prompt=doc["prompt"],
            composed=ArtifactRef.from_doc(doc["composed"]),
            character_consistent=ArtifactRef.from_doc(doc["character_consistent"]),
            styled=ArtifactRef.from_doc(doc["styled"]),
            depth=ArtifactRef.from_doc(doc["depth"]),
            masks=ArtifactRef.from_doc(masks) if masks is not None else None,
            missing_labels=tuple(doc.get("missing_labels", ())),
            attempts=int(doc.get("attempts", 1)),
        )


def generate_composed(
    shot: Shot,
    adapters: AdapterSuite,
    experience: ExperienceStore,
    *,
    seed: int,
    k: int = DEFAULT_GUIDANCE_K,
    min_score: float = DEFAULT_GUIDANCE_MIN_SCORE,
) -> tuple[str, ArtifactRef]:
    prompt = compose_prompt(shot, experience, k=k, min_score=min_score)
    layout = [
        (p.character_id, p.box) for p in shot.character_placements
    ]
    ref = adapters.text_to_image.generate(
        prompt, list(shot.magic_words), layout, seed=seed
    )
    return prompt, ref


def enforce_character_consistency(
    composed: ArtifactRef,
    shot: Shot,
    characters: Mapping[str, Character],
    adapters: AdapterSuite,
    store: ArtifactStore,
) -> tuple[ArtifactRef, ArtifactRef | None, tuple[str, ...]]:
    """Re-render each placed character region from its standalone portrait.

    Pixels outside the recovered masks are left untouched. Characters whose
    region could not be recovered are reported as missing; the frame still
    moves on so a weak segmentation never stalls the run.
    """
    labels = [p.character_id for p in shot.character_placements]
    if not labels:
        return composed, None, ()
    masks_ref = adapters.segmentation.segment(composed, labels)
    mask_set: MaskSet = mask_set_from_bytes(store.get(masks_ref))
    descriptions = [characters[label].separate_description for label in labels]
    consistent = adapters.inpainting.inpaint(composed, masks_ref, descriptions)
    return consistent, masks_ref, tuple(mask_set.missing_labels())


def enforce_style(
    image: ArtifactRef,
    shot: Shot,
    style: StyleSpec,
    adapters: AdapterSuite,
) -> tuple[ArtifactRef, ArtifactRef]:
    """Depth-guided restyle. The transfer sees the raw shot description, not
    the composed prompt, so guidance clauses never leak into style content."""
    depth = adapters.depth.estimate(image)
    styled = adapters.style_transfer.transfer(
        style, shot.image_description, image, depth, style.edit_strength
    )
    return styled, depth


def generate_shot_images(
    shot: Shot,
    characters: Mapping[str, Character],
    style: StyleSpec,
    adapters: AdapterSuite,
    store: ArtifactStore,
    experience: ExperienceStore,
    *,
    seed: int,
    guidance_k: int = DEFAULT_GUIDANCE_K,
    guidance_min_score: float = DEFAULT_GUIDANCE_MIN_SCORE,
) -> ShotImageSet:
    prompt, composed = generate_composed(
        shot, adapters, experience, seed=seed, k=guidance_k, min_score=guidance_min_score
    )
    consistent, masks, missing = enforce_character_consistency(
        composed, shot, characters, adapters, store
    )
    styled, depth = enforce_style(consistent, shot, style, adapters)
    return ShotImageSet(
        shot_id=shot.id,
        prompt=prompt,
        composed=composed,
        character_consistent=consistent,
        styled=styled,
        depth=depth,
        masks=masks,
        missing_labels=missing,
    )


@dataclass(frozen=True)
class RefineOutcome:
    accepted: bool
    image_set: ShotImageSet
    outstanding: tuple[str, ...] = ()
    feedback: tuple[FeedbackRecord, ...] = ()
    experience_updates: tuple[ExperienceUpdate, ...] = ()


def critique_and_refine(
    image_set: ShotImageSet,
    shot: Shot,
    characters: Mapping[str, Character],
    style: StyleSpec,
    adapters: AdapterSuite,
    store: ArtifactStore,
    experience: ExperienceStore,
    synthesizer: ExperienceSynthesizer,
    clock: Clock,
    *,
    seed: int,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    guidance_k: int = DEFAULT_GUIDANCE_K,
    guidance_min_score: float = DEFAULT_GUIDANCE_MIN_SCORE,
) -> RefineOutcome:
    """Critique the styled frame and regenerate while suggestions keep coming.

    Every suggestion becomes an image-category feedback record and is folded
    into the experience store before the retry, so the next composition sees
    it. At most ``max_rounds`` regenerations happen; a final critique after
    the loop decides acceptance, so a set that still draws suggestions is
    handed back rejected with those suggestions attached.
    """
    feedback: list[FeedbackRecord] = []
    updates: list[ExperienceUpdate] = []
    current = image_set
    for round_index in range(1, max_rounds + 1):
        suggestions = adapters.critique.critique(current.styled, current.prompt)
        if not suggestions:
            return RefineOutcome(
                accepted=True,
                image_set=current,
                feedback=tuple(feedback),
                experience_updates=tuple(updates),
            )
        for position, text in enumerate(suggestions):
            record = FeedbackRecord(
                id=f"critic:{shot.id}:{round_index}:{position}",
                category=ExperienceCategory.IMAGE,
                text=text,
                author=Author.MULTIMODAL_CRITIC,
                created_at=clock.now(),
            )
            feedback.append(record)
            updates.append(experience.update_experience(record, synthesizer))
        regenerated = generate_shot_images(
            shot,
            characters,
            style,
            adapters,
            store,
            experience,
            seed=seed,
            guidance_k=guidance_k,
            guidance_min_score=guidance_min_score,
        )
        current = replace(regenerated, attempts=current.attempts + 1)
    outstanding = tuple(adapters.critique.critique(current.styled, current.prompt))
    return RefineOutcome(
        accepted=not outstanding,
        image_set=current,
        outstanding=outstanding,
        feedback=tuple(feedback),
        experience_updates=tuple(updates),
    )
