"""Turning reviewer input into experience.

A review targets something concrete (a workflow node, a prompt, a shot
image, or a utility gap report) via a ``<kind>:<identifier>`` string. The
target kind decides which experience category the comment lands in, so
workflow advice never pollutes image guidance and vice versa.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from storyreel.clocks import Clock
from storyreel.errors import UnknownTargetError
from storyreel.rag.experience import ExperienceStore, ExperienceSynthesizer
from storyreel.rag.records import (
    Author,
    ExperienceCategory,
    ExperienceUpdate,
    FeedbackRecord,
)

CATEGORY_BY_TARGET: Mapping[str, ExperienceCategory] = {
    "workflow-node": ExperienceCategory.WORKFLOW,
    "prompt": ExperienceCategory.PROMPT,
    "image": ExperienceCategory.IMAGE,
    "utility-report": ExperienceCategory.UTILITY,
}


def parse_review_target(target: str) -> tuple[str, str]:
    kind, sep, identifier = target.partition(":")
    if not sep or not identifier or kind not in CATEGORY_BY_TARGET:
        raise UnknownTargetError(
            f"review target must look like <kind>:<id> with kind in "
            f"{sorted(CATEGORY_BY_TARGET)}, got {target!r}",
            target=target,
        )
    return kind, identifier


@dataclass(frozen=True)
class ReviewResult:
    record: FeedbackRecord
    update: ExperienceUpdate
    target_kind: str
    target_id: str


def ingest_review(
    experience: ExperienceStore,
    synthesizer: ExperienceSynthesizer,
    clock: Clock,
    *,
    feedback_id: str,
    target: str,
    comment: str,
    author: Author = Author.HUMAN_REVIEWER,
) -> ReviewResult:
    kind, identifier = parse_review_target(target)
    record = FeedbackRecord(
        id=feedback_id,
        category=CATEGORY_BY_TARGET[kind],
        text=comment,
        author=author,
        created_at=clock.now(),
    )
    update = experience.update_experience(record, synthesizer)
    return ReviewResult(record=record, update=update, target_kind=kind, target_id=identifier)
