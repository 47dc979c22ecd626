from storyreel.scoring.metrics import (
    IMAGE_WEIGHTS,
    SCRIPT_WEIGHTS,
    ImageScores,
    ScriptScores,
    aggregate_image_scores,
    image_overall,
    round_half_up,
    script_overall,
    weighted_overall,
)
from storyreel.scoring.reviews import (
    CATEGORY_BY_TARGET,
    ReviewResult,
    ingest_review,
    parse_review_target,
)

__all__ = [
    "IMAGE_WEIGHTS",
    "SCRIPT_WEIGHTS",
    "ImageScores",
    "ScriptScores",
    "aggregate_image_scores",
    "image_overall",
    "round_half_up",
    "script_overall",
    "weighted_overall",
    "CATEGORY_BY_TARGET",
    "ReviewResult",
    "ingest_review",
    "parse_review_target",
]
