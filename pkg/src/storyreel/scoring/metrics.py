"""Quality rubrics.

Scripts are judged on completeness, fidelity to the proposal, and logical
coherence (weights 0.3 / 0.3 / 0.4, overall to one decimal). Storyboard
images are judged on fidelity, rationality, and element state (weights
0.5 / 0.3 / 0.2, overall to two decimals). Rounding is half-up on the
decimal expansion of the value, not banker's rounding, so 66.65 -> 66.7.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from typing import Mapping, Sequence

from storyreel.errors import WeightInvalidError

SCRIPT_WEIGHTS: Mapping[str, float] = {
    "completeness": 0.3,
    "fidelity": 0.3,
    "logical_coherence": 0.4,
}
IMAGE_WEIGHTS: Mapping[str, float] = {
    "fidelity": 0.5,
    "rationality": 0.3,
    "element_state": 0.2,
}

SCRIPT_OVERALL_PLACES = 1
IMAGE_OVERALL_PLACES = 2


def round_half_up(value: float, places: int) -> float:
    quantum = decimal.Decimal(1).scaleb(-places)
    rounded = decimal.Decimal(repr(value)).quantize(quantum, rounding=decimal.ROUND_HALF_UP)
    return float(rounded)


def _check_score(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name} must be within [0, 100], got {value}")
    return value


def weighted_overall(scores: Mapping[str, float], weights: Mapping[str, float], places: int) -> float:
    if set(scores) != set(weights):
        raise WeightInvalidError(
            f"score dimensions {sorted(scores)} do not match weights {sorted(weights)}"
        )
    if any(w < 0 for w in weights.values()):
        raise WeightInvalidError("weights must be non-negative")
    if abs(sum(weights.values()) - 1.0) > 1e-9:
        raise WeightInvalidError(f"weights must sum to 1, got {sum(weights.values())}")
    total = sum(scores[name] * weights[name] for name in weights)
    return round_half_up(total, places)


def script_overall(completeness: float, fidelity: float, logical_coherence: float) -> float:
    scores = {
        "completeness": _check_score("completeness", completeness),
        "fidelity": _check_score("fidelity", fidelity),
        "logical_coherence": _check_score("logical_coherence", logical_coherence),
    }
    return weighted_overall(scores, SCRIPT_WEIGHTS, SCRIPT_OVERALL_PLACES)


def image_overall(fidelity: float, rationality: float, element_state: float) -> float:
    scores = {
        "fidelity": _check_score("fidelity", fidelity),
        "rationality": _check_score("rationality", rationality),
        "element_state": _check_score("element_state", element_state),
    }
    return weighted_overall(scores, IMAGE_WEIGHTS, IMAGE_OVERALL_PLACES)


@dataclass(frozen=True)
class ScriptScores:
    completeness: float
    fidelity: float
    logical_coherence: float
    overall: float

    @staticmethod
    def compute(completeness: float, fidelity: float, logical_coherence: float) -> "ScriptScores":
        return ScriptScores(
            completeness=completeness,
            fidelity=fidelity,
            logical_coherence=logical_coherence,
            overall=script_overall(completeness, fidelity, logical_coherence),
        )


@dataclass(frozen=True)
class ImageScores:
    fidelity: float
    rationality: float
    element_state: float
    overall: float

    @staticmethod
    def compute(fidelity: float, rationality: float, element_state: float) -> "ImageScores":
        return ImageScores(
            fidelity=fidelity,
            rationality=rationality,
            element_state=element_state,
            overall=image_overall(fidelity, rationality, element_state),
        )


def aggregate_image_scores(rows: Sequence[ImageScores]) -> ImageScores:
    """Collection-level scores: mean each dimension, then take the overall of
    the means. The overall of means equals the mean of (unrounded) per-row
    overalls because the rubric is linear."""
    if not rows:
        raise ValueError("cannot aggregate an empty score collection")
    n = len(rows)
    fidelity = sum(r.fidelity for r in rows) / n
    rationality = sum(r.rationality for r in rows) / n
    element_state = sum(r.element_state for r in rows) / n
    return ImageScores(
        fidelity=round_half_up(fidelity, IMAGE_OVERALL_PLACES),
        rationality=round_half_up(rationality, IMAGE_OVERALL_PLACES),
        element_state=round_half_up(element_state, IMAGE_OVERALL_PLACES),
        overall=image_overall(fidelity, rationality, element_state),
    )
