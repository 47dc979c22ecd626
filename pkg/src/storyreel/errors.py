"""Shared error taxonomy.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures without string matching.
"""

from __future__ import annotations


class StoryReelError(Exception):
    """Base class for all engine errors."""

    code = "internal"

    def __init__(self, message: str, **context: object) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        if self.context:
            extras = ", ".join(f"{k}={v!r}" for k, v in sorted(self.context.items()))
            return f"{self.message} ({extras})"
        return self.message


class EmptyTextError(StoryReelError):
    code = "empty_text"


class EmptyInputError(StoryReelError):
    code = "empty_input"


class DimensionMismatchError(StoryReelError):
    code = "dimension_mismatch"


class DuplicateDocError(StoryReelError):
    code = "duplicate_doc"


class DuplicateUtilityError(StoryReelError):
    code = "duplicate_utility"


class NotFoundError(StoryReelError):
    code = "not_found"


class UnknownTargetError(StoryReelError):
    code = "unknown_target"


class SynthesizerFailureError(StoryReelError):
    code = "synthesizer_failure"


class SchemaError(StoryReelError):
    """Malformed document. Carries the offending field path and, when the
    payload was not even valid JSON, the source line."""

    code = "schema"

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None) -> None:
        super().__init__(message, field=field, line=line)
        self.field = field
        self.line = line


class MissingSlotError(StoryReelError):
    code = "missing_slot"


class AdapterFailureError(StoryReelError):
    code = "adapter_failure"


class TransientAdapterError(AdapterFailureError):
    """Retryable provider failure (timeout, 5xx). Mock adapters never raise it."""

    code = "adapter_transient"


class NotSupportedError(AdapterFailureError):
    code = "not_supported"


class OutputUnparseableError(StoryReelError):
    code = "output_unparseable"


class PlannerOutputUnparseableError(OutputUnparseableError):
    code = "planner_output_unparseable"


class ScriptInvalidError(StoryReelError):
    """Generated script still violates contract checks after a repair pass."""

    code = "script_invalid"


class CyclicWorkflowError(StoryReelError):
    code = "cyclic_workflow"


class BudgetMismatchError(StoryReelError):
    code = "budget_mismatch"


class PreconditionViolationError(StoryReelError):
    code = "precondition"


class NegativeOverlapError(StoryReelError):
    code = "negative_overlap"


class IntegrityError(StoryReelError):
    code = "integrity"


class StoreFailureError(StoryReelError):
    code = "store_failure"


class InvalidStatusError(StoryReelError):
    """Operation not allowed in the project's current status."""

    code = "invalid_status"


class WeightInvalidError(StoryReelError):
    code = "weight_invalid"
