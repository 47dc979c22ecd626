"""Workflow planning.

The planner asks the text provider for a workflow document, folding in any
workflow-category experience so past reviewer guidance (say, a preference
for explicit shot budgeting) shapes the plan. Provider output that fails to
parse gets exactly one repair round-trip with the parse error quoted back;
a second failure is surfaced to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from storyreel.errors import PlannerOutputUnparseableError, PreconditionViolationError, SchemaError
from storyreel.rag.experience import ExperienceStore, ExperienceSynthesizer
from storyreel.rag.records import ExperienceCategory, FeedbackRecord
from storyreel.utilities.adapters import TextGenerationAdapter
from storyreel.workflow.canon import canonical_nodes_doc
from storyreel.workflow.dag import validate_workflow
from storyreel.workflow.model import Workflow, doc_to_workflow, parse_workflow

PLANNER_GUIDANCE_K = 3
PLANNER_GUIDANCE_MIN_SCORE = 0.25


def default_workflow(*, include_budget_binding: bool = False) -> Workflow:
    """The stock nine-node production pipeline, defined in code so it exists
    even without a text provider."""
    workflow = doc_to_workflow(canonical_nodes_doc(include_budget_binding=include_budget_binding))
    validate_workflow(workflow)
    return workflow


@dataclass(frozen=True)
class PlanResult:
    workflow: Workflow
    prompt: str
    guidance: tuple[str, ...]
    repaired: bool


def build_planner_prompt(story_text: str, guidance: tuple[str, ...]) -> str:
    lines = ["TASK: plan_workflow", f"STORY: {story_text}"]
    if guidance:
        lines.append("EXPERIENCE: " + "; ".join(guidance))
    return "\n".join(lines)


def propose_workflow(
    adapter: TextGenerationAdapter,
    experience: ExperienceStore,
    *,
    story_text: str,
    seed: int,
    k: int = PLANNER_GUIDANCE_K,
    min_score: float = PLANNER_GUIDANCE_MIN_SCORE,
) -> PlanResult:
    guidance = tuple(
        experience.get(hit.entry_id).text
        for hit in experience.retrieve_category(
            story_text, ExperienceCategory.WORKFLOW, k=k, min_score=min_score
        )
    )
    prompt = build_planner_prompt(story_text, guidance)
    raw = adapter.generate(prompt, seed=seed)
    try:
        workflow = parse_workflow(raw)
        validate_workflow(workflow)
        return PlanResult(workflow=workflow, prompt=prompt, guidance=guidance, repaired=False)
    except SchemaError as first_error:
        repair_prompt = (
            prompt
            + f"\nREPAIR: previous output failed to parse: {first_error}"
            + "\nOUTPUT: workflow JSON only"
        )
        raw = adapter.generate(repair_prompt, seed=seed)
        try:
            workflow = parse_workflow(raw)
            validate_workflow(workflow)
        except SchemaError as second_error:
            raise PlannerOutputUnparseableError(
                f"planner output failed to parse twice: {second_error}",
                first_error=str(first_error),
            ) from second_error
        return PlanResult(workflow=workflow, prompt=repair_prompt, guidance=guidance, repaired=True)


def apply_workflow_feedback(
    adapter: TextGenerationAdapter,
    experience: ExperienceStore,
    synthesizer: ExperienceSynthesizer,
    current: Workflow,
    feedback: FeedbackRecord,
    *,
    story_text: str,
    seed: int,
    k: int = PLANNER_GUIDANCE_K,
    min_score: float = PLANNER_GUIDANCE_MIN_SCORE,
) -> PlanResult:
    """Evolve the experience store with workflow feedback, then re-plan.

    The new workflow continues the version chain (old version + 1) and its
    rationale cites the feedback that triggered it; the caller keeps the old
    version, which is never mutated. Experience is updated first, so the
    re-plan already retrieves the lesson. A store or planner failure leaves
    the current version untouched.
    """
    if feedback.category is not ExperienceCategory.WORKFLOW:
        raise PreconditionViolationError(
            f"workflow feedback required, got category {feedback.category.value!r}",
            feedback_id=feedback.id,
        )
    experience.update_experience(feedback, synthesizer)
    result = propose_workflow(
        adapter, experience, story_text=story_text, seed=seed, k=k, min_score=min_score
    )
    revised = replace(
        result.workflow,
        id=current.id,
        version=current.version + 1,
        rationale=f"revised after feedback {feedback.id}",
    )
    return PlanResult(
        workflow=revised,
        prompt=result.prompt,
        guidance=result.guidance,
        repaired=result.repaired,
    )
