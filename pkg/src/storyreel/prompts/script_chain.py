"""Script generation chain.

Four provider calls take a story proposal to a full script: title, character
roster, action plan (with per-action shot allocations that must sum to the
shot budget), then shots for each action. Every prompt is template-rendered
and augmented with retrieved knowledge chunks and prompt-category experience,
and every rendered prompt is kept for review.

Per action, a shot batch that fails to parse or breaks script contract checks
gets one repair call with the failure quoted back; if the repair still fails
the chain raises instead of silently shipping a broken script.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from storyreel import canonical
from storyreel.domain.model import Character, Script
from storyreel.domain.script_doc import SCRIPT_SCHEMA_VERSION, doc_to_script
from storyreel.domain.validation import ValidationReport, validate_script
from storyreel.errors import (
    BudgetMismatchError,
    OutputUnparseableError,
    SchemaError,
    ScriptInvalidError,
)
from storyreel.prompts.templates import TemplateLibrary, augment_prompt
from storyreel.rag.experience import ExperienceStore
from storyreel.rag.knowledge import KnowledgeStore
from storyreel.rag.records import ExperienceCategory
from storyreel.utilities.adapters import TextGenerationAdapter

DEFAULT_SHOT_BUDGET = 12
GUIDANCE_K = 2
GUIDANCE_MIN_SCORE = 0.25


@dataclass(frozen=True)
class ActionPlan:
    id: str
    description: str
    allocation: int


@dataclass(frozen=True)
class StagePrompt:
    stage: str
    prompt: str


@dataclass(frozen=True)
class ScriptBuildResult:
    script: Script
    report: ValidationReport
    prompts: tuple[StagePrompt, ...]
    actions: tuple[ActionPlan, ...]
    repaired_actions: tuple[str, ...] = ()


def _parse_json_object(raw: str, *, stage: str, required_key: str) -> Any:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise OutputUnparseableError(
            f"{stage} output is not valid JSON: {exc.msg}", stage=stage
        ) from exc
    if not isinstance(doc, dict) or required_key not in doc:
        raise OutputUnparseableError(
            f"{stage} output must be an object with key {required_key!r}", stage=stage
        )
    return doc[required_key]


class ScriptChain:
    def __init__(
        self,
        adapter: TextGenerationAdapter,
        templates: TemplateLibrary,
        knowledge: KnowledgeStore,
        experience: ExperienceStore,
        *,
        seed: int,
        guidance_k: int = GUIDANCE_K,
        guidance_min_score: float = GUIDANCE_MIN_SCORE,
        known_magic_words: Sequence[str] | None = None,
        max_characters_per_shot: int = 6,
    ) -> None:
        self._adapter = adapter
        self._templates = templates
        self._knowledge = knowledge
        self._experience = experience
        self._seed = seed
        self._k = guidance_k
        self._min_score = guidance_min_score
        self._known_magic_words = tuple(known_magic_words) if known_magic_words else None
        self._max_characters_per_shot = max_characters_per_shot

    def _guidance(self, query: str) -> tuple[list[str], list[str]]:
        chunks = [
            self._knowledge.get(hit.entry_id).text
            for hit in self._knowledge.retrieve(query, k=self._k, min_score=self._min_score)
        ]
        clauses = [
            self._experience.get(hit.entry_id).text
            for hit in self._experience.retrieve_category(
                query, ExperienceCategory.PROMPT, k=self._k, min_score=self._min_score
            )
        ]
        return chunks, clauses

    def _render(self, template_id: str, query: str, values: Mapping[str, object]) -> str:
        rendered = self._templates.get(template_id).render(values)
        chunks, clauses = self._guidance(query)
        return augment_prompt(rendered, knowledge=chunks, experience=clauses)

    def generate_title(self, story: str) -> tuple[str, StagePrompt]:
        prompt = self._render("title_generation", story, {"story": story})
        title = _parse_json_object(
            self._adapter.generate(prompt, seed=self._seed),
            stage="title_generation",
            required_key="title",
        )
        if not isinstance(title, str) or not title.strip():
            raise OutputUnparseableError("title must be a non-empty string", stage="title_generation")
        return title, StagePrompt("title_generation", prompt)

    def design_characters(self, story: str, title: str) -> tuple[tuple[Character, ...], StagePrompt]:
        prompt = self._render("character_design", story, {"story": story, "title": title})
        raw = _parse_json_object(
            self._adapter.generate(prompt, seed=self._seed),
            stage="character_design",
            required_key="characters",
        )
        if not isinstance(raw, list) or not raw:
            raise OutputUnparseableError(
                "characters must be a non-empty list", stage="character_design"
            )
        characters = []
        for item in raw:
            try:
                characters.append(
                    Character(
                        id=item["id"],
                        name=item["name"],
                        attached_description=item["attached_description"],
                        separate_description=item["separate_description"],
                    )
                )
            except (TypeError, KeyError) as exc:
                raise OutputUnparseableError(
                    f"character entry is malformed: {exc}", stage="character_design"
                ) from exc
        return tuple(characters), StagePrompt("character_design", prompt)

    def plan_actions(
        self,
        story: str,
        title: str,
        characters: Sequence[Character],
        *,
        shot_budget: int = DEFAULT_SHOT_BUDGET,
    ) -> tuple[tuple[ActionPlan, ...], StagePrompt]:
        prompt = self._render(
            "action_planning",
            story,
            {
                "story": story,
                "title": title,
                "characters": _characters_json(characters),
                "shot_budget": shot_budget,
            },
        )
        raw = _parse_json_object(
            self._adapter.generate(prompt, seed=self._seed),
            stage="action_planning",
            required_key="actions",
        )
        if not isinstance(raw, list) or not raw:
            raise OutputUnparseableError("actions must be a non-empty list", stage="action_planning")
        plans = []
        seen: set[str] = set()
        for item in raw:
            try:
                plan = ActionPlan(
                    id=item["id"],
                    description=item["description"],
                    allocation=int(item["allocation"]),
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise OutputUnparseableError(
                    f"action entry is malformed: {exc}", stage="action_planning"
                ) from exc
            if plan.allocation < 1:
                raise OutputUnparseableError(
                    f"action {plan.id} has allocation {plan.allocation}; need at least 1",
                    stage="action_planning",
                )
            if plan.id in seen:
                raise OutputUnparseableError(
                    f"duplicate action id {plan.id}", stage="action_planning"
                )
            seen.add(plan.id)
            plans.append(plan)
        total = sum(p.allocation for p in plans)
        if total != shot_budget:
            raise BudgetMismatchError(
                f"action allocations sum to {total} but the shot budget is {shot_budget}",
                budget=shot_budget,
                allocated=total,
            )
        return tuple(plans), StagePrompt("action_planning", prompt)

    def _shots_for_action(
        self,
        title: str,
        characters: Sequence[Character],
        plan: ActionPlan,
        offset: int,
        *,
        repair_note: str | None = None,
    ) -> tuple[list[dict], StagePrompt]:
        prompt = self._render(
            "shot_generation",
            plan.description,
            {
                "title": title,
                "action": plan.description,
                "action_id": plan.id,
                "allocation": plan.allocation,
                "shot_offset": offset,
                "characters": _characters_json(characters),
            },
        )
        if repair_note:
            prompt = prompt + "\nREPAIR: " + repair_note
        raw = _parse_json_object(
            self._adapter.generate(prompt, seed=self._seed),
            stage="shot_generation",
            required_key="shots",
        )
        if not isinstance(raw, list) or len(raw) != plan.allocation:
            raise OutputUnparseableError(
                f"expected {plan.allocation} shots for action {plan.id}, "
                f"got {len(raw) if isinstance(raw, list) else type(raw).__name__}",
                stage="shot_generation",
            )
        return raw, StagePrompt(f"shot_generation:{plan.id}", prompt)

    def _action_failures(
        self,
        title: str,
        characters: Sequence[Character],
        plan: ActionPlan,
        shots: list[dict],
    ) -> str | None:
        """Parse and contract-check one action's shots; None when clean."""
        doc = {
            "schema_version": SCRIPT_SCHEMA_VERSION,
            "title": title,
            "characters": [_character_doc(c) for c in characters],
            "actions": [{"id": plan.id, "description": plan.description, "shots": shots}],
        }
        try:
            script = doc_to_script(doc)
        except SchemaError as exc:
            return str(exc)
        report = validate_script(
            script,
            max_characters_per_shot=self._max_characters_per_shot,
            known_magic_words=self._known_magic_words,
        )
        if report.ok:
            return None
        return "; ".join(f"{v.path}: {v.message}" for v in report.violations)

    def generate_shots(
        self,
        title: str,
        characters: Sequence[Character],
        plans: Sequence[ActionPlan],
    ) -> ScriptBuildResult:
        """Shot stage only: per action, generate, contract-check, repair once."""
        prompts: list[StagePrompt] = []
        repaired: list[str] = []
        action_docs = []
        offset = 0
        for plan in plans:
            shots, p = self._shots_for_action(title, characters, plan, offset)
            prompts.append(p)
            failures = self._action_failures(title, characters, plan, shots)
            if failures is not None:
                shots, p = self._shots_for_action(
                    title, characters, plan, offset, repair_note=failures
                )
                prompts.append(p)
                repaired.append(plan.id)
                failures = self._action_failures(title, characters, plan, shots)
                if failures is not None:
                    raise ScriptInvalidError(
                        f"action {plan.id} still fails contract checks after repair: {failures}",
                        action_id=plan.id,
                    )
            action_docs.append(
                {"id": plan.id, "description": plan.description, "shots": shots}
            )
            offset += plan.allocation

        doc = {
            "schema_version": SCRIPT_SCHEMA_VERSION,
            "title": title,
            "characters": [_character_doc(c) for c in characters],
            "actions": action_docs,
        }
        script = doc_to_script(doc)
        report = validate_script(
            script,
            max_characters_per_shot=self._max_characters_per_shot,
            known_magic_words=self._known_magic_words,
        )
        if not report.ok:
            raise ScriptInvalidError(
                "assembled script fails contract checks: "
                + "; ".join(f"{v.path}: {v.message}" for v in report.violations)
            )
        return ScriptBuildResult(
            script=script,
            report=report,
            prompts=tuple(prompts),
            actions=tuple(plans),
            repaired_actions=tuple(repaired),
        )

    def build_script(
        self, story: str, *, shot_budget: int = DEFAULT_SHOT_BUDGET
    ) -> ScriptBuildResult:
        prompts: list[StagePrompt] = []
        title, p = self.generate_title(story)
        prompts.append(p)
        characters, p = self.design_characters(story, title)
        prompts.append(p)
        plans, p = self.plan_actions(story, title, characters, shot_budget=shot_budget)
        prompts.append(p)
        shots_result = self.generate_shots(title, characters, plans)
        return ScriptBuildResult(
            script=shots_result.script,
            report=shots_result.report,
            prompts=tuple(prompts) + shots_result.prompts,
            actions=shots_result.actions,
            repaired_actions=shots_result.repaired_actions,
        )


def _character_doc(character: Character) -> dict[str, str]:
    return {
        "id": character.id,
        "name": character.name,
        "attached_description": character.attached_description,
        "separate_description": character.separate_description,
    }


def _characters_json(characters: Sequence[Character]) -> str:
    return canonical.dumps([_character_doc(c) for c in characters])
