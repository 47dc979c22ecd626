"""Project orchestration.

A project moves through a small state machine:

    draft -> awaiting_approval -> running -> needs_review -> completed
              |                    |            |
              +-> draft (reject)   +-> failed   +-> running (revision run)

``plan`` asks the workflow planner for a task graph and parks it for human
approval. ``approve`` unlocks execution, ``reject`` throws the plan away.
``run`` executes the approved workflow with checkpointing: a killed run can
be resumed and finishes exactly the nodes that never completed. Reviewer
feedback lands in the experience store and a fresh run picks it up.

Everything a project produces is kept in the content-addressed artifact
store; the project document only holds references, so it stays small and
every byte of output is deduplicated across runs.
"""

from __future__ import annotations

import json
import threading
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from storyreel import canonical
from storyreel.artifacts import ArtifactStore
from storyreel.assembly.materials import (
    material_plan_from_doc,
    material_plan_to_doc,
    plan_materials,
)
from storyreel.assembly.timeline import align_timeline, timeline_from_doc
from storyreel.clocks import Clock, LogicalClock, SystemClock
from storyreel.domain.model import ArtifactRef, Character, StyleSpec
from storyreel.domain.script_doc import doc_to_script, script_to_doc
from storyreel.errors import (
    DuplicateDocError,
    EmptyInputError,
    InvalidStatusError,
    NotFoundError,
)
from storyreel.images.magic import MagicWordRegistry
from storyreel.images.pipeline import (
    ShotImageSet,
    critique_and_refine,
    generate_shot_images,
)
from storyreel.prompts.script_chain import ActionPlan, ScriptChain
from storyreel.prompts.templates import TemplateLibrary
from storyreel.rag.experience import ExperienceStore, ExperienceSynthesizer, PassthroughSynthesizer
from storyreel.rag.knowledge import KnowledgeStore
from storyreel.rag.records import ExperienceCategory
from storyreel.scoring.metrics import ImageScores, ScriptScores, aggregate_image_scores
from storyreel.scoring.reviews import ingest_review
from storyreel.service.config import Config
from storyreel.utilities.adapters import AdapterSuite
from storyreel.utilities.descriptors import UtilityGapReport, UtilityRegistry
from storyreel.utilities.mocks import build_mock_suite
from storyreel.workflow.executor import NodeContext, WorkflowExecutor
from storyreel.workflow.model import Workflow, doc_to_workflow, workflow_to_doc
from storyreel.workflow.planner import propose_workflow


class ProjectStatus(str, Enum):
    DRAFT = "draft"
    AWAITING_APPROVAL = "awaiting_approval"
    RUNNING = "running"
    NEEDS_REVIEW = "needs_review"
    COMPLETED = "completed"
    FAILED = "failed"


BUILTIN_STYLES: dict[str, StyleSpec] = {
    spec.id: spec
    for spec in (
        StyleSpec("ink-wash", "Ink Wash", {"palette": "monochrome"}, 0.6),
        StyleSpec("storybook", "Storybook Gouache", {"palette": "warm"}, 0.5),
        StyleSpec("neon", "Neon Noir", {"palette": "saturated"}, 0.75),
        StyleSpec("paper-cut", "Paper Cutout", {"palette": "flat"}, 0.4),
    )
}


def _style_doc(spec: StyleSpec) -> dict[str, Any]:
    return {
        "id": spec.id,
        "display_name": spec.display_name,
        "adapter_params": dict(spec.adapter_params),
        "edit_strength": spec.edit_strength,
    }


def _style_from_doc(doc: Mapping[str, Any]) -> StyleSpec:
    return StyleSpec(
        id=doc["id"],
        display_name=doc["display_name"],
        adapter_params=dict(doc["adapter_params"]),
        edit_strength=doc["edit_strength"],
    )


def _characters_from_docs(docs) -> tuple[Character, ...]:
    return tuple(
        Character(
            id=d["id"],
            name=d["name"],
            attached_description=d["attached_description"],
            separate_description=d["separate_description"],
        )
        for d in docs
    )


def _character_docs(characters) -> list[dict[str, str]]:
    return [
        {
            "id": c.id,
            "name": c.name,
            "attached_description": c.attached_description,
            "separate_description": c.separate_description,
        }
        for c in characters
    ]


class ProjectService:
    """Facade over stores, providers, and the workflow executor."""

    def __init__(
        self,
        config: Config,
        *,
        adapters: AdapterSuite | None = None,
        synthesizer: ExperienceSynthesizer | None = None,
        clock: Clock | None = None,
    ) -> None:
        self.config = config
        root = Path(config.root)
        root.mkdir(parents=True, exist_ok=True)
        (root / "projects").mkdir(exist_ok=True)
        if clock is not None:
            self.clock = clock
        else:
            self.clock = LogicalClock() if config.deterministic else SystemClock()
        self.store = ArtifactStore(root / "artifacts", clock=self.clock)
        self.knowledge = KnowledgeStore(root / "knowledge.log", clock=self.clock)
        self.experience = ExperienceStore(
            root / "experience.log",
            root / "history.log",
            clock=self.clock,
            update_threshold=config.update_threshold,
        )
        self.synthesizer = synthesizer or PassthroughSynthesizer()
        self.magic = MagicWordRegistry()
        self.templates = TemplateLibrary()
        # utility usage docs live in their own store so goal matching never
        # bleeds into script-prompt knowledge retrieval
        self.utilities = UtilityRegistry(KnowledgeStore(root / "utilities.log", clock=self.clock))
        self.adapters = adapters if adapters is not None else self._build_adapters()
        self._lock = threading.Lock()

    def _build_adapters(self) -> AdapterSuite:
        if self.config.provider == "mock":
            return build_mock_suite(self.store, magic_slots=self.magic.slots())
        if self.config.provider == "http":
            from storyreel.providers import build_http_suite

            return build_http_suite(self.config.provider_base_url, self.store)
        raise NotFoundError(
            f"unknown provider kind {self.config.provider!r}", provider=self.config.provider
        )

    # ------------------------------------------------------------------
    # persistence

    def _project_dir(self, project_id: str) -> Path:
        return Path(self.config.root) / "projects" / project_id

    def _project_path(self, project_id: str) -> Path:
        return self._project_dir(project_id) / "project.json"

    def _load(self, project_id: str) -> dict[str, Any]:
        path = self._project_path(project_id)
        if not path.exists():
            raise NotFoundError(f"project {project_id!r} not found", project_id=project_id)
        return canonical.loads(path.read_text(encoding="utf-8"))

    def _save(self, doc: dict[str, Any]) -> None:
        doc["updated_at"] = self.clock.now()
        path = self._project_path(doc["id"])
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(canonical.dumps(doc) + "\n", encoding="utf-8")
        tmp.replace(path)

    def _require_status(self, doc: Mapping[str, Any], *allowed: ProjectStatus) -> None:
        status = doc["status"]
        if status not in {a.value for a in allowed}:
            raise InvalidStatusError(
                f"project {doc['id']} is {status}; expected "
                + " or ".join(a.value for a in allowed),
                project_id=doc["id"],
                status=status,
            )

    # ------------------------------------------------------------------
    # lifecycle

    def create_project(
        self,
        text: str,
        *,
        style_id: str = "ink-wash",
        shot_budget: int | None = None,
        project_id: str | None = None,
    ) -> dict[str, Any]:
        if not text.strip():
            raise EmptyInputError("story text must be non-empty")
        if style_id not in BUILTIN_STYLES:
            raise NotFoundError(f"unknown style {style_id!r}", style_id=style_id)
        if shot_budget is not None and shot_budget < 1:
            raise EmptyInputError("shot budget must be a positive integer")
        with self._lock:
            if project_id is None:
                existing = self.list_projects()
                project_id = f"p-{len(existing) + 1:04d}"
            elif self._project_path(project_id).exists():
                raise DuplicateDocError(
                    f"project {project_id!r} already exists", project_id=project_id
                )
            now = self.clock.now()
            doc = {
                "id": project_id,
                "status": ProjectStatus.DRAFT.value,
                "proposal": {
                    "text": text,
                    "style_id": style_id,
                    "shot_budget": shot_budget,
                },
                "created_at": now,
                "updated_at": now,
                "run_count": 0,
                "plan": None,
                "plan_history": [],
                "error": None,
                "results": None,
                "feedback": [],
                "scores": {"script": None, "images": {}},
            }
            self._project_dir(project_id).mkdir(parents=True, exist_ok=True)
            (self._project_dir(project_id) / "runs").mkdir(exist_ok=True)
            self._save(doc)
        return doc

    def get_project(self, project_id: str) -> dict[str, Any]:
        doc = self._load(project_id)
        doc["node_states"] = self._node_states(doc)
        return doc

    def _node_states(self, doc: Mapping[str, Any]) -> dict[str, str]:
        """Per-node progress of the latest run, derived from its event log.

        pending / running / finished / failed; a retried node ends on its
        final event, and a resumed run continues the same log.
        """
        if not doc["plan"]:
            return {}
        states = {n["id"]: "pending" for n in doc["plan"]["workflow"]["nodes"]}
        if doc["run_count"] < 1:
            return states
        log = self._run_log(doc["id"], doc["run_count"])
        if not log.exists():
            return states
        for raw in log.read_text(encoding="utf-8").splitlines():
            try:
                event = json.loads(raw)
            except json.JSONDecodeError:
                continue
            node = event.get("node")
            if node not in states:
                continue
            kind = event.get("event")
            if kind == "node_started" and states[node] == "pending":
                states[node] = "running"
            elif kind == "node_finished":
                states[node] = "finished"
            elif kind == "node_failed":
                states[node] = "failed"
        return states

    def list_projects(self) -> list[dict[str, Any]]:
        base = Path(self.config.root) / "projects"
        out = []
        for entry in sorted(base.iterdir()):
            if (entry / "project.json").exists():
                doc = self._load(entry.name)
                out.append(
                    {
                        "id": doc["id"],
                        "status": doc["status"],
                        "created_at": doc["created_at"],
                        "updated_at": doc["updated_at"],
                        "run_count": doc["run_count"],
                        "style_id": doc["proposal"]["style_id"],
                        "text": doc["proposal"]["text"],
                    }
                )
        return out

    def plan(self, project_id: str) -> dict[str, Any]:
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.DRAFT)
        result = propose_workflow(
            self.adapters.text,
            self.experience,
            story_text=doc["proposal"]["text"],
            seed=self.config.seed,
            k=self.config.retrieval_k,
            min_score=self.config.retrieval_min_score,
        )
        workflow = replace(
            result.workflow,
            id=f"{project_id}-workflow",
            version=len(doc.get("plan_history", [])) + 1,
            rationale=self._plan_rationale(doc),
        )
        doc["plan"] = {
            "workflow": workflow_to_doc(workflow),
            "prompt": result.prompt,
            "guidance": list(result.guidance),
            "repaired": result.repaired,
            "at": self.clock.now(),
        }
        doc["status"] = ProjectStatus.AWAITING_APPROVAL.value
        self._save(doc)
        return doc

    def _plan_rationale(self, doc: Mapping[str, Any]) -> str:
        """Why this plan version exists: the feedback that triggered the
        replan when there is one, otherwise the bare rejection."""
        history = doc.get("plan_history", [])
        if not history:
            return "initial plan"
        parked_at = history[-1].get("at", -1)
        triggers = [
            r
            for r in doc["feedback"]
            if r["category"] == ExperienceCategory.WORKFLOW.value and r["at"] > parked_at
        ]
        if triggers:
            return f"revised after feedback {triggers[-1]['id']}"
        return f"replanned after rejecting version {len(history)}"

    def approve(self, project_id: str) -> dict[str, Any]:
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.AWAITING_APPROVAL)
        doc["status"] = ProjectStatus.RUNNING.value
        self._save(doc)
        return doc

    def reject(self, project_id: str, *, comment: str | None = None) -> dict[str, Any]:
        """Send a proposed plan back to draft.

        A comment is recorded as workflow feedback before the plan is
        discarded, so the next plan() already retrieves the lesson.
        """
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.AWAITING_APPROVAL)
        if comment:
            self._record_feedback(doc, target="workflow-node:proposal", comment=comment)
        # superseded plan versions stay readable; only the head is replanned
        doc.setdefault("plan_history", []).append(doc["plan"])
        doc["plan"] = None
        doc["status"] = ProjectStatus.DRAFT.value
        self._save(doc)
        return doc

    def complete(self, project_id: str) -> dict[str, Any]:
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.NEEDS_REVIEW)
        doc["status"] = ProjectStatus.COMPLETED.value
        self._save(doc)
        return doc

    # ------------------------------------------------------------------
    # execution

    def _workflow(self, doc: Mapping[str, Any]) -> Workflow:
        if not doc["plan"]:
            raise InvalidStatusError(
                f"project {doc['id']} has no approved plan", project_id=doc["id"]
            )
        return doc_to_workflow(doc["plan"]["workflow"])

    def _run_log(self, project_id: str, run_number: int) -> Path:
        return self._project_dir(project_id) / "runs" / f"run-{run_number}.log"

    def run(self, project_id: str, *, resume: bool = False) -> dict[str, Any]:
        """Execute the approved workflow.

        A revision run (from needs_review) starts a fresh checkpoint log so
        every node re-executes against the evolved experience store. With
        ``resume`` the latest log is reused and only unfinished nodes run.
        """
        doc = self._load(project_id)
        self._require_status(
            doc, ProjectStatus.RUNNING, ProjectStatus.NEEDS_REVIEW, ProjectStatus.FAILED
        )
        workflow = self._workflow(doc)
        if resume and doc["run_count"] >= 1:
            run_number = doc["run_count"]
        else:
            run_number = doc["run_count"] + 1
        doc["run_count"] = run_number
        doc["status"] = ProjectStatus.RUNNING.value
        doc["error"] = None
        self._save(doc)

        executor = WorkflowExecutor(
            workflow,
            self._handlers(),
            self._run_log(project_id, run_number),
            clock=self.clock,
            seed=self.config.seed,
            max_workers=self.config.max_workers,
        )
        proposal = doc["proposal"]
        budget = proposal["shot_budget"]
        run_inputs = {
            "proposal": {"text": proposal["text"], "style_id": proposal["style_id"]},
            "style": _style_doc(BUILTIN_STYLES[proposal["style_id"]]),
            "shot_budget": budget if budget is not None else self.config.default_shot_budget,
        }
        try:
            state = executor.run(run_inputs)
        except Exception as exc:
            doc = self._load(project_id)
            doc["status"] = ProjectStatus.FAILED.value
            doc["error"] = str(exc)
            self._save(doc)
            raise

        results = self._collect_results(workflow, state.outputs)
        doc = self._load(project_id)
        doc["results"] = results
        doc["status"] = ProjectStatus.NEEDS_REVIEW.value
        self._save(doc)
        return doc

    def _collect_results(
        self, workflow: Workflow, outputs: Mapping[str, Mapping[str, Any]]
    ) -> dict[str, Any]:
        prompt_refs: dict[str, Any] = {}
        for node_output in outputs.values():
            prompt_refs.update(node_output.get("prompt_refs", {}))
        shot_out = outputs["shot_generation"]
        critique_out = outputs["image_critique"]
        material_out = outputs["material_generation"]
        export_out = outputs["video_export"]
        return {
            "title": outputs["title_generation"]["title"],
            "script": shot_out["script"],
            "script_ref": shot_out["script_ref"],
            "repaired_actions": list(shot_out["repaired_actions"]),
            "image_sets": critique_out["image_sets"],
            "critiques": critique_out["critiques"],
            "adjustments": list(material_out["adjustments"]),
            "timeline": outputs["timeline_alignment"]["timeline"],
            "manifest_ref": export_out["manifest_ref"],
            "total_duration_ms": export_out["total_duration_ms"],
            "prompt_refs": prompt_refs,
        }

    # ------------------------------------------------------------------
    # node handlers (keyed by capability ref)

    def _handlers(self):
        return {
            "title_generation": self._node_title,
            "character_design": self._node_characters,
            "action_planning": self._node_actions,
            "shot_generation": self._node_shots,
            "text_to_image": self._node_images,
            "multimodal_critique": self._node_critique,
            "text_to_speech": self._node_materials,
            "timeline_alignment": self._node_timeline,
            "video_export": self._node_export,
        }

    def _chain(self, seed: int) -> ScriptChain:
        return ScriptChain(
            self.adapters.text,
            self.templates,
            self.knowledge,
            self.experience,
            seed=seed,
            known_magic_words=self.magic.phrases(),
        )

    def _node_title(self, ctx: NodeContext) -> Mapping[str, Any]:
        story = ctx.inputs["proposal"]["text"]
        title, stage = self._chain(ctx.seed).generate_title(story)
        ref = self.store.put_text(stage.prompt)
        return {"title": title, "prompt_refs": {stage.stage: ref.to_doc()}}

    def _node_characters(self, ctx: NodeContext) -> Mapping[str, Any]:
        story = ctx.inputs["proposal"]["text"]
        characters, stage = self._chain(ctx.seed).design_characters(story, ctx.inputs["title"])
        ref = self.store.put_text(stage.prompt)
        return {
            "characters": _character_docs(characters),
            "prompt_refs": {stage.stage: ref.to_doc()},
        }

    def _node_actions(self, ctx: NodeContext) -> Mapping[str, Any]:
        story = ctx.inputs["proposal"]["text"]
        characters = _characters_from_docs(ctx.inputs["characters"])
        # the budget input only exists when the planner bound it; otherwise
        # fall back to the configured default
        budget = ctx.inputs.get("shot_budget", self.config.default_shot_budget)
        plans, stage = self._chain(ctx.seed).plan_actions(
            story, ctx.inputs["title"], characters, shot_budget=budget
        )
        ref = self.store.put_text(stage.prompt)
        return {
            "actions": [
                {"id": p.id, "description": p.description, "allocation": p.allocation}
                for p in plans
            ],
            "shot_budget": budget,
            "prompt_refs": {stage.stage: ref.to_doc()},
        }

    def _node_shots(self, ctx: NodeContext) -> Mapping[str, Any]:
        characters = _characters_from_docs(ctx.inputs["characters"])
        plans = tuple(
            ActionPlan(a["id"], a["description"], a["allocation"]) for a in ctx.inputs["actions"]
        )
        result = self._chain(ctx.seed).generate_shots(ctx.inputs["title"], characters, plans)
        script_doc = script_to_doc(result.script)
        script_ref = self.store.put_json(script_doc)
        prompt_refs = {
            stage.stage: self.store.put_text(stage.prompt).to_doc() for stage in result.prompts
        }
        return {
            "script": script_doc,
            "script_ref": script_ref.to_doc(),
            "repaired_actions": list(result.repaired_actions),
            "prompt_refs": prompt_refs,
        }

    def _node_images(self, ctx: NodeContext) -> Mapping[str, Any]:
        script = doc_to_script(ctx.inputs["script"])
        style = _style_from_doc(ctx.inputs["style"])
        characters = {c.id: c for c in script.characters}
        image_sets = {}
        for shot in script.shots():
            image_set = generate_shot_images(
                shot,
                characters,
                style,
                self.adapters,
                self.store,
                self.experience,
                seed=ctx.seed,
                guidance_k=self.config.image_guidance_k,
                guidance_min_score=self.config.image_guidance_min_score,
            )
            image_sets[shot.id] = image_set.to_doc()
        return {"image_sets": image_sets}

    def _node_critique(self, ctx: NodeContext) -> Mapping[str, Any]:
        script = doc_to_script(ctx.inputs["script"])
        style = _style_from_doc(ctx.inputs["style"])
        characters = {c.id: c for c in script.characters}
        image_sets: dict[str, Any] = {}
        critiques: dict[str, Any] = {}
        # sequential on purpose: each refinement writes lessons the next
        # shot's critique retrieves
        for shot in script.shots():
            outcome = critique_and_refine(
                ShotImageSet.from_doc(ctx.inputs["image_sets"][shot.id]),
                shot,
                characters,
                style,
                self.adapters,
                self.store,
                self.experience,
                self.synthesizer,
                self.clock,
                seed=ctx.seed,
                max_rounds=self.config.critique_max_rounds,
                guidance_k=self.config.image_guidance_k,
                guidance_min_score=self.config.image_guidance_min_score,
            )
            image_sets[shot.id] = outcome.image_set.to_doc()
            critiques[shot.id] = {
                "accepted": outcome.accepted,
                "attempts": outcome.image_set.attempts,
                "outstanding": list(outcome.outstanding),
                "feedback_count": len(outcome.feedback),
            }
        return {"image_sets": image_sets, "critiques": critiques}

    def _node_materials(self, ctx: NodeContext) -> Mapping[str, Any]:
        script = doc_to_script(ctx.inputs["script"])
        visuals = {
            shot_id: ArtifactRef.from_doc(image_doc["styled"])
            for shot_id, image_doc in ctx.inputs["image_sets"].items()
        }
        plan = plan_materials(
            script, visuals, self.adapters, min_shot_ms=self.config.min_shot_ms
        )
        return {
            "materials": material_plan_to_doc(plan),
            "adjustments": list(plan.adjustments),
        }

    def _node_timeline(self, ctx: NodeContext) -> Mapping[str, Any]:
        plan = material_plan_from_doc(ctx.inputs["materials"])
        timeline = align_timeline(plan)
        return {"timeline": timeline.to_doc()}

    def _node_export(self, ctx: NodeContext) -> Mapping[str, Any]:
        from storyreel.assembly.manifest import emit_manifest

        timeline = timeline_from_doc(ctx.inputs["timeline"])
        manifest_doc, ref = emit_manifest(timeline, self.store)
        return {
            "manifest_ref": ref.to_doc(),
            "total_duration_ms": manifest_doc["total_duration_ms"],
        }

    # ------------------------------------------------------------------
    # review

    def review_targets(self, project_id: str) -> list[dict[str, str]]:
        doc = self._load(project_id)
        targets: list[dict[str, str]] = []
        if doc["plan"]:
            for node in doc["plan"]["workflow"]["nodes"]:
                targets.append(
                    {"target": f"workflow-node:{node['id']}", "label": f"workflow node {node['id']}"}
                )
        results = doc["results"]
        if results:
            for stage in sorted(results["prompt_refs"]):
                targets.append({"target": f"prompt:{stage}", "label": f"prompt for {stage}"})
            for shot_id in sorted(results["image_sets"]):
                targets.append({"target": f"image:{shot_id}", "label": f"storyboard image {shot_id}"})
        return targets

    def feedback(self, project_id: str, *, target: str, comment: str) -> dict[str, Any]:
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.NEEDS_REVIEW)
        record = self._record_feedback(doc, target=target, comment=comment)
        self._save(doc)
        return record

    def _record_feedback(
        self, doc: dict[str, Any], *, target: str, comment: str
    ) -> dict[str, Any]:
        """Evolve the experience store and append the record to the project.

        The caller saves the doc; a synthesizer failure propagates before
        anything is appended.
        """
        feedback_id = f"{doc['id']}:fb-{len(doc['feedback']) + 1}"
        result = ingest_review(
            self.experience,
            self.synthesizer,
            self.clock,
            feedback_id=feedback_id,
            target=target,
            comment=comment,
        )
        record = {
            "id": feedback_id,
            "target": target,
            "comment": comment,
            "outcome": result.update.outcome,
            "entry_id": result.update.entry.id,
            "entry_version": result.update.entry.version,
            "category": result.update.entry.category.value,
            "at": self.clock.now(),
        }
        doc["feedback"].append(record)
        return record

    def score_script(
        self, project_id: str, *, completeness: float, fidelity: float, logical_coherence: float
    ) -> dict[str, Any]:
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.NEEDS_REVIEW, ProjectStatus.COMPLETED)
        scores = ScriptScores.compute(completeness, fidelity, logical_coherence)
        doc["scores"]["script"] = {
            "completeness": scores.completeness,
            "fidelity": scores.fidelity,
            "logical_coherence": scores.logical_coherence,
            "overall": scores.overall,
        }
        self._save(doc)
        return doc["scores"]["script"]

    def score_image(
        self,
        project_id: str,
        shot_id: str,
        *,
        fidelity: float,
        rationality: float,
        element_state: float,
    ) -> dict[str, Any]:
        doc = self._load(project_id)
        self._require_status(doc, ProjectStatus.NEEDS_REVIEW, ProjectStatus.COMPLETED)
        if not doc["results"] or shot_id not in doc["results"]["image_sets"]:
            raise NotFoundError(f"no storyboard image for shot {shot_id!r}", shot_id=shot_id)
        scores = ImageScores.compute(fidelity, rationality, element_state)
        doc["scores"]["images"][shot_id] = {
            "fidelity": scores.fidelity,
            "rationality": scores.rationality,
            "element_state": scores.element_state,
            "overall": scores.overall,
        }
        self._save(doc)
        return doc["scores"]["images"][shot_id]

    def image_score_summary(self, project_id: str) -> dict[str, Any] | None:
        doc = self._load(project_id)
        rows = doc["scores"]["images"]
        if not rows:
            return None
        aggregate = aggregate_image_scores(
            [
                ImageScores(
                    fidelity=row["fidelity"],
                    rationality=row["rationality"],
                    element_state=row["element_state"],
                    overall=row["overall"],
                )
                for _, row in sorted(rows.items())
            ]
        )
        return {
            "fidelity": aggregate.fidelity,
            "rationality": aggregate.rationality,
            "element_state": aggregate.element_state,
            "overall": aggregate.overall,
        }

    # ------------------------------------------------------------------
    # stores

    def add_knowledge(self, doc_id: str, text: str, tags: tuple[str, ...] = ()) -> int:
        return len(self.knowledge.add_document(doc_id, text, tags=list(tags)))

    def list_knowledge(self) -> list[dict[str, Any]]:
        return [
            {
                "id": e.id,
                "doc_id": e.doc_id,
                "chunk_index": e.chunk_index,
                "text": e.text,
                "tags": list(e.tags),
                "created_at": e.created_at,
            }
            for e in self.knowledge.entries()
        ]

    def list_experience(self, category: str | None = None) -> list[dict[str, Any]]:
        wanted = ExperienceCategory(category) if category else None
        return [
            {
                "id": e.id,
                "category": e.category.value,
                "text": e.text,
                "version": e.version,
                "provenance": list(e.provenance),
                "created_at": e.created_at,
                "updated_at": e.updated_at,
            }
            for e in self.experience.entries(wanted)
        ]

    def experience_history(self, entry_id: str) -> list[dict[str, Any]]:
        return [
            {"version": version, "text": text, "feedback_id": feedback_id}
            for version, text, feedback_id in self.experience.history(entry_id)
        ]

    def suggest_utility(self, goal: str) -> dict[str, Any]:
        outcome = self.utilities.suggest(goal)
        if isinstance(outcome, UtilityGapReport):
            return {
                "kind": "gap",
                "task_goal": outcome.task_goal,
                "best_utility_id": outcome.best_utility_id,
                "best_score": outcome.best_score,
                "threshold": outcome.threshold,
                "suggestion": outcome.suggestion,
            }
        return {
            "kind": "ranking",
            "ranking": [
                {"utility_id": d.id, "display_name": d.display_name, "score": score}
                for d, score in outcome.ranking
            ],
        }

    def get_artifact(self, content_hash: str) -> tuple[bytes, str]:
        data = self.store.get(content_hash)
        stat = self.store.stat(content_hash)
        return data, stat.media_type.value
