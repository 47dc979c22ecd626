"""Project service: lifecycle state machine, workflow execution, review flow."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import pytest

from storyreel.errors import (
    DuplicateDocError,
    EmptyInputError,
    InvalidStatusError,
    NotFoundError,
    StoreFailureError,
)
from storyreel.rag.records import Author, ExperienceCategory, FeedbackRecord
from storyreel.scoring.metrics import ImageScores, aggregate_image_scores
from storyreel.service.config import Config, load_config
from storyreel.service.project import BUILTIN_STYLES, ProjectService

STORY = (
    "A young dragon learns to carry lanterns across the mountain village "
    "during the storm festival."
)
BUDGET_LESSON = (
    "For the young dragon lantern story across the mountain village during "
    "the storm festival, use explicit shot number planning."
)


@pytest.fixture()
def service(tmp_path: Path) -> ProjectService:
    return ProjectService(Config(root=tmp_path / "data"))


def teach_budget(service: ProjectService) -> None:
    """Seed the workflow lesson that makes the planner bind the shot budget."""
    service.experience.update_experience(
        FeedbackRecord(
            id="seed-1",
            category=ExperienceCategory.WORKFLOW,
            text=BUDGET_LESSON,
            author=Author.HUMAN_REVIEWER,
            created_at=0,
        ),
        service.synthesizer,
    )


def reviewed_project(service: ProjectService, shot_budget: int | None = None) -> dict:
    if shot_budget is not None:
        teach_budget(service)
    doc = service.create_project(STORY, shot_budget=shot_budget)
    service.plan(doc["id"])
    service.approve(doc["id"])
    return service.run(doc["id"])


class TestLifecycle:
    def test_create_assigns_sequential_ids(self, service):
        first = service.create_project(STORY)
        second = service.create_project("The lighthouse keeper teaches gulls to sing.")
        assert (first["id"], second["id"]) == ("p-0001", "p-0002")
        assert first["status"] == "draft"
        assert first["proposal"]["style_id"] == "ink-wash"

    def test_create_validates_input(self, service):
        with pytest.raises(EmptyInputError):
            service.create_project("   ")
        with pytest.raises(NotFoundError):
            service.create_project(STORY, style_id="oil-paint")
        with pytest.raises(EmptyInputError):
            service.create_project(STORY, shot_budget=0)

    def test_explicit_id_conflict_rejected(self, service):
        service.create_project(STORY, project_id="mine")
        with pytest.raises(DuplicateDocError):
            service.create_project(STORY, project_id="mine")

    def test_plan_parks_for_approval(self, service):
        doc = service.create_project(STORY)
        doc = service.plan(doc["id"])
        assert doc["status"] == "awaiting_approval"
        nodes = doc["plan"]["workflow"]["nodes"]
        assert len(nodes) == 9
        action = next(n for n in nodes if n["id"] == "action_generation")
        assert "shot_budget" not in action["input_bindings"]

    def test_reject_returns_to_draft_and_clears_plan(self, service):
        doc = service.create_project(STORY)
        service.plan(doc["id"])
        doc = service.reject(doc["id"])
        assert doc["status"] == "draft"
        assert doc["plan"] is None
        assert doc["feedback"] == []
        with pytest.raises(InvalidStatusError):
            service.approve(doc["id"])

    def test_reject_comment_becomes_workflow_lesson(self, service):
        doc = service.create_project(STORY, shot_budget=6)
        doc = service.plan(doc["id"])
        assert doc["plan"]["workflow"]["version"] == 1
        assert doc["plan"]["workflow"]["rationale"] == "initial plan"
        doc = service.reject(doc["id"], comment=BUDGET_LESSON)
        assert doc["status"] == "draft"
        assert doc["plan"] is None
        record = doc["feedback"][-1]
        assert record["target"] == "workflow-node:proposal"
        assert record["category"] == "workflow"
        assert record["outcome"] == "inserted"
        # the lesson is live immediately: replanning binds the proposal budget
        doc = service.plan(doc["id"])
        assert doc["plan"]["guidance"] == [BUDGET_LESSON]
        action = next(
            n for n in doc["plan"]["workflow"]["nodes"] if n["id"] == "action_generation"
        )
        assert "shot_budget" in action["input_bindings"]
        # the superseded version stays readable and the chain cites its trigger
        assert doc["plan"]["workflow"]["version"] == 2
        assert doc["plan"]["workflow"]["rationale"] == f"revised after feedback {record['id']}"
        (v1,) = doc["plan_history"]
        assert v1["workflow"]["version"] == 1

    def test_commentless_reject_replans_with_plain_rationale(self, service):
        doc = service.create_project(STORY)
        service.plan(doc["id"])
        service.reject(doc["id"])
        doc = service.plan(doc["id"])
        assert doc["plan"]["workflow"]["version"] == 2
        assert doc["plan"]["workflow"]["rationale"] == "replanned after rejecting version 1"

    def test_node_states_follow_the_latest_run(self, service):
        doc = service.create_project(STORY)
        assert service.get_project(doc["id"])["node_states"] == {}
        service.plan(doc["id"])
        states = service.get_project(doc["id"])["node_states"]
        assert len(states) == 9 and set(states.values()) == {"pending"}
        service.approve(doc["id"])
        service.run(doc["id"])
        states = service.get_project(doc["id"])["node_states"]
        assert len(states) == 9 and set(states.values()) == {"finished"}

    def test_transition_guards(self, service):
        doc = service.create_project(STORY)
        with pytest.raises(InvalidStatusError):
            service.approve(doc["id"])
        with pytest.raises(InvalidStatusError):
            service.run(doc["id"])
        service.plan(doc["id"])
        with pytest.raises(InvalidStatusError):
            service.plan(doc["id"])
        with pytest.raises(InvalidStatusError):
            service.feedback(doc["id"], target="image:x", comment="y")
        with pytest.raises(InvalidStatusError):
            service.complete(doc["id"])

    def test_missing_project(self, service):
        with pytest.raises(NotFoundError):
            service.get_project("p-9999")

    def test_complete_only_once(self, service):
        doc = reviewed_project(service, shot_budget=6)
        done = service.complete(doc["id"])
        assert done["status"] == "completed"
        with pytest.raises(InvalidStatusError):
            service.complete(doc["id"])


class TestRun:
    def test_run_produces_full_results(self, service):
        doc = reviewed_project(service)
        assert doc["status"] == "needs_review"
        results = doc["results"]
        assert results["title"] == "The Tale of Young Dragon"
        # no budget binding in the default plan, so the configured default
        # of 12 shots wins even though the proposal asked for none
        assert len(results["image_sets"]) == 12
        assert set(results["critiques"]) == set(results["image_sets"])
        assert all(c["accepted"] for c in results["critiques"].values())
        assert results["adjustments"] == [
            "action-4-shot-3: trailing transition forced to cut"
        ]
        stages = set(results["prompt_refs"])
        assert {"title_generation", "character_design", "action_planning"} <= stages
        assert any(s.startswith("shot_generation:") for s in stages)

    def test_run_artifacts_resolve(self, service):
        results = reviewed_project(service, shot_budget=6)["results"]
        script_bytes, media = service.get_artifact(results["script_ref"]["content_hash"])
        assert media == "json"
        script_doc = json.loads(script_bytes)
        assert script_doc["title"] == results["title"]
        manifest_bytes, _ = service.get_artifact(results["manifest_ref"]["content_hash"])
        manifest = json.loads(manifest_bytes)
        assert manifest["total_duration_ms"] == results["total_duration_ms"]
        assert manifest["frame_rate"] == 30

    def test_proposal_budget_ignored_without_binding(self, service):
        doc = service.create_project(STORY, shot_budget=6)
        service.plan(doc["id"])
        service.approve(doc["id"])
        doc = service.run(doc["id"])
        assert len(doc["results"]["image_sets"]) == 12

    def test_workflow_lesson_unlocks_budget(self, service):
        teach_budget(service)
        doc = service.create_project(STORY, shot_budget=6)
        doc = service.plan(doc["id"])
        action = next(
            n for n in doc["plan"]["workflow"]["nodes"] if n["id"] == "action_generation"
        )
        assert action["input_bindings"]["shot_budget"] == {
            "node": "inputs",
            "key": "shot_budget",
        }
        assert doc["plan"]["guidance"] == [BUDGET_LESSON]
        service.approve(doc["id"])
        doc = service.run(doc["id"])
        assert len(doc["results"]["image_sets"]) == 6

    def test_revision_run_uses_fresh_checkpoint_log(self, service):
        doc = reviewed_project(service, shot_budget=6)
        pid = doc["id"]
        service.feedback(pid, target="image:action-1-shot-1", comment="warmer light")
        doc = service.run(pid)
        assert doc["status"] == "needs_review"
        assert doc["run_count"] == 2
        runs = Path(service.config.root) / "projects" / pid / "runs"
        assert (runs / "run-1.log").exists()
        assert (runs / "run-2.log").exists()

    def test_failed_run_can_resume_on_same_checkpoint(self, service, tmp_path):
        calls = {"n": 0}
        real = service.adapters.style_transfer

        class Crashy:
            def transfer(self, *args, **kwargs):
                calls["n"] += 1
                if calls["n"] > 3:
                    raise StoreFailureError("simulated crash")
                return real.transfer(*args, **kwargs)

        service.adapters = dataclasses.replace(service.adapters, style_transfer=Crashy())
        teach_budget(service)
        doc = service.create_project(STORY, shot_budget=6)
        service.plan(doc["id"])
        service.approve(doc["id"])
        with pytest.raises(StoreFailureError):
            service.run(doc["id"])
        failed = service.get_project(doc["id"])
        assert failed["status"] == "failed"
        assert "simulated crash" in failed["error"]

        service.adapters = dataclasses.replace(service.adapters, style_transfer=real)
        resumed = service.run(doc["id"], resume=True)
        assert resumed["status"] == "needs_review"
        assert resumed["run_count"] == 1
        assert len(resumed["results"]["image_sets"]) == 6

    def test_two_roots_same_story_byte_identical_artifacts(self, tmp_path):
        def tree(root: Path) -> dict[str, bytes]:
            base = root / "artifacts"
            return {
                str(p.relative_to(base)): p.read_bytes() for p in sorted(base.rglob("blob"))
            }

        docs = []
        for name in ("a", "b"):
            svc = ProjectService(Config(root=tmp_path / name))
            docs.append(reviewed_project(svc, shot_budget=6))
        assert tree(tmp_path / "a") == tree(tmp_path / "b")
        assert docs[0]["results"]["manifest_ref"] == docs[1]["results"]["manifest_ref"]


class TestReview:
    def test_review_targets_cover_nodes_prompts_images(self, service):
        doc = reviewed_project(service, shot_budget=6)
        targets = {t["target"] for t in service.review_targets(doc["id"])}
        assert "workflow-node:shot_generation" in targets
        assert "prompt:title_generation" in targets
        assert "prompt:shot_generation:action-1" in targets
        assert "image:action-1-shot-1" in targets
        assert len([t for t in targets if t.startswith("workflow-node:")]) == 9
        assert len([t for t in targets if t.startswith("image:")]) == 6

    def test_feedback_inserts_then_updates(self, service):
        doc = reviewed_project(service, shot_budget=6)
        pid = doc["id"]
        first = service.feedback(
            pid, target="image:action-1-shot-1", comment="use tighter framing on the bridge"
        )
        assert first["outcome"] == "inserted"
        assert first["id"] == f"{pid}:fb-1"
        second = service.feedback(
            pid, target="image:action-1-shot-2", comment="use tighter framing on the bridge"
        )
        assert second["outcome"] == "updated"
        assert second["entry_id"] == first["entry_id"]
        assert second["entry_version"] == 2
        history = service.experience_history(first["entry_id"])
        assert [h["version"] for h in history] == [1, 2]
        assert history[0]["feedback_id"] == f"{pid}:fb-1"
        stored = service.get_project(pid)["feedback"]
        assert [f["id"] for f in stored] == [f"{pid}:fb-1", f"{pid}:fb-2"]

    def test_feedback_routes_categories(self, service):
        doc = reviewed_project(service, shot_budget=6)
        pid = doc["id"]
        assert (
            service.feedback(pid, target="workflow-node:video_export", comment="x")["category"]
            == "workflow"
        )
        assert (
            service.feedback(pid, target="prompt:title_generation", comment="y")["category"]
            == "prompt"
        )
        assert (
            service.feedback(pid, target="utility-report:gap-1", comment="z")["category"]
            == "utility"
        )

    def test_script_scores_stored(self, service):
        doc = reviewed_project(service, shot_budget=6)
        scores = service.score_script(
            doc["id"], completeness=85, fidelity=33, logical_coherence=78
        )
        assert scores["overall"] == 66.6
        assert service.get_project(doc["id"])["scores"]["script"]["overall"] == 66.6

    def test_image_scores_and_summary(self, service):
        doc = reviewed_project(service, shot_budget=6)
        pid = doc["id"]
        service.score_image(
            pid,
            "action-1-shot-1",
            fidelity=53.61,
            rationality=81.95,
            element_state=93.54,
        )
        second = service.score_image(
            pid,
            "action-1-shot-2",
            fidelity=71.56,
            rationality=86.08,
            element_state=90.67,
        )
        assert second["overall"] == 79.74
        expected = aggregate_image_scores(
            [
                ImageScores.compute(53.61, 81.95, 93.54),
                ImageScores.compute(71.56, 86.08, 90.67),
            ]
        )
        summary = service.image_score_summary(pid)
        assert summary == {
            "fidelity": expected.fidelity,
            "rationality": expected.rationality,
            "element_state": expected.element_state,
            "overall": expected.overall,
        }

    def test_image_score_unknown_shot(self, service):
        doc = reviewed_project(service, shot_budget=6)
        with pytest.raises(NotFoundError):
            service.score_image(
                doc["id"], "nope", fidelity=50, rationality=50, element_state=50
            )

    def test_image_summary_empty(self, service):
        doc = reviewed_project(service, shot_budget=6)
        assert service.image_score_summary(doc["id"]) is None


class TestStores:
    def test_knowledge_add_and_list(self, service):
        chunks = service.add_knowledge(
            "lore-1",
            "Dragons in village folklore carry the festival flame up the mountain "
            "when storms gather.",
            ("folklore",),
        )
        assert chunks == 1
        entries = service.list_knowledge()
        assert len(entries) == 1
        assert entries[0]["doc_id"] == "lore-1"
        assert entries[0]["tags"] == ["folklore"]

    def test_experience_listing_filters_by_category(self, service):
        doc = reviewed_project(service, shot_budget=6)
        service.feedback(doc["id"], target="image:action-1-shot-1", comment="warmer light")
        service.feedback(doc["id"], target="prompt:title_generation", comment="shorter title")
        images = service.list_experience("image")
        prompts = service.list_experience("prompt")
        assert [e["text"] for e in images] == ["warmer light"]
        assert [e["text"] for e in prompts] == ["shorter title"]
        # the two reviews plus the seeded workflow lesson
        assert len(service.list_experience()) == 3

    def test_utility_suggestion_and_gap(self, service):
        ranked = service.suggest_utility(
            "generate an image from a text description of the scene"
        )
        assert ranked["kind"] == "ranking"
        assert ranked["ranking"][0]["utility_id"] == "text_to_image"
        assert ranked["ranking"][0]["score"] >= 0.35
        gap = service.suggest_utility("fold origami cranes underwater")
        assert gap["kind"] == "gap"
        assert "external tool" in gap["suggestion"]

    def test_artifact_lookup_missing(self, service):
        with pytest.raises(NotFoundError):
            service.get_artifact("0" * 64)


class TestConfig:
    def test_env_overrides(self, tmp_path):
        cfg = load_config(
            env={
                "STORYREEL_ROOT": str(tmp_path / "envroot"),
                "STORYREEL_SEED": "7",
                "STORYREEL_DETERMINISTIC": "false",
                "STORYREEL_RETRIEVAL_MIN_SCORE": "0.5",
                "STORYREEL_PROVIDER": "http",
                "STORYREEL_PORT": "9000",
            }
        )
        assert cfg.root == tmp_path / "envroot"
        assert cfg.seed == 7
        assert cfg.deterministic is False
        assert cfg.retrieval_min_score == 0.5
        assert cfg.provider == "http"
        assert cfg.port == 9000

    def test_explicit_root_wins(self, tmp_path):
        cfg = load_config(tmp_path / "given", env={"STORYREEL_ROOT": "/elsewhere"})
        assert cfg.root == tmp_path / "given"

    def test_defaults(self, tmp_path):
        cfg = load_config(tmp_path, env={})
        assert cfg.seed == 42
        assert cfg.deterministic is True
        assert cfg.update_threshold == 0.60
        assert cfg.default_shot_budget == 12

    def test_bad_bool_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            load_config(tmp_path, env={"STORYREEL_DETERMINISTIC": "maybe"})

    def test_unknown_provider_rejected(self, tmp_path):
        with pytest.raises(NotFoundError):
            ProjectService(Config(root=tmp_path / "x", provider="carrier-pigeon"))

    def test_builtin_styles_well_formed(self):
        assert set(BUILTIN_STYLES) == {"ink-wash", "storybook", "neon", "paper-cut"}
        for spec in BUILTIN_STYLES.values():
            assert 0.0 <= spec.edit_strength <= 1.0
