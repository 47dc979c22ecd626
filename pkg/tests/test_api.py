"""HTTP API: endpoint shapes and error-code mapping."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from storyreel.rag.records import Author, ExperienceCategory, FeedbackRecord
from storyreel.service.api import create_app
from storyreel.service.config import Config
from storyreel.service.project import ProjectService

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


@pytest.fixture()
def client(service: ProjectService) -> TestClient:
    return TestClient(create_app(service), raise_server_exceptions=False)


def reviewed(client: TestClient, service: ProjectService) -> str:
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
    pid = client.post("/projects", json={"text": STORY, "shot_budget": 6}).json()["id"]
    client.post(f"/projects/{pid}/plan")
    client.post(f"/projects/{pid}/approve")
    assert client.post(f"/projects/{pid}/run").status_code == 200
    return pid


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_styles_listed(client):
    ids = {s["id"] for s in client.get("/styles").json()}
    assert ids == {"ink-wash", "storybook", "neon", "paper-cut"}


def test_create_project(client):
    r = client.post("/projects", json={"text": STORY, "style_id": "neon"})
    assert r.status_code == 201
    body = r.json()
    assert body["status"] == "draft"
    assert body["proposal"]["style_id"] == "neon"


def test_create_requires_text(client):
    assert client.post("/projects", json={}).status_code == 422
    assert client.post("/projects", json={"text": "  "}).status_code == 422


def test_unknown_style_404(client):
    r = client.post("/projects", json={"text": STORY, "style_id": "crayon"})
    assert r.status_code == 404
    assert r.json()["error"] == "not_found"


def test_duplicate_project_409(client):
    client.post("/projects", json={"text": STORY, "id": "mine"})
    r = client.post("/projects", json={"text": STORY, "id": "mine"})
    assert r.status_code == 409
    assert r.json()["error"] == "duplicate_doc"


def test_missing_project_404(client):
    assert client.get("/projects/nope").status_code == 404
    assert client.post("/projects/nope/plan").status_code == 404


def test_illegal_transition_409(client):
    pid = client.post("/projects", json={"text": STORY}).json()["id"]
    r = client.post(f"/projects/{pid}/run")
    assert r.status_code == 409
    assert r.json()["error"] == "invalid_status"
    assert client.post(f"/projects/{pid}/approve").status_code == 409


def test_plan_approve_reject_cycle(client):
    pid = client.post("/projects", json={"text": STORY}).json()["id"]
    planned = client.post(f"/projects/{pid}/plan").json()
    assert planned["status"] == "awaiting_approval"
    assert [n["id"] for n in planned["plan"]["workflow"]["nodes"]][0] == "title_generation"
    rejected = client.post(f"/projects/{pid}/reject").json()
    assert rejected["status"] == "draft"
    assert rejected["plan"] is None
    client.post(f"/projects/{pid}/plan")
    approved = client.post(f"/projects/{pid}/approve").json()
    assert approved["status"] == "running"


def test_reject_with_comment_records_workflow_feedback(client):
    pid = client.post("/projects", json={"text": STORY}).json()["id"]
    client.post(f"/projects/{pid}/plan")
    rejected = client.post(
        f"/projects/{pid}/reject", json={"comment": "plan fewer scene changes"}
    ).json()
    assert rejected["status"] == "draft"
    (record,) = rejected["feedback"]
    assert record["target"] == "workflow-node:proposal"
    assert record["category"] == "workflow"
    assert record["outcome"] == "inserted"
    entries = client.get("/experience", params={"category": "workflow"}).json()
    assert [e["text"] for e in entries] == ["plan fewer scene changes"]


def test_run_and_results(client, service):
    pid = reviewed(client, service)
    doc = client.get(f"/projects/{pid}").json()
    assert doc["status"] == "needs_review"
    assert set(doc["node_states"].values()) == {"finished"}
    assert len(doc["results"]["image_sets"]) == 6
    listing = client.get("/projects").json()
    assert [p["id"] for p in listing] == [pid]
    assert listing[0]["status"] == "needs_review"


def test_storyboard_and_targets(client, service):
    pid = reviewed(client, service)
    board = client.get(f"/projects/{pid}/storyboard").json()
    assert board["title"] == "The Tale of Young Dragon"
    assert set(board["image_sets"]) == set(board["critiques"])
    targets = {t["target"] for t in client.get(f"/projects/{pid}/targets").json()}
    assert "image:action-1-shot-1" in targets
    assert "workflow-node:video_export" in targets


def test_storyboard_before_run_404(client):
    pid = client.post("/projects", json={"text": STORY}).json()["id"]
    assert client.get(f"/projects/{pid}/storyboard").status_code == 404
    assert client.get(f"/projects/{pid}/manifest").status_code == 404


def test_manifest_served(client, service):
    pid = reviewed(client, service)
    manifest = client.get(f"/projects/{pid}/manifest").json()
    assert manifest["schema_version"] == 1
    assert manifest["frame_rate"] == 30
    assert manifest["total_duration_ms"] == client.get(f"/projects/{pid}").json()[
        "results"
    ]["total_duration_ms"]


def test_artifact_bytes_round_trip(client, service):
    pid = reviewed(client, service)
    image_doc = next(
        iter(client.get(f"/projects/{pid}/storyboard").json()["image_sets"].values())
    )
    content_hash = image_doc["styled"]["content_hash"]
    r = client.get(f"/artifacts/{content_hash}")
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/x-portable-pixmap"
    assert r.content.startswith(b"P6\n512 288\n255\n")
    assert client.get("/artifacts/" + "0" * 64).status_code == 404


def test_feedback_flow(client, service):
    pid = reviewed(client, service)
    first = client.post(
        f"/projects/{pid}/feedback",
        json={"target": "image:action-1-shot-1", "comment": "warmer light on the gate"},
    ).json()
    assert first["outcome"] == "inserted"
    second = client.post(
        f"/projects/{pid}/feedback",
        json={"target": "image:action-1-shot-2", "comment": "warmer light on the gate"},
    ).json()
    assert second["outcome"] == "updated"
    assert second["entry_version"] == 2
    history = client.get(f"/experience/{first['entry_id']}/history").json()
    assert [h["version"] for h in history] == [1, 2]


def test_feedback_bad_target_422(client, service):
    pid = reviewed(client, service)
    r = client.post(f"/projects/{pid}/feedback", json={"target": "bogus", "comment": "x"})
    assert r.status_code == 422
    assert r.json()["error"] == "unknown_target"


def test_experience_category_filter(client, service):
    pid = reviewed(client, service)
    client.post(
        f"/projects/{pid}/feedback",
        json={"target": "prompt:title_generation", "comment": "shorter title"},
    )
    prompts = client.get("/experience", params={"category": "prompt"}).json()
    assert [e["text"] for e in prompts] == ["shorter title"]


def test_scores_endpoints(client, service):
    pid = reviewed(client, service)
    script = client.post(
        f"/projects/{pid}/scores/script",
        json={"completeness": 85, "fidelity": 33, "logical_coherence": 78},
    ).json()
    assert script["overall"] == 66.6
    image = client.post(
        f"/projects/{pid}/scores/images/action-1-shot-1",
        json={"fidelity": 53.61, "rationality": 81.95, "element_state": 93.54},
    ).json()
    assert image["overall"] == 70.10
    combined = client.get(f"/projects/{pid}/scores").json()
    assert combined["script"]["overall"] == 66.6
    assert combined["images"]["action-1-shot-1"]["overall"] == 70.10
    assert combined["image_summary"]["overall"] == 70.10


def test_score_out_of_range_422(client, service):
    pid = reviewed(client, service)
    r = client.post(
        f"/projects/{pid}/scores/script",
        json={"completeness": 185, "fidelity": 33, "logical_coherence": 78},
    )
    assert r.status_code == 422


def test_knowledge_round_trip(client):
    r = client.post(
        "/knowledge",
        json={"doc_id": "lore-1", "text": "Festival lanterns hang from cedar poles.", "tags": ["lore"]},
    )
    assert r.status_code == 201
    assert r.json() == {"doc_id": "lore-1", "chunks": 1}
    entries = client.get("/knowledge").json()
    assert entries[0]["doc_id"] == "lore-1"
    assert client.post(
        "/knowledge", json={"doc_id": "lore-1", "text": "again"}
    ).status_code == 409


def test_utilities_listing_and_suggest(client):
    utilities = client.get("/utilities").json()
    assert {u["id"] for u in utilities} >= {"text_generation", "text_to_image", "inpainting"}
    ranked = client.post(
        "/utilities/suggest",
        json={"goal": "generate an image from a text description of the scene"},
    ).json()
    assert ranked["kind"] == "ranking"
    gap = client.post("/utilities/suggest", json={"goal": "fold origami cranes underwater"}).json()
    assert gap["kind"] == "gap"


def test_complete_flow(client, service):
    pid = reviewed(client, service)
    assert client.post(f"/projects/{pid}/complete").json()["status"] == "completed"
    assert client.post(f"/projects/{pid}/complete").status_code == 409


def test_resume_flag_passes_through(client, service):
    pid = reviewed(client, service)
    r = client.post(f"/projects/{pid}/run", json={"resume": True})
    assert r.status_code == 200
    assert r.json()["run_count"] == 1
