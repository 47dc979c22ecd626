"""HTTP surface for the production engine.

Thin JSON layer over ProjectService: every route delegates to one service
call, and domain errors map onto status codes (missing things are 404,
illegal state transitions and duplicates are 409, malformed input is 422).
The review console is built entirely against this API.
"""

from __future__ import annotations

import json
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from storyreel.domain.model import MediaType
from storyreel.errors import (
    DuplicateDocError,
    DuplicateUtilityError,
    EmptyInputError,
    EmptyTextError,
    InvalidStatusError,
    NotFoundError,
    SchemaError,
    StoryReelError,
    UnknownTargetError,
    WeightInvalidError,
)
from storyreel.service.project import BUILTIN_STYLES, ProjectService, _style_doc

_CONTENT_TYPES = {
    MediaType.IMAGE_RASTER.value: "image/x-portable-pixmap",
    MediaType.DEPTH_MAP.value: "image/x-portable-pixmap",
    MediaType.MASK_SET.value: "application/octet-stream",
    MediaType.AUDIO_WAVE.value: "audio/wav",
    MediaType.JSON.value: "application/json",
    MediaType.TEXT.value: "text/plain; charset=utf-8",
}

_STATUS_BY_ERROR: tuple[tuple[type[StoryReelError], int], ...] = (
    (NotFoundError, 404),
    (InvalidStatusError, 409),
    (DuplicateDocError, 409),
    (DuplicateUtilityError, 409),
    (UnknownTargetError, 422),
    (SchemaError, 422),
    (EmptyInputError, 422),
    (EmptyTextError, 422),
    (WeightInvalidError, 422),
)


class CreateProjectBody(BaseModel):
    text: str
    style_id: str = "ink-wash"
    shot_budget: int | None = None
    id: str | None = None


class RunBody(BaseModel):
    resume: bool = False


class RejectBody(BaseModel):
    comment: str | None = None


class FeedbackBody(BaseModel):
    target: str
    comment: str


class ScriptScoreBody(BaseModel):
    completeness: float
    fidelity: float
    logical_coherence: float


class ImageScoreBody(BaseModel):
    fidelity: float
    rationality: float
    element_state: float


class KnowledgeBody(BaseModel):
    doc_id: str
    text: str
    tags: list[str] = []


class SuggestBody(BaseModel):
    goal: str


def create_app(service: ProjectService) -> FastAPI:
    app = FastAPI(title="storyreel", version="0.1.0")

    @app.exception_handler(StoryReelError)
    async def _domain_error(request: Request, exc: StoryReelError) -> JSONResponse:
        status = 500
        for kind, mapped in _STATUS_BY_ERROR:
            if isinstance(exc, kind):
                status = mapped
                break
        payload: dict[str, Any] = {"error": exc.code, "message": str(exc)}
        if exc.context:
            payload["context"] = {k: v for k, v in exc.context.items() if _jsonable(v)}
        return JSONResponse(payload, status_code=status)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse({"error": "invalid_value", "message": str(exc)}, status_code=422)

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/styles")
    def styles() -> list[dict[str, Any]]:
        return [_style_doc(spec) for spec in BUILTIN_STYLES.values()]

    @app.post("/projects", status_code=201)
    def create_project(body: CreateProjectBody) -> dict[str, Any]:
        return service.create_project(
            body.text,
            style_id=body.style_id,
            shot_budget=body.shot_budget,
            project_id=body.id,
        )

    @app.get("/projects")
    def list_projects() -> list[dict[str, Any]]:
        return service.list_projects()

    @app.get("/projects/{project_id}")
    def get_project(project_id: str) -> dict[str, Any]:
        return service.get_project(project_id)

    @app.post("/projects/{project_id}/plan")
    def plan(project_id: str) -> dict[str, Any]:
        return service.plan(project_id)

    @app.post("/projects/{project_id}/approve")
    def approve(project_id: str) -> dict[str, Any]:
        return service.approve(project_id)

    @app.post("/projects/{project_id}/reject")
    def reject(project_id: str, body: RejectBody | None = None) -> dict[str, Any]:
        return service.reject(project_id, comment=body.comment if body else None)

    @app.post("/projects/{project_id}/run")
    def run(project_id: str, body: RunBody | None = None) -> dict[str, Any]:
        resume = body.resume if body else False
        return service.run(project_id, resume=resume)

    @app.post("/projects/{project_id}/complete")
    def complete(project_id: str) -> dict[str, Any]:
        return service.complete(project_id)

    @app.get("/projects/{project_id}/targets")
    def targets(project_id: str) -> list[dict[str, str]]:
        return service.review_targets(project_id)

    @app.post("/projects/{project_id}/feedback")
    def feedback(project_id: str, body: FeedbackBody) -> dict[str, Any]:
        return service.feedback(project_id, target=body.target, comment=body.comment)

    @app.post("/projects/{project_id}/scores/script")
    def score_script(project_id: str, body: ScriptScoreBody) -> dict[str, Any]:
        return service.score_script(
            project_id,
            completeness=body.completeness,
            fidelity=body.fidelity,
            logical_coherence=body.logical_coherence,
        )

    @app.post("/projects/{project_id}/scores/images/{shot_id}")
    def score_image(project_id: str, shot_id: str, body: ImageScoreBody) -> dict[str, Any]:
        return service.score_image(
            project_id,
            shot_id,
            fidelity=body.fidelity,
            rationality=body.rationality,
            element_state=body.element_state,
        )

    @app.get("/projects/{project_id}/scores")
    def scores(project_id: str) -> dict[str, Any]:
        doc = service.get_project(project_id)
        return {
            "script": doc["scores"]["script"],
            "images": doc["scores"]["images"],
            "image_summary": service.image_score_summary(project_id),
        }

    @app.get("/projects/{project_id}/storyboard")
    def storyboard(project_id: str) -> dict[str, Any]:
        doc = service.get_project(project_id)
        if not doc["results"]:
            raise NotFoundError(
                f"project {project_id} has no run results yet", project_id=project_id
            )
        return {
            "title": doc["results"]["title"],
            "image_sets": doc["results"]["image_sets"],
            "critiques": doc["results"]["critiques"],
        }

    @app.get("/projects/{project_id}/manifest")
    def manifest(project_id: str) -> dict[str, Any]:
        doc = service.get_project(project_id)
        if not doc["results"]:
            raise NotFoundError(
                f"project {project_id} has no run results yet", project_id=project_id
            )
        data, _ = service.get_artifact(doc["results"]["manifest_ref"]["content_hash"])
        return json.loads(data)

    @app.get("/artifacts/{content_hash}")
    def artifact(content_hash: str) -> Response:
        data, media_type = service.get_artifact(content_hash)
        return Response(
            content=data,
            media_type=_CONTENT_TYPES.get(media_type, "application/octet-stream"),
        )

    @app.get("/experience")
    def experience(category: str | None = None) -> list[dict[str, Any]]:
        return service.list_experience(category)

    @app.get("/experience/{entry_id}/history")
    def experience_history(entry_id: str) -> list[dict[str, Any]]:
        return service.experience_history(entry_id)

    @app.get("/knowledge")
    def knowledge() -> list[dict[str, Any]]:
        return service.list_knowledge()

    @app.post("/knowledge", status_code=201)
    def add_knowledge(body: KnowledgeBody) -> dict[str, Any]:
        chunks = service.add_knowledge(body.doc_id, body.text, tuple(body.tags))
        return {"doc_id": body.doc_id, "chunks": chunks}

    @app.get("/utilities")
    def utilities() -> list[dict[str, Any]]:
        return [
            {
                "id": d.id,
                "capability": d.capability.value,
                "display_name": d.display_name,
                "usage_instructions": d.usage_instructions,
                "provider_kinds": list(d.provider_kinds),
            }
            for d in service.utilities.descriptors()
        ]

    @app.post("/utilities/suggest")
    def suggest(body: SuggestBody) -> dict[str, Any]:
        return service.suggest_utility(body.goal)

    return app


def _jsonable(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool, type(None)))
