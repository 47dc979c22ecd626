"""Command-line interface.

Wraps ProjectService for local use: create a project, plan it, approve,
run, review the storyboard, feed back, and export the render manifest.
``serve`` starts the HTTP API the review console talks to.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from storyreel.errors import StoryReelError
from storyreel.service.config import load_config
from storyreel.service.project import BUILTIN_STYLES, ProjectService


def _echo(value) -> None:
    click.echo(json.dumps(value, indent=2, sort_keys=True))


@click.group()
@click.option(
    "--root",
    type=click.Path(path_type=Path),
    envvar="STORYREEL_ROOT",
    default=None,
    help="Service data directory (defaults to ./storyreel-data).",
)
@click.pass_context
def main(ctx: click.Context, root: Path | None) -> None:
    """Story-to-video production engine."""
    ctx.obj = ProjectService(load_config(root))


def _run_guarded(fn):
    try:
        return fn()
    except StoryReelError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.option("--story", required=True, help="Story proposal text.")
@click.option(
    "--style",
    "style_id",
    default="ink-wash",
    type=click.Choice(sorted(BUILTIN_STYLES)),
    show_default=True,
)
@click.option("--budget", "shot_budget", type=int, default=None, help="Requested shot count.")
@click.option("--id", "project_id", default=None, help="Explicit project id.")
@click.pass_obj
def init(service: ProjectService, story: str, style_id: str, shot_budget, project_id) -> None:
    """Create a project in draft state."""
    doc = _run_guarded(
        lambda: service.create_project(
            story, style_id=style_id, shot_budget=shot_budget, project_id=project_id
        )
    )
    _echo({"id": doc["id"], "status": doc["status"]})


@main.command()
@click.argument("project_id")
@click.pass_obj
def plan(service: ProjectService, project_id: str) -> None:
    """Propose a workflow for the project; parks it for approval."""
    doc = _run_guarded(lambda: service.plan(project_id))
    _echo(
        {
            "id": doc["id"],
            "status": doc["status"],
            "nodes": [n["id"] for n in doc["plan"]["workflow"]["nodes"]],
            "guidance": doc["plan"]["guidance"],
            "repaired": doc["plan"]["repaired"],
        }
    )


@main.command()
@click.argument("project_id")
@click.pass_obj
def approve(service: ProjectService, project_id: str) -> None:
    """Approve the proposed workflow so the project can run."""
    doc = _run_guarded(lambda: service.approve(project_id))
    _echo({"id": doc["id"], "status": doc["status"]})


@main.command()
@click.argument("project_id")
@click.option("--comment", default=None, help="Recorded as workflow feedback before replanning.")
@click.pass_obj
def reject(service: ProjectService, project_id: str, comment: str | None) -> None:
    """Reject the proposed workflow; the project returns to draft."""
    doc = _run_guarded(lambda: service.reject(project_id, comment=comment))
    _echo({"id": doc["id"], "status": doc["status"], "feedback": len(doc["feedback"])})


@main.command()
@click.argument("project_id")
@click.option("--resume", is_flag=True, help="Resume the latest interrupted run.")
@click.pass_obj
def run(service: ProjectService, project_id: str, resume: bool) -> None:
    """Execute the approved workflow end to end."""
    doc = _run_guarded(lambda: service.run(project_id, resume=resume))
    results = doc["results"]
    _echo(
        {
            "id": doc["id"],
            "status": doc["status"],
            "run_count": doc["run_count"],
            "title": results["title"],
            "shots": len(results["image_sets"]),
            "total_duration_ms": results["total_duration_ms"],
            "manifest": results["manifest_ref"]["content_hash"],
        }
    )


@main.command()
@click.argument("project_id", required=False)
@click.pass_obj
def status(service: ProjectService, project_id: str | None) -> None:
    """Show one project (or list all)."""
    if project_id is None:
        _echo(_run_guarded(service.list_projects))
        return
    doc = _run_guarded(lambda: service.get_project(project_id))
    out = {
        "id": doc["id"],
        "status": doc["status"],
        "run_count": doc["run_count"],
        "error": doc["error"],
        "feedback": len(doc["feedback"]),
    }
    if doc["results"]:
        out["title"] = doc["results"]["title"]
        out["total_duration_ms"] = doc["results"]["total_duration_ms"]
    _echo(out)


@main.command()
@click.argument("project_id")
@click.option(
    "--export",
    "export_dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Write storyboard images and prompts to this directory.",
)
@click.pass_obj
def storyboard(service: ProjectService, project_id: str, export_dir: Path | None) -> None:
    """Show the storyboard; optionally export image files."""
    doc = _run_guarded(lambda: service.get_project(project_id))
    if not doc["results"]:
        click.echo("error [not_found]: project has no run results yet", err=True)
        sys.exit(1)
    image_sets = doc["results"]["image_sets"]
    critiques = doc["results"]["critiques"]
    rows = []
    for shot_id in sorted(image_sets):
        image_doc = image_sets[shot_id]
        rows.append(
            {
                "shot_id": shot_id,
                "styled": image_doc["styled"]["content_hash"],
                "attempts": image_doc["attempts"],
                "accepted": critiques[shot_id]["accepted"],
            }
        )
    _echo(rows)
    if export_dir is not None:
        export_dir.mkdir(parents=True, exist_ok=True)
        for shot_id in sorted(image_sets):
            image_doc = image_sets[shot_id]
            data, _ = service.get_artifact(image_doc["styled"]["content_hash"])
            (export_dir / f"{shot_id}.ppm").write_bytes(data)
            (export_dir / f"{shot_id}.prompt.txt").write_text(
                image_doc["prompt"], encoding="utf-8"
            )
        click.echo(f"exported {len(image_sets)} shots to {export_dir}", err=True)


@main.command()
@click.argument("project_id")
@click.option("--target", required=True, help="Review target, e.g. image:action-1-shot-2.")
@click.option("--comment", required=True, help="Reviewer comment.")
@click.pass_obj
def feedback(service: ProjectService, project_id: str, target: str, comment: str) -> None:
    """Submit reviewer feedback; it lands in the experience store."""
    record = _run_guarded(
        lambda: service.feedback(project_id, target=target, comment=comment)
    )
    _echo(record)


@main.group()
def knowledge() -> None:
    """Manage the background knowledge store."""


@knowledge.command("add")
@click.option("--doc-id", required=True)
@click.option("--text", default=None, help="Document text (or use --file).")
@click.option(
    "--file",
    "file_path",
    type=click.Path(path_type=Path, exists=True),
    default=None,
    help="Read document text from a file.",
)
@click.option("--tag", "tags", multiple=True)
@click.pass_obj
def knowledge_add(service: ProjectService, doc_id: str, text, file_path, tags) -> None:
    """Chunk and index a document."""
    if text is None and file_path is None:
        click.echo("error [empty_input]: provide --text or --file", err=True)
        sys.exit(1)
    body = text if text is not None else file_path.read_text(encoding="utf-8")
    chunks = _run_guarded(lambda: service.add_knowledge(doc_id, body, tuple(tags)))
    _echo({"doc_id": doc_id, "chunks": chunks})


@main.command("export-manifest")
@click.argument("project_id")
@click.option(
    "--out",
    type=click.Path(path_type=Path),
    required=True,
    help="Where to write the render manifest JSON.",
)
@click.pass_obj
def export_manifest(service: ProjectService, project_id: str, out: Path) -> None:
    """Write the project's render manifest to a file."""
    doc = _run_guarded(lambda: service.get_project(project_id))
    if not doc["results"]:
        click.echo("error [not_found]: project has no run results yet", err=True)
        sys.exit(1)
    data, _ = service.get_artifact(doc["results"]["manifest_ref"]["content_hash"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    _echo({"path": str(out), "bytes": len(data)})


@main.command()
@click.argument("project_id")
@click.pass_obj
def complete(service: ProjectService, project_id: str) -> None:
    """Mark a reviewed project as completed."""
    doc = _run_guarded(lambda: service.complete(project_id))
    _echo({"id": doc["id"], "status": doc["status"]})


@main.command()
@click.option("--host", default=None, help="Bind address (defaults to config).")
@click.option("--port", type=int, default=None, help="Port (defaults to config).")
@click.pass_obj
def serve(service: ProjectService, host: str | None, port: int | None) -> None:
    """Start the HTTP API for the review console."""
    import uvicorn

    from storyreel.service.api import create_app

    uvicorn.run(
        create_app(service),
        host=host or service.config.host,
        port=port or service.config.port,
        log_level="warning",
    )


if __name__ == "__main__":
    main()
