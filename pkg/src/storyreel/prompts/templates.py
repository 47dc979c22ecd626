"""Prompt templates and retrieval-augmented rendering.

Templates are JSON documents (id, task, body) with ``{slot}`` placeholders.
Rendering fills every placeholder or fails; augmentation appends retrieved
knowledge chunks and experience clauses as trailing sections::

    ### KNOWLEDGE
    - <chunk>

    ### EXPERIENCE
    - <clause>

Sections are omitted when empty, so an unaugmented render is byte-identical
to the bare template fill.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

from storyreel.errors import MissingSlotError, NotFoundError, SchemaError

KNOWLEDGE_HEADER = "### KNOWLEDGE"
EXPERIENCE_HEADER = "### EXPERIENCE"

_FORMATTER = string.Formatter()


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    task: str
    body: str

    def slots(self) -> tuple[str, ...]:
        names = []
        for _, field_name, _, _ in _FORMATTER.parse(self.body):
            if field_name and field_name not in names:
                names.append(field_name)
        return tuple(names)

    def render(self, values: Mapping[str, object]) -> str:
        missing = [name for name in self.slots() if name not in values]
        if missing:
            raise MissingSlotError(
                f"template {self.id} is missing slots: {missing}",
                template_id=self.id,
                slots=missing,
            )
        return self.body.format(**{name: values[name] for name in self.slots()})


def template_from_doc(doc: object) -> PromptTemplate:
    if (
        not isinstance(doc, dict)
        or set(doc) != {"id", "task", "body"}
        or not all(isinstance(doc.get(key), str) and doc[key] for key in ("id", "task", "body"))
    ):
        raise SchemaError("template must be an object with string id, task, body")
    return PromptTemplate(id=doc["id"], task=doc["task"], body=doc["body"])


class TemplateLibrary:
    """Registry of prompt templates, seeded from the packaged builtin set."""

    def __init__(self, seed_builtins: bool = True) -> None:
        self._templates: dict[str, PromptTemplate] = {}
        if seed_builtins:
            for template in load_builtin_templates():
                self.register(template)

    def register(self, template: PromptTemplate) -> None:
        self._templates[template.id] = template

    def get(self, template_id: str) -> PromptTemplate:
        if template_id not in self._templates:
            raise NotFoundError(f"no template {template_id!r}", template_id=template_id)
        return self._templates[template_id]

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._templates))


def load_builtin_templates() -> tuple[PromptTemplate, ...]:
    root = resources.files("storyreel.prompts") / "builtin"
    templates = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            templates.append(template_from_doc(json.loads(entry.read_text(encoding="utf-8"))))
    return tuple(templates)


def _section(header: str, items: Iterable[str]) -> str:
    lines = [header]
    lines.extend(f"- {item}" for item in items)
    return "\n".join(lines)


def augment_prompt(
    rendered: str,
    *,
    knowledge: Sequence[str] = (),
    experience: Sequence[str] = (),
) -> str:
    parts = [rendered]
    if knowledge:
        parts.append(_section(KNOWLEDGE_HEADER, knowledge))
    if experience:
        parts.append(_section(EXPERIENCE_HEADER, experience))
    return "\n\n".join(parts)
