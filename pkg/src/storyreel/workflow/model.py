"""Workflow document model.

A workflow is a DAG of task nodes. Each node names the capability it runs
(``ref``), the nodes it depends on, and where each of its inputs comes from:
either a key of another node's output or a key of the run inputs (source
``"inputs"``). Binding sources are restricted to declared dependencies so
the dependency list alone determines scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from storyreel import canonical
from storyreel.errors import SchemaError

WORKFLOW_SCHEMA_VERSION = 1
RUN_INPUTS_SOURCE = "inputs"


class TaskKind(str, Enum):
    LLM = "llm"
    UTILITY = "utility"
    ASSEMBLY = "assembly"


@dataclass(frozen=True)
class Binding:
    node: str
    key: str

    def to_doc(self) -> dict[str, str]:
        return {"node": self.node, "key": self.key}


@dataclass(frozen=True)
class TaskNode:
    id: str
    kind: TaskKind
    ref: str
    depends_on: tuple[str, ...] = ()
    input_bindings: Mapping[str, Binding] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TaskKind(self.kind))
        object.__setattr__(self, "depends_on", tuple(self.depends_on))
        object.__setattr__(self, "input_bindings", dict(self.input_bindings))


@dataclass(frozen=True)
class Workflow:
    nodes: tuple[TaskNode, ...]
    # versions chain densely from 1; the rationale says where a version came
    # from ("initial plan", or the feedback that triggered a revision)
    id: str = "workflow"
    version: int = 1
    rationale: str = "initial plan"

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not isinstance(self.version, int) or self.version < 1:
            raise ValueError(f"workflow version must be a positive integer, got {self.version!r}")

    def ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, node_id: str) -> TaskNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)


def workflow_to_doc(workflow: Workflow) -> dict[str, Any]:
    return {
        "schema_version": WORKFLOW_SCHEMA_VERSION,
        "id": workflow.id,
        "version": workflow.version,
        "rationale": workflow.rationale,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "ref": n.ref,
                "depends_on": list(n.depends_on),
                "input_bindings": {
                    slot: binding.to_doc() for slot, binding in n.input_bindings.items()
                },
            }
            for n in workflow.nodes
        ],
    }


def serialize_workflow(workflow: Workflow) -> str:
    return canonical.dumps(workflow_to_doc(workflow))


def _node_from_doc(doc: Any, index: int) -> TaskNode:
    path = f"nodes[{index}]"
    if not isinstance(doc, dict):
        raise SchemaError("expected object", field=path)
    allowed = {"id", "kind", "ref", "depends_on", "input_bindings"}
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}", field=path)
    for key in ("id", "kind", "ref"):
        if not isinstance(doc.get(key), str) or not doc[key]:
            raise SchemaError("expected non-empty string", field=f"{path}.{key}")
    try:
        kind = TaskKind(doc["kind"])
    except ValueError as exc:
        raise SchemaError(str(exc), field=f"{path}.kind") from exc
    deps = doc.get("depends_on", [])
    if not isinstance(deps, list) or not all(isinstance(d, str) for d in deps):
        raise SchemaError("expected array of strings", field=f"{path}.depends_on")
    bindings_doc = doc.get("input_bindings", {})
    if not isinstance(bindings_doc, dict):
        raise SchemaError("expected object", field=f"{path}.input_bindings")
    bindings: dict[str, Binding] = {}
    for slot, b in bindings_doc.items():
        bpath = f"{path}.input_bindings.{slot}"
        if (
            not isinstance(b, dict)
            or set(b) != {"node", "key"}
            or not isinstance(b.get("node"), str)
            or not isinstance(b.get("key"), str)
        ):
            raise SchemaError("expected {node, key} object", field=bpath)
        bindings[slot] = Binding(node=b["node"], key=b["key"])
    return TaskNode(
        id=doc["id"], kind=kind, ref=doc["ref"], depends_on=tuple(deps), input_bindings=bindings
    )


def doc_to_workflow(doc: Any) -> Workflow:
    if not isinstance(doc, dict):
        raise SchemaError("expected object", field="<root>")
    allowed = {"schema_version", "nodes", "id", "version", "rationale"}
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}", field="<root>")
    if "schema_version" in doc and doc["schema_version"] != WORKFLOW_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {doc['schema_version']!r}", field="schema_version"
        )
    workflow_id = doc.get("id", "workflow")
    if not isinstance(workflow_id, str) or not workflow_id:
        raise SchemaError("expected non-empty string", field="id")
    version = doc.get("version", 1)
    if not isinstance(version, int) or isinstance(version, bool) or version < 1:
        raise SchemaError("expected positive integer", field="version")
    rationale = doc.get("rationale", "initial plan")
    if not isinstance(rationale, str):
        raise SchemaError("expected string", field="rationale")
    nodes_doc = doc.get("nodes")
    if not isinstance(nodes_doc, list) or not nodes_doc:
        raise SchemaError("expected non-empty array", field="nodes")
    return Workflow(
        nodes=tuple(_node_from_doc(n, i) for i, n in enumerate(nodes_doc)),
        id=workflow_id,
        version=version,
        rationale=rationale,
    )


def parse_workflow(text: str | bytes) -> Workflow:
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return doc_to_workflow(doc)
