"""Structural validation and deterministic ordering for workflows."""

from __future__ import annotations

from storyreel.errors import CyclicWorkflowError, SchemaError
from storyreel.workflow.model import RUN_INPUTS_SOURCE, Workflow


def _find_cycle(adjacency: dict[str, tuple[str, ...]]) -> list[str]:
    """Return one dependency cycle as a node list with the start repeated."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node: WHITE for node in adjacency}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GREY
        stack.append(node)
        for dep in adjacency[node]:
            if color[dep] == GREY:
                start = stack.index(dep)
                return stack[start:] + [dep]
            if color[dep] == WHITE:
                found = visit(dep)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for node in adjacency:
        if color[node] == WHITE:
            found = visit(node)
            if found:
                return found
    return []


def validate_workflow(workflow: Workflow) -> None:
    """Reject duplicate ids, dangling references, bindings that bypass the
    dependency list, and cycles (reported with a witness path)."""
    seen: set[str] = set()
    for node in workflow.nodes:
        if node.id in seen:
            raise SchemaError(f"duplicate node id {node.id!r}", field=f"nodes.{node.id}")
        seen.add(node.id)

    for node in workflow.nodes:
        for dep in node.depends_on:
            if dep not in seen:
                raise SchemaError(
                    f"depends_on references unknown node {dep!r}",
                    field=f"nodes.{node.id}.depends_on",
                )
            if dep == node.id:
                raise CyclicWorkflowError(
                    f"node {node.id!r} depends on itself", cycle=[node.id, node.id]
                )
        allowed_sources = set(node.depends_on) | {RUN_INPUTS_SOURCE}
        for slot, binding in node.input_bindings.items():
            if binding.node not in allowed_sources:
                raise SchemaError(
                    f"binding source {binding.node!r} is not a declared dependency",
                    field=f"nodes.{node.id}.input_bindings.{slot}",
                )

    adjacency = {node.id: node.depends_on for node in workflow.nodes}
    cycle = _find_cycle(adjacency)
    if cycle:
        raise CyclicWorkflowError(
            "workflow contains a dependency cycle: " + " -> ".join(cycle), cycle=cycle
        )


def topological_order(workflow: Workflow) -> tuple[str, ...]:
    """Kahn's algorithm; ties resolve by declared node order, so the result
    is the same on every run."""
    validate_workflow(workflow)
    position = {node.id: i for i, node in enumerate(workflow.nodes)}
    remaining_deps = {node.id: set(node.depends_on) for node in workflow.nodes}
    dependents: dict[str, list[str]] = {node.id: [] for node in workflow.nodes}
    for node in workflow.nodes:
        for dep in node.depends_on:
            dependents[dep].append(node.id)

    ready = sorted((nid for nid, deps in remaining_deps.items() if not deps), key=position.__getitem__)
    order: list[str] = []
    while ready:
        current = ready.pop(0)
        order.append(current)
        newly_ready = []
        for downstream in dependents[current]:
            remaining_deps[downstream].discard(current)
            if not remaining_deps[downstream]:
                newly_ready.append(downstream)
        ready = sorted(ready + newly_ready, key=position.__getitem__)
    return tuple(order)
