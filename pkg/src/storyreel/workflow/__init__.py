from storyreel.workflow.canon import canonical_nodes_doc
from storyreel.workflow.dag import topological_order, validate_workflow
from storyreel.workflow.executor import (
    Handler,
    NodeContext,
    RunState,
    WorkflowExecutor,
)
from storyreel.workflow.model import (
    Binding,
    TaskKind,
    TaskNode,
    Workflow,
    doc_to_workflow,
    parse_workflow,
    serialize_workflow,
    workflow_to_doc,
)
from storyreel.workflow.planner import PlanResult, default_workflow, propose_workflow

__all__ = [
    "canonical_nodes_doc",
    "topological_order",
    "validate_workflow",
    "Handler",
    "NodeContext",
    "RunState",
    "WorkflowExecutor",
    "Binding",
    "TaskKind",
    "TaskNode",
    "Workflow",
    "doc_to_workflow",
    "parse_workflow",
    "serialize_workflow",
    "workflow_to_doc",
    "PlanResult",
    "default_workflow",
    "propose_workflow",
]
