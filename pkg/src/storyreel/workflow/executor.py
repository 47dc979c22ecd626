"""Checkpointed workflow execution.

Every state change is appended to a run log before it takes effect, so a run
killed mid-node can resume: replay rebuilds the set of finished nodes and
execution continues with only the unfinished ones. Node handlers must be
idempotent for this to be safe; with a content-addressed artifact store,
re-running a half-finished node just rewrites the same blobs.

Nodes whose dependencies are all finished run concurrently on a thread pool.
Transient provider failures are retried a bounded number of times before the
node (and the run) fails.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from storyreel.clocks import Clock, SystemClock
from storyreel.errors import (
    MissingSlotError,
    NotFoundError,
    StoreFailureError,
    TransientAdapterError,
)
from storyreel.workflow.dag import topological_order, validate_workflow
from storyreel.workflow.model import RUN_INPUTS_SOURCE, TaskNode, Workflow

DEFAULT_MAX_WORKERS = 4
DEFAULT_MAX_ATTEMPTS = 3


@dataclass(frozen=True)
class NodeContext:
    """What a handler sees: the node, its resolved inputs, and the run seed."""

    node: TaskNode
    inputs: Mapping[str, Any]
    seed: int


Handler = Callable[[NodeContext], Mapping[str, Any]]


@dataclass
class RunState:
    outputs: dict[str, Mapping[str, Any]] = field(default_factory=dict)
    failed: dict[str, str] = field(default_factory=dict)

    def done(self, node_id: str) -> bool:
        return node_id in self.outputs

    def output(self, node_id: str) -> Mapping[str, Any]:
        if node_id not in self.outputs:
            raise NotFoundError(f"node {node_id} has no recorded output", node_id=node_id)
        return self.outputs[node_id]


class WorkflowExecutor:
    def __init__(
        self,
        workflow: Workflow,
        handlers: Mapping[str, Handler],
        run_log: Path,
        *,
        clock: Clock | None = None,
        seed: int = 42,
        max_workers: int = DEFAULT_MAX_WORKERS,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    ) -> None:
        validate_workflow(workflow)
        for node in workflow.nodes:
            if node.ref not in handlers:
                raise NotFoundError(
                    f"no handler registered for capability {node.ref!r}", ref=node.ref
                )
        self._workflow = workflow
        self._handlers = dict(handlers)
        self._run_log = Path(run_log)
        self._clock = clock or SystemClock()
        self._seed = seed
        self._max_workers = max(1, max_workers)
        self._max_attempts = max(1, max_attempts)
        self._log_lock = threading.Lock()

    def _append_event(self, event: dict[str, Any]) -> None:
        event = dict(event)
        event["at"] = self._clock.now()
        line = json.dumps(event, sort_keys=True, ensure_ascii=True)
        with self._log_lock:
            try:
                self._run_log.parent.mkdir(parents=True, exist_ok=True)
                with open(self._run_log, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise StoreFailureError(f"cannot append run event: {exc}") from exc

    def replay(self) -> RunState:
        """Rebuild run progress from the log. Only ``node_finished`` events
        count; a started-but-unfinished node will simply run again."""
        state = RunState()
        if not self._run_log.exists():
            return state
        for raw in self._run_log.read_text(encoding="utf-8").splitlines():
            raw = raw.strip()
            if not raw:
                continue
            try:
                event = json.loads(raw)
            except json.JSONDecodeError:
                continue
            if event.get("event") == "node_finished":
                state.outputs[event["node"]] = event["output"]
                state.failed.pop(event["node"], None)
            elif event.get("event") == "node_failed":
                state.failed[event["node"]] = event.get("error", "")
        return state

    def _resolve_inputs(self, node: TaskNode, run_inputs: Mapping[str, Any], state: RunState) -> dict[str, Any]:
        resolved: dict[str, Any] = {}
        for slot, binding in node.input_bindings.items():
            if binding.node == RUN_INPUTS_SOURCE:
                if binding.key not in run_inputs:
                    raise MissingSlotError(
                        f"run inputs missing {binding.key!r} needed by {node.id}",
                        slot=slot,
                        node_id=node.id,
                    )
                resolved[slot] = run_inputs[binding.key]
            else:
                output = state.output(binding.node)
                if binding.key not in output:
                    raise MissingSlotError(
                        f"output of {binding.node} has no key {binding.key!r} needed by {node.id}",
                        slot=slot,
                        node_id=node.id,
                    )
                resolved[slot] = output[binding.key]
        return resolved

    def _execute_node(self, node: TaskNode, run_inputs: Mapping[str, Any], state: RunState) -> Mapping[str, Any]:
        inputs = self._resolve_inputs(node, run_inputs, state)
        context = NodeContext(node=node, inputs=inputs, seed=self._seed)
        handler = self._handlers[node.ref]
        attempt = 1
        while True:
            try:
                return handler(context)
            except TransientAdapterError:
                if attempt >= self._max_attempts:
                    raise
                attempt += 1

    def run(self, run_inputs: Mapping[str, Any]) -> RunState:
        """Execute the workflow (or finish a partially executed one)."""
        state = self.replay()
        order = topological_order(self._workflow)
        pending = [nid for nid in order if not state.done(nid)]
        if not pending:
            return state
        self._append_event({"event": "run_started", "pending": pending})

        nodes = {node.id: node for node in self._workflow.nodes}
        remaining: dict[str, set[str]] = {
            nid: {d for d in nodes[nid].depends_on if not state.done(d)} for nid in pending
        }
        position = {nid: i for i, nid in enumerate(order)}
        in_flight: dict[Future, str] = {}
        failure: BaseException | None = None

        with ThreadPoolExecutor(max_workers=self._max_workers) as pool:
            def launch_ready() -> None:
                ready = sorted(
                    (nid for nid, deps in remaining.items() if not deps),
                    key=position.__getitem__,
                )
                for nid in ready:
                    del remaining[nid]
                    self._append_event({"event": "node_started", "node": nid})
                    future = pool.submit(self._execute_node, nodes[nid], run_inputs, state)
                    in_flight[future] = nid

            launch_ready()
            while in_flight:
                finished, _ = wait(in_flight, return_when=FIRST_COMPLETED)
                for future in finished:
                    nid = in_flight.pop(future)
                    try:
                        output = future.result()
                    except BaseException as exc:
                        self._append_event(
                            {"event": "node_failed", "node": nid, "error": str(exc)}
                        )
                        state.failed[nid] = str(exc)
                        if failure is None:
                            failure = exc
                        remaining.clear()
                        continue
                    output = dict(output) if output is not None else {}
                    self._append_event(
                        {"event": "node_finished", "node": nid, "output": output}
                    )
                    state.outputs[nid] = output
                    state.failed.pop(nid, None)
                    for downstream in remaining:
                        remaining[downstream].discard(nid)
                if failure is None:
                    launch_ready()

        if failure is not None:
            raise failure
        self._append_event({"event": "run_finished"})
        return state
