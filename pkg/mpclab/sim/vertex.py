"""
Pregel-style vertex layer over the MPC engine.

Edge machines announce each edge to both endpoint machines in the first
superstep; node machines then run ``compute`` once per superstep with the
payloads they received, sending to neighbours by node index. A vertex that
votes to halt is woken again by incoming messages.
"""

from abc import abstractmethod
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

from ..graph.legal import NodeRecord
from .engine import MachineItem, Message, MpcAlgorithm, RunContext, StepResult, words

NO_OUTPUT = object()


@dataclass(frozen=True, order=True)
class NeighborRef:
    node: int
    record: NodeRecord

    def __words__(self) -> int:
        return 1


@dataclass(frozen=True)
class VertexView:
    node: int
    record: NodeRecord
    neighbors: Tuple[NeighborRef, ...]
    superstep: int

    @property
    def degree(self) -> int:
        return len(self.neighbors)


@dataclass
class VertexStep:
    value: Any = None
    send: List[Tuple[int, Any]] = field(default_factory=list)
    output: Any = NO_OUTPUT
    halt: bool = False


@dataclass
class VertexState:
    node: int
    record: NodeRecord
    neighbors: Optional[Tuple[NeighborRef, ...]] = None
    value: Any = None
    steps: int = 0
    halted: bool = False

    def __words__(self) -> int:
        return 1 + len(self.neighbors or ()) + words(self.value)


class VertexAlgorithm(MpcAlgorithm):
    needs_neighbors: bool = True

    def init(self, node: int, record: NodeRecord, ctx: RunContext) -> Any:
        return None

    @abstractmethod
    def compute(
        self, view: VertexView, value: Any, messages: Sequence[Any], ctx: RunContext
    ) -> VertexStep:
        ...

    def setup(self, item: MachineItem, ctx: RunContext) -> Any:
        if item.kind == "edge":
            return item
        return VertexState(
            item.node,
            item.record,
            None if self.needs_neighbors else (),
            self.init(item.node, item.record, ctx),
        )

    def step(self, state: Any, inbox: Sequence[Message], ctx: RunContext) -> StepResult:
        if isinstance(state, MachineItem):
            return self._edge_step(state, ctx)

        if state.neighbors is None:
            if ctx.superstep == 1:
                return StepResult(state=state)
            refs = [m.payload for m in inbox if isinstance(m.payload, NeighborRef)]
            state.neighbors = tuple(sorted(refs, key=lambda ref: (ref.record.id, ref.record.name)))
            inbox = [m for m in inbox if not isinstance(m.payload, NeighborRef)]

        if state.halted and not inbox:
            return StepResult(state=state, halt=True)

        state.steps += 1
        view = VertexView(state.node, state.record, state.neighbors, state.steps)
        result = self.compute(view, state.value, [m.payload for m in inbox], ctx)
        state.value = result.value
        state.halted = result.halt
        outputs = {} if result.output is NO_OUTPUT else {state.node: result.output}
        outbox = [(ctx.node_vm(dest), payload) for dest, payload in result.send]
        return StepResult(state=state, outbox=outbox, outputs=outputs, halt=result.halt)

    def _edge_step(self, item: MachineItem, ctx: RunContext) -> StepResult:
        if ctx.superstep != 1 or not self.needs_neighbors:
            return StepResult(state=item, halt=True)
        (i, j), (ri, rj) = item.edge, item.endpoints
        return StepResult(
            state=item,
            outbox=[(ctx.node_vm(i), NeighborRef(j, rj)), (ctx.node_vm(j), NeighborRef(i, ri))],
            halt=True,
        )


def broadcast(view: VertexView, payload: Any) -> List[Tuple[int, Any]]:
    return [(ref.node, payload) for ref in view.neighbors]
