"""
Reusable MPC programs.

- ConstantLabel: every node outputs a fixed label without communicating
- GatherAll: ships the whole input to machine 0 (violates low space on purpose)
- CollectBalls: graph exponentiation, r-radius balls in ceil(log2 r) + 2 rounds
- CollectReach: the node indices within r hops, one doubling step cheaper
- BallLocal: a fixed-seed function of the ID-labelled r-ball
- AggregateSum: fan-in-F tree sum over nodes with the total broadcast back
- LubyJoin: one Luby step per branch over priorities computed locally
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..graph.legal import CenteredGraph, LegalGraph
from ..graph.transforms import id_signature
from .engine import (
    CLAIMED_STABLE,
    UNKNOWN,
    MachineItem,
    MpcAlgorithm,
    RunContext,
    StepResult,
)
from .vertex import NeighborRef, VertexAlgorithm, VertexStep, VertexView, broadcast

logger = logging.getLogger(__name__)


class ConstantLabel(MpcAlgorithm):
    stability = CLAIMED_STABLE

    def __init__(self, label: Any = 0):
        self.label = label
        self.name = "constant_label"

    def step(self, state, inbox, ctx) -> StepResult:
        if state is not None and state.kind == "node":
            return StepResult(state=state, outputs={state.node: self.label}, halt=True)
        return StepResult(state=state, halt=True)

    def setup(self, item: MachineItem, ctx: RunContext):
        return item


class GatherAll(MpcAlgorithm):
    """Every machine sends its input item to machine 0, which labels each node with its degree."""

    name = "gather_all"

    def setup(self, item: MachineItem, ctx: RunContext):
        return {"item": item, "held": ()}

    def step(self, state, inbox, ctx) -> StepResult:
        item = state["item"]
        if ctx.superstep == 1:
            return StepResult(state=state, outbox=[(0, item)])
        if item.vm != 0:
            return StepResult(state={"item": item, "held": ()}, halt=True)
        held = tuple(m.payload for m in inbox)
        degree: Dict[int, int] = {}
        for got in held:
            if got.kind == "node":
                degree.setdefault(got.node, 0)
            else:
                for v in got.edge:
                    degree[v] = degree.get(v, 0) + 1
        return StepResult(state={"item": item, "held": held}, outputs=degree, halt=True)


@dataclass(frozen=True)
class Knowledge:
    """Edges with an endpoint within R of the holder, plus all their endpoints."""

    nodes: frozenset
    edges: frozenset
    radius: int

    def __words__(self) -> int:
        return len(self.nodes) + 2 * len(self.edges)

    def merge(self, others: Sequence["Knowledge"], radius: int) -> "Knowledge":
        nodes = set(self.nodes)
        edges = set(self.edges)
        for other in others:
            nodes |= other.nodes
            edges |= other.edges
        return Knowledge(frozenset(nodes), frozenset(edges), radius)

    def distances(self, source: int, limit: int) -> Dict[int, int]:
        adjacency: Dict[int, List[int]] = {}
        for i, j in self.edges:
            adjacency.setdefault(i, []).append(j)
            adjacency.setdefault(j, []).append(i)
        dist = {source: 0}
        frontier = [source]
        while frontier:
            nxt = []
            for u in frontier:
                if dist[u] >= limit:
                    continue
                for w in adjacency.get(u, ()):
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        return dist

    def ball(self, center: int, r: int, cap: int) -> CenteredGraph:
        members = sorted(self.distances(center, r))
        position = {v: k for k, v in enumerate(members)}
        records = {ref.node: ref.record for ref in self.nodes}
        edges = [
            (position[i], position[j])
            for i, j in self.edges
            if i in position and j in position
        ]
        graph = LegalGraph.build([records[v] for v in members], edges, cap)
        return CenteredGraph(graph, position[center], tuple(members))


class CollectBalls(VertexAlgorithm):
    """
    Graph exponentiation. After the edge announcement every node knows the
    edges at radius 0; each later round a node sends what it knows to every
    node within (known radius + 1), so radii grow 0, 1, 3, 7, ...
    """

    stability = CLAIMED_STABLE

    def __init__(
        self,
        radius: int,
        cap: int,
        finish: Optional[Callable[[CenteredGraph, RunContext], Any]] = None,
        name: str = "collect_balls",
    ):
        self.radius = radius
        self.cap = cap
        self.finish = finish
        self.name = name
        self.needs_neighbors = radius > 0

    def _emit(self, knowledge: Knowledge, view: VertexView, ctx: RunContext):
        ball = knowledge.ball(view.node, self.radius, self.cap)
        return ball if self.finish is None else self.finish(ball, ctx)

    def compute(self, view, value, messages, ctx) -> VertexStep:
        me = NeighborRef(view.node, view.record)
        if value is None:
            knowledge = Knowledge(
                frozenset((me, *view.neighbors)),
                frozenset((min(view.node, ref.node), max(view.node, ref.node)) for ref in view.neighbors),
                0,
            )
            if self.radius == 0:
                return VertexStep(knowledge, output=self._emit(knowledge, view, ctx), halt=True)
            return VertexStep(knowledge, send=broadcast(view, knowledge))

        knowledge = value.merge(messages, 2 * value.radius + 1)
        if knowledge.radius >= self.radius:
            return VertexStep(knowledge, output=self._emit(knowledge, view, ctx), halt=True)
        reach = knowledge.distances(view.node, knowledge.radius + 1)
        send = [(u, knowledge) for u in sorted(reach) if u != view.node]
        return VertexStep(knowledge, send=send)


def ball_digest(ball: CenteredGraph, ctx: RunContext, modulus: int = 2**16) -> int:
    """Fixed-seed function of the ID-labelled ball and (n, Δ, N)."""
    center, ids, edges = id_signature(ball)
    text = repr((center, sorted(ids), sorted(edges), ctx.meta.n, ctx.meta.max_degree, ctx.meta.size_estimate))
    head = ctx.meta.seed_hex[:128] or "00"
    key = bytes.fromhex(head.zfill(len(head) + len(head) % 2))
    digest = hashlib.blake2b(text.encode(), key=key, digest_size=8)
    return int.from_bytes(digest.digest(), "big") % modulus


class BallLocal(CollectBalls):
    def __init__(self, radius: int, cap: int, fn: Callable[[CenteredGraph, RunContext], Any] = ball_digest):
        super().__init__(radius, cap, finish=fn, name="ball_local")

    def consumed_segments(self, meta):
        return [(self.name, 0, min(meta.seed_bits, 512))]


class AggregateSum(MpcAlgorithm):
    """
    Sum one vector per node along a tree over node indices (parent of v is
    (v - 1) // F) and broadcast the total back down. Every node outputs the
    total; rounds are twice the tree height.
    """

    def __init__(self, vectors: Sequence[Sequence[Any]], length: int, fan_in: Optional[int] = None, name: str = "aggregate_sum"):
        self.vectors = vectors
        self.length = length
        self.fan_in = fan_in
        self.name = name

    def fan(self, budget: int) -> int:
        if self.fan_in is not None:
            return self.fan_in
        # state (2 + L + F) plus an inbox of F messages of L + 1 words
        return max(2, (budget - self.length - 4) // (self.length + 3))

    def setup(self, item: MachineItem, ctx: RunContext):
        if item.kind != "node":
            return None
        v, n, F = item.node, ctx.n, self.fan(ctx.budget)
        children = [c for c in range(F * v + 1, F * v + F + 1) if c < n]
        return AggregateState(v, children, list(self.vectors[v]), len(children))

    def step(self, state, inbox, ctx) -> StepResult:
        if state is None:
            return StepResult(halt=True)
        if state.done:
            return StepResult(state=state, halt=True)
        F = self.fan(ctx.budget)
        for message in inbox:
            kind, vector = message.payload
            if kind == "down":
                state.done = True
                total = list(vector)
                return StepResult(
                    state=state,
                    outbox=[(c, ("down", tuple(total))) for c in state.children],
                    outputs={state.node: tuple(total)},
                    halt=True,
                )
            state.acc = [a + b for a, b in zip(state.acc, vector)]
            state.pending -= 1
        if state.pending == 0 and not state.sent:
            state.sent = True
            if state.node == 0:
                state.done = True
                total = tuple(state.acc)
                return StepResult(
                    state=state,
                    outbox=[(c, ("down", total)) for c in state.children],
                    outputs={0: total},
                    halt=True,
                )
            return StepResult(state=state, outbox=[((state.node - 1) // F, ("up", tuple(state.acc)))])
        return StepResult(state=state)


@dataclass
class AggregateState:
    node: int
    children: List[int]
    acc: List[Any]
    pending: int
    sent: bool = False
    done: bool = False

    def __words__(self) -> int:
        return 2 + len(self.acc) + len(self.children)


Priority = Tuple[int, int]


class LubyJoin(VertexAlgorithm):
    """
    One Luby step for several independent branches at once: a node joins
    branch b iff its priority (value, key) is strictly smallest in its
    closed neighbourhood. Outputs a bool, or a tuple of bools per branch.
    """

    def __init__(
        self,
        priorities: Callable[[VertexView, RunContext], Sequence[Priority]],
        branches: int = 1,
        name: str = "luby_join",
        stability: str = UNKNOWN,
        seed_bits: int = 0,
    ):
        self.priorities = priorities
        self.branches = branches
        self.name = name
        self.stability = stability
        self.seed_bits = seed_bits

    def _label(self, joined: Sequence[bool]):
        return joined[0] if self.branches == 1 else tuple(joined)

    def compute(self, view, value, messages, ctx) -> VertexStep:
        if value is None:
            mine = tuple(self.priorities(view, ctx))
            if not view.neighbors:
                return VertexStep(mine, output=self._label([True] * self.branches), halt=True)
            return VertexStep(mine, send=broadcast(view, mine))
        joined = [
            all(value[b] < theirs[b] for theirs in messages) for b in range(self.branches)
        ]
        return VertexStep(value, output=self._label(joined), halt=True)


class CollectReach(CollectBalls):
    """Node indices within ``radius`` hops of each node; knowledge of radius - 1 suffices."""

    def __init__(self, radius: int, cap: int, name: str = "collect_reach"):
        super().__init__(max(radius - 1, 0), cap, name=name)
        self.reach = radius
        self.needs_neighbors = radius > 0

    def _emit(self, knowledge: Knowledge, view: VertexView, ctx: RunContext):
        return tuple(sorted(knowledge.distances(view.node, self.reach)))
