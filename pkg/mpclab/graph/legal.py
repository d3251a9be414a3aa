"""
Legal graphs: undirected graphs whose nodes carry two identifiers.

- ``name`` is unique across the whole graph;
- ``id`` is unique within each connected component, and may repeat across
  components (replication and s-t simulation graphs rely on it);
- both are non-negative integers bounded by a polynomial cap (default n^3).

All values are immutable after construction and safe to share between threads.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from ..errors import GraphError


def default_cap(n: int) -> int:
    """Polynomial ID/name cap for an n-node graph."""
    return max(n, 2) ** 3


@dataclass(frozen=True, order=True)
class NodeRecord:
    id: int
    name: int

    def __words__(self) -> int:
        return 1


@dataclass(frozen=True)
class LegalGraph:
    nodes: Tuple[NodeRecord, ...]
    edges: FrozenSet[Tuple[int, int]]
    cap: int
    adjacency: Tuple[Tuple[int, ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        n = len(self.nodes)
        neighbors: List[List[int]] = [[] for _ in range(n)]
        for i, j in self.edges:
            if not (0 <= i < j < n):
                raise GraphError(f"edge ({i}, {j}) is a loop, unsorted or out of range")
            neighbors[i].append(j)
            neighbors[j].append(i)
        object.__setattr__(
            self, "adjacency", tuple(tuple(sorted(row)) for row in neighbors)
        )

    @classmethod
    def build(
        cls,
        nodes: Iterable[NodeRecord | Tuple[int, int]],
        edges: Iterable[Tuple[int, int]] = (),
        cap: Optional[int] = None,
    ) -> "LegalGraph":
        records = tuple(
            node if isinstance(node, NodeRecord) else NodeRecord(*node) for node in nodes
        )
        normalized = set()
        for i, j in edges:
            if i == j:
                raise GraphError(f"loop at node {i}")
            normalized.add((min(i, j), max(i, j)))
        return cls(
            records,
            frozenset(normalized),
            default_cap(len(records)) if cap is None else cap,
        )

    @classmethod
    def empty(cls) -> "LegalGraph":
        return cls.build(())

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_degree(self) -> int:
        return max((len(row) for row in self.adjacency), default=0)

    def degree(self, v: int) -> int:
        return len(self.adjacency[self.check_node(v)])

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[self.check_node(v)]

    def ids(self) -> List[int]:
        return [record.id for record in self.nodes]

    def names(self) -> List[int]:
        return [record.name for record in self.nodes]

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def check_node(self, v: int) -> int:
        if not isinstance(v, int) or not (0 <= v < self.n):
            raise GraphError(f"invalid node index {v!r} (graph has {self.n} nodes)")
        return v

    def distances_from(self, v: int, limit: Optional[int] = None) -> Dict[int, int]:
        """BFS distances from v, optionally only up to ``limit`` hops."""
        self.check_node(v)
        dist = {v: 0}
        frontier = deque([v])
        while frontier:
            u = frontier.popleft()
            if limit is not None and dist[u] >= limit:
                continue
            for w in self.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    frontier.append(w)
        return dist

    def components(self) -> List[List[int]]:
        seen = [False] * self.n
        result = []
        for start in range(self.n):
            if seen[start]:
                continue
            members = sorted(self.distances_from(start))
            for u in members:
                seen[u] = True
            result.append(members)
        return result

    def is_connected(self) -> bool:
        return self.n == 0 or len(self.distances_from(0)) == self.n

    def __words__(self) -> int:
        return self.n + 2 * self.m


@dataclass(frozen=True)
class CenteredGraph:
    graph: LegalGraph
    center: int
    origin: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        self.graph.check_node(self.center)
        if not self.graph.is_connected():
            raise GraphError("a centered graph must be connected")

    @property
    def center_record(self) -> NodeRecord:
        return self.graph.nodes[self.center]

    def __words__(self) -> int:
        return self.graph.__words__() + 1


@dataclass(frozen=True)
class Violation:
    kind: str
    nodes: Tuple[int, ...]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: Tuple[Violation, ...]
    cap: int

    def kinds(self) -> List[str]:
        return [violation.kind for violation in self.violations]


DUPLICATE_NAME = "duplicate name"
DUPLICATE_ID = "duplicate ID in component"
CAP_VIOLATION = "cap violation"


def validate_legal(g: LegalGraph) -> ValidationReport:
    """
    Report every duplicate name, every duplicate ID inside a connected
    component and every identifier outside [0, cap].
    """
    violations: List[Violation] = []

    for v, record in enumerate(g.nodes):
        for label, value in (("id", record.id), ("name", record.name)):
            if value < 0 or value > g.cap:
                violations.append(
                    Violation(CAP_VIOLATION, (v,), f"{label} {value} outside [0, {g.cap}]")
                )

    by_name: Dict[int, List[int]] = {}
    for v, record in enumerate(g.nodes):
        by_name.setdefault(record.name, []).append(v)
    for name, holders in sorted(by_name.items()):
        if len(holders) > 1:
            violations.append(
                Violation(DUPLICATE_NAME, tuple(holders), f"name {name} held by {holders}")
            )

    for component in g.components():
        by_id: Dict[int, List[int]] = {}
        for v in component:
            by_id.setdefault(g.nodes[v].id, []).append(v)
        for node_id, holders in sorted(by_id.items()):
            if len(holders) > 1:
                violations.append(
                    Violation(DUPLICATE_ID, tuple(holders), f"ID {node_id} held by {holders}")
                )

    return ValidationReport(not violations, tuple(violations), g.cap)


def is_legal(g: LegalGraph) -> bool:
    return validate_legal(g).ok


def require_legal(g: LegalGraph) -> LegalGraph:
    report = validate_legal(g)
    if not report.ok:
        raise GraphError(f"graph is not legal: {report.violations[0].detail}")
    return g


def records(ids: Sequence[int], names: Optional[Sequence[int]] = None) -> Tuple[NodeRecord, ...]:
    names = list(range(len(ids))) if names is None else names
    return tuple(NodeRecord(i, nm) for i, nm in zip(ids, names))
