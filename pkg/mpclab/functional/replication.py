"""
Replication graphs: many ID-preserving copies of a base graph plus a few
isolated nodes sharing one ID, and the check that a problem's validity on
the replication carries back to the base graph.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from ..errors import GraphError, PreconditionError
from ..graph.legal import LegalGraph, NodeRecord, default_cap
from .problems import Labeling, ProblemDescriptor, check_labeling, validate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplicationSpec:
    base: LegalGraph
    copies: int
    isolated: int = 0
    isolated_label: Any = None
    houses: int = 2
    cap: Optional[int] = None

    def __post_init__(self):
        if self.copies < 1:
            raise PreconditionError(f"need at least one copy, got {self.copies}")
        if self.isolated < 0:
            raise PreconditionError("isolated count must be non-negative")
        if self.base.n >= 2 and self.isolated >= self.base.n:
            raise PreconditionError(
                f"{self.isolated} isolated nodes, the base graph only has {self.base.n}"
            )

    @property
    def size(self) -> int:
        return self.copies * self.base.n + self.isolated

    @property
    def isolated_id(self) -> int:
        return max(self.base.ids(), default=-1) + 1


def build_replication(spec: ReplicationSpec) -> LegalGraph:
    """
    Copy 0 is the true copy and keeps the base names; every other node gets
    a fresh name above the base names. Copies keep the base IDs.
    """
    g = spec.base
    fresh = max(g.names(), default=-1) + 1
    nodes = list(g.nodes)
    edges = list(g.edges)
    for copy in range(1, spec.copies):
        offset = copy * g.n
        nodes.extend(NodeRecord(r.id, fresh + offset - g.n + v) for v, r in enumerate(g.nodes))
        edges.extend((offset + i, offset + j) for i, j in g.edges)
    start = fresh + (spec.copies - 1) * g.n
    nodes.extend(NodeRecord(spec.isolated_id, start + k) for k in range(spec.isolated))

    cap = spec.cap if spec.cap is not None else max(g.cap, default_cap(len(nodes)))
    top = max((max(r.id, r.name) for r in nodes), default=0)
    if top > cap:
        raise GraphError(f"replication needs IDs and names up to {top}, cap is {cap}")
    return LegalGraph.build(nodes, edges, cap)


def replicate_labeling(spec: ReplicationSpec, L: Sequence[Any]) -> Labeling:
    return tuple(L) * spec.copies + (spec.isolated_label,) * spec.isolated


def check_replication_implication(
    problem: ProblemDescriptor,
    g: LegalGraph,
    L: Sequence[Any],
    ell: Any,
    spec: ReplicationSpec,
) -> bool:
    """valid(L', Γ_G) implies valid(L, G), where L' repeats L per copy and puts ell on isolates."""
    if spec.base != g:
        raise PreconditionError("replication spec is over a different base graph")
    L = check_labeling(problem, g, L)
    spec = ReplicationSpec(g, spec.copies, spec.isolated, ell, spec.houses, spec.cap)
    replicated = build_replication(spec)
    lifted = validate(problem, replicated, replicate_labeling(spec, L)).valid
    if not lifted:
        return True
    holds = validate(problem, g, L).valid
    if not holds:
        logger.warning("%s is valid on the replication but not on the base graph", problem.name)
    return holds
