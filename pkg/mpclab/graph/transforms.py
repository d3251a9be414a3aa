"""
Structural transforms over legal graphs.

- radius balls and connected components as centered graphs
- D-radius identity of centered graphs (IDs and topology, names ignored)
- disjoint union with name renaming, line graphs, explicit power graphs
- perturbation helpers: index relabelling and name permutation
"""

from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GraphError
from .legal import CenteredGraph, LegalGraph, NodeRecord, default_cap

IdSignature = Tuple[int, FrozenSet[int], FrozenSet[Tuple[int, int]]]


def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def induced_subgraph(
    g: LegalGraph, keep: Iterable[int], cap: Optional[int] = None
) -> Tuple[LegalGraph, Tuple[int, ...]]:
    """Induced subgraph on ``keep`` (kept in index order) and the new-to-old index map."""
    origin = tuple(sorted(set(g.check_node(v) for v in keep)))
    position = {old: new for new, old in enumerate(origin)}
    edges = [
        (position[i], position[j])
        for i, j in g.edges
        if i in position and j in position
    ]
    sub = LegalGraph.build(
        [g.nodes[v] for v in origin], edges, g.cap if cap is None else cap
    )
    return sub, origin


def radius_ball(g: LegalGraph, v: int, r: int) -> CenteredGraph:
    if r < 0:
        raise GraphError(f"radius must be non-negative, got {r}")
    members = g.distances_from(v, limit=r)
    sub, origin = induced_subgraph(g, members)
    return CenteredGraph(sub, origin.index(v), origin)


def connected_component_of(g: LegalGraph, v: int) -> CenteredGraph:
    members = g.distances_from(v)
    sub, origin = induced_subgraph(g, members)
    return CenteredGraph(sub, origin.index(v), origin)


def id_signature(c: CenteredGraph) -> IdSignature:
    """Canonical ID-labelled form: (center ID, ID set, ID edge set)."""
    ids = c.graph.ids()
    edges = frozenset(
        (min(ids[i], ids[j]), max(ids[i], ids[j])) for i, j in c.graph.edges
    )
    return ids[c.center], frozenset(ids), edges


def id_isomorphic(a: CenteredGraph, b: CenteredGraph) -> bool:
    # IDs are unique inside a connected graph, so the signature is canonical.
    return id_signature(a) == id_signature(b)


def d_radius_identical(a: CenteredGraph, b: CenteredGraph, D: int) -> bool:
    return id_isomorphic(
        radius_ball(a.graph, a.center, D), radius_ball(b.graph, b.center, D)
    )


def disjoint_union(
    parts: Sequence[LegalGraph],
    renaming: str = "offset",
    cap: Optional[int] = None,
) -> LegalGraph:
    """
    Node-disjoint union, IDs kept verbatim.

    renaming:
    - ``offset``: each part's names shifted past the largest name used so far;
    - ``sequential``: names replaced by 0..n-1 in union order;
    - ``keep``: names kept (caller guarantees global uniqueness).
    """
    if renaming not in ("offset", "sequential", "keep"):
        raise GraphError(f"unknown renaming policy {renaming!r}")

    nodes: List[NodeRecord] = []
    edges: List[Tuple[int, int]] = []
    offset = 0
    for part in parts:
        base = len(nodes)
        for record in part.nodes:
            if renaming == "offset":
                name = record.name + offset
            elif renaming == "sequential":
                name = len(nodes)
            else:
                name = record.name
            nodes.append(NodeRecord(record.id, name))
        edges.extend((base + i, base + j) for i, j in part.edges)
        if part.n:
            offset = max(offset, max(r.name for r in nodes[base:]) + 1)

    union = LegalGraph.build(nodes, edges, cap)
    overflow = [r.name for r in union.nodes if r.name > union.cap]
    if overflow:
        raise GraphError(
            f"renamed name {max(overflow)} exceeds cap {union.cap}"
        )
    return union


def line_graph(g: LegalGraph, cap: Optional[int] = None) -> LegalGraph:
    """
    One node per edge of ``g`` (sorted edge order); ID and name are the Cantor
    pairing of the sorted endpoint IDs and names. The default cap is the
    largest pairing value reachable from ``g.cap``.
    """
    edges = g.sorted_edges()
    nodes = []
    for i, j in edges:
        a, b = g.nodes[i], g.nodes[j]
        nodes.append(
            NodeRecord(
                cantor_pair(min(a.id, b.id), max(a.id, b.id)),
                cantor_pair(min(a.name, b.name), max(a.name, b.name)),
            )
        )
    limit = cantor_pair(g.cap, g.cap) if cap is None else cap
    for record in nodes:
        if max(record.id, record.name) > limit:
            raise GraphError(f"line-graph pairing {record} overflows cap {limit}")

    incident: Dict[int, List[int]] = {}
    for e, (i, j) in enumerate(edges):
        incident.setdefault(i, []).append(e)
        incident.setdefault(j, []).append(e)
    line_edges = set()
    for members in incident.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                line_edges.add((members[x], members[y]))
    return LegalGraph.build(nodes, line_edges, limit)


def power_graph(g: LegalGraph, r: int) -> LegalGraph:
    """G^r: u ~ v iff 1 <= dist(u, v) <= r."""
    edges = []
    for u in range(g.n):
        for v, dist in g.distances_from(u, limit=r).items():
            if u < v and dist >= 1:
                edges.append((u, v))
    return LegalGraph.build(g.nodes, edges, g.cap)


def relabel_indices(g: LegalGraph, perm: Sequence[int]) -> LegalGraph:
    """Move node ``v`` to index ``perm[v]``; records and topology unchanged."""
    if sorted(perm) != list(range(g.n)):
        raise GraphError("relabelling must be a permutation of the node indices")
    nodes: List[Optional[NodeRecord]] = [None] * g.n
    for v, record in enumerate(g.nodes):
        nodes[perm[v]] = record
    return LegalGraph.build(
        nodes, [(perm[i], perm[j]) for i, j in g.edges], g.cap
    )


def permute_names(g: LegalGraph, rng: np.random.Generator) -> LegalGraph:
    names = g.names()
    shuffled = [names[k] for k in rng.permutation(len(names))]
    return LegalGraph.build(
        [NodeRecord(r.id, nm) for r, nm in zip(g.nodes, shuffled)], g.edges, g.cap
    )


def with_ids(g: LegalGraph, ids: Sequence[int]) -> LegalGraph:
    return LegalGraph.build(
        [NodeRecord(i, r.name) for r, i in zip(g.nodes, ids)], g.edges, g.cap
    )


def pad_isolated(g: LegalGraph, total: int, node_id: int = 0) -> LegalGraph:
    """Append isolated nodes with fresh names until ``total`` nodes exist."""
    if total <= g.n:
        return g
    fresh = max(g.names(), default=-1) + 1
    extra = [NodeRecord(node_id, fresh + k) for k in range(total - g.n)]
    return LegalGraph.build(
        g.nodes + tuple(extra), g.edges, max(g.cap, default_cap(total))
    )
