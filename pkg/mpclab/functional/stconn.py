"""
s-t connectivity simulation graphs.

A host graph H with terminals s, t and a value h(u) in [1, D] per node is
turned into two legal graphs, one built from G and one from G'. Node s
hosts every layer of G up to h(s), t hosts every layer beyond D and an
interior node u hosts exactly layer h(u). The component of v_s (G's
center hosted at s) is all of G exactly when s, t are the ends of a path
whose values climb by one up to D next to t; otherwise it is the same
D-bounded piece on both sides.

Surviving nodes: degree > 2 nodes are discarded, then an interior node is
kept iff its two neighbours carry h(u) - 1 and h(u) + 1, t counts as
D + 1 and a neighbour s must carry h(u) - 1.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import partial
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from tqdm import tqdm

from ..errors import GraphError, PreconditionError
from ..graph.generators import from_networkx
from ..graph.legal import CenteredGraph, LegalGraph, NodeRecord, default_cap
from ..graph.transforms import (
    cantor_pair,
    connected_component_of,
    d_radius_identical,
    disjoint_union,
    id_isomorphic,
    pad_isolated,
)
from ..utils import ordered_map, worker_count

logger = logging.getLogger(__name__)

CASE1 = "case1"
CASE2 = "case2"
MISMATCH = "mismatch"
EARLY_EXIT_NO = "early-exit-no"

SWEEP_COLUMNS = ["h_assignment", "case_predicted", "case_structural", "agree"]


@dataclass(frozen=True)
class StConnInstance:
    host: LegalGraph
    s: int
    t: int
    D: int
    h: Tuple[int, ...]
    left: CenteredGraph
    right: CenteredGraph
    pad_to_degree: Optional[int] = None
    pad_nodes: Optional[int] = None

    def __post_init__(self):
        self.host.check_node(self.s)
        self.host.check_node(self.t)
        if self.s == self.t:
            raise PreconditionError("s and t must be distinct host nodes")
        if self.D < 1:
            raise PreconditionError(f"D must be at least 1, got {self.D}")
        if len(self.h) != self.host.n or any(not 1 <= x <= self.D for x in self.h):
            raise PreconditionError(f"h must give every host node a value in [1, {self.D}]")
        if not d_radius_identical(self.left, self.right, self.D):
            raise PreconditionError(f"left and right are not {self.D}-radius-identical")

    def with_h(self, h: Sequence[int]) -> "StConnInstance":
        return StConnInstance(
            self.host, self.s, self.t, self.D, tuple(h), self.left, self.right,
            self.pad_to_degree, self.pad_nodes,
        )

    def value(self, u: int) -> int:
        return self.D + 1 if u == self.t else self.h[u]

    @property
    def early_exit(self) -> bool:
        return self.host.degree(self.s) != 1 or self.host.degree(self.t) != 1


@dataclass(frozen=True)
class StConnBuild:
    left: LegalGraph
    right: LegalGraph
    left_center: int
    right_center: int

    def components(self) -> Tuple[CenteredGraph, CenteredGraph]:
        return (
            connected_component_of(self.left, self.left_center),
            connected_component_of(self.right, self.right_center),
        )


def surviving_nodes(inst: StConnInstance) -> Set[int]:
    host = inst.host
    low = {u for u in range(host.n) if host.degree(u) <= 2}
    keep = {inst.s, inst.t}
    for u in low - keep:
        around = [x for x in host.adjacency[u] if x in low]
        if len(around) != 2 or len(host.adjacency[u]) != 2:
            continue
        if sorted(inst.value(x) for x in around) != [inst.h[u] - 1, inst.h[u] + 1]:
            continue
        if inst.s in around and inst.h[inst.s] != inst.h[u] - 1:
            continue
        keep.add(u)
    return keep


def _layers(inst: StConnInstance, g: CenteredGraph, u: int) -> List[int]:
    dist = g.graph.distances_from(g.center)
    far = inst.D + 1
    if u == inst.s:
        return [w for w in range(g.graph.n) if dist.get(w, far) <= inst.h[u]]
    if u == inst.t:
        return [w for w in range(g.graph.n) if dist.get(w, far) > inst.D]
    return [w for w in range(g.graph.n) if dist.get(w) == inst.h[u]]


def _simulate(inst: StConnInstance, g: CenteredGraph, keep: Set[int]) -> Tuple[LegalGraph, int]:
    host, base = inst.host, g.graph
    index: Dict[Tuple[int, int], int] = {}
    nodes: List[NodeRecord] = []
    for u in sorted(keep):
        for w in _layers(inst, g, u):
            index[(u, w)] = len(nodes)
            nodes.append(
                NodeRecord(base.nodes[w].id, cantor_pair(host.nodes[u].name, base.nodes[w].name))
            )
    edges = set()
    for (u, w), a in index.items():
        for w2 in base.adjacency[w]:
            for u2 in (u, *host.adjacency[u]):
                b = index.get((u2, w2))
                if b is not None:
                    edges.add((min(a, b), max(a, b)))
    top = max((max(r.id, r.name) for r in nodes), default=0)
    sim = LegalGraph.build(nodes, edges, max(default_cap(len(nodes)), base.cap, top))

    parts = [sim]
    if inst.pad_to_degree is not None and sim.max_degree < inst.pad_to_degree:
        parts.append(base)
    if len(parts) > 1:
        sim = disjoint_union(parts, renaming="offset", cap=sim.cap + base.cap + 1)
    if inst.pad_nodes is not None:
        sim = pad_isolated(sim, inst.pad_nodes, node_id=max(base.ids(), default=-1) + 1)
    return sim, index[(inst.s, g.center)]


def build_stconn_simulation(inst: StConnInstance) -> Union[StConnBuild, str]:
    """Both simulated graphs and where v_s sits in each, or EARLY_EXIT_NO."""
    if inst.early_exit:
        return EARLY_EXIT_NO
    keep = surviving_nodes(inst)
    left, left_center = _simulate(inst, inst.left, keep)
    right, right_center = _simulate(inst, inst.right, keep)
    logger.debug("s-t simulation kept %d of %d host nodes", len(keep), inst.host.n)
    return StConnBuild(left, right, left_center, right_center)


def terminal_path(inst: StConnInstance) -> Optional[List[int]]:
    """The host path s = u_0, ..., u_{p-1} = t through degree-2 nodes, if it exists."""
    host = inst.host
    if inst.early_exit:
        return None
    path = [inst.s]
    previous, current = None, inst.s
    while True:
        step = [x for x in host.adjacency[current] if x != previous]
        if not step:
            return None
        previous, current = current, step[0]
        path.append(current)
        if current == inst.t:
            return path
        if host.degree(current) != 2:
            return None


def classify_case(inst: StConnInstance) -> str:
    path = terminal_path(inst)
    if path is None or len(path) > inst.D + 1:
        return CASE2
    start = inst.D + 2 - len(path)
    if all(inst.h[u] == start + d for d, u in enumerate(path[:-1])):
        return CASE1
    return CASE2


def structural_case(inst: StConnInstance, build: Union[StConnBuild, str]) -> str:
    if build == EARLY_EXIT_NO:
        return CASE2
    left, right = build.components()
    if id_isomorphic(left, right):
        return CASE2
    if id_isomorphic(left, inst.left) and id_isomorphic(right, inst.right):
        return CASE1
    return MISMATCH


def h_assignments(n: int, D: int) -> Iterator[Tuple[int, ...]]:
    return itertools.product(range(1, D + 1), repeat=n)


def _sweep_row(inst: StConnInstance, h: Tuple[int, ...]) -> dict:
    case = inst.with_h(h)
    predicted = classify_case(case)
    structural = structural_case(case, build_stconn_simulation(case))
    return {
        "h_assignment": "".join(str(x) for x in h) if inst.D < 10 else "-".join(map(str, h)),
        "case_predicted": predicted,
        "case_structural": structural,
        "agree": predicted == structural,
    }


def stconn_sweep(
    inst: StConnInstance,
    threads: Optional[int] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Every h in [D]^V(H) for the instance's host and pair, sharded by assignment index."""
    assignments = list(h_assignments(inst.host.n, inst.D))
    if progress:
        assignments = list(tqdm(assignments, desc="h assignments", leave=False))
    rows = ordered_map(partial(_sweep_row, inst), assignments, worker_count(threads))
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    logger.info(
        "s-t sweep: %d assignments, %d agree", len(frame), int(frame["agree"].sum()) if len(frame) else 0
    )
    return frame


HOST_FAMILIES = ("path", "interior_s", "pendant", "two_paths", "cycle_pendants")


def host_family(name: str, size: int) -> Tuple[LegalGraph, int, int]:
    """Host graph of about ``size`` nodes and its terminals (s, t)."""
    if size < 2:
        raise GraphError(f"host graphs need at least 2 nodes, got {size}")
    if name == "path":
        shape, s, t = nx.path_graph(size), 0, size - 1
    elif name == "interior_s":
        if size < 3:
            raise GraphError("interior_s needs at least 3 nodes")
        shape, s, t = nx.path_graph(size), 1, size - 1
    elif name == "pendant":
        if size < 4:
            raise GraphError("pendant needs at least 4 nodes")
        shape = nx.path_graph(size - 1)
        shape.add_edge(size // 2 - 1, size - 1)
        s, t = 0, size - 2
    elif name == "two_paths":
        if size < 4:
            raise GraphError("two_paths needs at least 4 nodes")
        half = size // 2
        shape = nx.disjoint_union(nx.path_graph(half), nx.path_graph(size - half))
        s, t = 0, size - 1
    elif name == "cycle_pendants":
        if size < 5:
            raise GraphError("cycle_pendants needs at least 5 nodes")
        shape = nx.cycle_graph(size - 2)
        shape.add_edge(0, size - 2)
        shape.add_edge((size - 2) // 2, size - 1)
        s, t = size - 2, size - 1
    else:
        raise GraphError(f"unknown host family {name!r}; expected one of {HOST_FAMILIES}")
    return from_networkx(shape), s, t


def random_radius_identical_pair(
    D: int,
    max_nodes: int,
    rng: np.random.Generator,
    shuffle_ids: bool = False,
) -> Tuple[CenteredGraph, CenteredGraph]:
    """
    A random tree and a copy grown differently beyond radius D, both
    centered at node 0. The pair is D-radius-identical and never identical.
    With ``shuffle_ids`` the IDs are a random permutation and the extra
    node hangs off a random node at distance D, so small trees still give
    distinct ID-labelled pairs.
    """
    if max_nodes < D + 2:
        raise GraphError(f"need at least D + 2 = {D + 2} nodes, got {max_nodes}")
    spine = nx.path_graph(D + 1)
    left = spine.copy()
    size = int(rng.integers(D + 1, max_nodes))
    for v in range(D + 1, size):
        parent = int(rng.integers(0, v))
        left.add_edge(parent, v)
    ids = rng.permutation(size + 1).tolist() if shuffle_ids else list(range(size + 1))
    g = from_networkx(left, ids[:size])
    depth = g.distances_from(0)
    # the copy hangs one extra node off a node at distance D
    rim = sorted(v for v, d in depth.items() if d == D)
    anchor = rim[int(rng.integers(0, len(rim)))] if shuffle_ids else rim[0]
    right = left.copy()
    right.add_edge(anchor, size)
    g2 = from_networkx(right, ids)
    a = CenteredGraph(g, 0)
    b = CenteredGraph(g2, 0)
    if not d_radius_identical(a, b, D):
        raise GraphError("generated pair is not radius-identical")
    return a, b
