"""
Graph generators built on networkx.

Families: cycle, two_cycles, path, d_regular, star, clique, plus random
trees and G(n, p) for sweeps. IDs are a random permutation of [n]
(``id_policy="random"``) or the node index (``"sequential"``); names are
[n] offset by ``name_base``.
"""

import itertools
import logging
from typing import Annotated, Iterator, List, Optional, Sequence

import networkx as nx
import numpy as np

from ..errors import GraphError
from .legal import LegalGraph, NodeRecord

logger = logging.getLogger(__name__)

FAMILIES = ("cycle", "two_cycles", "path", "d_regular", "star", "clique", "tree", "gnp")


def from_networkx(
    nxg: nx.Graph,
    ids: Optional[Sequence[int]] = None,
    names: Optional[Sequence[int]] = None,
    cap: Optional[int] = None,
) -> LegalGraph:
    order = sorted(nxg.nodes)
    index = {u: k for k, u in enumerate(order)}
    n = len(order)
    ids = list(range(n)) if ids is None else list(ids)
    names = list(range(n)) if names is None else list(names)
    if len(ids) != n or len(names) != n:
        raise GraphError("ids/names must match the node count")
    return LegalGraph.build(
        [NodeRecord(i, nm) for i, nm in zip(ids, names)],
        [(index[u], index[v]) for u, v in nxg.edges if u != v],
        cap,
    )


def to_networkx(g: LegalGraph) -> nx.Graph:
    nxg = nx.Graph()
    for v, record in enumerate(g.nodes):
        nxg.add_node(v, id=record.id, name=record.name)
    nxg.add_edges_from(g.edges)
    return nxg


def _shape(family: str, n: int, d: int, p: float, seed: int) -> nx.Graph:
    if family == "cycle":
        if n < 3:
            raise GraphError(f"cycle needs n >= 3, got {n}")
        return nx.cycle_graph(n)
    if family == "two_cycles":
        if n % 2 or n < 6:
            raise GraphError(f"two_cycles needs an even n >= 6, got {n}")
        return nx.disjoint_union(nx.cycle_graph(n // 2), nx.cycle_graph(n // 2))
    if family == "path":
        if n < 1:
            raise GraphError(f"path needs n >= 1, got {n}")
        return nx.path_graph(n)
    if family == "d_regular":
        if d < 0 or d >= max(n, 1) or (n * d) % 2:
            raise GraphError(f"no {d}-regular graph on {n} nodes")
        return nx.random_regular_graph(d, n, seed=seed)
    if family == "star":
        if n < 1:
            raise GraphError(f"star needs n >= 1, got {n}")
        return nx.star_graph(n - 1)
    if family == "clique":
        if n < 1:
            raise GraphError(f"clique needs n >= 1, got {n}")
        return nx.complete_graph(n)
    if family == "tree":
        if n < 1:
            raise GraphError(f"tree needs n >= 1, got {n}")
        return nx.random_labeled_tree(n, seed=seed) if n > 1 else nx.empty_graph(1)
    if family == "gnp":
        if n < 0 or not (0.0 <= p <= 1.0):
            raise GraphError(f"gnp needs n >= 0 and 0 <= p <= 1, got n={n} p={p}")
        return nx.gnp_random_graph(n, p, seed=seed)
    raise GraphError(f"unknown family {family!r}; expected one of {FAMILIES}")


def generate(
    family: Annotated[str, "Graph family, one of cycle, two_cycles, path, d_regular, star, clique, tree, gnp."],
    n: Annotated[int, "Node count (star n has n - 1 leaves)."],
    d: Annotated[int, "Degree for d_regular."] = 0,
    seed: Annotated[int, "Seed for random families and the ID permutation."] = 0,
    id_policy: Annotated[str, "'random' (permutation of [n]) or 'sequential'."] = "random",
    name_base: Annotated[int, "Offset added to every name."] = 0,
    p: Annotated[float, "Edge probability for gnp."] = 0.5,
) -> LegalGraph:
    shape = _shape(family, n, d, p, seed)
    size = shape.number_of_nodes()
    if id_policy == "random":
        ids = np.random.default_rng(seed).permutation(size).tolist()
    elif id_policy == "sequential":
        ids = list(range(size))
    else:
        raise GraphError(f"unknown id policy {id_policy!r}")
    g = from_networkx(shape, ids, [name_base + k for k in range(size)])
    logger.debug("generated %s n=%d m=%d", family, g.n, g.m)
    return g


def parse_family(tokens: Sequence[str]) -> dict:
    """``["d_regular", "10", "3", "1"]`` -> generate() keyword arguments."""
    if not tokens:
        raise GraphError("empty family description")
    family, rest = tokens[0], list(tokens[1:])
    try:
        values = [float(t) if "." in t else int(t) for t in rest]
    except ValueError as e:
        raise GraphError(f"bad family parameters {rest}") from e
    if family == "d_regular":
        keys = ["n", "d", "seed"]
    elif family == "gnp":
        keys = ["n", "p", "seed"]
    else:
        keys = ["n", "seed"]
    if not values or len(values) > len(keys):
        raise GraphError(f"{family} expects parameters {keys}, got {rest}")
    return dict(family=family, **dict(zip(keys, values)))


def atlas(max_nodes: int = 6, connected_only: bool = True, min_nodes: int = 1) -> Iterator[LegalGraph]:
    """All graphs on min_nodes..max_nodes nodes up to isomorphism (networkx atlas, <= 7 nodes)."""
    if max_nodes > 7:
        raise GraphError("the graph atlas stops at 7 nodes")
    for shape in nx.graph_atlas_g():
        size = shape.number_of_nodes()
        if size < min_nodes or size > max_nodes:
            continue
        if connected_only and not nx.is_connected(shape):
            continue
        yield from_networkx(shape)


def labeled_paths(n: int) -> List[LegalGraph]:
    """Every path on n nodes with IDs a permutation of [n], one per reversal class."""
    result = []
    for perm in itertools.permutations(range(n)):
        if n > 1 and perm[0] > perm[-1]:
            continue
        result.append(from_networkx(nx.path_graph(n), list(perm)))
    return result
