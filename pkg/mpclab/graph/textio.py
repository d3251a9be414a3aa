"""Plain-text graph format: ``nodes <n>``, optional ``cap <c>``, ``node <idx> <id> <name>``, ``edge <i> <j>``."""

from typing import List, Optional, Tuple

from ..errors import GraphError
from .legal import LegalGraph, NodeRecord


def to_text(g: LegalGraph) -> str:
    lines = [f"nodes {g.n}", f"cap {g.cap}"]
    lines += [f"node {v} {r.id} {r.name}" for v, r in enumerate(g.nodes)]
    lines += [f"edge {i} {j}" for i, j in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> LegalGraph:
    n: Optional[int] = None
    cap: Optional[int] = None
    nodes: dict = {}
    edges: List[Tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            values = [int(x) for x in parts[1:]]
        except ValueError as e:
            raise GraphError(f"line {lineno}: non-integer field in {raw!r}") from e
        if parts[0] == "nodes" and len(values) == 1:
            n = values[0]
        elif parts[0] == "cap" and len(values) == 1:
            cap = values[0]
        elif parts[0] == "node" and len(values) == 3:
            idx, node_id, name = values
            if idx in nodes:
                raise GraphError(f"line {lineno}: node {idx} listed twice")
            nodes[idx] = NodeRecord(node_id, name)
        elif parts[0] == "edge" and len(values) == 2:
            edges.append((values[0], values[1]))
        else:
            raise GraphError(f"line {lineno}: cannot parse {raw!r}")

    if n is None:
        raise GraphError("missing 'nodes <n>' header")
    if sorted(nodes) != list(range(n)):
        raise GraphError(f"expected node lines for indices 0..{n - 1}")
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) references a missing node")
    return LegalGraph.build([nodes[v] for v in range(n)], edges, cap)


def read_graph(path: str) -> LegalGraph:
    with open(path, "r") as f:
        return from_text(f.read())


def write_graph(g: LegalGraph, path: str) -> None:
    with open(path, "w") as f:
        f.write(to_text(g))
