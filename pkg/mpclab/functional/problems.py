"""
Problem descriptors and validators.

Labelings are tuples indexed by node. Label alphabets:
- independent_set, mis, large_is: bool (True = in the set)
- maximal_matching: partner ID, or None when unmatched
- sinkless: frozenset of out-neighbour IDs
- coloring: non-negative int

Radius-1 problems judge each node from its 1-ball; large_is is global.
Validators read IDs only, never names.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from ..errors import ProblemError
from ..graph.legal import LegalGraph
from ..graph.transforms import radius_ball

Labeling = Tuple[Any, ...]
BOTTOM = None


@dataclass(frozen=True)
class Verdict:
    problem: str
    valid: bool
    violations: Tuple[int, ...]

    def as_dict(self) -> dict:
        return {"problem": self.problem, "valid": self.valid, "violations": list(self.violations)}

    def valid_nodes(self, n: int) -> int:
        return n - len(self.violations)


@dataclass(frozen=True)
class ProblemDescriptor:
    name: str
    in_alphabet: Callable[[Any], bool]
    node_violation: Optional[Callable[[LegalGraph, Labeling, int], bool]]
    radius: Optional[int] = 1
    replication_r: int = 2
    params: Dict[str, Any] = field(default_factory=dict)
    global_violations: Optional[Callable[[LegalGraph, Labeling], Tuple[int, ...]]] = None

    @property
    def is_global(self) -> bool:
        return self.radius is None


def _is_bool(label: Any) -> bool:
    return isinstance(label, bool)


def _independence_violation(g: LegalGraph, L: Labeling, v: int) -> bool:
    return bool(L[v]) and any(L[u] for u in g.adjacency[v])


def _mis_violation(g: LegalGraph, L: Labeling, v: int) -> bool:
    if L[v]:
        return any(L[u] for u in g.adjacency[v])
    return not any(L[u] for u in g.adjacency[v])


def _matching_violation(g: LegalGraph, L: Labeling, v: int) -> bool:
    my_id = g.nodes[v].id
    if L[v] is None:
        return any(L[u] is None for u in g.adjacency[v])
    partners = [u for u in g.adjacency[v] if g.nodes[u].id == L[v]]
    return len(partners) != 1 or L[partners[0]] != my_id


def _sinkless_violation(g: LegalGraph, L: Labeling, v: int) -> bool:
    my_id = g.nodes[v].id
    neighbour_ids = {g.nodes[u].id for u in g.adjacency[v]}
    if not L[v] <= neighbour_ids:
        return True
    for u in g.adjacency[v]:
        out = g.nodes[u].id in L[v]
        inn = my_id in L[u]
        if out == inn:
            return True
    return len(g.adjacency[v]) >= 3 and not L[v]


def _coloring_violation(g: LegalGraph, L: Labeling, v: int) -> bool:
    return any(L[u] == L[v] for u in g.adjacency[v])


def large_is_threshold_met(n: int, size: int, max_degree: int, c: int) -> bool:
    """size >= n / (c * Δ + 1), exact."""
    return size * (c * max_degree + 1) >= n


def _large_is_global(c: int):
    def check(g: LegalGraph, L: Labeling) -> Tuple[int, ...]:
        bad = [v for v in range(g.n) if _independence_violation(g, L, v)]
        size = sum(1 for label in L if label)
        if not large_is_threshold_met(g.n, size, g.max_degree, c):
            bad += [v for v in range(g.n) if not L[v]]
        return tuple(sorted(set(bad)))

    return check


def independent_set() -> ProblemDescriptor:
    return ProblemDescriptor("independent_set", _is_bool, _independence_violation, 1)


def mis() -> ProblemDescriptor:
    return ProblemDescriptor("mis", _is_bool, _mis_violation, 1)


def large_is(c: int = 4) -> ProblemDescriptor:
    return ProblemDescriptor(
        "large_is", _is_bool, None, None, 2, {"c": c}, _large_is_global(c)
    )


def maximal_matching() -> ProblemDescriptor:
    return ProblemDescriptor(
        "maximal_matching",
        lambda x: x is None or (isinstance(x, int) and not isinstance(x, bool) and x >= 0),
        _matching_violation,
        1,
    )


def sinkless() -> ProblemDescriptor:
    return ProblemDescriptor(
        "sinkless", lambda x: isinstance(x, frozenset), _sinkless_violation, 1
    )


def coloring() -> ProblemDescriptor:
    return ProblemDescriptor(
        "coloring",
        lambda x: isinstance(x, int) and not isinstance(x, bool) and x >= 0,
        _coloring_violation,
        1,
    )


PROBLEMS: Dict[str, Callable[..., ProblemDescriptor]] = {
    "independent_set": independent_set,
    "mis": mis,
    "large_is": large_is,
    "maximal_matching": maximal_matching,
    "sinkless": sinkless,
    "coloring": coloring,
}


def get_problem(name: str, **params) -> ProblemDescriptor:
    if name not in PROBLEMS:
        raise ProblemError(f"unknown problem {name!r}; known: {sorted(PROBLEMS)}")
    return PROBLEMS[name](**params)


def check_labeling(p: ProblemDescriptor, g: LegalGraph, L: Sequence[Any]) -> Labeling:
    L = tuple(L)
    if len(L) != g.n:
        raise ProblemError(f"labeling has {len(L)} entries for {g.n} nodes")
    for v, label in enumerate(L):
        if not p.in_alphabet(label):
            raise ProblemError(f"label {label!r} at node {v} is outside the {p.name} alphabet")
    return L


def validate(p: ProblemDescriptor, g: LegalGraph, L: Sequence[Any]) -> Verdict:
    L = check_labeling(p, g, L)
    if p.is_global:
        violations = p.global_violations(g, L)
    else:
        violations = tuple(v for v in range(g.n) if p.node_violation(g, L, v))
    return Verdict(p.name, not violations, violations)


def radius_locality_check(p: ProblemDescriptor, g: LegalGraph, L: Sequence[Any]) -> bool:
    """True iff judging every node from its r-ball alone reproduces the global verdict."""
    if p.is_global:
        raise ProblemError(f"{p.name} has no finite check radius")
    L = check_labeling(p, g, L)
    verdict = validate(p, g, L)
    local = []
    for v in range(g.n):
        ball = radius_ball(g, v, p.radius)
        sub = tuple(L[u] for u in ball.origin)
        if p.node_violation(ball.graph, sub, ball.center):
            local.append(v)
    return tuple(local) == verdict.violations


def set_to_labeling(n: int, members: Iterable[int]) -> Labeling:
    chosen = set(members)
    return tuple(v in chosen for v in range(n))


def labeling_to_set(L: Sequence[Any]) -> List[int]:
    return [v for v, label in enumerate(L) if label]


def matching_to_labeling(g: LegalGraph, edges: Iterable[Tuple[int, int]]) -> Labeling:
    labels: List[Any] = [None] * g.n
    for i, j in edges:
        labels[i] = g.nodes[j].id
        labels[j] = g.nodes[i].id
    return tuple(labels)


def labeling_to_matching(g: LegalGraph, L: Sequence[Any]) -> List[Tuple[int, int]]:
    return [
        (i, j) for i, j in g.sorted_edges()
        if L[i] == g.nodes[j].id and L[j] == g.nodes[i].id
    ]


def orientation_to_labeling(g: LegalGraph, bits: Sequence[int]) -> Labeling:
    """bits[e] = 1 orients sorted edge e = (i, j) as i -> j."""
    out: List[set] = [set() for _ in range(g.n)]
    for (i, j), bit in zip(g.sorted_edges(), bits):
        if bit:
            out[i].add(g.nodes[j].id)
        else:
            out[j].add(g.nodes[i].id)
    return tuple(frozenset(s) for s in out)


def labeling_to_orientation(g: LegalGraph, L: Sequence[Any]) -> List[int]:
    return [1 if g.nodes[j].id in L[i] else 0 for i, j in g.sorted_edges()]


def independence_ratio(n: int, size: int, max_degree: int) -> Fraction:
    """The constant c with size = n / (c * Δ), reported for sparsified runs."""
    if size == 0 or max_degree == 0:
        return Fraction(0)
    return Fraction(n, size * max_degree)
