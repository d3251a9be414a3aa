"""
Extendable MIS and maximal matching.

Each iteration works on the residual graph H of undecided nodes: collect
2t-balls, colour H^{2t} to shrink the hash domain, fix one pairwise seed by
conditional expectations on the number of nodes still undecided after t
Luby rounds, apply it and recurse on the undecided remainder. Every
intermediate partial labeling stays extendable: IN is independent, every
OUT node has an IN neighbour and no undecided node touches IN.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import FamilyError, IterationCapExceeded, ProblemError, SpaceExceeded
from ..graph.legal import LegalGraph
from ..graph.transforms import induced_subgraph, line_graph
from ..sim.config import DEFAULT_ENUMERATION_CAP, MpcConfig, MpcMeta
from ..sim.engine import RoundTrace, RunResult
from .costs import CostFunction, Incidence, luby_join_mask
from .derandomize import SimulatedAggregate, aggregate_radix, fix_seed_cond_exp
from .exponentiation import collect_balls, reduce_id_space
from .hashing import KWiseFamily, kwise_eval_many, smallest_prime_at_least
from .problems import matching_to_labeling

logger = logging.getLogger(__name__)

IN, OUT, UNDECIDED = "in", "out", None
ITERATION_CAP = 10
MAX_ROUNDS_PER_ITERATION = 3


class UndecidedCost(CostFunction):
    """
    cost = nodes still undecided after ``t`` Luby rounds. Round j draws
    χ_{v,j} = h(colour_v * t + j) and compares (χ, colour); a node is
    decided once it or a neighbour joins. A node's status depends only on
    its 2t-ball.
    """

    def __init__(self, g: LegalGraph, f: KWiseFamily, t: int, colors: Sequence[int], cap: int = DEFAULT_ENUMERATION_CAP):
        super().__init__(g, cap)
        self.t = t
        self.colors = np.asarray(colors, dtype=np.int64)
        self.inc = Incidence(g)
        inputs = self.colors * t
        if inputs.size and int(inputs.max()) + t > f.domain_bound:
            raise FamilyError(f"colour inputs need a domain of {int(inputs.max()) + t}")

    def simulate(self, f: KWiseFamily, seeds: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(joined, undecided) masks of shape (seeds, n)."""
        seeds = np.asarray(seeds, dtype=np.int64).reshape(-1, f.k)
        active = np.ones((seeds.shape[0], self.g.n), dtype=bool)
        joined = np.zeros_like(active)
        for j in range(self.t):
            values = kwise_eval_many(f, seeds, self.colors * self.t + j)
            joins = luby_join_mask(values, self.colors, self.inc, active)
            joined |= joins
            if self.inc.m:
                hit = self.inc.scatter(joins[:, self.inc.V], joins[:, self.inc.U]) > 0
            else:
                hit = np.zeros_like(active)
            active &= ~(joins | hit)
        return joined, active

    def node_tables(self, f, prefix):
        self.check_enumerable(f, prefix)
        rest = f.prime ** (f.k - len(prefix) - 1)
        table = np.zeros((f.prime, self.g.n), dtype=np.int64)
        for c in range(f.prime):
            _, undecided = self.simulate(f, self.completions(f, prefix, c))
            table[c] = undecided.sum(axis=0)
        return table, rest

    def cost(self, f, seed) -> Fraction:
        _, undecided = self.simulate(f, np.asarray([seed]))
        return Fraction(int(undecided.sum()))


@dataclass(frozen=True)
class ClauseCheck:
    independent: bool
    out_dominated: bool
    undecided_isolated: bool

    @property
    def ok(self) -> bool:
        return self.independent and self.out_dominated and self.undecided_isolated


@dataclass(frozen=True)
class MisIteration:
    index: int
    nodes: int
    max_degree: int
    rounds: int
    colors: int
    family: str
    seed: Tuple[int, ...]
    undecided: int
    clauses: ClauseCheck

    @property
    def undecided_fraction(self) -> float:
        return self.undecided / self.nodes if self.nodes else 0.0

    def as_dict(self) -> dict:
        return {
            "iteration": self.index,
            "n": self.nodes,
            "max_degree": self.max_degree,
            "t": self.rounds,
            "colors": self.colors,
            "family": self.family,
            "seed": list(self.seed),
            "undecided": self.undecided,
            "undecided_fraction": self.undecided_fraction,
            "extendable": self.clauses.ok,
        }


@dataclass
class MisRun:
    labeling: Tuple[bool, ...]
    iterations: List[MisIteration] = field(default_factory=list)
    trace: RoundTrace = field(default_factory=RoundTrace)


def check_extendable(g: LegalGraph, partial: Sequence[Optional[str]]) -> ClauseCheck:
    independent = all(
        not (partial[i] == IN and partial[j] == IN) for i, j in g.edges
    )
    out_dominated = all(
        any(partial[u] == IN for u in g.adjacency[v])
        for v in range(g.n)
        if partial[v] == OUT
    )
    undecided_isolated = all(
        not any(partial[u] == IN for u in g.adjacency[v])
        for v in range(g.n)
        if partial[v] is UNDECIDED
    )
    return ClauseCheck(independent, out_dominated, undecided_isolated)


def ball_size_bound(n: int, delta: int, radius: int) -> int:
    total, frontier = 1, delta
    for _ in range(radius):
        total += frontier
        frontier *= max(delta - 1, 1)
        if total >= n:
            return n
    return min(total, n)


def _candidate_rounds(h: LegalGraph, max_rounds: int, cap: int) -> List[int]:
    """Round counts whose pairwise family can plausibly be enumerated, largest first."""
    feasible = []
    for t in range(max_rounds, 0, -1):
        colors = ball_size_bound(h.n, h.max_degree, 2 * t)
        p = smallest_prime_at_least(max(colors * t, 2))
        if t == 1 or p * p * h.n <= cap:
            feasible.append(t)
    return feasible


def _residual_iteration(
    h: LegalGraph,
    cfg: MpcConfig,
    meta: MpcMeta,
    max_rounds: int,
    cap: int,
    trace: RoundTrace,
) -> Tuple[UndecidedCost, KWiseFamily, int, int, Tuple[int, ...]]:
    sub_meta = meta.model_copy(
        update={"n": h.n, "max_degree": h.max_degree, "size_estimate": max(meta.size_estimate, h.n)}
    )
    for t in _candidate_rounds(h, max_rounds, cap):
        try:
            table, collected = collect_balls(h, 2 * t, cfg, sub_meta)
        except SpaceExceeded:
            if t == 1:
                raise
            logger.debug("2t-balls for t=%d overflow the budget, trying fewer rounds", t)
            continue
        coloring = reduce_id_space(h, 2 * t, cfg, sub_meta, table)
        p = smallest_prime_at_least(max(coloring.count * t, 2))
        if p * p * h.n > cap:
            if t == 1:
                raise FamilyError(f"pairwise family over {p} values exceeds the enumeration cap")
            continue
        trace.extend(collected)
        f = KWiseFamily(p, 2, p)
        cost = UndecidedCost(h, f, t, coloring.colors, cap)
        aggregate = SimulatedAggregate(cost, f, h, cfg, sub_meta, trace)
        choice = fix_seed_cond_exp(
            f, cost, h, radix=aggregate_radix(cfg.budget(h.n), p), aggregate=aggregate
        )
        return cost, f, t, coloring.count, choice.coefficients
    raise FamilyError("no feasible round count for the residual graph")


def extendable_mis(
    g: LegalGraph,
    cfg: MpcConfig,
    meta: MpcMeta,
    iteration_cap: int = ITERATION_CAP,
    max_rounds: int = MAX_ROUNDS_PER_ITERATION,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> MisRun:
    status: List[Optional[str]] = [UNDECIDED] * g.n
    run_log = MisRun(tuple(), [], RoundTrace(budget=cfg.budget(g.n)))
    residual = list(range(g.n))
    for index in range(iteration_cap):
        if not residual:
            break
        h, origin = induced_subgraph(g, residual)
        cost, f, t, colors, seed = _residual_iteration(h, cfg, meta, max_rounds, cap, run_log.trace)
        joined, undecided = cost.simulate(f, np.asarray([seed]))
        for local, v in enumerate(origin):
            if joined[0, local]:
                status[v] = IN
            elif not undecided[0, local]:
                status[v] = OUT
        clauses = check_extendable(g, status)
        residual = [v for v in range(g.n) if status[v] is UNDECIDED]
        record = MisIteration(
            index, h.n, h.max_degree, t, colors, f.descriptor(), tuple(seed), len(residual), clauses
        )
        run_log.iterations.append(record)
        logger.info(
            "MIS iteration %d: n*=%d Δ*=%d t=%d, %d undecided left",
            index, h.n, h.max_degree, t, len(residual),
        )
        if not clauses.ok:
            raise ProblemError(f"iteration {index} broke extendability: {clauses}")
    if residual:
        raise IterationCapExceeded(iteration_cap, len(residual), tuple(status))
    run_log.labeling = tuple(s == IN for s in status)
    return run_log


def mis_algorithm(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, **params) -> RunResult:
    result = extendable_mis(g, cfg, meta, **params)
    return RunResult(
        result.labeling, result.trace, {"iterations": [it.as_dict() for it in result.iterations]}
    )


def maximal_matching(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, **params) -> RunResult:
    """Extendable MIS on the line graph, pulled back to edges; labels are partner IDs."""
    lg = line_graph(g)
    line_meta = MpcMeta.for_graph(
        lg, meta.seed_hex, size_estimate=max(lg.n, meta.size_estimate)
    )
    result = extendable_mis(lg, cfg, line_meta, **params)
    edges = g.sorted_edges()
    chosen = [edges[e] for e, joined in enumerate(result.labeling) if joined]
    return RunResult(
        matching_to_labeling(g, chosen),
        result.trace,
        {"edges": [list(e) for e in chosen], "iterations": [it.as_dict() for it in result.iterations]},
    )
