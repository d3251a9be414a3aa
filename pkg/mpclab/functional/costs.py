"""
Cost functions for seed fixing by conditional expectations.

A cost reports, for the next seed digit position, the exact conditional
expectation of the cost for every value that position can take, given the
fixed prefix and uniform remaining positions: ``seed_costs`` returns a
length-p table of numerators and one common denominator. Decomposable costs
also expose per-node tables, which the MPC pipeline sums through the
simulator instead of on one machine.
"""

import logging
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..errors import FamilyError, PreconditionError
from ..graph.legal import CenteredGraph, LegalGraph
from ..graph.transforms import radius_ball
from ..sim.config import DEFAULT_ENUMERATION_CAP
from .hashing import KWiseFamily, kwise_eval_many, seed_matrix

logger = logging.getLogger(__name__)

Table = Tuple[np.ndarray, int]


class Incidence:
    """Edge endpoint arrays and sparse node-by-edge scatter matrices of a graph."""

    def __init__(self, g: LegalGraph):
        edges = g.sorted_edges()
        self.n = g.n
        self.U = np.array([i for i, _ in edges], dtype=np.int64)
        self.V = np.array([j for _, j in edges], dtype=np.int64)
        cols = np.arange(len(edges))
        ones = np.ones(len(edges), dtype=np.int64)
        self.to_u = sparse.csr_matrix((ones, (self.U, cols)), shape=(g.n, len(edges)))
        self.to_v = sparse.csr_matrix((ones, (self.V, cols)), shape=(g.n, len(edges)))

    @property
    def m(self) -> int:
        return self.U.size

    def scatter(self, at_u: np.ndarray, at_v: np.ndarray) -> np.ndarray:
        """Per-row sums onto nodes: at_u[s, e] lands on U[e], at_v[s, e] on V[e]."""
        rows = at_u.shape[0]
        if self.m == 0:
            return np.zeros((rows, self.n), dtype=np.int64)
        total = self.to_u @ at_u.T.astype(np.int64) + self.to_v @ at_v.T.astype(np.int64)
        return np.asarray(total).T


def luby_join_mask(values: np.ndarray, keys: np.ndarray, inc: Incidence, active: Optional[np.ndarray] = None) -> np.ndarray:
    """
    One Luby step for many seeds at once. values[s, v] is v's hash value
    under seed s; v joins iff (value, key) is strictly smallest among its
    active closed neighbourhood.
    """
    if active is None:
        active = np.ones(values.shape, dtype=bool)
    if inc.m == 0:
        return active.copy()
    vu, vv = values[:, inc.U], values[:, inc.V]
    ku, kv = keys[inc.U], keys[inc.V]
    both = active[:, inc.U] & active[:, inc.V]
    u_loses = both & ((vu > vv) | ((vu == vv) & (ku > kv)[None, :]))
    v_loses = both & ~u_loses
    lost = inc.scatter(u_loses, v_loses) > 0
    return active & ~lost


class CostFunction(ABC):
    basis = "coefficients"
    decomposable = True

    def __init__(self, g: LegalGraph, cap: int = DEFAULT_ENUMERATION_CAP):
        self.g = g
        self.cap = cap

    def seed_costs(self, f: KWiseFamily, prefix: Tuple[int, ...]) -> Table:
        tables, den = self.node_tables(f, prefix)
        return tables.sum(axis=1), den

    def node_tables(self, f: KWiseFamily, prefix: Tuple[int, ...]) -> Tuple[np.ndarray, int]:
        """Shape (p, n) numerators of each node's conditional contribution, common denominator."""
        raise FamilyError(f"{type(self).__name__} is not a sum of node terms")

    @abstractmethod
    def cost(self, f: KWiseFamily, seed: Sequence[int]) -> Fraction:
        ...

    def check_enumerable(self, f: KWiseFamily, prefix: Tuple[int, ...]) -> None:
        cells = f.prime ** (f.k - len(prefix)) * max(self.g.n, 1)
        if cells > self.cap:
            raise FamilyError(f"{cells} seed x node cells exceed the enumeration cap {self.cap}")

    def completions(self, f: KWiseFamily, prefix: Tuple[int, ...], value: int) -> np.ndarray:
        return seed_matrix(f, prefix + (value,), self.cap)


class NodeSumCost(CostFunction):
    """
    Generic decomposable cost: evaluator(v, ball, seed) -> rational, where
    ball is v's ``radius``-ball. Tables enumerate every completion.
    """

    def __init__(
        self,
        g: LegalGraph,
        evaluator: Callable[[int, CenteredGraph, Tuple[int, ...]], Fraction],
        radius: int = 1,
        cap: int = DEFAULT_ENUMERATION_CAP,
    ):
        super().__init__(g, cap)
        self.evaluator = evaluator
        self.balls = [radius_ball(g, v, radius) for v in range(g.n)]

    def node_tables(self, f, prefix):
        self.check_enumerable(f, prefix)
        rest = f.prime ** (f.k - len(prefix) - 1)
        table = np.empty((f.prime, self.g.n), dtype=object)
        for c in range(f.prime):
            seeds = [tuple(int(a) for a in row) for row in self.completions(f, prefix, c)]
            for v in range(self.g.n):
                table[c, v] = sum(
                    (Fraction(self.evaluator(v, self.balls[v], s)) for s in seeds), Fraction(0)
                )
        # numerators are already sums over the rest completions
        return table, rest

    def cost(self, f, seed) -> Fraction:
        seed = tuple(seed)
        return sum(
            (Fraction(self.evaluator(v, self.balls[v], seed)) for v in range(self.g.n)), Fraction(0)
        )


def _keys(g: LegalGraph, keys: Optional[Sequence[int]], f: KWiseFamily) -> np.ndarray:
    arr = np.asarray(g.ids() if keys is None else list(keys), dtype=np.int64)
    if arr.size != g.n:
        raise PreconditionError("one key per node is required")
    if arr.size and (arr.min() < 0 or arr.max() >= f.domain_bound):
        raise FamilyError(
            f"keys must lie in [0, {f.domain_bound}); pass proper-colour keys when IDs exceed the field"
        )
    for i, j in g.edges:
        if arr[i] == arr[j]:
            raise PreconditionError(f"adjacent nodes {i} and {j} share key {arr[i]}")
    return arr


class LubyJoinCost(CostFunction):
    """cost = -|IS| of one Luby step with χ_v = h(key_v), by exact enumeration."""

    def __init__(self, g: LegalGraph, f: KWiseFamily, keys=None, cap: int = DEFAULT_ENUMERATION_CAP):
        super().__init__(g, cap)
        self.keys = _keys(g, keys, f)
        self.inc = Incidence(g)

    def joined(self, f: KWiseFamily, seeds: np.ndarray) -> np.ndarray:
        return luby_join_mask(kwise_eval_many(f, seeds, self.keys), self.keys, self.inc)

    def node_tables(self, f, prefix):
        self.check_enumerable(f, prefix)
        rest = f.prime ** (f.k - len(prefix) - 1)
        table = np.zeros((f.prime, self.g.n), dtype=np.int64)
        for c in range(f.prime):
            table[c] = -self.joined(f, self.completions(f, prefix, c)).sum(axis=0)
        return table, rest

    def cost(self, f, seed) -> Fraction:
        return Fraction(-int(self.joined(f, np.asarray([seed])).sum()))


class LubyEstimatorCost(CostFunction):
    """
    cost = -Φ with Φ = |S| - 2|E(S)|, S = {v : χ_v < τ}, τ = floor(p / 2Δ).
    Every node of S without a neighbour in S joins the Luby step, so
    |IS| >= Φ pointwise. Pairwise families only; conditional tables are
    closed-form counts over the free coefficient.
    """

    def __init__(self, g: LegalGraph, f: KWiseFamily, keys=None, cap: int = DEFAULT_ENUMERATION_CAP):
        super().__init__(g, cap)
        if f.k != 2:
            raise FamilyError("the pessimistic estimator needs a pairwise family (k = 2)")
        if g.max_degree == 0:
            raise PreconditionError("the estimator needs at least one edge")
        self.keys = _keys(g, keys, f)
        self.inc = Incidence(g)
        self.tau = f.prime // (2 * g.max_degree)
        # each edge term is charged to its lower-index endpoint
        self.owner = self.inc.U

    def _phi_rows(self, f: KWiseFamily, seeds: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        chosen = kwise_eval_many(f, seeds, self.keys) < self.tau
        both = chosen[:, self.inc.U] & chosen[:, self.inc.V]
        return chosen.astype(np.int64), both.astype(np.int64)

    def node_tables(self, f, prefix):
        p, tau, n = f.prime, self.tau, self.g.n
        if len(prefix) == 1:
            seeds = seed_matrix(f, prefix)
            chosen, both = self._phi_rows(f, seeds)
            edge_part = self.inc.scatter(both, np.zeros_like(both))
            return -(chosen - 2 * edge_part), 1

        # a0 = c, a1 uniform: count the a1 values that put v (and edges) in S
        x = self.keys % p
        node_counts = np.where(
            x[None, :] == 0,
            np.where(np.arange(p)[:, None] < tau, p, 0),
            tau,
        ).astype(np.int64)

        edge_counts = np.zeros((n, 2 * p + 1), dtype=np.int64)
        if self.inc.m:
            a1 = np.arange(p, dtype=np.int64)[None, :]
            s_u = (-a1 * x[self.inc.U][:, None]) % p
            s_v = (-a1 * x[self.inc.V][:, None]) % p
            d = (s_v - s_u) % p
            front = d < tau
            back = ~front & (p - d < tau)
            start = np.where(front, s_v, s_u)
            length = np.where(front, tau - d, np.where(back, tau - (p - d), 0))
            owner = np.broadcast_to(self.owner[:, None], start.shape)
            keep = length > 0
            np.add.at(edge_counts, (owner[keep], start[keep]), 1)
            np.add.at(edge_counts, (owner[keep], start[keep] + length[keep]), -1)
        running = np.cumsum(edge_counts, axis=1)
        edge_per_c = running[:, :p] + running[:, p : 2 * p]
        table = -(node_counts - 2 * edge_per_c.T)
        return table, p

    def cost(self, f, seed) -> Fraction:
        chosen, both = self._phi_rows(f, np.asarray([seed]))
        return Fraction(-(int(chosen.sum()) - 2 * int(both.sum())))


class SparsifyCost(CostFunction):
    """
    Keep v iff χ_v < T = floor(p * target / Δ). cost = (kept nodes with
    induced degree > 4 * target) + |kept - n * target / Δ|, held as
    integers scaled by Δ. Not decomposable.
    """

    decomposable = False

    def __init__(self, g: LegalGraph, f: KWiseFamily, target: int, keys=None, cap: int = DEFAULT_ENUMERATION_CAP):
        super().__init__(g, cap)
        self.keys = _keys(g, keys, f)
        self.inc = Incidence(g)
        self.target = target
        self.delta = max(g.max_degree, 1)
        self.threshold = f.prime * target // self.delta

    def kept(self, f: KWiseFamily, seeds: np.ndarray) -> np.ndarray:
        return kwise_eval_many(f, seeds, self.keys) < self.threshold

    def scaled(self, kept: np.ndarray) -> np.ndarray:
        both = kept[:, self.inc.U] & kept[:, self.inc.V]
        degree = self.inc.scatter(both, both)
        heavy = (kept & (degree > 4 * self.target)).sum(axis=1)
        count = kept.sum(axis=1)
        return self.delta * heavy + np.abs(self.delta * count - self.g.n * self.target)

    def seed_costs(self, f, prefix):
        self.check_enumerable(f, prefix)
        rest = f.prime ** (f.k - len(prefix) - 1)
        table = np.zeros(f.prime, dtype=np.int64)
        for c in range(f.prime):
            table[c] = self.scaled(self.kept(f, self.completions(f, prefix, c))).sum()
        return table, rest * self.delta

    def cost(self, f, seed) -> Fraction:
        return Fraction(int(self.scaled(self.kept(f, np.asarray([seed])))[0]), self.delta)
