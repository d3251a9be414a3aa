"""
Seed fixing and seed selection.

- fix_seed_cond_exp: method of conditional expectations over a k-wise family
- derand_luby_step / derand_sparsify: deterministic Luby step and sampling
- amplify: best of several seeded branches on disjoint seed slices
- amplification_failure_rates: single-branch vs amplified failure rates
- find_universal_seed: first seed of a truncated space valid on a corpus
"""

import logging
import math
import re
from functools import partial
from dataclasses import dataclass
from fractions import Fraction
from typing import Annotated, Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..errors import FamilyError
from ..graph.legal import LegalGraph
from ..graph.transforms import induced_subgraph
from ..sim.config import DEFAULT_ENUMERATION_CAP, MpcConfig, MpcMeta, expand_seed
from ..sim.engine import RoundTrace, run
from ..sim.programs import AggregateSum
from ..sim.seed import SeedTape
from ..utils import ProgressType, ordered_map, worker_count
from .costs import (
    CostFunction,
    Incidence,
    LubyEstimatorCost,
    LubyJoinCost,
    SparsifyCost,
    luby_join_mask,
)
from .hashing import KWiseFamily, interpolate, kwise_eval_many
from .problems import Labeling, Verdict

logger = logging.getLogger(__name__)

Range = Tuple[int, int]
RangeSums = Callable[[Sequence[Range]], List[Fraction]]
Aggregate = Callable[[int, Tuple[int, ...], Sequence[Range]], List[Fraction]]

_SEED_LINE = re.compile(r"^seed family=(kwise p=\d+ k=\d+ dom=\d+) coeffs=\[([\d, ]*)\] cost=(-?\d+)/(\d+)$")


@dataclass(frozen=True)
class SeedChoice:
    family: KWiseFamily
    coefficients: Tuple[int, ...]
    achieved: Fraction
    average: Fraction
    digits: Tuple[int, ...] = ()

    def serialize(self) -> str:
        coeffs = ", ".join(str(a) for a in self.coefficients)
        return (
            f"seed family={self.family.descriptor()} coeffs=[{coeffs}] "
            f"cost={self.achieved.numerator}/{self.achieved.denominator}"
        )

    @classmethod
    def parse(cls, text: str) -> "SeedChoice":
        match = _SEED_LINE.match(text.strip())
        if not match:
            raise FamilyError(f"cannot parse seed choice {text!r}")
        desc, coeffs, num, den = match.groups()
        family = KWiseFamily.parse(desc)
        values = tuple(int(a) for a in coeffs.split(",") if a.strip())
        achieved = Fraction(int(num), int(den))
        return cls(family, family.check_seed(values), achieved, achieved)


def _exact(x: Any) -> Any:
    return int(x) if isinstance(x, np.integer) else x


def digit_count(prime: int, radix: int) -> int:
    count = 1
    while radix**count < prime:
        count += 1
    return count


def table_range_sums(table: Sequence[Any], den: int) -> RangeSums:
    prefix_sums = [Fraction(0)]
    for value in table:
        prefix_sums.append(prefix_sums[-1] + Fraction(_exact(value)))

    def sums(ranges: Sequence[Range]) -> List[Fraction]:
        return [(prefix_sums[end] - prefix_sums[start]) / den for start, end in ranges]

    return sums


def choose_value(range_sums: RangeSums, prime: int, radix: int) -> Tuple[int, Fraction]:
    """
    Fix one seed position digit by digit, most significant first, each
    digit to the range with the smallest average (ties to the smaller
    digit). Returns the value and the summed cost over the whole field.
    """
    lo = 0
    total: Optional[Fraction] = None
    for place in range(digit_count(prime, radix) - 1, -1, -1):
        span = radix**place
        ranges = [
            (lo + d * span, min(lo + (d + 1) * span, prime))
            for d in range(radix)
            if lo + d * span < prime
        ]
        sums = range_sums(ranges)
        if total is None:
            total = sum(sums, Fraction(0))
        best = min(
            range(len(ranges)),
            key=lambda d: (Fraction(sums[d]) / (ranges[d][1] - ranges[d][0]), d),
        )
        lo = ranges[best][0]
    return lo, total


def fix_seed_cond_exp(
    f: KWiseFamily,
    cost: CostFunction,
    g: Optional[LegalGraph] = None,
    radix: Optional[int] = None,
    aggregate: Optional[Aggregate] = None,
) -> SeedChoice:
    """
    Fix seed positions a_0, a_1, ... in order; returns a seed whose cost is
    at most the exact family average. ``aggregate(position, prefix, ranges)``
    may replace the local range sums (the MPC pipeline sums node tables
    through the simulator there). Costs over the evaluation basis fix
    h(points[i]) instead of coefficients.
    """
    radix = radix or f.prime
    if radix < 2:
        raise FamilyError("radix must be at least 2")
    prefix: List[int] = []
    average: Optional[Fraction] = None
    for position in range(f.k):
        fixed = tuple(prefix)
        if aggregate is not None:
            sums = partial(aggregate, position, fixed)
        else:
            sums = table_range_sums(*cost.seed_costs(f, fixed))
        value, total = choose_value(sums, f.prime, radix)
        if average is None:
            average = total / f.prime
        prefix.append(value)

    digits = tuple(prefix)
    if cost.basis == "evaluations":
        coefficients = interpolate(f, cost.points, digits)
    else:
        coefficients = digits
    achieved = cost.cost(f, digits)
    logger.info(
        "seed fixed for %s: cost %s (family average %s)", f.descriptor(), achieved, average
    )
    return SeedChoice(f, coefficients, achieved, average, digits)


def aggregate_radix(budget: int, prime: int) -> int:
    """Largest digit base whose range sums still fit one AggregateSum message tree."""
    return max(2, min(prime, (budget - 6) // 3))


class SimulatedAggregate:
    """
    Range sums of node tables computed through the simulator: every node
    sums its own table column over the requested ranges, AggregateSum adds
    the vectors and broadcasts the total. Node tables are computed once per
    seed position.
    """

    def __init__(self, cost: CostFunction, f: KWiseFamily, g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, trace: RoundTrace):
        self.cost = cost
        self.f = f
        self.g = g
        self.cfg = cfg
        self.meta = meta
        self.trace = trace
        self._key: Optional[Tuple[int, Tuple[int, ...]]] = None
        self._cumulative: Optional[np.ndarray] = None
        self._den = 1

    def _tables(self, position: int, prefix: Tuple[int, ...]) -> np.ndarray:
        if self._key != (position, prefix):
            tables, den = self.cost.node_tables(self.f, prefix)
            column_sums = np.vstack([np.zeros((1, self.g.n), dtype=tables.dtype), tables])
            self._cumulative = np.cumsum(column_sums, axis=0)
            self._den = den
            self._key = (position, prefix)
        return self._cumulative

    def __call__(self, position: int, prefix: Tuple[int, ...], ranges: Sequence[Range]) -> List[Fraction]:
        cumulative = self._tables(position, prefix)
        if self.g.n == 0:
            return [Fraction(0)] * len(ranges)
        vectors = [
            [_exact(cumulative[end, v] - cumulative[start, v]) for start, end in ranges]
            for v in range(self.g.n)
        ]
        program = AggregateSum(vectors, len(ranges), name=f"aggregate_a{position}")
        totals, trace = run(program, self.g, self.cfg, self.meta)
        self.trace.extend(trace)
        return [Fraction(x) / self._den for x in totals[0]]


@dataclass(frozen=True)
class LubyStepResult:
    members: Tuple[int, ...]
    choice: SeedChoice
    mode: str

    @property
    def size(self) -> int:
        return len(self.members)


def luby_members(g: LegalGraph, f: KWiseFamily, seed: Sequence[int], keys: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
    key_arr = np.asarray(g.ids() if keys is None else list(keys), dtype=np.int64)
    values = kwise_eval_many(f, np.asarray([seed]), key_arr)
    mask = luby_join_mask(values, key_arr, Incidence(g))[0]
    return tuple(int(v) for v in np.flatnonzero(mask))


def check_luby_family(g: LegalGraph, f: KWiseFamily) -> None:
    if f.k < 2:
        raise FamilyError("a Luby step needs a pairwise family (k >= 2)")
    need = max(8 * g.max_degree**2, g.n)
    if f.prime < need:
        raise FamilyError(f"family too small: p = {f.prime} < max(8Δ², n) = {need}")


def luby_cost(g: LegalGraph, f: KWiseFamily, keys: Optional[Sequence[int]] = None, cap: int = DEFAULT_ENUMERATION_CAP) -> CostFunction:
    """Exact -|IS| when p^k * n fits the cap, the pessimistic estimator otherwise."""
    if f.size * g.n <= cap:
        return LubyJoinCost(g, f, keys, cap)
    return LubyEstimatorCost(g, f, keys, cap)


def derand_luby_step(
    g: LegalGraph,
    f: KWiseFamily,
    keys: Optional[Sequence[int]] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
    radix: Optional[int] = None,
    aggregate: Optional[Aggregate] = None,
) -> LubyStepResult:
    """
    Deterministic Luby step: χ_v = h(key_v) (key defaults to the ID) and v
    joins iff (χ_v, key_v) is smallest among its neighbours. The seed is
    fixed on -|IS| by enumeration when p^k * n fits the cap, otherwise on the
    pessimistic estimator; either way |IS| >= n / (4Δ + 1).

    Every key must lie below the family's domain bound (p for
    ``family_for``), otherwise FamilyError. Legal IDs run up to n^3, so a
    family sized by (8Δ², n) only takes the default ID keys when IDs are
    small; pass a proper colouring as ``keys`` otherwise, as
    ``deterministic_large_is`` does.
    """
    check_luby_family(g, f)
    if g.m == 0:
        seed = (0,) * f.k
        size = Fraction(-g.n)
        return LubyStepResult(tuple(range(g.n)), SeedChoice(f, seed, size, size, seed), "trivial")

    cost = luby_cost(g, f, keys, cap)
    mode = "exact" if isinstance(cost, LubyJoinCost) else "estimator"
    choice = fix_seed_cond_exp(f, cost, g, radix=radix, aggregate=aggregate)
    members = luby_members(g, f, choice.coefficients, keys)
    logger.info("Luby step (%s): %d of %d nodes joined", mode, len(members), g.n)
    return LubyStepResult(members, choice, mode)


@dataclass(frozen=True)
class SparsifyResult:
    graph: LegalGraph
    origin: Tuple[int, ...]
    kept: int
    max_induced_degree: int
    choice: Optional[SeedChoice]


def derand_sparsify(
    g: LegalGraph,
    target: int,
    f: KWiseFamily,
    keys: Optional[Sequence[int]] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> SparsifyResult:
    if g.max_degree <= target or g.n == 0:
        return SparsifyResult(g, tuple(range(g.n)), g.n, g.max_degree, None)
    cost = SparsifyCost(g, f, target, keys, cap)
    choice = fix_seed_cond_exp(f, cost, g)
    kept = np.flatnonzero(cost.kept(f, np.asarray([choice.coefficients]))[0]).tolist()
    sub, origin = induced_subgraph(g, kept)
    logger.info(
        "sparsified %d -> %d nodes, max induced degree %d", g.n, sub.n, sub.max_degree
    )
    return SparsifyResult(sub, origin, sub.n, sub.max_degree, choice)


@dataclass(frozen=True)
class AmplifiedResult:
    labeling: Labeling
    branch: int
    valid: bool
    valid_counts: Tuple[int, ...]


def branch_metas(meta: MpcMeta, ell: int) -> List[MpcMeta]:
    """Disjoint equal seed slices, whole hex digits each."""
    tape = SeedTape.from_hex(meta.seed_hex)
    width = (tape.length // ell) // 4 * 4
    if width == 0:
        raise FamilyError(f"{tape.length} seed bits cannot feed {ell} branches")
    metas = []
    for j in range(ell):
        value = tape.read(j * width, width)
        metas.append(meta.with_seed(format(value, f"0{width // 4}x")))
    return metas


def amplify(
    alg: Annotated[Callable[[MpcMeta], Labeling], "Seeded algorithm, reads its seed from meta."],
    validator: Annotated[Callable[[Labeling], Verdict], "Full-labeling validator."],
    ell: Annotated[int, "Branch count."],
    meta: MpcMeta,
    threads: Optional[int] = None,
) -> AmplifiedResult:
    metas = branch_metas(meta, ell)
    labelings = ordered_map(alg, metas, worker_count(threads))
    verdicts = [validator(L) for L in labelings]
    counts = tuple(v.valid_nodes(len(L)) for v, L in zip(verdicts, labelings))
    for j, verdict in enumerate(verdicts):
        if verdict.valid:
            return AmplifiedResult(labelings[j], j, True, counts)
    best = max(range(ell), key=lambda j: (counts[j], -j))
    logger.warning("no valid branch among %d; returning branch %d flagged invalid", ell, best)
    return AmplifiedResult(labelings[best], best, False, counts)


@dataclass(frozen=True)
class AmplificationStats:
    ell: int
    trials: int
    single_failures: int
    amplified_failures: int

    @property
    def single_rate(self) -> Fraction:
        return Fraction(self.single_failures, self.trials)

    @property
    def amplified_rate(self) -> Fraction:
        return Fraction(self.amplified_failures, self.trials)

    @property
    def predicted(self) -> float:
        """q^ell: the failure rate of ell independent branches."""
        return float(self.single_rate) ** self.ell

    def bound(self, sigmas: float = 3.0) -> float:
        q = self.predicted
        return q + sigmas * math.sqrt(q * (1 - q) / self.trials)

    def within_bound(self, sigmas: float = 3.0) -> bool:
        return float(self.amplified_rate) <= self.bound(sigmas)

    def as_dict(self) -> dict:
        return {
            "ell": self.ell,
            "trials": self.trials,
            "single_rate": str(self.single_rate),
            "amplified_rate": str(self.amplified_rate),
            "predicted": self.predicted,
            "bound": self.bound(),
        }


def amplification_failure_rates(
    alg: Annotated[Callable[[MpcMeta], Labeling], "Seeded algorithm, reads its seed from meta."],
    validator: Annotated[Callable[[Labeling], Verdict], "Full-labeling validator."],
    meta: MpcMeta,
    ell: int = 16,
    trials: int = 1000,
    threads: Optional[int] = None,
    progress: ProgressType = False,
) -> AmplificationStats:
    """
    Single-branch failure rate q over ``trials`` seeds, then the failure
    rate of ``amplify`` with ``ell`` branches over ``trials`` further
    meta-seeds. Seed indices of the two runs do not overlap.
    """
    if trials < 1:
        raise FamilyError("at least one trial is required")
    workers = worker_count(threads)
    singles = ordered_map(alg, [meta.with_seed(i) for i in range(trials)], workers)
    single_failures = sum(not validator(L).valid for L in singles)

    amplified_failures = 0
    indices = range(trials, 2 * trials)
    iterator = tqdm(indices, desc="amplified trials", leave=False) if progress else indices
    for index in iterator:
        result = amplify(alg, validator, ell, meta.with_seed(index), threads)
        amplified_failures += not result.valid
    stats = AmplificationStats(ell, trials, single_failures, amplified_failures)
    logger.info(
        "amplification over %d trials: q=%s, %d-branch rate %s (bound %.3g)",
        trials, stats.single_rate, ell, stats.amplified_rate, stats.bound(),
    )
    return stats


def find_universal_seed(
    alg: Annotated[Callable[[LegalGraph, MpcMeta], Labeling], "Seeded algorithm."],
    corpus: Sequence[LegalGraph],
    seeds: Annotated[Sequence[int], "Truncated seed space: indices stretched by expand_seed."],
    validator: Annotated[Callable[[LegalGraph, Labeling], Verdict], "Validator per instance."],
    seed_bits: int = 4096,
    cap: int = DEFAULT_ENUMERATION_CAP,
    progress: ProgressType = False,
) -> Optional[int]:
    seeds = list(seeds)
    if len(seeds) * max(len(corpus), 1) > cap:
        raise FamilyError(f"{len(seeds)} seeds x {len(corpus)} graphs exceed the cap {cap}")
    iterator = tqdm(seeds, desc="universal seed", unit="seed") if progress else seeds
    for index in iterator:
        seed_hex = expand_seed(index, seed_bits)
        ok = True
        for g in corpus:
            meta = MpcMeta.for_graph(g, seed_hex)
            if not validator(g, alg(g, meta)).valid:
                ok = False
                break
        if ok:
            logger.info("universal seed %d found for %d graphs", index, len(corpus))
            return index
    logger.warning("no universal seed among %d candidates", len(seeds))
    return None
