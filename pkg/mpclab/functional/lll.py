"""
Lovász local lemma instances over fair bits, solved two ways.

- moser_tardos: resample the first violated event until none is left
- derand_lll_single_shot: bits read from a k-wise family, the seed fixed by
  conditional expectations on the number of violated events; when that
  expectation is below one the result is certified violation-free
- sinkless_orientation: one bit per edge, one event per node of degree >= 3
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Annotated, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import FamilyError, PreconditionError, ResampleCapExceeded
from ..graph.legal import LegalGraph
from ..sim.config import DEFAULT_ENUMERATION_CAP, MpcConfig, MpcMeta
from ..sim.engine import RoundTrace, RunResult
from .costs import CostFunction
from .derandomize import SeedChoice, SimulatedAggregate, aggregate_radix, fix_seed_cond_exp
from .hashing import KWiseFamily, fair_bit, hash_values, smallest_prime_at_least
from .problems import orientation_to_labeling

logger = logging.getLogger(__name__)

Bits = Tuple[int, ...]

RESAMPLE_CAP = 10**5
MIN_PRIME = 64


@dataclass(frozen=True)
class BadEvent:
    variables: Tuple[int, ...]
    predicate: Callable[[Bits], bool]
    owner: Optional[int] = None

    @classmethod
    def forbidding(cls, variables: Sequence[int], bits: Sequence[int], owner: Optional[int] = None) -> "BadEvent":
        """The event that ``variables`` take exactly ``bits``."""
        target = tuple(int(b) for b in bits)
        event = cls(tuple(variables), lambda xs: tuple(xs) == target, owner)
        event.__dict__["violating"] = (target,)
        return event

    @cached_property
    def violating(self) -> Tuple[Bits, ...]:
        return tuple(
            bits
            for bits in itertools.product((0, 1), repeat=len(self.variables))
            if self.predicate(bits)
        )

    @property
    def probability(self) -> Fraction:
        return Fraction(len(self.violating), 2 ** len(self.variables))

    def occurs(self, assignment: Sequence[int]) -> bool:
        return bool(self.predicate(tuple(int(assignment[x]) for x in self.variables)))


@dataclass(frozen=True)
class LllInstance:
    variables: int
    events: Tuple[BadEvent, ...]

    def __post_init__(self):
        for event in self.events:
            if len(set(event.variables)) != len(event.variables):
                raise PreconditionError(f"event repeats a variable: {event.variables}")
            if any(not 0 <= x < self.variables for x in event.variables):
                raise PreconditionError(f"event variables {event.variables} out of range")

    @cached_property
    def readers(self) -> List[List[int]]:
        readers: List[List[int]] = [[] for _ in range(self.variables)]
        for e, event in enumerate(self.events):
            for x in event.variables:
                readers[x].append(e)
        return readers

    @cached_property
    def dependency_degree(self) -> int:
        """Largest number of other events sharing a variable with one event."""
        d = 0
        for e, event in enumerate(self.events):
            shared = {other for x in event.variables for other in self.readers[x]}
            shared.discard(e)
            d = max(d, len(shared))
        return d

    @cached_property
    def max_probability(self) -> Fraction:
        return max((event.probability for event in self.events), default=Fraction(0))

    @property
    def max_event_size(self) -> int:
        return max((len(event.variables) for event in self.events), default=0)

    def criterion_holds(self) -> bool:
        return math.e * float(self.max_probability) * (self.dependency_degree + 1) <= 1

    def violated(self, assignment: Sequence[int]) -> List[int]:
        return [e for e, event in enumerate(self.events) if event.occurs(assignment)]


@dataclass(frozen=True)
class MoserTardosResult:
    assignment: Bits
    resamples: int


def moser_tardos(
    inst: LllInstance,
    seed: int = 0,
    cap: Annotated[int, "Resampling steps before giving up."] = RESAMPLE_CAP,
    check_criterion: bool = True,
) -> MoserTardosResult:
    if check_criterion and not inst.criterion_holds():
        raise PreconditionError(
            f"e * {inst.max_probability} * ({inst.dependency_degree} + 1) exceeds 1"
        )
    rng = np.random.default_rng(seed)
    assignment = rng.integers(0, 2, size=inst.variables)
    for resamples in range(cap + 1):
        bad = next((event for event in inst.events if event.occurs(assignment)), None)
        if bad is None:
            logger.debug("Moser-Tardos finished after %d resamples", resamples)
            return MoserTardosResult(tuple(int(b) for b in assignment), resamples)
        if resamples == cap:
            break
        assignment[list(bad.variables)] = rng.integers(0, 2, size=len(bad.variables))
    raise ResampleCapExceeded(cap)


def variable_coloring(inst: LllInstance) -> Tuple[int, ...]:
    """Greedy colouring, in index order, of variables that share an event."""
    colors: List[int] = []
    for x in range(inst.variables):
        taken = {
            colors[y]
            for e in inst.readers[x]
            for y in inst.events[e].variables
            if y < x
        }
        c = 0
        while c in taken:
            c += 1
        colors.append(c)
    return tuple(colors)


class LllCost(CostFunction):
    """
    Number of violated events, over the evaluation basis: digit c of the
    seed is h(c), and variable x reads the fair bit of h(colour_x). With
    the first j evaluations fixed the rest are independent, so each
    event's conditional probability is a product of exact bit biases.
    Numerators share the denominator p^s, s the largest event.
    """

    basis = "evaluations"

    def __init__(
        self,
        inst: LllInstance,
        f: KWiseFamily,
        colors: Sequence[int],
        g: Optional[LegalGraph] = None,
        cap: int = DEFAULT_ENUMERATION_CAP,
    ):
        super().__init__(g, cap)
        self.inst = inst
        self.colors = tuple(colors)
        self.points = tuple(range(f.k))
        self.columns = g.n if g is not None else len(inst.events)
        self.owners = [
            event.owner if g is not None else e for e, event in enumerate(inst.events)
        ]
        if g is not None and any(o is None or not 0 <= o < g.n for o in self.owners):
            raise PreconditionError("every event needs an owner node to aggregate over the graph")
        self.weights = (f.prime // 2, f.prime - f.prime // 2)
        self.scale = f.prime ** inst.max_event_size

    def _weight(self, f: KWiseFamily, event: BadEvent, fixed: Dict[int, int]) -> int:
        """Numerator of P(event | fixed colours) over p^s."""
        total = 0
        for bits in event.violating:
            term = self.scale
            for x, b in zip(event.variables, bits):
                c = self.colors[x]
                if c in fixed:
                    if fixed[c] != b:
                        term = 0
                        break
                else:
                    term = term * self.weights[b] // f.prime
            total += term
        return total

    def node_tables(self, f, prefix):
        position = len(prefix)
        fixed = {c: fair_bit(f, v) for c, v in enumerate(prefix)}
        table = np.zeros((f.prime, self.columns), dtype=object)
        for event, owner in zip(self.inst.events, self.owners):
            if position in (self.colors[x] for x in event.variables):
                levels = [self._weight(f, event, {**fixed, position: b}) for b in (0, 1)]
                for value in range(f.prime):
                    table[value, owner] += levels[fair_bit(f, value)]
            else:
                table[:, owner] += self._weight(f, event, fixed)
        return table, self.scale

    def bits(self, f: KWiseFamily, digits: Sequence[int]) -> Bits:
        return tuple(fair_bit(f, digits[c]) for c in self.colors)

    def cost(self, f, seed) -> Fraction:
        return Fraction(len(self.inst.violated(self.bits(f, seed))))


def lll_family(inst: LllInstance, colors: Sequence[int]) -> KWiseFamily:
    k = max(max(colors, default=-1) + 1, inst.max_event_size, 1)
    p = smallest_prime_at_least(max(k, 4 * inst.max_event_size, MIN_PRIME))
    return KWiseFamily(p, k, p)


def expected_violations(inst: LllInstance, f: KWiseFamily) -> Fraction:
    """Exact E[violated events] when every bit is drawn independently from the field."""
    zero = Fraction(f.prime // 2, f.prime)
    total = Fraction(0)
    for event in inst.events:
        for bits in event.violating:
            term = Fraction(1)
            for b in bits:
                term *= zero if b == 0 else 1 - zero
            total += term
    return total


@dataclass(frozen=True)
class LllOutcome:
    assignment: Bits
    violations: int
    expectation: Fraction
    choice: SeedChoice

    @property
    def certified(self) -> bool:
        return self.expectation < 1 and self.violations == 0


def derand_lll_single_shot(
    inst: LllInstance,
    f: Optional[KWiseFamily] = None,
    g: Optional[LegalGraph] = None,
    cfg: Optional[MpcConfig] = None,
    meta: Optional[MpcMeta] = None,
    trace: Optional[RoundTrace] = None,
) -> LllOutcome:
    """
    Fix one seed for the whole instance. Achieved violations never exceed
    the exact expectation. With ``g``, ``cfg``, ``meta`` and ``trace`` the
    per-node conditional tables are summed through the simulator.
    """
    colors = variable_coloring(inst)
    count = max(colors, default=-1) + 1
    f = f or lll_family(inst, colors)
    if f.k < inst.max_event_size:
        raise FamilyError(f"k = {f.k} is below the largest event size {inst.max_event_size}")
    if f.k < count or f.domain_bound < f.k:
        raise FamilyError(f"k = {f.k} cannot give {count} variable colours distinct points")

    cost = LllCost(inst, f, colors, g)
    expectation = expected_violations(inst, f)
    if g is not None and cfg is not None and meta is not None and trace is not None:
        aggregate = SimulatedAggregate(cost, f, g, cfg, meta, trace)
        choice = fix_seed_cond_exp(f, cost, g, radix=aggregate_radix(cfg.budget(g.n), f.prime), aggregate=aggregate)
    else:
        choice = fix_seed_cond_exp(f, cost)
    assignment = tuple(fair_bit(f, v) for v in hash_values(f, choice.coefficients, colors)) if colors else ()
    violations = len(inst.violated(assignment))
    if Fraction(violations) > expectation:
        raise FamilyError(f"{violations} violations exceed the expectation {expectation}")
    logger.info("single-shot LLL: %d violated of %d events (E = %s)", violations, len(inst.events), expectation)
    return LllOutcome(assignment, violations, expectation, choice)


def sinkless_instance(g: LegalGraph) -> LllInstance:
    """
    Bit e = 1 orients sorted edge e = (i, j) as i -> j. Each node of degree
    at least 3 owns the event that all its edges point inward.
    """
    incident: List[List[Tuple[int, int]]] = [[] for _ in range(g.n)]
    for e, (i, j) in enumerate(g.sorted_edges()):
        incident[i].append((e, 0))
        incident[j].append((e, 1))
    events = tuple(
        BadEvent.forbidding([e for e, _ in incident[v]], [b for _, b in incident[v]], owner=v)
        for v in range(g.n)
        if len(incident[v]) >= 3
    )
    return LllInstance(g.m, events)


@dataclass(frozen=True)
class OrientationResult:
    bits: Bits
    mode: str
    expectation: Fraction
    resamples: int = 0

    def labeling(self, g: LegalGraph):
        return orientation_to_labeling(g, self.bits)


def sinkless_orientation(
    g: LegalGraph,
    cfg: Optional[MpcConfig] = None,
    meta: Optional[MpcMeta] = None,
    trace: Optional[RoundTrace] = None,
    cap: int = RESAMPLE_CAP,
) -> OrientationResult:
    """Single-shot when the expected number of sinks is below one, Moser-Tardos otherwise."""
    inst = sinkless_instance(g)
    if not inst.events:
        return OrientationResult(tuple(0 for _ in range(g.m)), "unconstrained", Fraction(0))
    colors = variable_coloring(inst)
    f = lll_family(inst, colors)
    expectation = expected_violations(inst, f)
    if expectation < 1:
        outcome = derand_lll_single_shot(inst, f, g, cfg, meta, trace)
        return OrientationResult(outcome.assignment, "single-shot", expectation)
    if not inst.criterion_holds():
        logger.warning(
            "LLL criterion fails (p = %s, d = %d); resampling anyway",
            inst.max_probability, inst.dependency_degree,
        )
    seed = meta.seed_int if meta is not None else 0
    result = moser_tardos(inst, seed, cap, check_criterion=False)
    if trace is not None:
        trace.charge("moser_tardos", max(1, result.resamples))
    return OrientationResult(result.assignment, "moser-tardos", expectation, result.resamples)


def sinkless_algorithm(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, cap: int = RESAMPLE_CAP) -> RunResult:
    trace = RoundTrace(budget=cfg.budget(g.n))
    result = sinkless_orientation(g, cfg, meta, trace, cap)
    # every node reads its edge bits from the broadcast seed
    trace.charge("apply_orientation", 1, peak=g.max_degree + 1)
    return RunResult(
        result.labeling(g),
        trace,
        {"mode": result.mode, "expectation": str(result.expectation), "resamples": result.resamples},
    )


def render_orientation(g: LegalGraph, bits: Sequence[int]) -> List[str]:
    lines = []
    for (i, j), bit in zip(g.sorted_edges(), bits):
        head, tail = (i, j) if bit else (j, i)
        lines.append(f"orient {head} {tail} ->")
    return lines
