"""
Large independent sets.

- randomized_large_is: one Luby step with (Δ+1)-wise independent priorities
- amplified_large_is: several Luby branches on disjoint seed slices, the
  largest branch wins (component-unstable by construction)
- deterministic_large_is: proper-colour keys, optional deterministic
  sparsification, then one Luby step whose seed is fixed by conditional
  expectations summed through the simulator
"""

import logging
from functools import partial
from typing import Sequence, Tuple

from ..graph.legal import LegalGraph, default_cap
from ..sim.config import DEFAULT_ENUMERATION_CAP, MpcConfig, MpcMeta
from ..sim.engine import CLAIMED_STABLE, CLAIMED_UNSTABLE, RoundTrace, RunResult, run
from ..sim.programs import AggregateSum, ConstantLabel, LubyJoin
from ..sim.seed import SeedTape
from ..sim.vertex import VertexView
from .derandomize import (
    SimulatedAggregate,
    aggregate_radix,
    branch_metas,
    derand_luby_step,
    derand_sparsify,
    digit_count,
    luby_cost,
)
from .exponentiation import reduce_id_space
from .hashing import (
    KWiseFamily,
    coefficients_from_seed,
    family_for,
    kwise_eval,
    smallest_prime_at_least,
)
from .problems import independence_ratio, large_is_threshold_met, set_to_labeling

logger = logging.getLogger(__name__)

SPARSIFY_ABOVE = 32
SPARSIFY_TARGET = 8


def luby_family(meta: MpcMeta) -> KWiseFamily:
    """(Δ+1)-wise family over IDs up to the default cap of N; depends on meta only."""
    delta = meta.max_degree
    k = max(2, delta + 1)
    p = smallest_prime_at_least(max(8 * delta * delta, default_cap(meta.size_estimate) + 1))
    return KWiseFamily(p, k, p)


def _id_priorities(f: KWiseFamily, seeds: Sequence[Tuple[int, ...]], view: VertexView, ctx) -> list:
    node_id = view.record.id
    return [(kwise_eval(f, seed, node_id), node_id) for seed in seeds]


def _key_priorities(f: KWiseFamily, seed: Tuple[int, ...], keys: Sequence[int], view: VertexView, ctx) -> list:
    key = keys[view.node]
    return [(kwise_eval(f, seed, key), key)]


def randomized_large_is(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta) -> RunResult:
    f = luby_family(meta)
    seed = coefficients_from_seed(SeedTape.from_hex(meta.seed_hex), f)
    program = LubyJoin(
        partial(_id_priorities, f, (seed,)),
        name="randomized_large_is",
        stability=CLAIMED_STABLE,
        seed_bits=f.seed_width,
    )
    labeling, trace = run(program, g, cfg, meta)
    return RunResult(labeling, trace, {"family": f.descriptor()})


def branch_sizes(
    g: LegalGraph,
    joined: Sequence[Tuple[bool, ...]],
    branches: int,
    cfg: MpcConfig,
    meta: MpcMeta,
    trace: RoundTrace,
) -> Tuple[int, ...]:
    """Per-branch set sizes summed through the simulator, in chunks that fit the budget."""
    if g.n == 0:
        return (0,) * branches
    width = max(1, (cfg.budget(g.n) - 6) // 3)
    sizes = []
    for lo in range(0, branches, width):
        hi = min(lo + width, branches)
        vectors = [[int(bits[b]) for b in range(lo, hi)] for bits in joined]
        totals, chunk = run(AggregateSum(vectors, hi - lo, name="branch_sizes"), g, cfg, meta)
        trace.extend(chunk)
        sizes.extend(totals[0])
    return tuple(sizes)


def amplified_large_is(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, reps: int = 1) -> RunResult:
    f = luby_family(meta)
    seeds = tuple(
        coefficients_from_seed(SeedTape.from_hex(branch.seed_hex), f)
        for branch in branch_metas(meta, reps)
    )
    program = LubyJoin(
        partial(_id_priorities, f, seeds),
        branches=reps,
        name="amplified_large_is",
        stability=CLAIMED_UNSTABLE,
        seed_bits=meta.seed_bits,
    )
    joined, trace = run(program, g, cfg, meta)
    if reps == 1:
        joined = tuple((bit,) for bit in joined)
    sizes = branch_sizes(g, joined, reps, cfg, meta, trace)
    best = max(range(reps), key=lambda j: (sizes[j], -j))
    labeling = tuple(bits[best] for bits in joined)
    logger.info("amplified Luby: branch %d of %d wins with %d nodes", best, reps, sizes[best])
    return RunResult(labeling, trace, {"branch": best, "sizes": list(sizes), "family": f.descriptor()})


def aggregation_rounds(n: int, budget: int, length: int) -> int:
    fan = max(2, (budget - length - 4) // (length + 3))
    height = 0
    reach = 1
    while reach < n:
        reach = reach * fan + 1
        height += 1
    return 2 * height


def deterministic_large_is(
    g: LegalGraph,
    cfg: MpcConfig,
    meta: MpcMeta,
    sparsify_above: int = SPARSIFY_ABOVE,
    target: int = SPARSIFY_TARGET,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> RunResult:
    """
    Independent set of size >= n / (4Δ + 1) on the direct path; above
    ``sparsify_above`` the graph is first sampled down deterministically and
    the achieved ratio c (size = n / (cΔ)) is reported. Deterministic but not
    component-stable: the fixed seed depends on every component.
    """
    if g.m == 0:
        labeling, trace = run(ConstantLabel(True), g, cfg, meta)
        return RunResult(labeling, trace, {"mode": "isolated", "ratio": str(independence_ratio(g.n, g.n, 0))})

    trace = RoundTrace(budget=cfg.budget(g.n))
    coloring = reduce_id_space(g, 1, cfg, meta)
    trace.extend(coloring.trace)
    keys = list(coloring.colors)

    work, origin, mode = g, tuple(range(g.n)), "direct"
    if g.max_degree > sparsify_above:
        small = family_for(2, 4 * g.max_degree, coloring.count)
        sampled = derand_sparsify(g, target, small, keys, cap)
        budget = cfg.budget(g.n)
        length = aggregate_radix(budget, small.prime)
        trace.charge(
            "derand_sparsify",
            small.k * digit_count(small.prime, length) * aggregation_rounds(g.n, budget, length),
        )
        work, origin = sampled.graph, sampled.origin
        keys = [keys[v] for v in origin]
        mode = "sparsified"

    if work.m == 0:
        members = tuple(range(work.n))
        choice = None
    else:
        delta = work.max_degree
        f = family_for(2, 8 * delta * delta, work.n, max(keys) + 1)
        sub_meta = meta.model_copy(
            update={"n": work.n, "max_degree": delta, "size_estimate": max(meta.size_estimate, work.n)}
        )
        cost = luby_cost(work, f, keys, cap)
        aggregate = SimulatedAggregate(cost, f, work, cfg, sub_meta, trace)
        step = derand_luby_step(
            work, f, keys, cap, radix=aggregate_radix(cfg.budget(work.n), f.prime), aggregate=aggregate,
        )
        program = LubyJoin(
            partial(_key_priorities, f, step.choice.coefficients, keys), name="derand_luby_join"
        )
        joined, join_trace = run(program, work, cfg, sub_meta)
        trace.extend(join_trace)
        members = tuple(v for v, bit in enumerate(joined) if bit)
        choice = step.choice

    chosen = [origin[v] for v in members]
    labeling = set_to_labeling(g.n, chosen)
    ratio = independence_ratio(g.n, len(chosen), g.max_degree)
    if mode == "direct" and not large_is_threshold_met(g.n, len(chosen), g.max_degree, 4):
        logger.warning("Luby step kept %d of %d nodes, below n / (4Δ + 1)", len(chosen), g.n)
    extras = {
        "mode": mode,
        "ratio": str(ratio),
        "kept": work.n,
        "colors": coloring.count,
    }
    if choice is not None:
        extras["seed"] = choice.serialize()
    return RunResult(labeling, trace, extras)
