"""
Component-stability and sensitivity testers.

The stability tester perturbs an input in ways that keep, for a tracked
node v, the ID-labelled component CC(v), n, Δ and the seed fixed: names
are permuted, the input is redistributed over machines (index order and
execution schedule) and other components are replaced by
ID-relabelled copies of the same size. A component-stable algorithm must
give v the same output every time; the first divergence is returned as a
replayable witness.

The sensitivity estimator runs an algorithm on two centered graphs that
agree up to radius D, each embedded in the same (n, Δ) context, and
reports how often the two centers disagree over a seed set.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..errors import PreconditionError
from ..graph.legal import CenteredGraph, LegalGraph
from ..graph.transforms import (
    d_radius_identical,
    pad_isolated,
    permute_names,
    relabel_indices,
    with_ids,
)
from ..sim.config import DEFAULT_SEED_BITS, MpcConfig, MpcMeta, expand_seed
from ..sim.engine import RunResult

logger = logging.getLogger(__name__)

Algorithm = Callable[..., RunResult]

STABLE_ON_SUITE = "stable-on-suite"
COUNTEREXAMPLE = "counterexample"

EXACT = "exact"
MONTE_CARLO = "monte-carlo"
SENSITIVITY_TAIL_SALT = b"mpclab-sensitivity"


def _resolve(alg: Union[str, Algorithm]) -> Algorithm:
    if isinstance(alg, str):
        from ..toolkits import get_toolkit

        return get_toolkit(alg)
    return alg


@dataclass(frozen=True)
class Perturbation:
    kind: str
    graph: LegalGraph
    cfg: MpcConfig
    # perturbed index of each original node
    position: Tuple[int, ...]
    # original nodes whose component is untouched
    tracked: Tuple[int, ...]


@dataclass(frozen=True)
class StabilityWitness:
    kind: str
    original: LegalGraph
    perturbed: LegalGraph
    cfg: MpcConfig
    perturbed_cfg: MpcConfig
    meta: MpcMeta
    node: int
    perturbed_node: int
    outputs: Tuple[Any, Any]

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "node": self.node,
            "perturbed_node": self.perturbed_node,
            "node_id": self.original.nodes[self.node].id,
            "outputs": [repr(x) for x in self.outputs],
            "seed_hex": self.meta.seed_hex[:32],
        }


@dataclass
class StabilityReport:
    verdict: str
    witness: Optional[StabilityWitness] = None
    trials: int = 0
    kinds: Dict[str, int] = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.verdict == STABLE_ON_SUITE


def _identity(n: int) -> Tuple[int, ...]:
    return tuple(range(n))


def name_permutations(g: LegalGraph, cfg: MpcConfig, rng: np.random.Generator) -> Perturbation:
    return Perturbation("names", permute_names(g, rng), cfg, _identity(g.n), _identity(g.n))


def redistributions(g: LegalGraph, cfg: MpcConfig, rng: np.random.Generator) -> Perturbation:
    perm = [int(x) for x in rng.permutation(g.n)]
    schedule = ("canonical", "reversed", "shuffled")[int(rng.integers(0, 3))]
    moved = cfg.model_copy(
        update={
            "schedule": schedule,
            "schedule_seed": int(rng.integers(0, 2**31)),
        }
    )
    return Perturbation("redistribution", relabel_indices(g, perm), moved, tuple(perm), _identity(g.n))


def component_replacements(g: LegalGraph, cfg: MpcConfig, rng: np.random.Generator) -> Optional[Perturbation]:
    """Keep one component, give every other component fresh distinct IDs of the same count."""
    components = g.components()
    if len(components) < 2:
        return None
    kept = components[int(rng.integers(0, len(components)))]
    ids = g.ids()
    for comp in components:
        if comp is kept:
            continue
        fresh = rng.choice(g.cap + 1, size=len(comp), replace=False)
        for v, new_id in zip(comp, fresh):
            ids[v] = int(new_id)
    return Perturbation("replacement", with_ids(g, ids), cfg, _identity(g.n), tuple(sorted(kept)))


PERTURBATIONS = (name_permutations, redistributions, component_replacements)


def _outputs(alg: Algorithm, g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, params: Dict[str, Any]) -> Tuple[Any, ...]:
    return tuple(alg(g, cfg, meta, **params).labeling)


def test_component_stability(
    alg: Union[str, Algorithm],
    g: LegalGraph,
    meta: MpcMeta,
    budget: int = 12,
    cfg: Optional[MpcConfig] = None,
    seed: int = 0,
    params: Optional[Dict[str, Any]] = None,
    progress: bool = False,
) -> StabilityReport:
    """``budget`` perturbations, cycling through names, redistribution and replacement."""
    fn = _resolve(alg)
    cfg = cfg or MpcConfig()
    params = params or {}
    rng = np.random.default_rng(seed)
    base = _outputs(fn, g, cfg, meta, params)
    report = StabilityReport(STABLE_ON_SUITE)
    trials = range(budget)
    if progress:
        trials = tqdm(trials, desc="perturbations", leave=False)
    for trial in trials:
        make = PERTURBATIONS[trial % len(PERTURBATIONS)]
        perturbation = make(g, cfg, rng)
        if perturbation is None:
            continue
        report.trials += 1
        report.kinds[perturbation.kind] = report.kinds.get(perturbation.kind, 0) + 1
        got = _outputs(fn, perturbation.graph, perturbation.cfg, meta, params)
        for v in perturbation.tracked:
            w = perturbation.position[v]
            if base[v] != got[w]:
                report.verdict = COUNTEREXAMPLE
                report.witness = StabilityWitness(
                    perturbation.kind, g, perturbation.graph, cfg, perturbation.cfg,
                    meta, v, w, (base[v], got[w]),
                )
                logger.info(
                    "stability counterexample after %d trials: %s changes node %d",
                    report.trials, perturbation.kind, v,
                )
                return report
    logger.info("no divergence in %d perturbations", report.trials)
    return report


def replay_witness(
    alg: Union[str, Algorithm],
    witness: StabilityWitness,
    params: Optional[Dict[str, Any]] = None,
) -> bool:
    """True iff re-running both inputs reproduces the divergence."""
    fn = _resolve(alg)
    params = params or {}
    a = _outputs(fn, witness.original, witness.cfg, witness.meta, params)[witness.node]
    b = _outputs(fn, witness.perturbed, witness.perturbed_cfg, witness.meta, params)[witness.perturbed_node]
    return a != b and (a, b) == witness.outputs


def search_counterexample(
    alg: Union[str, Algorithm],
    g: LegalGraph,
    seeds: Sequence[int],
    budget: int = 12,
    cfg: Optional[MpcConfig] = None,
    params: Optional[Dict[str, Any]] = None,
) -> StabilityReport:
    """Run the tester across seeds until one yields a witness."""
    report = StabilityReport(STABLE_ON_SUITE)
    for s in seeds:
        meta = MpcMeta.for_graph(g, seed=s)
        report = test_component_stability(alg, g, meta, budget, cfg, seed=s, params=params)
        if not report.stable:
            return report
    return report


# pytest must not collect the tester itself
test_component_stability.__test__ = False


@dataclass(frozen=True)
class SensitivityEstimate:
    probability: Fraction
    differing: int
    trials: int
    mode: str

    def as_dict(self) -> dict:
        return {
            "probability": str(self.probability),
            "differing": self.differing,
            "trials": self.trials,
            "mode": self.mode,
        }


def embed(c: CenteredGraph, n_ctx: int) -> LegalGraph:
    """The centered graph padded with isolated nodes to ``n_ctx`` nodes."""
    if c.graph.n > n_ctx:
        raise PreconditionError(f"context of {n_ctx} nodes cannot hold {c.graph.n}")
    return pad_isolated(c.graph, n_ctx, node_id=max(c.graph.ids(), default=-1) + 1)


def sensitivity_seeds(
    seed_bits: Optional[int] = None, samples: int = 64, total_bits: int = DEFAULT_SEED_BITS
) -> Tuple[str, Iterator[str]]:
    """
    Every seed of ``seed_bits`` bits (exact), or ``samples`` stretched seeds
    (Monte-Carlo). Exact seeds lead with the enumerated bits and share one
    fixed stretched tail up to ``total_bits``, so algorithms drawing family
    coefficients see a full-length tape.
    """
    if seed_bits is not None:
        # whole bytes, so every seed also works as a hash key
        width = 2 * max(1, -(-seed_bits // 8))
        tail = expand_seed(0, max(total_bits - 4 * width, 0), salt=SENSITIVITY_TAIL_SALT)
        return EXACT, (format(s, f"0{width}x") + tail for s in range(2**seed_bits))
    return MONTE_CARLO, (expand_seed(i, total_bits) for i in range(samples))


def estimate_sensitivity(
    alg: Union[str, Algorithm],
    left: CenteredGraph,
    right: CenteredGraph,
    D: int,
    n_ctx: int,
    delta_ctx: int,
    seed_bits: Optional[int] = None,
    samples: int = 64,
    cfg: Optional[MpcConfig] = None,
    params: Optional[Dict[str, Any]] = None,
) -> SensitivityEstimate:
    if not d_radius_identical(left, right, D):
        raise PreconditionError(f"the pair is not {D}-radius-identical")
    if max(left.graph.max_degree, right.graph.max_degree) > delta_ctx:
        raise PreconditionError(f"context degree {delta_ctx} is below the graphs' degree")
    fn = _resolve(alg)
    cfg = cfg or MpcConfig()
    params = params or {}
    graphs = (embed(left, n_ctx), embed(right, n_ctx))
    mode, seeds = sensitivity_seeds(seed_bits, samples)
    differing = trials = 0
    for seed_hex in seeds:
        meta = MpcMeta(n=n_ctx, max_degree=delta_ctx, size_estimate=n_ctx, seed_hex=seed_hex)
        a = fn(graphs[0], cfg, meta, **params).labeling[left.center]
        b = fn(graphs[1], cfg, meta, **params).labeling[right.center]
        trials += 1
        differing += a != b
    probability = Fraction(differing, trials) if trials else Fraction(0)
    logger.info("sensitivity %s over %d seeds (%s)", probability, trials, mode)
    return SensitivityEstimate(probability, differing, trials, mode)
