"""
MPCLAB - Phase 5 Testing Script
Large independent sets, extendable MIS, maximal matching and the LLL

Run with: python test_phase5_algorithms.py   (or pytest)
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mpclab.errors import IterationCapExceeded, PreconditionError
from mpclab.functional.independent_set import (
    amplified_large_is,
    deterministic_large_is,
    randomized_large_is,
)
from mpclab.functional.lll import (
    BadEvent,
    LllInstance,
    derand_lll_single_shot,
    moser_tardos,
    render_orientation,
    sinkless_algorithm,
    sinkless_instance,
    sinkless_orientation,
)
from mpclab.functional.mis import check_extendable, extendable_mis, maximal_matching
from mpclab.functional.problems import get_problem, labeling_to_set, validate
from mpclab.graph import atlas, generate
from mpclab.sim import MpcConfig, MpcMeta, RoundTrace

ROOMY = MpcConfig(space_constant=64)
WIDE = MpcConfig(delta=0.95, space_constant=256)


def print_header(title):
    print("\n" + "=" * 60)
    print(f"  {title}")
    print("=" * 60)


def print_result(test_name, success, message=""):
    status = "PASS" if success else "FAIL"
    print(f"{status} | {test_name}")
    if message:
        print(f"       └─ {message}")


def valid(problem, g, labeling, **params) -> bool:
    return validate(get_problem(problem, **params), g, labeling).valid


def bounded_degree_corpus(count, max_n, max_degree, seed, min_n=2):
    """Random G(n, p) graphs, trees and regular graphs with n <= max_n and Δ <= max_degree."""
    rng = np.random.default_rng(seed)
    graphs = []
    while len(graphs) < count:
        n = int(rng.integers(min_n, max_n + 1))
        graph_seed = int(rng.integers(0, 2**31))
        shape = len(graphs) % 3
        if shape == 0:
            g = generate("gnp", n, p=min(1.0, float(rng.uniform(0.5, 4.0)) / n), seed=graph_seed)
        elif shape == 1:
            g = generate("tree", n, seed=graph_seed)
        else:
            d = int(rng.integers(1, min(max_degree, n - 1) + 1))
            d -= (n * d) % 2
            if d == 0:
                continue
            g = generate("d_regular", n, d=d, seed=graph_seed)
        if g.max_degree <= max_degree:
            graphs.append(g)
    return graphs


def test_deterministic_large_is_on_atlas():
    for g in atlas(6):
        result = deterministic_large_is(g, ROOMY, MpcMeta.for_graph(g))
        assert valid("large_is", g, result.labeling)
        assert sum(result.labeling) * (4 * g.max_degree + 1) >= g.n
        assert result.trace.max_peak <= result.trace.budget


def test_deterministic_large_is_is_reproducible():
    g = generate("gnp", 16, p=0.3, seed=8)
    first = deterministic_large_is(g, WIDE, MpcMeta.for_graph(g, seed=1))
    second = deterministic_large_is(g, WIDE, MpcMeta.for_graph(g, seed=2))
    assert first.labeling == second.labeling
    assert valid("large_is", g, first.labeling)
    assert first.extras["mode"] == "direct"


@pytest.mark.parametrize(
    "g",
    [
        generate("cycle", 12, seed=1),
        generate("d_regular", 20, d=3, seed=4),
        generate("two_cycles", 14, seed=2),
    ],
)
def test_deterministic_large_is_on_sparse_graphs(g):
    result = deterministic_large_is(g, WIDE, MpcMeta.for_graph(g))
    assert valid("large_is", g, result.labeling)
    assert "seed" in result.extras


def test_deterministic_large_is_default_budget_on_cycle():
    g = generate("cycle", 12, seed=1)
    result = deterministic_large_is(g, MpcConfig(), MpcMeta.for_graph(g))
    assert valid("large_is", g, result.labeling)
    assert result.trace.max_peak <= MpcConfig().budget(12)


def test_deterministic_large_is_sparsified():
    g = generate("d_regular", 12, d=4, seed=3)
    result = deterministic_large_is(g, WIDE, MpcMeta.for_graph(g), sparsify_above=2, target=1)
    assert result.extras["mode"] == "sparsified"
    assert valid("independent_set", g, result.labeling)
    assert "derand_sparsify" in result.trace.stages


def test_deterministic_large_is_bound_on_random_corpus():
    corpus = bounded_degree_corpus(200, max_n=200, max_degree=16, seed=2024)
    assert len(corpus) == 200
    for g in corpus:
        result = deterministic_large_is(g, WIDE, MpcMeta.for_graph(g))
        assert valid("independent_set", g, result.labeling)
        # exact integer form of |IS| >= n / (4Δ + 1)
        assert sum(result.labeling) * (4 * g.max_degree + 1) >= g.n, (g.n, g.max_degree)
        assert result.trace.max_peak <= result.trace.budget


def test_isolated_nodes_all_join():
    g = generate("gnp", 5, p=0.0)
    result = deterministic_large_is(g, MpcConfig(), MpcMeta.for_graph(g))
    assert result.labeling == (True,) * 5
    assert result.extras["mode"] == "isolated"


def test_randomized_large_is():
    g = generate("gnp", 16, p=0.3, seed=5)
    for seed in range(3):
        result = randomized_large_is(g, WIDE, MpcMeta.for_graph(g, seed=seed))
        assert valid("independent_set", g, result.labeling)
        assert any(result.labeling)
        assert result.trace.rounds == 2


def test_amplified_large_is_reports_branches():
    g = generate("gnp", 12, p=0.3, seed=6)
    result = amplified_large_is(g, WIDE, MpcMeta.for_graph(g, seed=3), reps=4)
    assert valid("independent_set", g, result.labeling)
    sizes = result.extras["sizes"]
    assert len(sizes) == 4
    assert sum(result.labeling) == sizes[result.extras["branch"]] == max(sizes)


def test_extendable_mis():
    for g in (generate("gnp", 12, p=0.3, seed=7), generate("cycle", 10, seed=1), generate("star", 6)):
        run = extendable_mis(g, WIDE, MpcMeta.for_graph(g), iteration_cap=g.n + 1)
        assert valid("mis", g, run.labeling)
        assert run.iterations and all(it.clauses.ok for it in run.iterations)
        assert run.iterations[-1].undecided == 0
        undecided = [it.undecided for it in run.iterations]
        assert undecided == sorted(undecided, reverse=True)


def test_mis_iteration_cap():
    g = generate("path", 4)
    with pytest.raises(IterationCapExceeded) as info:
        extendable_mis(g, WIDE, MpcMeta.for_graph(g), iteration_cap=0)
    assert info.value.residual == 4


def test_check_extendable():
    g = generate("path", 3, id_policy="sequential")
    assert check_extendable(g, ["in", "out", None]).ok
    assert not check_extendable(g, ["in", None, None]).undecided_isolated
    assert check_extendable(g, ["in", "out", "in"]).ok
    assert not check_extendable(g, ["in", "in", None]).independent
    assert not check_extendable(g, ["out", None, None]).out_dominated


def test_maximal_matching():
    for g in (generate("gnp", 9, p=0.4, seed=2), generate("cycle", 8, seed=3)):
        result = maximal_matching(g, WIDE, MpcMeta.for_graph(g), iteration_cap=g.m + 1)
        assert valid("maximal_matching", g, result.labeling)
        matched = {v for edge in result.extras["edges"] for v in edge}
        assert len(matched) == 2 * len(result.extras["edges"])


def test_mis_and_matching_on_random_corpus():
    corpus = bounded_degree_corpus(50, max_n=96, max_degree=8, seed=512, min_n=4)
    for g in corpus:
        meta = MpcMeta.for_graph(g)
        run = extendable_mis(g, WIDE, meta)
        assert valid("mis", g, run.labeling)
        assert len(run.iterations) <= 10
        assert all(it.clauses.ok for it in run.iterations)
        matching = maximal_matching(g, WIDE, meta)
        assert valid("maximal_matching", g, matching.labeling)
        assert len(matching.extras["iterations"]) <= 10
        assert all(it["extendable"] for it in matching.extras["iterations"])


def test_moser_tardos_on_dense_regular_graph():
    g = generate("d_regular", 20, d=8, seed=1)
    inst = sinkless_instance(g)
    assert inst.criterion_holds()
    result = moser_tardos(inst, seed=4)
    assert inst.violated(result.assignment) == []


def test_moser_tardos_criterion_check():
    inst = sinkless_instance(generate("d_regular", 16, d=3, seed=1))
    assert not inst.criterion_holds()
    with pytest.raises(PreconditionError):
        moser_tardos(inst)


def test_lll_instance_preconditions():
    with pytest.raises(PreconditionError):
        LllInstance(2, (BadEvent.forbidding([0, 0], [1, 1]),))
    with pytest.raises(PreconditionError):
        LllInstance(2, (BadEvent.forbidding([0, 5], [1, 1]),))


@pytest.mark.parametrize("d", [8, 10])
def test_single_shot_certified(d):
    g = generate("d_regular", 64, d=d, seed=d)
    outcome = derand_lll_single_shot(sinkless_instance(g))
    assert outcome.expectation < 1
    assert outcome.certified
    assert outcome.choice.achieved <= outcome.choice.average


def test_sinkless_algorithm():
    g = generate("d_regular", 16, d=8, seed=2)
    result = sinkless_algorithm(g, WIDE, MpcMeta.for_graph(g))
    assert result.extras["mode"] == "single-shot"
    assert valid("sinkless", g, result.labeling)


def test_sinkless_falls_back_to_resampling():
    g = generate("d_regular", 16, d=3, seed=5)
    trace = RoundTrace()
    result = sinkless_orientation(g, WIDE, MpcMeta.for_graph(g), trace)
    assert result.mode == "moser-tardos"
    assert valid("sinkless", g, result.labeling(g))
    assert trace.rounds >= 1


def test_cycle_is_unconstrained():
    g = generate("cycle", 7)
    result = sinkless_orientation(g)
    assert result.mode == "unconstrained"
    assert valid("sinkless", g, result.labeling(g))
    assert len(render_orientation(g, result.bits)) == 7


def main():
    print_header("MPCLAB - Phase 5: algorithms")
    tests = [
        ("test_deterministic_large_is_on_atlas", test_deterministic_large_is_on_atlas),
        ("test_deterministic_large_is_is_reproducible", test_deterministic_large_is_is_reproducible),
        ("test_deterministic_large_is_on_sparse_graphs", lambda: [
            test_deterministic_large_is_on_sparse_graphs(g)
            for g in (generate("cycle", 12, seed=1), generate("d_regular", 20, d=3, seed=4), generate("two_cycles", 14, seed=2))
        ]),
        ("test_deterministic_large_is_default_budget_on_cycle", test_deterministic_large_is_default_budget_on_cycle),
        ("test_deterministic_large_is_sparsified", test_deterministic_large_is_sparsified),
        ("test_deterministic_large_is_bound_on_random_corpus", test_deterministic_large_is_bound_on_random_corpus),
        ("test_isolated_nodes_all_join", test_isolated_nodes_all_join),
        ("test_randomized_large_is", test_randomized_large_is),
        ("test_amplified_large_is_reports_branches", test_amplified_large_is_reports_branches),
        ("test_extendable_mis", test_extendable_mis),
        ("test_mis_iteration_cap", test_mis_iteration_cap),
        ("test_check_extendable", test_check_extendable),
        ("test_maximal_matching", test_maximal_matching),
        ("test_mis_and_matching_on_random_corpus", test_mis_and_matching_on_random_corpus),
        ("test_moser_tardos_on_dense_regular_graph", test_moser_tardos_on_dense_regular_graph),
        ("test_moser_tardos_criterion_check", test_moser_tardos_criterion_check),
        ("test_lll_instance_preconditions", test_lll_instance_preconditions),
        ("test_single_shot_certified", lambda: [test_single_shot_certified(d) for d in (8, 10)]),
        ("test_sinkless_algorithm", test_sinkless_algorithm),
        ("test_sinkless_falls_back_to_resampling", test_sinkless_falls_back_to_resampling),
        ("test_cycle_is_unconstrained", test_cycle_is_unconstrained),
    ]
    failed = 0
    for name, test in tests:
        try:
            test()
            print_result(name, True)
        except Exception as e:
            failed += 1
            print_result(name, False, f"{type(e).__name__}: {str(e)[:80]}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    return failed


if __name__ == "__main__":
    sys.exit(main())
