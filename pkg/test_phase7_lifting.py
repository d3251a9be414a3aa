"""
MPCLAB - Phase 7 Testing Script
Replication graphs, s-t connectivity simulations, stability and sensitivity

Run with: python test_phase7_lifting.py   (or pytest)
"""

import itertools
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mpclab.errors import GraphError, PreconditionError
from mpclab.functional.problems import get_problem
from mpclab.functional.replication import (
    ReplicationSpec,
    build_replication,
    check_replication_implication,
    replicate_labeling,
)
from mpclab.functional.stability import (
    COUNTEREXAMPLE,
    EXACT,
    MONTE_CARLO,
    estimate_sensitivity,
    replay_witness,
    search_counterexample,
    sensitivity_seeds,
    test_component_stability as component_stability,
)
from mpclab.functional.stconn import (
    CASE1,
    CASE2,
    EARLY_EXIT_NO,
    HOST_FAMILIES,
    StConnInstance,
    build_stconn_simulation,
    classify_case,
    host_family,
    random_radius_identical_pair,
    stconn_sweep,
    structural_case,
)
from mpclab.graph import atlas, generate, validate_legal
from mpclab.sim import MpcConfig, MpcMeta
from mpclab.sim.config import DEFAULT_SEED_BITS

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


def pair(D=2, max_nodes=6, seed=0):
    return random_radius_identical_pair(D, max_nodes, np.random.default_rng(seed))


def test_replication_is_legal():
    g = generate("cycle", 5, seed=3)
    spec = ReplicationSpec(g, copies=25, isolated=4)
    r = build_replication(spec)
    assert r.n == spec.size == 129
    assert r.m == 25 * 5
    assert validate_legal(r).ok
    assert r.ids()[:5] == g.ids() and r.ids()[5:10] == g.ids()
    assert set(r.ids()[125:]) == {spec.isolated_id}
    assert r.nodes[:5] == g.nodes


def test_replication_preconditions():
    g = generate("path", 3)
    with pytest.raises(PreconditionError):
        ReplicationSpec(g, copies=0)
    with pytest.raises(PreconditionError):
        ReplicationSpec(g, copies=2, isolated=3)
    with pytest.raises(GraphError):
        build_replication(ReplicationSpec(g, copies=4, cap=5))
    spec = ReplicationSpec(g, copies=2)
    with pytest.raises(PreconditionError):
        check_replication_implication(get_problem("mis"), generate("path", 4), (True,) * 4, True, spec)


def test_replication_implication_exhaustive():
    mis, large = get_problem("mis"), get_problem("large_is")
    for g in atlas(5, connected_only=False):
        for isolated in {0, g.n - 1}:
            spec = ReplicationSpec(g, copies=g.n**2, isolated=isolated)
            for labeling in itertools.product((False, True), repeat=g.n):
                assert check_replication_implication(mis, g, labeling, True, spec)
                assert check_replication_implication(large, g, labeling, False, spec)


def test_replicate_labeling():
    spec = ReplicationSpec(generate("path", 2), copies=3, isolated=1, isolated_label=True)
    assert replicate_labeling(spec, (True, False)) == (True, False) * 3 + (True,)


def test_stconn_case1_on_climbing_path():
    left, right = pair(D=2)
    host, s, t = host_family("path", 3)
    inst = StConnInstance(host, s, t, 2, (1, 2, 1), left, right)
    assert classify_case(inst) == CASE1
    build = build_stconn_simulation(inst)
    assert structural_case(inst, build) == CASE1
    assert validate_legal(build.left).ok and validate_legal(build.right).ok


def test_stconn_case2_when_values_do_not_climb():
    left, right = pair(D=2)
    host, s, t = host_family("path", 3)
    inst = StConnInstance(host, s, t, 2, (2, 1, 1), left, right)
    assert classify_case(inst) == CASE2
    assert structural_case(inst, build_stconn_simulation(inst)) == CASE2


def test_stconn_early_exit():
    left, right = pair(D=2)
    host, s, t = host_family("interior_s", 4)
    inst = StConnInstance(host, s, t, 2, (1, 1, 2, 1), left, right)
    assert build_stconn_simulation(inst) == EARLY_EXIT_NO
    assert classify_case(inst) == CASE2


def test_stconn_preconditions():
    left, right = pair(D=2)
    host, s, t = host_family("path", 3)
    with pytest.raises(PreconditionError):
        StConnInstance(host, s, s, 2, (1, 1, 1), left, right)
    with pytest.raises(PreconditionError):
        StConnInstance(host, s, t, 2, (1, 3, 1), left, right)
    with pytest.raises(PreconditionError):
        StConnInstance(host, s, t, 3, (1, 1, 1), left, right)
    with pytest.raises(GraphError):
        host_family("pendant", 3)


@pytest.mark.parametrize(
    "family,size,D",
    [("path", 3, 2), ("path", 4, 3), ("interior_s", 3, 2), ("pendant", 4, 2), ("two_paths", 4, 2), ("cycle_pendants", 5, 2)],
)
def test_stconn_sweep_agrees(family, size, D):
    left, right = pair(D=D, max_nodes=D + 4, seed=size)
    host, s, t = host_family(family, size)
    frame = stconn_sweep(StConnInstance(host, s, t, D, (1,) * host.n, left, right))
    assert len(frame) == D**host.n
    assert frame["agree"].all()


def test_stconn_exhaustive_over_small_hosts():
    rng = np.random.default_rng(7)
    checked = 0
    for family in HOST_FAMILIES:
        for size in range(2, 7):
            try:
                host, s, t = host_family(family, size)
            except GraphError:
                continue
            for D in range(1, 5):
                left, right = random_radius_identical_pair(D, 6, rng, shuffle_ids=True)
                frame = stconn_sweep(StConnInstance(host, s, t, D, (1,) * host.n, left, right))
                assert len(frame) == D**host.n
                assert frame["agree"].all(), (family, size, D)
                checked += len(frame)
    assert checked > 4**6


def test_stconn_twenty_pairs_on_six_node_path():
    rng = np.random.default_rng(11)
    host, s, t = host_family("path", 6)
    checked = 0
    for _ in range(20):
        left, right = random_radius_identical_pair(4, 6, rng, shuffle_ids=True)
        assert max(left.graph.n, right.graph.n) <= 6
        frame = stconn_sweep(StConnInstance(host, s, t, 4, (1,) * host.n, left, right))
        assert frame["agree"].all()
        checked += len(frame)
    assert checked == 4**6 * 20


def test_ball_local_is_stable():
    g = generate("two_cycles", 10, seed=1)
    report = component_stability("ball_local", g, MpcMeta.for_graph(g), budget=6, cfg=WIDE, params={"radius": 1})
    assert report.stable
    assert report.trials == 6
    assert set(report.kinds) == {"names", "redistribution", "replacement"}


def test_constant_label_is_stable_on_connected_graph():
    g = generate("cycle", 8, seed=1)
    report = component_stability("constant_label", g, MpcMeta.for_graph(g), budget=6)
    assert report.stable
    # no second component to replace
    assert "replacement" not in report.kinds


def test_amplified_counterexample_replays():
    g = generate("two_cycles", 10, seed=1)
    params = {"reps": 4}
    report = search_counterexample("amplified_large_is", g, range(60), budget=12, cfg=WIDE, params=params)
    assert report.verdict == COUNTEREXAMPLE
    assert report.witness.kind == "replacement"
    assert replay_witness("amplified_large_is", report.witness, params)


def _context(left, right):
    return max(left.graph.n, right.graph.n) + 2, max(left.graph.max_degree, right.graph.max_degree)


def test_sensitivity_zero_within_radius():
    left, right = pair(D=2, max_nodes=7, seed=4)
    n_ctx, delta_ctx = _context(left, right)
    constant = estimate_sensitivity("constant_label", left, right, 2, n_ctx, delta_ctx, seed_bits=2)
    assert constant.probability == 0 and constant.trials == 4 and constant.mode == EXACT
    for radius in (1, 2):
        local = estimate_sensitivity(
            "ball_local", left, right, 2, n_ctx, delta_ctx, samples=4, cfg=WIDE, params={"radius": radius}
        )
        assert local.probability == 0 and local.mode == MONTE_CARLO


def test_sensitivity_beyond_radius():
    left, right = pair(D=2, max_nodes=7, seed=4)
    n_ctx, delta_ctx = _context(left, right)
    estimate = estimate_sensitivity(
        "ball_local", left, right, 2, n_ctx, delta_ctx, seed_bits=3, cfg=WIDE, params={"radius": 3}
    )
    assert estimate.probability > 0
    assert estimate.trials == 8


def test_exact_sensitivity_draws_family_coefficients():
    left, right = pair(D=2, max_nodes=7, seed=4)
    n_ctx, delta_ctx = _context(left, right)
    estimate = estimate_sensitivity(
        "randomized_large_is", left, right, 2, n_ctx, delta_ctx, seed_bits=4, cfg=WIDE
    )
    assert estimate.mode == EXACT and estimate.trials == 16
    assert 0 <= estimate.probability <= 1
    assert estimate.probability == Fraction(estimate.differing, 16)


def test_exact_seeds_keep_enumerated_prefix():
    mode, seeds = sensitivity_seeds(seed_bits=3)
    seeds = list(seeds)
    assert mode == EXACT and len(seeds) == 8
    assert [s[:2] for s in seeds] == [f"0{i}" for i in range(8)]
    assert {len(s) for s in seeds} == {DEFAULT_SEED_BITS // 4}
    assert len({s[2:] for s in seeds}) == 1


def test_sensitivity_preconditions():
    left, right = pair(D=2, max_nodes=7, seed=4)
    n_ctx, delta_ctx = _context(left, right)
    with pytest.raises(PreconditionError):
        estimate_sensitivity("constant_label", left, right, 3, n_ctx, delta_ctx)
    with pytest.raises(PreconditionError):
        estimate_sensitivity("constant_label", left, right, 2, n_ctx, 0)
    with pytest.raises(PreconditionError):
        estimate_sensitivity("constant_label", left, right, 2, 2, delta_ctx)


def main():
    print_header("MPCLAB - Phase 7: lifting and stability")
    sweeps = [("path", 3, 2), ("path", 4, 3), ("interior_s", 3, 2), ("pendant", 4, 2), ("two_paths", 4, 2), ("cycle_pendants", 5, 2)]
    tests = [
        ("test_replication_is_legal", test_replication_is_legal),
        ("test_replication_preconditions", test_replication_preconditions),
        ("test_replication_implication_exhaustive", test_replication_implication_exhaustive),
        ("test_replicate_labeling", test_replicate_labeling),
        ("test_stconn_case1_on_climbing_path", test_stconn_case1_on_climbing_path),
        ("test_stconn_case2_when_values_do_not_climb", test_stconn_case2_when_values_do_not_climb),
        ("test_stconn_early_exit", test_stconn_early_exit),
        ("test_stconn_preconditions", test_stconn_preconditions),
        ("test_stconn_sweep_agrees", lambda: [test_stconn_sweep_agrees(*args) for args in sweeps]),
        ("test_stconn_exhaustive_over_small_hosts", test_stconn_exhaustive_over_small_hosts),
        ("test_stconn_twenty_pairs_on_six_node_path", test_stconn_twenty_pairs_on_six_node_path),
        ("test_ball_local_is_stable", test_ball_local_is_stable),
        ("test_constant_label_is_stable_on_connected_graph", test_constant_label_is_stable_on_connected_graph),
        ("test_amplified_counterexample_replays", test_amplified_counterexample_replays),
        ("test_sensitivity_zero_within_radius", test_sensitivity_zero_within_radius),
        ("test_sensitivity_beyond_radius", test_sensitivity_beyond_radius),
        ("test_exact_sensitivity_draws_family_coefficients", test_exact_sensitivity_draws_family_coefficients),
        ("test_exact_seeds_keep_enumerated_prefix", test_exact_seeds_keep_enumerated_prefix),
        ("test_sensitivity_preconditions", test_sensitivity_preconditions),
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
