"""
MPCLAB - Phase 6 Testing Script
Problem descriptors, validators and labeling conversions

Run with: python test_phase6_problems.py   (or pytest)
"""

import os
import sys

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mpclab.errors import ProblemError
from mpclab.functional.problems import (
    get_problem,
    independence_ratio,
    labeling_to_matching,
    labeling_to_orientation,
    labeling_to_set,
    large_is_threshold_met,
    matching_to_labeling,
    orientation_to_labeling,
    radius_locality_check,
    set_to_labeling,
    validate,
)
from mpclab.graph import generate, to_networkx


def print_header(title):
    print("\n" + "=" * 60)
    print(f"  {title}")
    print("=" * 60)


def print_result(test_name, success, message=""):
    status = "PASS" if success else "FAIL"
    print(f"{status} | {test_name}")
    if message:
        print(f"       └─ {message}")


PATH = generate("path", 4, id_policy="sequential")


def test_independent_set_validator():
    p = get_problem("independent_set")
    assert validate(p, PATH, (True, False, True, False)).valid
    verdict = validate(p, PATH, (True, True, False, False))
    assert not verdict.valid and verdict.violations == (0, 1)
    assert validate(p, PATH, (False,) * 4).valid


def test_mis_validator():
    p = get_problem("mis")
    assert validate(p, PATH, (True, False, False, True)).valid
    verdict = validate(p, PATH, (True, False, False, False))
    assert verdict.violations == (2, 3)
    assert verdict.as_dict() == {"problem": "mis", "valid": False, "violations": [2, 3]}


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.floats(0.0, 1.0), st.integers(0, 1000))
def test_mis_validator_matches_networkx(n, p, seed):
    g = generate("gnp", n, p=p, seed=seed)
    members = nx.maximal_independent_set(to_networkx(g), seed=seed)
    assert validate(get_problem("mis"), g, set_to_labeling(g.n, members)).valid


def test_large_is_threshold_is_exact():
    # n = 9, Δ = 2: size 1 meets c = 4 exactly (1 * 9 >= 9), c = 3 does not
    assert large_is_threshold_met(9, 1, 2, 4)
    assert not large_is_threshold_met(9, 1, 2, 3)
    g = generate("cycle", 9, id_policy="sequential")
    one = set_to_labeling(9, [0])
    assert validate(get_problem("large_is"), g, one).valid
    assert not validate(get_problem("large_is", c=3), g, one).valid
    assert not validate(get_problem("large_is"), g, (False,) * 9).valid


def test_matching_validator():
    p = get_problem("maximal_matching")
    good = matching_to_labeling(PATH, [(0, 1), (2, 3)])
    assert good == (1, 0, 3, 2)
    assert validate(p, PATH, good).valid
    assert labeling_to_matching(PATH, good) == [(0, 1), (2, 3)]
    # both endpoints of edge (1, 2) left unmatched
    assert validate(p, PATH, (None,) * 4).violations == (0, 1, 2, 3)
    assert not validate(p, PATH, (1, None, None, None)).valid
    assert validate(p, PATH, matching_to_labeling(PATH, [(1, 2)])).valid


def test_sinkless_validator():
    g = generate("clique", 4, id_policy="sequential")
    p = get_problem("sinkless")
    all_forward = orientation_to_labeling(g, [1] * g.m)
    # node 3 only receives: a sink
    assert validate(p, g, all_forward).violations == (3,)
    cyclic = [1, 0, 0, 1, 0, 1]
    labeling = orientation_to_labeling(g, cyclic)
    assert validate(p, g, labeling).valid
    assert labeling_to_orientation(g, labeling) == cyclic
    inconsistent = (frozenset({1}), frozenset({0}), frozenset(), frozenset())
    assert not validate(p, g, inconsistent).valid


def test_coloring_validator():
    p = get_problem("coloring")
    assert validate(p, PATH, (0, 1, 0, 1)).valid
    assert validate(p, PATH, (0, 0, 1, 2)).violations == (0, 1)


def test_labeling_errors():
    with pytest.raises(ProblemError):
        validate(get_problem("mis"), PATH, (True,) * 3)
    with pytest.raises(ProblemError):
        validate(get_problem("mis"), PATH, (1, 0, 0, 1))
    with pytest.raises(ProblemError):
        validate(get_problem("coloring"), PATH, (0, -1, 0, 1))
    with pytest.raises(ProblemError):
        get_problem("vertex_cover")


def test_radius_locality():
    for name, labeling in (
        ("mis", (True, False, False, True)),
        ("mis", (True, False, False, False)),
        ("coloring", (0, 0, 1, 2)),
    ):
        assert radius_locality_check(get_problem(name), PATH, labeling)
    with pytest.raises(ProblemError):
        radius_locality_check(get_problem("large_is"), PATH, (True,) * 4)


def test_conversions():
    assert set_to_labeling(4, [1, 3]) == (False, True, False, True)
    assert labeling_to_set((False, True, False, True)) == [1, 3]
    assert independence_ratio(12, 3, 2) == 2
    assert independence_ratio(5, 0, 2) == 0


def main():
    print_header("MPCLAB - Phase 6: problems")
    tests = [
        test_independent_set_validator,
        test_mis_validator,
        test_mis_validator_matches_networkx,
        test_large_is_threshold_is_exact,
        test_matching_validator,
        test_sinkless_validator,
        test_coloring_validator,
        test_labeling_errors,
        test_radius_locality,
        test_conversions,
    ]
    failed = 0
    for test in tests:
        try:
            test()
            print_result(test.__name__, True)
        except Exception as e:
            failed += 1
            print_result(test.__name__, False, f"{type(e).__name__}: {str(e)[:80]}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    return failed


if __name__ == "__main__":
    sys.exit(main())
