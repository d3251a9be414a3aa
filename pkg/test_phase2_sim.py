"""
MPCLAB - Phase 2 Testing Script
MPC engine: rounds, space accounting, scheduling, seeds and configuration

Run with: python test_phase2_sim.py   (or pytest)
"""

import math
import os
import sys

import pytest
from pydantic import ValidationError

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mpclab.errors import (
    MachineCapExceeded,
    MissingOutput,
    NonTermination,
    SeedExhausted,
    SpaceExceeded,
)
from mpclab.functional.exponentiation import collect_balls, reduce_id_space
from mpclab.graph import generate, id_signature, power_graph, radius_ball
from mpclab.sim import (
    ExperimentConfig,
    MpcAlgorithm,
    MpcConfig,
    MpcMeta,
    RoundTrace,
    SeedRegistry,
    SeedTape,
    StepResult,
    expand_seed,
    run,
    summarize,
    words,
)
from mpclab.sim.engine import distribute_input, pack_items
from mpclab.sim.programs import AggregateSum, CollectBalls, ConstantLabel, GatherAll

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


class Forever(MpcAlgorithm):
    name = "forever"

    def step(self, state, inbox, ctx):
        return StepResult(state=state)


class Silent(MpcAlgorithm):
    name = "silent"

    def step(self, state, inbox, ctx):
        return StepResult(state=state, halt=True)


def test_constant_label_one_round():
    g = generate("cycle", 12, seed=1)
    labels, trace = run(ConstantLabel(0), g, MpcConfig(), MpcMeta.for_graph(g))
    assert labels == (0,) * 12
    assert trace.rounds == 1
    assert trace.max_peak <= trace.budget


def test_gather_all_breaks_low_space():
    g = generate("path", 100)
    cfg = MpcConfig(delta=0.3, space_constant=4)
    with pytest.raises(SpaceExceeded) as info:
        run(GatherAll(), g, cfg, MpcMeta.for_graph(g))
    assert info.value.budget == cfg.budget(100)
    assert info.value.words > info.value.budget


def test_gather_all_fits_with_room():
    g = generate("star", 6, id_policy="sequential")
    labels, _ = run(GatherAll(), g, WIDE, MpcMeta.for_graph(g))
    assert labels == (5, 1, 1, 1, 1, 1)


@pytest.mark.parametrize("r", [1, 2, 4, 8])
def test_collect_balls_match_bfs(r):
    for g in (generate("cycle", 32, seed=r), generate("gnp", 20, p=0.2, seed=r)):
        table, trace = collect_balls(g, r, WIDE, MpcMeta.for_graph(g))
        for v in range(g.n):
            expected = radius_ball(g, v, r)
            assert id_signature(table[v]) == id_signature(expected)
            assert set(table.members(v)) == set(expected.origin)
        assert trace.rounds <= math.ceil(math.log2(r)) + 2


def test_collect_balls_radius_zero():
    g = generate("path", 5)
    table, trace = collect_balls(g, 0, WIDE, MpcMeta.for_graph(g))
    assert all(table[v].graph.n == 1 for v in range(g.n))
    assert trace.rounds == 1


def test_aggregate_sum_totals():
    g = generate("path", 10)
    vectors = [(v, 1) for v in range(g.n)]
    labels, trace = run(AggregateSum(vectors, 2), g, MpcConfig(), MpcMeta.for_graph(g))
    assert set(labels) == {(45, 10)}
    assert trace.max_peak <= trace.budget


def test_schedule_does_not_change_results():
    g = generate("gnp", 16, p=0.3, seed=4)
    meta = MpcMeta.for_graph(g)
    baseline, base_trace = run(CollectBalls(2, g.cap), g, WIDE, meta)
    for schedule in ("reversed", "shuffled"):
        cfg = WIDE.model_copy(update={"schedule": schedule, "schedule_seed": 9})
        labels, trace = run(CollectBalls(2, g.cap), g, cfg, meta)
        assert [id_signature(b) for b in labels] == [id_signature(b) for b in baseline]
        assert trace.rounds == base_trace.rounds


def test_packing_does_not_change_results():
    g = generate("cycle", 10, seed=2)
    meta = MpcMeta.for_graph(g)
    vectors = [(v,) for v in range(g.n)]
    dedicated, _ = run(AggregateSum(vectors, 1), g, WIDE, meta)
    packed_cfg = WIDE.model_copy(update={"packing": "packed", "packing_seed": 5})
    packed, trace = run(AggregateSum(vectors, 1), g, packed_cfg, meta)
    assert packed == dedicated
    assert trace.machines < g.n + g.m


def test_packing_is_first_fit():
    assert pack_items([1, 2, 2, 1], 3, range(4)) == ([0, 0, 1, 1], 2)
    assert pack_items([1, 2, 2, 1], 3, [3, 2, 1, 0]) == ([1, 1, 0, 0], 2)
    assert pack_items([], 3, []) == ([], 0)


def test_oversized_item_fails_at_distribution():
    with pytest.raises(SpaceExceeded) as info:
        pack_items([1, 5, 1], 3, range(3))
    assert (info.value.round, info.value.words, info.value.budget) == (0, 5, 3)
    g = generate("cycle", 10, seed=1)
    cfg = MpcConfig(packing="packed")
    assignment = distribute_input(g, cfg)
    budget = cfg.budget(g.n)
    for machine in range(assignment.machines):
        assert sum(assignment.items[vm].__words__() for vm in assignment.vms_on(machine)) <= budget


def test_machine_cap():
    g = generate("path", 5)
    with pytest.raises(MachineCapExceeded):
        run(ConstantLabel(), g, MpcConfig(machine_cap=3), MpcMeta.for_graph(g))


def test_non_termination_and_missing_output():
    g = generate("path", 3)
    meta = MpcMeta.for_graph(g)
    with pytest.raises(NonTermination):
        run(Forever(), g, MpcConfig(round_cap=5), meta)
    with pytest.raises(MissingOutput) as info:
        run(Silent(), g, MpcConfig(), meta)
    assert info.value.nodes == [0, 1, 2]


def test_words_and_summary():
    assert words(None) == 0
    assert words((1, 2, (3, 4))) == 4
    assert words({1: 2}) == 2
    trace = RoundTrace(budget=10).charge("analytic", 3, peak=5, messages=2)
    summary = summarize(trace)
    assert (summary.rounds, summary.max_peak_words, summary.messages) == (3, 5, 6)
    assert summary.utilization == 0.5


def test_seed_tape():
    tape = SeedTape.from_hex("f0")
    assert tape.length == 8
    assert tape.read(0, 4) == 15 and tape.read(4, 4) == 0
    with pytest.raises(SeedExhausted):
        tape.read(6, 4)
    part = tape.segment(2, 4)
    assert (part.value, part.offset) == (0b1100, 2)
    assert [t.length for t in tape.split(3)] == [2, 2, 2]
    assert tape.ints(4, 2) == [3, 3, 0, 0]
    with pytest.raises(SeedExhausted):
        SeedTape.from_hex("f").split(8)


def test_seed_registry():
    registry = SeedRegistry(SeedTape.from_hex("abcd"))
    assert registry.request("a", 4).value == 0xA
    assert registry.request("b", 4).value == 0xB
    branches = registry.branches("rest", 2)
    assert [b.value for b in branches] == [0xC, 0xD]
    assert registry.consumed == [("a", 0, 4), ("b", 4, 4), ("rest", 8, 8)]


def test_expand_seed_is_deterministic():
    assert expand_seed(3, 64) == expand_seed(3, 64)
    assert len(expand_seed(3, 64)) == 16
    assert expand_seed(3, 64) != expand_seed(4, 64)
    assert len(expand_seed(0)) == 1024


def test_config_validation():
    with pytest.raises(ValidationError):
        MpcConfig(delta=1.0)
    with pytest.raises(ValidationError):
        MpcConfig(delta=0.0)
    assert MpcConfig().budget(100) == 80
    g = generate("path", 4)
    with pytest.raises(ValidationError):
        MpcMeta(n=4, max_degree=2, size_estimate=3)
    assert MpcMeta.for_graph(g, size_estimate=10).size_estimate == 10


def test_repetition_seeds():
    g = generate("path", 4)
    decimal = ExperimentConfig(command="run", seed="5")
    assert decimal.meta_for(g, 1) == MpcMeta.for_graph(g, seed=6)
    assert decimal.meta_for(g, 0).seed_hex != decimal.meta_for(g, 1).seed_hex
    hexed = ExperimentConfig(command="run", seed="ab")
    assert hexed.meta_for(g, 0).seed_hex == "ab"
    assert len(hexed.meta_for(g, 1).seed_hex) == 2
    assert hexed.meta_for(g, 1) == hexed.meta_for(g, 1)


def test_reduce_id_space_colours_power_graph():
    g = generate("cycle", 12, seed=3)
    reduction = reduce_id_space(g, 2, WIDE, MpcMeta.for_graph(g))
    square = power_graph(g, 2)
    assert all(reduction.colors[i] != reduction.colors[j] for i, j in square.edges)
    assert reduction.count <= square.max_degree + 1


def main():
    print_header("MPCLAB - Phase 2: MPC engine")
    tests = [
        test_constant_label_one_round,
        test_gather_all_breaks_low_space,
        test_gather_all_fits_with_room,
        lambda: [test_collect_balls_match_bfs(r) for r in (1, 2, 4, 8)],
        test_collect_balls_radius_zero,
        test_aggregate_sum_totals,
        test_schedule_does_not_change_results,
        test_packing_does_not_change_results,
        test_packing_is_first_fit,
        test_oversized_item_fails_at_distribution,
        test_machine_cap,
        test_non_termination_and_missing_output,
        test_words_and_summary,
        test_seed_tape,
        test_seed_registry,
        test_expand_seed_is_deterministic,
        test_config_validation,
        test_repetition_seeds,
        test_reduce_id_space_colours_power_graph,
    ]
    failed = 0
    for test in tests:
        label = getattr(test, "__name__", "test")
        label = "test_collect_balls_match_bfs" if label == "<lambda>" else label
        try:
            test()
            print_result(label, True)
        except Exception as e:
            failed += 1
            print_result(label, False, f"{type(e).__name__}: {str(e)[:80]}")
    print(f"\n{len(tests) - failed}/{len(tests)} passed")
    return failed


if __name__ == "__main__":
    sys.exit(main())
