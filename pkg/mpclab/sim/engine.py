"""
Synchronous-round MPC engine with strict local-space accounting.

Every node and every edge of the input is a virtual machine (vm): nodes take
vm indices 0..n-1, edges n.. in sorted edge order. Virtual machines are
placed on physical machines (one each, or packed up to the word budget);
the budget ceil(c * n^delta) is enforced per physical machine per superstep
on state held at the end of the step plus max(inbox, outbox).

A round is a communication round. Local computation after the last delivery
is free, and a run with supersteps but no messages counts one round.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GraphError, MachineCapExceeded, MissingOutput, NonTermination, SpaceExceeded
from ..graph.legal import LegalGraph, NodeRecord
from ..utils import ordered_map, worker_count
from .config import MpcConfig, MpcMeta
from .seed import SeedTape

logger = logging.getLogger(__name__)

CLAIMED_STABLE = "claimed-stable"
CLAIMED_UNSTABLE = "claimed-unstable"
UNKNOWN = "unknown"


def words(obj: Any) -> int:
    """Word size under the model: scalars 1, containers the sum of their items."""
    if obj is None:
        return 0
    if isinstance(obj, (bool, int, float, str, bytes, Fraction, np.integer, np.floating)):
        return 1
    sizer = getattr(obj, "__words__", None)
    if sizer is not None:
        return sizer()
    if isinstance(obj, np.ndarray):
        return int(obj.size)
    if isinstance(obj, dict):
        return sum(words(k) + words(v) for k, v in obj.items())
    if isinstance(obj, (list, tuple, set, frozenset)):
        return sum(words(x) for x in obj)
    return 1


@dataclass(frozen=True)
class MachineItem:
    vm: int
    kind: str
    node: Optional[int] = None
    record: Optional[NodeRecord] = None
    edge: Optional[Tuple[int, int]] = None
    endpoints: Optional[Tuple[NodeRecord, NodeRecord]] = None

    def __words__(self) -> int:
        return 1 if self.kind == "node" else 2


@dataclass(frozen=True)
class MachineAssignment:
    items: Tuple[MachineItem, ...]
    machine_of: Tuple[int, ...]
    machines: int
    policy: str
    n: int

    def vms_on(self, machine: int) -> List[int]:
        return [vm for vm, m in enumerate(self.machine_of) if m == machine]


@dataclass(frozen=True)
class Message:
    sender: int
    seq: int
    payload: Any

    def __words__(self) -> int:
        return words(self.payload)


@dataclass
class StepResult:
    state: Any = None
    outbox: List[Tuple[int, Any]] = field(default_factory=list)
    outputs: Dict[int, Any] = field(default_factory=dict)
    halt: bool = False


@dataclass(frozen=True)
class RunContext:
    cfg: MpcConfig
    meta: MpcMeta
    n: int
    budget: int
    superstep: int
    tape: SeedTape

    def node_vm(self, v: int) -> int:
        return v


class MpcAlgorithm(ABC):
    """
    Per-machine round function. ``setup`` builds a machine's initial state
    from its input item; ``step`` maps (state, inbox, context) to a
    StepResult and must be deterministic in its arguments.
    """

    name: str = "algorithm"
    stability: str = UNKNOWN
    problem: Optional[str] = None
    seed_bits: int = 0

    def setup(self, item: MachineItem, ctx: RunContext) -> Any:
        return None

    @abstractmethod
    def step(self, state: Any, inbox: Sequence[Message], ctx: RunContext) -> StepResult:
        ...

    def consumed_segments(self, meta: MpcMeta) -> List[Tuple[str, int, int]]:
        return [(self.name, 0, self.seed_bits)] if self.seed_bits else []


@dataclass
class RoundTrace:
    rounds: int = 0
    peak_words: List[int] = field(default_factory=list)
    message_counts: List[int] = field(default_factory=list)
    budget: int = 0
    machines: int = 0
    stages: List[str] = field(default_factory=list)
    consumed: List[Tuple[str, int, int]] = field(default_factory=list)

    @property
    def supersteps(self) -> int:
        return len(self.peak_words)

    @property
    def max_peak(self) -> int:
        return max(self.peak_words, default=0)

    def extend(self, other: "RoundTrace") -> "RoundTrace":
        self.rounds += other.rounds
        self.peak_words.extend(other.peak_words)
        self.message_counts.extend(other.message_counts)
        self.budget = max(self.budget, other.budget)
        self.machines = max(self.machines, other.machines)
        self.stages.extend(other.stages)
        self.consumed.extend(other.consumed)
        return self

    def charge(self, stage: str, rounds: int, peak: int = 0, messages: int = 0) -> "RoundTrace":
        """Account rounds of a stage whose communication is computed analytically."""
        self.rounds += rounds
        self.stages.append(stage)
        for _ in range(rounds):
            self.peak_words.append(peak)
            self.message_counts.append(messages)
        return self


@dataclass(frozen=True)
class TraceSummary:
    rounds: int
    max_peak_words: int
    budget: int
    utilization: float
    messages: int

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "max_peak_words": self.max_peak_words,
            "budget": self.budget,
            "utilization": self.utilization,
            "messages": self.messages,
        }


def summarize(trace: RoundTrace) -> TraceSummary:
    peak = trace.max_peak
    return TraceSummary(
        rounds=trace.rounds,
        max_peak_words=peak,
        budget=trace.budget,
        utilization=(peak / trace.budget) if trace.budget else 0.0,
        messages=sum(trace.message_counts),
    )


def machine_items(g: LegalGraph) -> Tuple[MachineItem, ...]:
    items = [
        MachineItem(vm=v, kind="node", node=v, record=record)
        for v, record in enumerate(g.nodes)
    ]
    for e, (i, j) in enumerate(g.sorted_edges()):
        items.append(
            MachineItem(
                vm=g.n + e, kind="edge", edge=(i, j), endpoints=(g.nodes[i], g.nodes[j])
            )
        )
    return tuple(items)


def pack_items(sizes: Sequence[int], budget: int, order: Sequence[int]) -> Tuple[List[int], int]:
    """First-fit in ``order``: a new machine whenever the next item overflows the current one."""
    placement = [0] * len(sizes)
    machines, load = 0, budget
    for vm in order:
        size = sizes[vm]
        if size > budget:
            raise SpaceExceeded(machines, 0, size, budget)
        if load + size > budget:
            machines += 1
            load = 0
        placement[vm] = machines - 1
        load += size
    return placement, machines


def distribute_input(g: LegalGraph, cfg: MpcConfig) -> MachineAssignment:
    """Place the input items on machines; round 0 in SpaceExceeded means an item cannot be placed."""
    items = machine_items(g)
    budget = cfg.budget(g.n)
    sizes = [item.__words__() for item in items]
    if cfg.packing == "dedicated":
        for vm, size in enumerate(sizes):
            if size > budget:
                raise SpaceExceeded(vm, 0, size, budget)
        machine_of = tuple(range(len(items)))
        machines = len(items)
    else:
        order = list(range(len(items)))
        if cfg.packing_seed is not None:
            order = np.random.default_rng(cfg.packing_seed).permutation(len(items)).tolist()
        placement, machines = pack_items(sizes, budget, order)
        machine_of = tuple(placement)
    cap = cfg.machines_allowed(g.n)
    if machines > cap:
        raise MachineCapExceeded(machines, cap)
    return MachineAssignment(items, machine_of, machines, cfg.packing, g.n)


def execution_order(count: int, cfg: MpcConfig, superstep: int) -> List[int]:
    if cfg.schedule == "canonical":
        return list(range(count))
    if cfg.schedule == "reversed":
        return list(range(count - 1, -1, -1))
    rng = np.random.default_rng([cfg.schedule_seed, superstep])
    return rng.permutation(count).tolist()


@dataclass
class RunResult:
    labeling: Tuple[Any, ...]
    trace: RoundTrace
    extras: Dict[str, Any] = field(default_factory=dict)


def run(
    alg: MpcAlgorithm,
    g: LegalGraph,
    cfg: MpcConfig,
    meta: MpcMeta,
    assignment: Optional[MachineAssignment] = None,
) -> Tuple[Tuple[Any, ...], RoundTrace]:
    assignment = assignment or distribute_input(g, cfg)
    if assignment.n != g.n:
        raise GraphError("machine assignment was built for a different graph")
    budget = cfg.budget(g.n)
    tape = SeedTape.from_hex(meta.seed_hex)
    count = len(assignment.items)
    workers = worker_count(cfg.threads)
    round_cap = cfg.rounds_allowed(g.n)

    def context(superstep: int) -> RunContext:
        return RunContext(cfg, meta, g.n, budget, superstep, tape)

    ctx0 = context(0)
    states: List[Any] = [alg.setup(item, ctx0) for item in assignment.items]
    inboxes: List[List[Message]] = [[] for _ in range(count)]
    outputs: Dict[int, Any] = {}
    trace = RoundTrace(budget=budget, machines=assignment.machines, stages=[alg.name])
    trace.consumed.extend(alg.consumed_segments(meta))

    superstep = 0
    communicated = 0
    while True:
        superstep += 1
        if superstep > round_cap:
            raise NonTermination(round_cap)
        ctx = context(superstep)
        order = execution_order(count, cfg, superstep)
        results = ordered_map(
            lambda vm: alg.step(states[vm], inboxes[vm], ctx), order, workers
        )
        by_vm: List[Optional[StepResult]] = [None] * count
        for vm, result in zip(order, results):
            by_vm[vm] = result

        next_inboxes: List[List[Message]] = [[] for _ in range(count)]
        sent_words = [0] * count
        messages = 0
        all_halted = True
        for vm in range(count):
            result = by_vm[vm]
            states[vm] = result.state
            all_halted &= result.halt
            for node, label in result.outputs.items():
                outputs[node] = label
            for seq, (dest, payload) in enumerate(result.outbox):
                if not 0 <= dest < count:
                    raise GraphError(f"vm {vm} addressed missing vm {dest}")
                message = Message(vm, seq, payload)
                next_inboxes[dest].append(message)
                sent_words[vm] += message.__words__()
                messages += 1

        load = [0] * assignment.machines
        for vm in range(count):
            received = sum(m.__words__() for m in inboxes[vm])
            load[assignment.machine_of[vm]] += words(states[vm]) + max(received, sent_words[vm])
        peak = max(load, default=0)
        for machine, used in enumerate(load):
            if used > budget:
                raise SpaceExceeded(machine, superstep, used, budget)
        trace.peak_words.append(peak)
        trace.message_counts.append(messages)
        logger.debug(
            "%s superstep %d: %d messages, peak %d/%d words",
            alg.name, superstep, messages, peak, budget,
        )
        if messages:
            communicated += 1
        inboxes = next_inboxes
        if all_halted and messages == 0:
            break

    trace.rounds = max(communicated, 1)
    missing = [v for v in range(g.n) if v not in outputs]
    if missing:
        raise MissingOutput(missing)
    return tuple(outputs[v] for v in range(g.n)), trace

