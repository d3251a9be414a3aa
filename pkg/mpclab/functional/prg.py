"""
Nano-scale PRG search against an explicit test set.

A table maps each of the 2^d seeds to an m-bit output string. It fools a
test T to within epsilon when |avg over the table of T - avg over {0,1}^m of T|
<= epsilon. Small searches enumerate tables lexicographically; larger ones
draw random tables under a bounded retry policy.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tenacity import RetryError, retry, retry_if_result, stop_after_attempt

from ..errors import FamilyError

logger = logging.getLogger(__name__)

BitTest = Callable[[str], bool]

MAX_SEED_BITS = 4
MAX_OUTPUT_BITS = 8
MAX_TESTS = 64
EXHAUSTIVE_CAP = 2**20


@dataclass(frozen=True)
class PrgSearchSpec:
    d: int
    m: int
    tests: Tuple[BitTest, ...] = ()
    epsilon: Fraction = Fraction(0)
    attempts: int = 4096
    search_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.d < self.m:
            raise FamilyError(f"need 0 <= d < m, got d={self.d} m={self.m}")
        if self.d > MAX_SEED_BITS or self.m > MAX_OUTPUT_BITS or len(self.tests) > MAX_TESTS:
            raise FamilyError(
                f"nano search is capped at d <= {MAX_SEED_BITS}, m <= {MAX_OUTPUT_BITS}, "
                f"{MAX_TESTS} tests"
            )
        object.__setattr__(self, "tests", tuple(self.tests))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))


@dataclass(frozen=True)
class PrgTable:
    d: int
    m: int
    outputs: Tuple[int, ...]
    mode: str = "exhaustive"
    deviation: Fraction = Fraction(0)

    def __post_init__(self):
        if len(self.outputs) != 2**self.d:
            raise FamilyError(f"table needs exactly {2 ** self.d} entries")
        if any(not 0 <= x < 2**self.m for x in self.outputs):
            raise FamilyError(f"table entries must be {self.m}-bit strings")

    def strings(self) -> List[str]:
        return [format(x, f"0{self.m}b") for x in self.outputs]

    def to_hex_lines(self) -> str:
        width = max(1, (self.m + 3) // 4)
        return "\n".join(format(x, f"0{width}x") for x in self.outputs) + "\n"

    @classmethod
    def from_hex_lines(cls, text: str, d: int, m: int) -> "PrgTable":
        return cls(d, m, tuple(int(line, 16) for line in text.split()))


@dataclass(frozen=True)
class NotFound:
    mode: str
    checked: int
    best_deviation: Optional[Fraction] = field(default=None)

    def __bool__(self) -> bool:
        return False


def truth_matrix(tests: Sequence[BitTest], m: int) -> np.ndarray:
    strings = [format(x, f"0{m}b") for x in range(2**m)]
    return np.array([[bool(test(s)) for s in strings] for test in tests], dtype=np.int64).reshape(
        len(tests), 2**m
    )


def table_deviation(truth: np.ndarray, outputs: Sequence[int]) -> Fraction:
    """Exact max over tests of |table average - uniform average|."""
    if truth.shape[0] == 0:
        return Fraction(0)
    rows, cells = truth.shape
    size = len(outputs)
    hits = truth[:, list(outputs)].sum(axis=1)
    total = truth.sum(axis=1)
    # |hits/size - total/cells| with a common denominator
    gaps = np.abs(hits * cells - total * size)
    return Fraction(int(gaps.max()), size * cells)


def verify_table(spec: PrgSearchSpec, table: PrgTable) -> bool:
    return table_deviation(truth_matrix(spec.tests, spec.m), table.outputs) <= spec.epsilon


def nano_prg_search(spec: PrgSearchSpec) -> PrgTable | NotFound:
    truth = truth_matrix(spec.tests, spec.m)
    entries = 2**spec.d
    candidates = (2**spec.m) ** entries

    if candidates <= EXHAUSTIVE_CAP:
        best = None
        checked = 0
        for outputs in itertools.product(range(2**spec.m), repeat=entries):
            checked += 1
            deviation = table_deviation(truth, outputs)
            if deviation <= spec.epsilon:
                logger.info("PRG table found after %d candidates", checked)
                return PrgTable(spec.d, spec.m, tuple(outputs), "exhaustive", deviation)
            best = deviation if best is None else min(best, deviation)
        logger.warning("no PRG table within epsilon=%s (exhaustive)", spec.epsilon)
        return NotFound("exhaustive", checked, best)

    rng = np.random.default_rng(spec.search_seed)
    state = {"checked": 0, "best": None}

    def draw() -> Optional[PrgTable]:
        outputs = tuple(int(x) for x in rng.integers(0, 2**spec.m, size=entries))
        state["checked"] += 1
        deviation = table_deviation(truth, outputs)
        state["best"] = deviation if state["best"] is None else min(state["best"], deviation)
        if deviation <= spec.epsilon:
            return PrgTable(spec.d, spec.m, outputs, "random", deviation)
        return None

    search = retry(
        stop=stop_after_attempt(spec.attempts),
        retry=retry_if_result(lambda result: result is None),
    )(draw)
    try:
        table = search()
    except RetryError:
        logger.warning("no PRG table within epsilon=%s after %d draws", spec.epsilon, spec.attempts)
        return NotFound("random", state["checked"], state["best"])
    logger.info("PRG table found after %d random draws", state["checked"])
    return table


def bit_projection(i: int) -> BitTest:
    def test(s: str) -> bool:
        return s[i] == "1"

    test.__name__ = f"bit_{i}"
    return test


def parity_test(positions: Sequence[int]) -> BitTest:
    positions = tuple(positions)

    def test(s: str) -> bool:
        return sum(s[i] == "1" for i in positions) % 2 == 1

    test.__name__ = "parity_" + "_".join(map(str, positions))
    return test
