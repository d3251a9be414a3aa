"""
Exact k-wise independent hash families over prime fields.

h(x) = a_0 + a_1 x + ... + a_{k-1} x^{k-1} mod p, seed = (a_0, ..., a_{k-1}).
Values on any k distinct inputs below p are jointly uniform over [p]^k.
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Annotated, Iterator, List, Sequence, Tuple

import numpy as np
from sympy import isprime, nextprime

from ..errors import FamilyError, SeedExhausted
from ..sim.config import DEFAULT_ENUMERATION_CAP
from ..sim.seed import SeedTape

logger = logging.getLogger(__name__)

Seed = Tuple[int, ...]

_DESCRIPTOR = re.compile(r"^kwise p=(\d+) k=(\d+) dom=(\d+)$")


@dataclass(frozen=True)
class KWiseFamily:
    prime: int
    k: int
    domain_bound: int

    def __post_init__(self):
        if not isprime(self.prime):
            raise FamilyError(f"modulus {self.prime} is not prime")
        if self.k < 1:
            raise FamilyError(f"independence order must be >= 1, got {self.k}")
        if not 0 <= self.domain_bound <= self.prime:
            raise FamilyError(
                f"domain bound {self.domain_bound} must lie in [0, {self.prime}]"
            )

    @property
    def size(self) -> int:
        return self.prime**self.k

    @property
    def coefficient_width(self) -> int:
        """Seed bits drawn per coefficient before reduction mod p."""
        return math.ceil(math.log2(self.prime)) + 16

    @property
    def seed_width(self) -> int:
        return self.k * self.coefficient_width

    def descriptor(self) -> str:
        return f"kwise p={self.prime} k={self.k} dom={self.domain_bound}"

    @classmethod
    def parse(cls, text: str) -> "KWiseFamily":
        match = _DESCRIPTOR.match(text.strip())
        if not match:
            raise FamilyError(f"cannot parse family descriptor {text!r}")
        return cls(*(int(x) for x in match.groups()))

    def check_seed(self, seed: Sequence[int]) -> Seed:
        seed = tuple(int(a) for a in seed)
        if len(seed) != self.k or any(not 0 <= a < self.prime for a in seed):
            raise FamilyError(f"seed {seed} is not {self.k} coefficients in [{self.prime}]")
        return seed


def smallest_prime_at_least(x: int) -> int:
    return 2 if x <= 2 else int(nextprime(x - 1))


def family_for(
    k: Annotated[int, "Independence order."],
    *lower_bounds: Annotated[int, "Quantities the modulus must reach (8Δ², n, domain needs)."],
) -> KWiseFamily:
    """Smallest-prime family with p >= every lower bound; the domain is the whole field."""
    p = smallest_prime_at_least(max((2, *lower_bounds)))
    return KWiseFamily(p, k, p)


def kwise_eval(f: KWiseFamily, seed: Sequence[int], x: int) -> int:
    if not 0 <= x < f.domain_bound:
        raise FamilyError(f"input {x} outside domain [0, {f.domain_bound})")
    value = 0
    for a in reversed(f.check_seed(seed)):
        value = (value * x + a) % f.prime
    return value


def kwise_eval_many(f: KWiseFamily, seeds: np.ndarray, xs: Sequence[int]) -> np.ndarray:
    """
    Evaluate many seeds at many inputs: ``seeds`` has shape (S, k), result
    has shape (S, len(xs)). Horner in int64; p < 2^31 keeps products exact.
    """
    xs_arr = np.asarray(xs, dtype=np.int64)
    if xs_arr.size and (xs_arr.min() < 0 or xs_arr.max() >= f.domain_bound):
        raise FamilyError(f"inputs outside domain [0, {f.domain_bound})")
    if f.prime >= 2**31:
        raise FamilyError("vectorised evaluation needs p < 2^31")
    seeds = np.asarray(seeds, dtype=np.int64).reshape(-1, f.k)
    out = np.zeros((seeds.shape[0], xs_arr.size), dtype=np.int64)
    for j in range(f.k - 1, -1, -1):
        out = (out * xs_arr[None, :] + seeds[:, j : j + 1]) % f.prime
    return out


def enumerate_seeds(f: KWiseFamily, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Seed]:
    if f.size > cap:
        raise FamilyError(f"family has {f.size} seeds, enumeration cap is {cap}")
    return itertools.product(range(f.prime), repeat=f.k)


def seed_matrix(f: KWiseFamily, prefix: Sequence[int] = (), cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """All seeds extending ``prefix`` in lexicographic order, shape (p^(k-len(prefix)), k)."""
    free = f.k - len(prefix)
    if free < 0:
        raise FamilyError(f"prefix of {len(prefix)} coefficients exceeds k = {f.k}")
    rows = f.prime**free
    if rows > cap:
        raise FamilyError(f"{rows} completions exceed enumeration cap {cap}")
    if free == 0:
        return np.asarray([tuple(prefix)], dtype=np.int64)
    grid = np.indices((f.prime,) * free, dtype=np.int64).reshape(free, -1).T
    head = np.broadcast_to(np.asarray(prefix, dtype=np.int64), (rows, len(prefix)))
    return np.hstack([head, grid]) if len(prefix) else grid


def verify_independence(
    f: KWiseFamily, t: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Fraction:
    """
    Maximum over distinct t-tuples of inputs and all output tuples of
    |P[h(x_i) = y_i for all i] - p^-t|, by full seed enumeration.
    """
    if t > f.k:
        raise FamilyError(f"order {t} exceeds the family's k = {f.k}")
    if t < 1:
        raise FamilyError("order must be at least 1")
    tuples = math.comb(f.domain_bound, t)
    if f.size * tuples > cap:
        raise FamilyError(
            f"{f.size} seeds x {tuples} tuples exceed the enumeration cap {cap}"
        )
    seeds = seed_matrix(f, (), cap)
    radix = f.prime ** np.arange(t, dtype=np.int64)
    worst = Fraction(0)
    cells = f.prime**t
    for xs in itertools.combinations(range(f.domain_bound), t):
        values = kwise_eval_many(f, seeds, xs)
        counts = np.bincount(values @ radix, minlength=cells)
        # |count / p^k - 1 / p^t| over every output tuple, zero counts included
        gap = int(np.abs(counts * cells - f.size).max())
        worst = max(worst, Fraction(gap, f.size * cells))
    return worst


def coefficients_from_seed(tape: SeedTape, f: KWiseFamily, start: int = 0) -> Seed:
    width = f.coefficient_width
    if start + f.seed_width > tape.length:
        raise SeedExhausted(
            f"{f.descriptor()} needs {f.seed_width} seed bits, {tape.length - start} available"
        )
    return tuple(v % f.prime for v in tape.ints(f.k, width, start))


def interpolate(f: KWiseFamily, points: Sequence[int], values: Sequence[int]) -> Seed:
    """Coefficients of the unique degree < k polynomial through (points, values) mod p."""
    p = f.prime
    if len(points) != f.k or len(values) != f.k:
        raise FamilyError(f"interpolation needs exactly k = {f.k} points")
    if len({x % p for x in points}) != f.k:
        raise FamilyError("interpolation points must be distinct mod p")
    coeffs = [0] * f.k
    for i, (xi, yi) in enumerate(zip(points, values)):
        basis = [1]
        denom = 1
        for j, xj in enumerate(points):
            if j == i:
                continue
            basis = [
                (lo - xj * hi) % p
                for lo, hi in zip([0] + basis, basis + [0])
            ]
            denom = denom * (xi - xj) % p
        scale = yi * pow(denom, -1, p) % p
        for d, b in enumerate(basis):
            coeffs[d] = (coeffs[d] + scale * b) % p
    return tuple(coeffs)


def fair_bit(f: KWiseFamily, value: int) -> int:
    return 0 if value < f.prime // 2 else 1


def bit_probability(f: KWiseFamily, bit: int) -> Fraction:
    """Exact P(fair_bit = bit) for a uniform field value."""
    zero = Fraction(f.prime // 2, f.prime)
    return zero if bit == 0 else 1 - zero


def hash_values(f: KWiseFamily, seed: Sequence[int], xs: Sequence[int]) -> List[int]:
    return kwise_eval_many(f, np.asarray([f.check_seed(seed)]), xs)[0].tolist()
