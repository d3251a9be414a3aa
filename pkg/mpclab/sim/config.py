"""
Configuration models for simulated MPC runs.

- MpcConfig: space exponent, word budget constant, machine cap, packing and
  scheduling policy, round cap
- MpcMeta: the global knowledge every machine shares (n, Δ, size estimate N
  and the shared random seed)
- ExperimentConfig: one CLI experiment
"""

import hashlib
import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..graph.legal import LegalGraph, default_cap

DEFAULT_SEED_BITS = 4096
DEFAULT_ENUMERATION_CAP = 2**25


def default_round_cap(n: int) -> int:
    return int(64 * (1 + math.log2(max(n, 1))))


def expand_seed(index: int, bits: int = DEFAULT_SEED_BITS, salt: bytes = b"mpclab") -> str:
    """Stretch an integer seed index to ``bits`` bits of hex with BLAKE2b in counter mode."""
    nbytes = (bits + 7) // 8
    out = bytearray()
    counter = 0
    while len(out) < nbytes:
        block = hashlib.blake2b(
            index.to_bytes(16, "big", signed=False) + counter.to_bytes(8, "big"),
            digest_size=64,
            key=salt,
        ).digest()
        out.extend(block)
        counter += 1
    return bytes(out[:nbytes]).hex()


class MpcConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float = Field(0.5, description="Space exponent, budget = ceil(c * n^delta) words.")
    space_constant: int = Field(8, ge=1)
    machine_cap: Optional[int] = Field(None, ge=0, description="Default: n^3.")
    packing: Literal["dedicated", "packed"] = "dedicated"
    packing_seed: Optional[int] = None
    schedule: Literal["canonical", "reversed", "shuffled"] = "canonical"
    schedule_seed: int = 0
    round_cap: Optional[int] = Field(None, ge=1)
    threads: Optional[int] = Field(None, ge=1)

    @field_validator("delta")
    @classmethod
    def _delta_open_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("delta must lie strictly between 0 and 1")
        return v

    def budget(self, n: int) -> int:
        return math.ceil(self.space_constant * max(n, 1) ** self.delta)

    def machines_allowed(self, n: int) -> int:
        return default_cap(n) if self.machine_cap is None else self.machine_cap

    def rounds_allowed(self, n: int) -> int:
        return default_round_cap(n) if self.round_cap is None else self.round_cap


class MpcMeta(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0)
    max_degree: int = Field(ge=0)
    size_estimate: int = Field(ge=0)
    seed_hex: str = ""

    @field_validator("seed_hex")
    @classmethod
    def _hex_only(cls, v: str) -> str:
        if v:
            int(v, 16)
        return v.lower()

    @model_validator(mode="after")
    def _estimate_covers_n(self):
        if self.size_estimate < self.n:
            raise ValueError("size_estimate must be at least n")
        return self

    @property
    def seed_bits(self) -> int:
        return 4 * len(self.seed_hex)

    @property
    def seed_int(self) -> int:
        return int(self.seed_hex, 16) if self.seed_hex else 0

    @classmethod
    def for_graph(
        cls,
        g: LegalGraph,
        seed: int | str = 0,
        size_estimate: Optional[int] = None,
        seed_bits: int = DEFAULT_SEED_BITS,
        max_degree: Optional[int] = None,
    ) -> "MpcMeta":
        """Meta for ``g``; an integer seed is stretched with expand_seed, a string is taken as hex."""
        seed_hex = expand_seed(seed, seed_bits) if isinstance(seed, int) else seed
        return cls(
            n=g.n,
            max_degree=g.max_degree if max_degree is None else max_degree,
            size_estimate=g.n if size_estimate is None else size_estimate,
            seed_hex=seed_hex,
        )

    def with_seed(self, seed: int | str, seed_bits: Optional[int] = None) -> "MpcMeta":
        bits = seed_bits or self.seed_bits or DEFAULT_SEED_BITS
        seed_hex = expand_seed(seed, bits) if isinstance(seed, int) else seed
        return self.model_copy(update={"seed_hex": seed_hex})


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: str
    graph_source: Optional[str] = None
    algorithm: Optional[str] = None
    delta: float = 0.5
    space_constant: int = 8
    seed: str = "0"
    estimate: Optional[int] = None
    reps: int = Field(1, ge=1)
    out: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    def mpc_config(self) -> MpcConfig:
        return MpcConfig(delta=self.delta, space_constant=self.space_constant)

    def meta_for(self, g: LegalGraph, rep: int = 0) -> MpcMeta:
        """Meta for repetition ``rep``: a decimal seed is offset by rep, a hex seed is rekeyed."""
        size_estimate = self.estimate or g.n
        if self.seed.isdigit():
            return MpcMeta.for_graph(g, seed=(int(self.seed) + rep) % 2**128, size_estimate=size_estimate)
        if rep == 0:
            return MpcMeta.for_graph(g, seed=self.seed, size_estimate=size_estimate)
        key = bytes.fromhex(self.seed.zfill(len(self.seed) + len(self.seed) % 2))[:64]
        seed_hex = expand_seed(rep, 4 * len(self.seed), salt=key)
        return MpcMeta.for_graph(g, seed=seed_hex, size_estimate=size_estimate)
