"""
Shared-seed access.

A SeedTape is a read-only window of bits over the shared seed. The
SeedRegistry hands out contiguous named segments and records which bits an
algorithm consumed; parallel branches receive disjoint equal slices.
"""

import logging
import threading
from dataclasses import dataclass
from typing import List, Tuple

from ..errors import SeedExhausted

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeedTape:
    value: int
    length: int
    offset: int = 0

    @classmethod
    def from_hex(cls, seed_hex: str) -> "SeedTape":
        return cls(int(seed_hex, 16) if seed_hex else 0, 4 * len(seed_hex))

    def read(self, start: int, width: int) -> int:
        """``width`` bits starting ``start`` bits into the tape, most significant first."""
        if start < 0 or width < 0 or start + width > self.length:
            raise SeedExhausted(
                f"need bits [{self.offset + start}, {self.offset + start + width}) "
                f"but the tape ends at {self.offset + self.length}"
            )
        if width == 0:
            return 0
        shift = self.length - start - width
        return (self.value >> shift) & ((1 << width) - 1)

    def segment(self, start: int, width: int) -> "SeedTape":
        return SeedTape(self.read(start, width), width, self.offset + start)

    def split(self, parts: int) -> List["SeedTape"]:
        if parts < 1:
            raise ValueError("parts must be positive")
        width = self.length // parts
        if width == 0:
            raise SeedExhausted(f"{self.length} seed bits cannot feed {parts} branches")
        return [self.segment(j * width, width) for j in range(parts)]

    def ints(self, count: int, width: int, start: int = 0) -> List[int]:
        return [self.read(start + j * width, width) for j in range(count)]


class SeedRegistry:
    def __init__(self, tape: SeedTape):
        self.tape = tape
        self._cursor = 0
        self._segments: List[Tuple[str, int, int]] = []
        self._lock = threading.Lock()

    def request(self, name: str, width: int) -> SeedTape:
        with self._lock:
            segment = self.tape.segment(self._cursor, width)
            self._segments.append((name, segment.offset, width))
            self._cursor += width
        logger.debug("seed segment %s: %d bits at %d", name, width, segment.offset)
        return segment

    def branches(self, name: str, parts: int) -> List[SeedTape]:
        """Divide the unclaimed rest of the tape equally among ``parts`` branches."""
        rest = self.request(name, self.tape.length - self._cursor)
        return rest.split(parts)

    def note(self, name: str, offset: int, width: int) -> None:
        with self._lock:
            self._segments.append((name, offset, width))

    @property
    def consumed(self) -> List[Tuple[str, int, int]]:
        return list(self._segments)
