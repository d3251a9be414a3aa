"""
Graph exponentiation and ID-space reduction.

collect_balls gathers every node's r-ball through the simulator in
ceil(log2 r) + 2 rounds; reduce_id_space colours the power graph G^r
greedily in ID order from the collected balls.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

from ..graph.legal import CenteredGraph, LegalGraph
from ..graph.transforms import radius_ball
from ..sim.config import MpcConfig, MpcMeta
from ..sim.engine import RoundTrace, run
from ..sim.programs import CollectBalls, CollectReach

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BallTable:
    radius: int
    balls: Tuple[CenteredGraph, ...]

    def __getitem__(self, v: int) -> CenteredGraph:
        return self.balls[v]

    def __len__(self) -> int:
        return len(self.balls)

    def __iter__(self) -> Iterator[CenteredGraph]:
        return iter(self.balls)

    def members(self, v: int) -> Tuple[int, ...]:
        """Global indices of the nodes in v's ball."""
        return self.balls[v].origin


def collect_balls(
    g: LegalGraph,
    r: int,
    cfg: MpcConfig,
    meta: MpcMeta,
) -> Tuple[BallTable, RoundTrace]:
    balls, trace = run(CollectBalls(r, g.cap), g, cfg, meta)
    logger.info("collected %d-balls of %d nodes in %d rounds", r, g.n, trace.rounds)
    return BallTable(r, balls), trace


@dataclass(frozen=True)
class IdReduction:
    colors: Tuple[int, ...]
    radius: int
    trace: RoundTrace

    @property
    def count(self) -> int:
        return max(self.colors, default=-1) + 1


def greedy_power_coloring(g: LegalGraph, reach: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """
    Colour nodes in (ID, index) order with the smallest colour unused within
    their reach. Conflicts only arise inside a component, where IDs are
    unique, so every colour depends on the component alone.
    """
    colors: Dict[int, int] = {}
    for v in sorted(range(g.n), key=lambda u: (g.nodes[u].id, u)):
        taken = {colors[u] for u in reach[v] if u in colors}
        c = 0
        while c in taken:
            c += 1
        colors[v] = c
    return tuple(colors[v] for v in range(g.n))


def reduce_id_space(
    g: LegalGraph,
    radius: int,
    cfg: MpcConfig,
    meta: MpcMeta,
    table: Optional[BallTable] = None,
) -> IdReduction:
    """
    Proper colouring of G^radius: nodes within distance ``radius`` get
    distinct colours. Reuses collected balls when given, otherwise gathers
    only the node sets within ``radius``.
    """
    trace = RoundTrace(budget=cfg.budget(g.n))
    if table is not None and table.radius >= radius:
        reach = [
            tuple(table.members(v)[u] for u in radius_ball(ball.graph, ball.center, radius).origin)
            for v, ball in enumerate(table)
        ]
    else:
        reach, collected = run(CollectReach(radius, g.cap), g, cfg, meta)
        trace.extend(collected)
    colors = greedy_power_coloring(g, reach)
    logger.info("reduced IDs to %d colours at radius %d", max(colors, default=-1) + 1, radius)
    return IdReduction(colors, radius, trace)
