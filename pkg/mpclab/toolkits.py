from dataclasses import dataclass, field
from functools import wraps
from typing import Any, Callable, Dict, List, Optional

from .errors import MpclabError
from .graph.legal import LegalGraph
from .sim.config import MpcConfig, MpcMeta
from .sim.engine import CLAIMED_STABLE, CLAIMED_UNSTABLE, UNKNOWN, MpcAlgorithm, RunResult, run
from .sim.programs import BallLocal, ConstantLabel, GatherAll
from .functional.exponentiation import reduce_id_space
from .functional.independent_set import (
    amplified_large_is,
    deterministic_large_is,
    randomized_large_is,
)
from .functional.lll import sinkless_algorithm
from .functional.mis import maximal_matching, mis_algorithm
from .functional.problems import ProblemDescriptor, get_problem

AlgorithmFn = Callable[..., RunResult]


@dataclass(frozen=True)
class Toolkit:
    name: str
    function: AlgorithmFn
    problem: Optional[str] = None
    problem_params: Dict[str, Any] = field(default_factory=dict)
    stability: str = UNKNOWN
    description: str = ""
    deterministic: bool = False

    def __call__(self, g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, **params) -> RunResult:
        return self.function(g, cfg, meta, **params)

    def problem_descriptor(self) -> Optional[ProblemDescriptor]:
        return get_problem(self.problem, **self.problem_params) if self.problem else None


TOOLKITS: Dict[str, Toolkit] = {}


def from_program(factory: Callable[..., MpcAlgorithm]) -> AlgorithmFn:
    """Wrap a program factory so it runs under the simulator like any pipeline."""

    @wraps(factory)
    def wrapper(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, **params) -> RunResult:
        labeling, trace = run(factory(g, **params), g, cfg, meta)
        return RunResult(labeling, trace)

    return wrapper


def register_toolkits(
    config: List[dict | Callable],
    registry: Optional[Dict[str, Toolkit]] = None,
) -> Dict[str, Toolkit]:
    """Register algorithms from a configuration list."""
    registry = TOOLKITS if registry is None else registry

    for tool in config:
        tool_dict = {"function": tool} if callable(tool) else dict(tool)
        if "function" not in tool_dict or not callable(tool_dict["function"]):
            raise ValueError(
                "Function not found in algorithm configuration or not callable."
            )

        function = tool_dict.pop("function")
        name = tool_dict.pop("name", function.__name__)
        description = tool_dict.pop("description", function.__doc__ or "")
        registry[name] = Toolkit(name, function, description=description.strip(), **tool_dict)
    return registry


def get_toolkit(name: str) -> Toolkit:
    if name not in TOOLKITS:
        raise MpclabError(f"unknown algorithm {name!r}; registered: {sorted(TOOLKITS)}")
    return TOOLKITS[name]


def _coloring(g: LegalGraph, cfg: MpcConfig, meta: MpcMeta, radius: int = 1) -> RunResult:
    reduction = reduce_id_space(g, radius, cfg, meta)
    return RunResult(reduction.colors, reduction.trace, {"colors": reduction.count})


register_toolkits(
    [
        {
            "function": from_program(lambda g, label=0: ConstantLabel(label)),
            "name": "constant_label",
            "description": "Every node outputs the same label.",
            "stability": CLAIMED_STABLE,
            "deterministic": True,
        },
        {
            "function": from_program(lambda g: GatherAll()),
            "name": "gather_all",
            "description": "Ships the whole input to machine 0.",
            "deterministic": True,
        },
        {
            "function": from_program(lambda g, radius=1: BallLocal(radius, g.cap)),
            "name": "ball_local",
            "description": "Fixed-seed digest of each node's ID-labelled ball.",
            "stability": CLAIMED_STABLE,
        },
        {
            "function": _coloring,
            "name": "id_reduction",
            "description": "Greedy colouring of G^r in ID order.",
            "problem": "coloring",
            "stability": CLAIMED_STABLE,
            "deterministic": True,
        },
        {
            "function": randomized_large_is,
            "problem": "large_is",
            "stability": CLAIMED_STABLE,
        },
        {
            "function": amplified_large_is,
            "problem": "large_is",
            "stability": CLAIMED_UNSTABLE,
        },
        {
            "function": deterministic_large_is,
            "problem": "large_is",
            "stability": CLAIMED_UNSTABLE,
            "deterministic": True,
        },
        {
            "function": mis_algorithm,
            "name": "mis",
            "description": "Extendable MIS by iterated derandomized Luby rounds.",
            "problem": "mis",
            "stability": CLAIMED_UNSTABLE,
            "deterministic": True,
        },
        {
            "function": maximal_matching,
            "problem": "maximal_matching",
            "stability": CLAIMED_UNSTABLE,
            "deterministic": True,
        },
        {
            "function": sinkless_algorithm,
            "name": "sinkless_orientation",
            "description": "Sinkless orientation through the LLL.",
            "problem": "sinkless",
            "stability": CLAIMED_UNSTABLE,
        },
    ]
)
