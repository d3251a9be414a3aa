from .config import ExperimentConfig, MpcConfig, MpcMeta, expand_seed
from .engine import (
    CLAIMED_STABLE,
    CLAIMED_UNSTABLE,
    UNKNOWN,
    MachineAssignment,
    MpcAlgorithm,
    RoundTrace,
    RunResult,
    StepResult,
    distribute_input,
    run,
    summarize,
    words,
)
from .seed import SeedRegistry, SeedTape
