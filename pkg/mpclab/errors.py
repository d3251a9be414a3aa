"""
Exception hierarchy for mpclab.

Reporting operations (validate_legal, validate, summarize) never raise for
the conditions they report; everything else raises a subclass of
MpclabError.
"""


class MpclabError(Exception):
    """Root of every error raised by mpclab."""


class GraphError(MpclabError):
    """Invalid node index, unrealizable generator parameters or cap overflow."""


class PreconditionError(MpclabError):
    """An operation was called outside its documented precondition."""


class FamilyError(MpclabError):
    """Hash family misuse: bad modulus, out-of-domain input, t > k, caps."""


class ProblemError(MpclabError):
    """Label outside the alphabet, labeling/graph mismatch, no finite radius."""


class SeedExhausted(MpclabError):
    """An algorithm asked for more seed bits than the shared seed holds."""


class MachineCapExceeded(MpclabError):
    def __init__(self, machines: int, cap: int):
        self.machines = machines
        self.cap = cap
        super().__init__(f"distribution needs {machines} machines, cap is {cap}")


class SpaceExceeded(MpclabError):
    def __init__(self, machine: int, round: int, words: int, budget: int):
        self.machine = machine
        self.round = round
        self.words = words
        self.budget = budget
        super().__init__(
            f"machine {machine} used {words} words in round {round} (budget {budget})"
        )


class NonTermination(MpclabError):
    def __init__(self, rounds: int):
        self.rounds = rounds
        super().__init__(f"no termination after {rounds} supersteps")


class MissingOutput(MpclabError):
    def __init__(self, nodes):
        self.nodes = sorted(nodes)
        shown = self.nodes[:10]
        super().__init__(f"{len(self.nodes)} node(s) without output, e.g. {shown}")


class IterationCapExceeded(MpclabError):
    def __init__(self, iterations: int, residual: int, labeling=None):
        self.iterations = iterations
        self.residual = residual
        self.labeling = labeling
        super().__init__(
            f"{residual} node(s) still undecided after {iterations} iterations"
        )


class ResampleCapExceeded(MpclabError):
    def __init__(self, resamples: int):
        self.resamples = resamples
        super().__init__(f"resampling cap of {resamples} reached")
