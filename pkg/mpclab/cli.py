"""
Command-line harness.

    mpclab gen cycle 12 | mpclab run deterministic_large_is
    mpclab lift sweep --hmax 4 --dmax 4 --out sweep.csv
    mpclab stability amplified_large_is graph.txt --budget 30

Exit codes: 0 when every validation passed, 1 on a validation failure or a
library error, 2 on a usage error.
"""

import functools
import itertools
import logging
import sys
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from .errors import GraphError, MpclabError
from .graph.generators import generate, labeled_paths, parse_family
from .graph.legal import LegalGraph
from .graph.textio import from_text, read_graph, to_text
from .sim.config import DEFAULT_SEED_BITS, ExperimentConfig, expand_seed
from .sim.engine import CLAIMED_STABLE, RoundTrace
from .functional.derandomize import derand_luby_step, derand_sparsify, find_universal_seed
from .functional.exponentiation import reduce_id_space
from .functional.hashing import family_for
from .functional.independent_set import SPARSIFY_TARGET
from .functional.lll import render_orientation, sinkless_orientation
from .functional.prg import PrgSearchSpec, bit_projection, nano_prg_search, parity_test
from .functional.problems import get_problem, set_to_labeling, validate
from .functional.replication import ReplicationSpec, build_replication, check_replication_implication
from .functional.stability import (
    estimate_sensitivity,
    search_counterexample,
    test_component_stability,
)
from .functional.stconn import (
    HOST_FAMILIES,
    SWEEP_COLUMNS,
    StConnInstance,
    host_family,
    random_radius_identical_pair,
    stconn_sweep,
)
from .reports import emit_report, run_report, to_json, write_text
from .toolkits import TOOLKITS, get_toolkit
from .utils import configure_logging, ordered_map, save_output, worker_count

logger = logging.getLogger(__name__)

console = Console(stderr=True)

app = typer.Typer(name="mpclab", no_args_is_help=True, add_completion=False)
derand_app = typer.Typer(no_args_is_help=True, help="Fix one seed by conditional expectations.")
lift_app = typer.Typer(no_args_is_help=True, help="Lower-bound constructions.")
seedsearch_app = typer.Typer(no_args_is_help=True, help="Exhaustive seed and PRG searches.")
app.add_typer(derand_app, name="derand")
app.add_typer(lift_app, name="lift")
app.add_typer(seedsearch_app, name="seedsearch")


class ReportFormat(str, Enum):
    json = "json"
    csv = "csv"


class IdPolicy(str, Enum):
    random = "random"
    sequential = "sequential"


class ReplicableProblem(str, Enum):
    independent_set = "independent_set"
    large_is = "large_is"
    mis = "mis"


DeltaOpt = typer.Option(0.5, "--delta", help="Space exponent, budget = ceil(c * n^delta).")
SpaceOpt = typer.Option(8, "--space-constant", help="The constant c of the word budget.")
SeedOpt = typer.Option("0", "--seed", help="Decimal seed index or hex seed.")
EstimateOpt = typer.Option(None, "--estimate", help="Size estimate N (default n).")
OutOpt = typer.Option(None, "--out", help="Output path, stdout when absent.")
ParamOpt = typer.Option([], "--param", "-p", help="Algorithm parameter key=value, repeatable.")


def _guard(fn):
    """Library errors become a one-line message and exit 1; bad option values exit 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as e:
            raise typer.BadParameter(e.errors()[0]["msg"]) from e
        except MpclabError as e:
            console.print(f"[red]error:[/red] {e}", highlight=False)
            raise typer.Exit(1) from e

    return wrapper


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging.")):
    """Low-space MPC laboratory."""
    configure_logging(logging.DEBUG if verbose else logging.WARNING)


def _load(source: str) -> LegalGraph:
    if source == "-":
        return from_text(sys.stdin.read())
    return read_graph(source)


def _value(text: str) -> Any:
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for kind in (int, Fraction):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def _params(values: List[str]) -> Dict[str, Any]:
    params = {}
    for item in values:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise typer.BadParameter(f"expected key=value, got {item!r}", param_hint="--param")
        params[key.replace("-", "_")] = _value(raw)
    return params


def _registered(algorithm: str) -> str:
    if algorithm not in TOOLKITS:
        raise typer.BadParameter(
            f"unknown algorithm {algorithm!r}; registered: {', '.join(sorted(TOOLKITS))}",
            param_hint="ALGORITHM",
        )
    return algorithm


def run_experiment(
    config: ExperimentConfig,
    params: Optional[Dict[str, Any]] = None,
    g: Optional[LegalGraph] = None,
) -> Tuple[List[Dict[str, Any]], bool]:
    """
    Run ``config.algorithm`` ``config.reps`` times, repetition r seeded by
    ``config.meta_for(g, r)``, and validate every output. Reports come back
    in repetition order; the flag is False iff some validation failed.
    """
    toolkit = get_toolkit(config.algorithm)
    g = g if g is not None else _load(config.graph_source or "-")
    cfg = config.mpc_config()
    problem = toolkit.problem_descriptor()
    params = params or {}

    def repetition(rep: int) -> Dict[str, Any]:
        meta = config.meta_for(g, rep)
        result = toolkit(g, cfg, meta, **params)
        verdict = validate(problem, g, result.labeling) if problem else None
        report = run_report(toolkit.name, g, cfg, meta, result, verdict)
        report["rep"] = rep
        return report

    reports = ordered_map(repetition, range(config.reps), worker_count())
    ok = all(r["valid"] is not False for r in reports)
    logger.info("%s: %d repetitions, all valid: %s", toolkit.name, len(reports), ok)
    return reports, ok


@app.command()
@_guard
def gen(
    tokens: List[str] = typer.Argument(..., help="Family and parameters, e.g. 'd_regular 10 3 1'."),
    ids: IdPolicy = typer.Option(IdPolicy.random, "--ids"),
    out: Optional[str] = OutOpt,
):
    """Generate a legal graph in the text format."""
    g = generate(**parse_family(tokens), id_policy=ids.value)
    write_text(to_text(g), out)


@app.command("run")
@_guard
def run_command(
    algorithm: str = typer.Argument(..., help="Registered algorithm name."),
    graph: str = typer.Argument("-", help="Graph file, '-' for stdin."),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    seed: str = SeedOpt,
    estimate: Optional[int] = EstimateOpt,
    reps: int = typer.Option(1, "--reps", min=1),
    out: Optional[str] = OutOpt,
    fmt: ReportFormat = typer.Option(ReportFormat.json, "--format"),
    param: List[str] = ParamOpt,
):
    """Run one algorithm under the simulator and validate its output."""
    config = ExperimentConfig(
        command="run", graph_source=graph, algorithm=_registered(algorithm),
        delta=delta, space_constant=space_constant, seed=seed, estimate=estimate,
        reps=reps, out=out, format=fmt.value,
    )
    reports, ok = run_experiment(config, _params(param))
    emit_report(reports, out, fmt.value)
    if not ok:
        console.print(f"[red]{algorithm}: validation failed[/red]")
        raise typer.Exit(1)


def _shared(graph: str, delta: float, space_constant: int, seed: str, estimate: Optional[int], command: str):
    config = ExperimentConfig(
        command=command, graph_source=graph, delta=delta,
        space_constant=space_constant, seed=seed, estimate=estimate,
    )
    g = _load(graph)
    return g, config.mpc_config(), config.meta_for(g)


@derand_app.command("luby")
@_guard
def derand_luby(
    graph: str = typer.Argument("-", help="Graph file, '-' for stdin."),
    out: Optional[str] = OutOpt,
):
    """One deterministic Luby step keyed by IDs: the seed line, then the members."""
    g = _load(graph)
    f = family_for(2, 8 * g.max_degree**2, g.n, max(g.ids(), default=0) + 1)
    step = derand_luby_step(g, f)
    lines = [step.choice.serialize(), "members " + " ".join(str(g.nodes[v].id) for v in step.members)]
    write_text("\n".join(lines) + "\n", out)
    verdict = validate(get_problem("independent_set"), g, set_to_labeling(g.n, step.members))
    if not verdict.valid:
        raise typer.Exit(1)


@derand_app.command("sparsify")
@_guard
def derand_sparsify_command(
    graph: str = typer.Argument("-", help="Graph file, '-' for stdin."),
    target: int = typer.Option(SPARSIFY_TARGET, "--target", min=1),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    seed: str = SeedOpt,
    estimate: Optional[int] = EstimateOpt,
    out: Optional[str] = OutOpt,
):
    """Deterministic sampling down to induced degree about ``target``."""
    g, cfg, meta = _shared(graph, delta, space_constant, seed, estimate, "derand")
    coloring = reduce_id_space(g, 1, cfg, meta)
    f = family_for(2, 4 * g.max_degree, coloring.count)
    result = derand_sparsify(g, target, f, list(coloring.colors))
    lines = [] if result.choice is None else [result.choice.serialize()]
    lines.append(f"kept {result.kept} max_induced_degree {result.max_induced_degree}")
    write_text("\n".join(lines) + "\n", out)


@app.command()
@_guard
def lll(
    graph: str = typer.Argument("-", help="Graph file, '-' for stdin."),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    seed: str = SeedOpt,
    estimate: Optional[int] = EstimateOpt,
    out: Optional[str] = OutOpt,
):
    """Sinkless orientation through the derandomized LLL, one 'orient i j ->' line per edge."""
    g, cfg, meta = _shared(graph, delta, space_constant, seed, estimate, "lll")
    result = sinkless_orientation(g, cfg, meta, RoundTrace(budget=cfg.budget(g.n)))
    lines = render_orientation(g, result.bits)
    write_text("".join(line + "\n" for line in lines), out)
    console.print(f"mode {result.mode}, expected sinks {result.expectation}", highlight=False)
    verdict = validate(get_problem("sinkless"), g, result.labeling(g))
    if not verdict.valid:
        console.print(f"[red]sinks at {list(verdict.violations)}[/red]")
        raise typer.Exit(1)


def _sweep_pairs(D: int, count: int, max_nodes: int, seed: int):
    rng = np.random.default_rng([seed, D])
    return [random_radius_identical_pair(D, max(max_nodes, D + 2), rng) for _ in range(count)]


@lift_app.command("sweep")
@_guard
def lift_sweep(
    hmax: int = typer.Option(4, "--hmax", min=2, help="Largest host size."),
    dmax: int = typer.Option(4, "--dmax", min=1, help="Largest radius D."),
    pairs: int = typer.Option(2, "--pairs", min=1, help="Random (G, G') pairs per D."),
    max_nodes: int = typer.Option(6, "--max-nodes", min=3),
    seed: int = typer.Option(0, "--seed"),
    out: Optional[str] = OutOpt,
):
    """Every h in [D]^V(H) over the host families; exits 1 if any row disagrees."""
    frames = []
    for D in range(1, dmax + 1):
        for index, (left, right) in enumerate(_sweep_pairs(D, pairs, max_nodes, seed)):
            for family, size in itertools.product(HOST_FAMILIES, range(2, hmax + 1)):
                try:
                    host, s, t = host_family(family, size)
                except GraphError:
                    continue
                inst = StConnInstance(host, s, t, D, (1,) * host.n, left, right)
                frame = stconn_sweep(inst)
                frame.insert(0, "pair", index)
                frame.insert(0, "D", D)
                frame.insert(0, "size", size)
                frame.insert(0, "host", family)
                frames.append(frame)
    columns = ["host", "size", "D", "pair", *SWEEP_COLUMNS]
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=columns)
    table["agree"] = table["agree"].map(lambda x: "true" if x else "false")
    if out:
        save_output(table, "s-t sweep", out)
    else:
        print(table.to_csv(index=False, lineterminator="\n"), end="")
    disagree = int((table["agree"] != "true").sum())
    if disagree:
        console.print(f"[red]{disagree} of {len(table)} rows disagree[/red]")
        raise typer.Exit(1)


@lift_app.command("replicate")
@_guard
def lift_replicate(
    graph: str = typer.Argument("-", help="Graph file, '-' for stdin."),
    copies: int = typer.Option(2, "--copies", min=1),
    isolated: int = typer.Option(0, "--isolated", min=0),
    check: Optional[ReplicableProblem] = typer.Option(
        None, "--check",
        help="Check the implication over every Boolean labeling instead of writing the graph.",
    ),
    out: Optional[str] = OutOpt,
):
    """Write the replication graph, or check that validity on it carries back."""
    g = _load(graph)
    spec = ReplicationSpec(g, copies, isolated)
    if check is None:
        write_text(to_text(build_replication(spec)), out)
        return
    problem = get_problem(check.value)
    # isolated nodes join an MIS; a large IS leaves them out
    ell = check is ReplicableProblem.mis
    failures = [
        list(L)
        for L in itertools.product((False, True), repeat=g.n)
        if not check_replication_implication(problem, g, L, ell, spec)
    ]
    write_text(to_json({"problem": check.value, "labelings": 2**g.n, "failures": failures}), out)
    if failures:
        raise typer.Exit(1)


@app.command()
@_guard
def stability(
    algorithm: str = typer.Argument(..., help="Registered algorithm name."),
    graph: str = typer.Argument("-", help="Graph file, '-' for stdin."),
    budget: int = typer.Option(12, "--budget", min=1, help="Perturbations per seed."),
    seeds: int = typer.Option(1, "--seeds", min=1, help="Seeds to search for a counterexample."),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    seed: str = SeedOpt,
    estimate: Optional[int] = EstimateOpt,
    out: Optional[str] = OutOpt,
    param: List[str] = ParamOpt,
):
    """Perturbation suite for component stability; exits 1 when a claimed-stable algorithm diverges."""
    toolkit = get_toolkit(_registered(algorithm))
    g, cfg, meta = _shared(graph, delta, space_constant, seed, estimate, "stability")
    params = _params(param)
    if seeds > 1 and seed.isdigit():
        start = int(seed)
        report = search_counterexample(toolkit, g, range(start, start + seeds), budget, cfg, params)
    else:
        report = test_component_stability(toolkit, g, meta, budget, cfg, params=params)
    payload = {
        "algorithm": toolkit.name,
        "claimed": toolkit.stability,
        "verdict": report.verdict,
        "trials": report.trials,
        "kinds": report.kinds,
        "witness": report.witness.as_dict() if report.witness else None,
    }
    write_text(to_json(payload), out)
    if toolkit.stability == CLAIMED_STABLE and not report.stable:
        raise typer.Exit(1)


@app.command()
@_guard
def sensitivity(
    algorithm: str = typer.Argument(..., help="Registered algorithm name."),
    radius: int = typer.Option(2, "--D", min=1, help="Radius the two graphs agree on."),
    max_nodes: int = typer.Option(8, "--max-nodes", min=3),
    n_ctx: Optional[int] = typer.Option(None, "--n", help="Context node count."),
    delta_ctx: Optional[int] = typer.Option(None, "--max-degree", help="Context max degree."),
    seed_bits: Optional[int] = typer.Option(None, "--seed-bits", min=1, max=16, help="Enumerate every seed."),
    samples: int = typer.Option(64, "--samples", min=1, help="Monte-Carlo seeds otherwise."),
    seed: int = typer.Option(0, "--seed", help="Seed of the random pair."),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    out: Optional[str] = OutOpt,
    param: List[str] = ParamOpt,
):
    """Probability the centers of a random D-radius-identical pair get different outputs."""
    toolkit = get_toolkit(_registered(algorithm))
    left, right = random_radius_identical_pair(radius, max(max_nodes, radius + 2), np.random.default_rng(seed))
    n = n_ctx or max(left.graph.n, right.graph.n)
    degree = delta_ctx if delta_ctx is not None else max(left.graph.max_degree, right.graph.max_degree)
    config = ExperimentConfig(command="sensitivity", delta=delta, space_constant=space_constant)
    estimate = estimate_sensitivity(
        toolkit, left, right, radius, n, degree, seed_bits, samples, config.mpc_config(), _params(param),
    )
    write_text(to_json({"algorithm": toolkit.name, "D": radius, "n": n, **estimate.as_dict()}), out)


def _tests(specs: List[str], m: int):
    tests = []
    for item in specs:
        kind, _, raw = item.partition(":")
        try:
            positions = [int(x) for x in raw.split(",") if x]
        except ValueError as e:
            raise typer.BadParameter(f"bad test {item!r}", param_hint="--test") from e
        if any(not 0 <= i < m for i in positions):
            raise typer.BadParameter(f"test positions must lie in [0, {m})", param_hint="--test")
        if kind == "bit" and len(positions) == 1:
            tests.append(bit_projection(positions[0]))
        elif kind == "parity" and positions:
            tests.append(parity_test(positions))
        else:
            raise typer.BadParameter(f"expected bit:<i> or parity:<i,j,...>, got {item!r}", param_hint="--test")
    return tests or [bit_projection(i) for i in range(m)]


@seedsearch_app.command("prg")
@_guard
def seedsearch_prg(
    d: int = typer.Option(2, "--d", min=0, help="Seed bits."),
    m: int = typer.Option(3, "--m", min=1, help="Output bits."),
    test: List[str] = typer.Option([], "--test", help="bit:<i> or parity:<i,j,...>; default every bit."),
    epsilon: str = typer.Option("0", "--epsilon", help="Allowed deviation, e.g. 1/8."),
    attempts: int = typer.Option(4096, "--attempts", min=1),
    seed: int = typer.Option(0, "--seed"),
    out: Optional[str] = OutOpt,
):
    """Nano PRG table search; the table is written as hex lines, exit 1 when none exists."""
    try:
        eps = Fraction(epsilon)
    except (ValueError, ZeroDivisionError) as e:
        raise typer.BadParameter(f"bad epsilon {epsilon!r}", param_hint="--epsilon") from e
    spec = PrgSearchSpec(d, m, tuple(_tests(test, m)), eps, attempts, seed)
    table = nano_prg_search(spec)
    if not table:
        console.print(
            f"[yellow]no table ({table.mode}, {table.checked} checked, best deviation {table.best_deviation})[/yellow]",
            highlight=False,
        )
        raise typer.Exit(1)
    write_text(table.to_hex_lines(), out)


@seedsearch_app.command("universal")
@_guard
def seedsearch_universal(
    algorithm: str = typer.Argument("amplified_large_is", help="Registered seeded algorithm."),
    paths: int = typer.Option(4, "--paths", min=1, max=7, help="Corpus: labeled paths on up to this many nodes."),
    space: int = typer.Option(1024, "--space", min=1, help="Truncated seed space size."),
    seed_bits: int = typer.Option(DEFAULT_SEED_BITS, "--seed-bits", min=8),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    out: Optional[str] = OutOpt,
    param: List[str] = ParamOpt,
):
    """One seed index valid on every graph of the corpus, exit 1 when none is found."""
    toolkit = get_toolkit(_registered(algorithm))
    problem = toolkit.problem_descriptor()
    if problem is None:
        raise typer.BadParameter(f"{algorithm} has no problem to validate", param_hint="ALGORITHM")
    cfg = ExperimentConfig(command="seedsearch", delta=delta, space_constant=space_constant).mpc_config()
    params = _params(param)
    corpus = [p for size in range(1, paths + 1) for p in labeled_paths(size)]
    index = find_universal_seed(
        lambda g, meta: toolkit(g, cfg, meta, **params).labeling,
        corpus,
        range(space),
        lambda g, L: validate(problem, g, L),
        seed_bits=seed_bits,
    )
    payload = {
        "algorithm": toolkit.name,
        "corpus": len(corpus),
        "space": space,
        "seed": index,
        "seed_hex": None if index is None else expand_seed(index, seed_bits),
    }
    write_text(to_json(payload), out)
    if index is None:
        raise typer.Exit(1)


@app.command()
@_guard
def bench(
    algorithm: str = typer.Argument(..., help="Registered algorithm name."),
    family: str = typer.Argument(..., help="Generator family."),
    sizes: str = typer.Option("8,16,32", "--sizes", help="Comma-separated node counts."),
    degree: int = typer.Option(3, "--degree", min=0, help="Degree for d_regular."),
    reps: int = typer.Option(1, "--reps", min=1, help="Instances per size."),
    delta: float = DeltaOpt,
    space_constant: int = SpaceOpt,
    seed: str = SeedOpt,
    out: Optional[str] = OutOpt,
    param: List[str] = ParamOpt,
):
    """One CSV row per generated instance."""
    _registered(algorithm)
    try:
        counts = [int(x) for x in sizes.split(",") if x.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"bad sizes {sizes!r}", param_hint="--sizes") from e
    config = ExperimentConfig(
        command="bench", algorithm=algorithm, delta=delta, space_constant=space_constant, seed=seed,
    )
    params = _params(param)
    rows, ok = [], True
    for n, rep in itertools.product(counts, range(reps)):
        g = generate(family, n, d=degree, seed=rep)
        reports, valid = run_experiment(config, params, g)
        rows.extend(reports)
        ok = ok and valid
    emit_report(rows, out, "csv")
    table = Table("n", "rounds", "peak_words", "budget", "valid", title=f"{algorithm} on {family}")
    for row in rows:
        table.add_row(*(str(row[c]) for c in ("n", "rounds", "peak_words", "budget", "valid")))
    console.print(table)
    if not ok:
        raise typer.Exit(1)


@app.command()
def algorithms():
    """List the registered algorithms."""
    table = Table("name", "problem", "stability", "deterministic", "description")
    for name in sorted(TOOLKITS):
        tk = TOOLKITS[name]
        table.add_row(name, tk.problem or "-", tk.stability, str(tk.deterministic), tk.description.split("\n")[0])
    Console().print(table)


if __name__ == "__main__":
    app()
