"""
Run reports.

A run report is one JSON object with a fixed key order; CSV detail files
hold one row per run with the same leading columns. Re-running the same
configuration reproduces both byte for byte.
"""

import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from .graph.legal import LegalGraph
from .sim.config import MpcConfig, MpcMeta
from .sim.engine import RunResult, summarize
from .functional.problems import Verdict
from .utils import SavePathType, save_output

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "algorithm",
    "n",
    "delta",
    "rounds",
    "peak_words",
    "valid",
    "seed_hex",
    "m",
    "max_degree",
    "budget",
    "cap",
    "space_constant",
]


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (tuple, list)):
        return [_plain(x) for x in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_plain(x) for x in value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def run_report(
    algorithm: str,
    g: LegalGraph,
    cfg: MpcConfig,
    meta: MpcMeta,
    result: RunResult,
    verdict: Optional[Verdict] = None,
) -> Dict[str, Any]:
    summary = summarize(result.trace)
    report: Dict[str, Any] = {
        "algorithm": algorithm,
        "n": g.n,
        "delta": cfg.delta,
        "rounds": summary.rounds,
        "peak_words": summary.max_peak_words,
        "valid": None if verdict is None else verdict.valid,
        "seed_hex": meta.seed_hex,
        "m": g.m,
        "max_degree": g.max_degree,
        "budget": summary.budget,
        "cap": g.cap,
        "space_constant": cfg.space_constant,
    }
    if verdict is not None and not verdict.valid:
        report["violations"] = list(verdict.violations)
    if result.extras:
        report["extras"] = _plain(result.extras)
    return report


def to_json(payload: Any) -> str:
    return json.dumps(_plain(payload), indent=2, ensure_ascii=False) + "\n"


def write_text(text: str, out: SavePathType = None) -> None:
    """Write to ``out`` or stdout when no path is given."""
    if not out or out == "-":
        print(text, end="")
        return
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    logger.info("report written to %s", out)


def report_frame(reports: Iterable[Dict[str, Any]], columns: Optional[List[str]] = None) -> pd.DataFrame:
    """One row per report; an empty input gives a header-only frame."""
    columns = columns or REPORT_COLUMNS
    rows = [{c: r.get(c) for c in columns} for r in reports]
    return pd.DataFrame(rows, columns=columns)


def emit_report(
    reports: List[Dict[str, Any]],
    out: SavePathType = None,
    fmt: str = "json",
    columns: Optional[List[str]] = None,
) -> None:
    if fmt == "csv":
        frame = report_frame(reports, columns)
        if out and out != "-":
            save_output(frame, "report rows", out)
        else:
            print(frame.to_csv(index=False, lineterminator="\n"), end="")
        return
    payload: Any = reports[0] if len(reports) == 1 else reports
    write_text(to_json(payload), out)
