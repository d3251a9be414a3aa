import os
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Annotated, Callable, Iterable, List, TypeVar

import coloredlogs
import pandas as pd


SavePathType = Annotated[str, "File path to save data. If None, data is not saved."]
ProgressType = Annotated[bool, "Whether to show a tqdm progress bar. Default to False."]

THREADS_ENV = "MPCLAB_THREADS"
LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def save_output(data: pd.DataFrame, tag: str, save_path: SavePathType = None) -> None:
    if save_path:
        directory = os.path.dirname(save_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        data.to_csv(save_path, index=False, lineterminator="\n")
        logger.info("%s saved to %s", tag, save_path)


def configure_logging(level: int | str = logging.WARNING) -> None:
    """Install coloured output on the package logger. Only entry points call this."""
    coloredlogs.install(
        level=level, logger=logging.getLogger("mpclab"), fmt=LOG_FORMAT
    )


def worker_count(requested: int | None = None) -> int:
    """Worker threads to use, capped by MPCLAB_THREADS (absent means 1)."""
    raw = os.environ.get(THREADS_ENV)
    try:
        cap = max(1, int(raw)) if raw else 1
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        cap = 1
    if requested is None:
        return cap
    return max(1, min(requested, cap))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Map in parallel, results in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

