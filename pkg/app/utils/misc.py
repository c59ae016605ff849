# Helper utilities
import math
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, Union

import numpy as np
import psutil

from app.core.exceptions import TextDecodeError


def format_float(x: float) -> str:
    """17 significant digits; non-finite values become JSON null."""
    if not math.isfinite(x):
        return "null"
    return format(float(x), ".17g")


def read_text(path: Union[str, Path]) -> str:
    """UTF-8 file contents; a bad byte raises TextDecodeError naming its line."""
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TextDecodeError(str(path), data.count(b"\n", 0, exc.start) + 1) from None


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_complex(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def memory_used_mb() -> float:
    return psutil.Process().memory_info().rss / 1024 / 1024


@contextmanager
def track_performance() -> Iterator[Dict[str, float]]:
    """Fills latency_ms and memory_used_mb once the block exits."""
    metrics: Dict[str, float] = {}
    start_time = time.time()
    try:
        yield metrics
    finally:
        metrics["latency_ms"] = (time.time() - start_time) * 1000
        metrics["memory_used_mb"] = memory_used_mb()
