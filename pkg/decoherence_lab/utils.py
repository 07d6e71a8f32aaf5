# decoherence_lab/utils.py

import logging
import time
from contextlib import contextmanager
from typing import Dict, Optional


@contextmanager
def Timer(run_logger: logging.Logger, name: str, timings: Optional[Dict[str, float]] = None, level=logging.INFO):
    """
    Logs the duration of a block; if `timings` is given the duration in ms is stored under `name`.
    """
    start_time = time.perf_counter()
    run_logger.debug(f"TIMER: Starting '{name}'")
    try:
        yield
    finally:
        duration_ms = (time.perf_counter() - start_time) * 1000
        if timings is not None:
            timings[name] = round(duration_ms, 2)
        run_logger.log(level, f"TIMER: Finished '{name}'. Duration: {duration_ms:.2f} ms")


def gamma_tag(gamma_inv: float) -> str:
    """File-name fragment for a gamma_inv value, e.g. 0.2 -> 'ginv0.2'."""
    return f"ginv{gamma_inv:g}"


def time_tag(t: float) -> str:
    return f"t{t:g}"
