# decoherence_lab/results_io.py

import logging
import os
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from .errors import ObservableError, OutputWriteError
from .observables import Profile, TimeSeries
from .wigner import PhaseSpaceField

logger = logging.getLogger(__name__)

# --- Configuration ---
FLOAT_FORMAT = "%.12g"
TIME_UNIT = "hbar=m=1 units"

Result = Union[TimeSeries, Profile, PhaseSpaceField]


def _column(name: str, unit: Optional[str]) -> str:
    return f"{name} [{unit}]" if unit else name


def to_frame(result: Result, value_name: Optional[str] = None, value_unit: Optional[str] = None) -> pd.DataFrame:
    """Column-per-quantity frame with units in the headers."""
    if isinstance(result, TimeSeries):
        return pd.DataFrame(
            {
                _column("t", result.metadata.get("time_unit", TIME_UNIT)): result.times,
                _column(value_name or result.label, value_unit): result.values,
            }
        )
    if isinstance(result, Profile):
        return pd.DataFrame(
            {
                _column(result.coordinate_name, result.metadata.get("coordinate_unit")): result.coordinates,
                _column(value_name or result.label, value_unit): result.values,
            }
        )
    R, u = np.meshgrid(result.R_grid.points, result.u_grid.points, indexing="ij")
    return pd.DataFrame({"R": R.ravel(), "u": u.ravel(), _column(value_name or "W", value_unit): result.values.ravel()})


def write_csv(
    result: Result,
    path: str,
    value_name: Optional[str] = None,
    value_unit: Optional[str] = None,
) -> str:
    """
    Writes a result as UTF-8 CSV with a header row and "\\n" line endings.

    Args:
        result: TimeSeries, Profile or PhaseSpaceField.
        path: destination file.
        value_name: header for the value column; defaults to the result label.
        value_unit: unit shown in the value header.

    Returns:
        The basename of the written file.

    Raises:
        ObservableError: the result holds non-finite values.
        OutputWriteError: the file cannot be written.
    """
    return write_frame(to_frame(result, value_name, value_unit), path)


def write_columns(columns: Dict[str, np.ndarray], path: str) -> str:
    """Writes equal-length named columns (headers as given, units included by the caller)."""
    return write_frame(pd.DataFrame({name: np.asarray(values, dtype=float) for name, values in columns.items()}), path)


def write_frame(frame: pd.DataFrame, path: str) -> str:
    numeric = frame.to_numpy(dtype=float) if len(frame) else np.empty((0, 0))
    if numeric.size and not np.all(np.isfinite(numeric)):
        raise ObservableError(f"Refusing to write non-finite values to {os.path.basename(path)}")
    if frame.empty:
        logger.warning(f"Writing empty result to {os.path.basename(path)} (header only)")
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OutputWriteError(f"Cannot write {path}: {e}") from e
    return os.path.basename(path)

