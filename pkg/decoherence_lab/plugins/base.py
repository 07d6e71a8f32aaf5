# decoherence_lab/plugins/base.py

import logging
import os
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import ScenarioConfig
from ..models import MilburnParams
from ..report_collector import RunReport
from ..results_io import Result, write_columns, write_csv


class ScenarioPlugin(ABC):
    """
    Abstract Base Class for a self-contained scenario.
    Each plugin turns a validated config into CSV files inside the run directory.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Scenario name as used on the command line (e.g. 'tunnel')."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        pass

    @abstractmethod
    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        """
        Runs the scenario for every gamma_inv in the config.

        Args:
            config: validated scenario configuration.
            output_dir: the run directory; every file goes here.
            report: collects summary numbers and written files.
            run_logger: the logger for this run.

        Returns:
            Filenames (relative to output_dir) of the written CSVs.
        """
        pass

    def default_times(self, config: ScenarioConfig) -> Sequence[float]:
        """Time samples when the config leaves `times` unset."""
        return [0.0]

    def times(self, config: ScenarioConfig) -> np.ndarray:
        return np.asarray(config.times if config.times is not None else self.default_times(config), dtype=float)

    @staticmethod
    def params(config: ScenarioConfig, gamma_inv: float) -> MilburnParams:
        return MilburnParams(gamma_inv=gamma_inv, order=config.map_order, hbar=config.physics.hbar)

    def _write(
        self,
        result: Result,
        output_dir: str,
        filename: str,
        report: RunReport,
        value_name: Optional[str] = None,
        value_unit: Optional[str] = None,
    ) -> str:
        path = os.path.join(output_dir, filename)
        # registered before writing so a half-written file is still cleaned up
        report.add_output(filename)
        return write_csv(result, path, value_name=value_name, value_unit=value_unit)

    def _write_columns(self, columns: Dict[str, np.ndarray], output_dir: str, filename: str, report: RunReport) -> str:
        report.add_output(filename)
        return write_columns(columns, os.path.join(output_dir, filename))
