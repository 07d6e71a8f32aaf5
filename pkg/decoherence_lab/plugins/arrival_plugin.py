# decoherence_lab/plugins/arrival_plugin.py

import logging
from typing import List

from ..config import ScenarioConfig
from ..models import MapOrder, WavePacketSpec
from ..observables import ARRIVAL_TIME_POINTS, arrival_statistics
from ..report_collector import RunReport
from ..states import default_momentum_grid
from ..utils import Timer, gamma_tag
from .base import ScenarioPlugin

REFERENCE_KEYS = (
    "mean_t_unitary",
    "variance_t_unitary",
    "predicted_mean_t",
    "predicted_variance_t",
    "expanded_variance_t",
    "mean_shift",
    "variance_shift",
    "second_moment_unitary",
    "predicted_second_moment",
    "second_moment_shift",
    "horizon",
)


class ArrivalPlugin(ScenarioPlugin):
    """Arrival-time distribution of a free packet at a detector, from the probability current."""

    @property
    def name(self) -> str:
        return "arrival"

    @property
    def description(self) -> str:
        return "Arrival-time density Pi(t) = J(X, t) and its first two moments against the unitary reference."

    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        ph = config.physics
        packet = WavePacketSpec(sigma0=ph.sigma0, x0=ph.x0, p0=ph.p0, hbar=ph.hbar, mass=ph.mass or 1.0)
        grid = default_momentum_grid(packet, config.grids.momentum_points)
        time_points = config.grids.time_points or ARRIVAL_TIME_POINTS
        t_max = float(config.times[-1]) if config.times else None
        if config.map_order is MapOrder.EXACT:
            run_logger.warning("ARRIVAL PLUGIN: the current is defined for the first-order map only; using it")

        files = []
        for gamma_inv in config.gamma_inv_list:
            params = self.params(config, gamma_inv).model_copy(update={"order": MapOrder.FIRST_ORDER})
            tag = gamma_tag(gamma_inv)
            with Timer(run_logger, f"arrival {tag}"):
                stats = arrival_statistics(packet, params, ph.detector_x, t_max, grid, time_points)
            files.append(self._write(stats.density, output_dir, f"arrival_density_{tag}.csv", report, "Pi", "1/time"))

            report.add_summary(f"{tag}.mean_t", stats.mean_t)
            report.add_summary(f"{tag}.variance_t", stats.variance_t)
            report.add_summary(f"{tag}.normalization", stats.normalization)
            report.add_summary(f"{tag}.current_sign_violation", stats.current_sign_violation)
            for key in REFERENCE_KEYS:
                if key in stats.metadata:
                    report.add_summary(f"{tag}.{key}", stats.metadata[key])
            run_logger.info(
                f"ARRIVAL PLUGIN: gamma_inv={gamma_inv:g} <t>={stats.mean_t:.5f} var={stats.variance_t:.5f}"
            )
        return files
