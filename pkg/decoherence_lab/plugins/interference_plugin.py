# decoherence_lab/plugins/interference_plugin.py

import logging
from typing import List

import numpy as np

from ..config import ScenarioConfig
from ..errors import ObservableError
from ..evolution import evolve_free_momentum
from ..models import CatStateSpec
from ..observables import Profile, linear_entropy, position_density_momentum, visibility
from ..report_collector import RunReport
from ..states import cat_component_densities, default_momentum_grid, initial_density_momentum
from ..utils import gamma_tag, time_tag
from .base import ScenarioPlugin


class InterferencePlugin(ScenarioPlugin):
    """Two converging Gaussian packets: density snapshots and fringe visibility at the meeting time."""

    @property
    def name(self) -> str:
        return "interference"

    @property
    def description(self) -> str:
        return "Cat-state position densities over time and the visibility V(x) at t0 = m x0 / p0."

    def default_times(self, config: ScenarioConfig):
        t0 = self._meeting_time(config)
        return sorted({0.0, 1.0, 3.0, t0, 2.0 * t0, 3.0 * t0})

    @staticmethod
    def _meeting_time(config: ScenarioConfig) -> float:
        ph = config.physics
        if ph.p0 == 0:
            raise ObservableError("interference needs p0 != 0 for the packets to meet")
        return (ph.mass or 1.0) * abs(ph.x0) / abs(ph.p0)

    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        ph = config.physics
        mass = ph.mass or 1.0
        spec = CatStateSpec.symmetric(ph.sigma0, abs(ph.x0), abs(ph.p0), ph.hbar, mass, converging=ph.converging)
        grid = default_momentum_grid(spec, config.grids.momentum_points)
        rho0 = initial_density_momentum(spec, grid)
        parts = cat_component_densities(spec, grid)
        times = self.times(config)
        t0 = self._meeting_time(config)
        run_logger.info(f"INTERFERENCE PLUGIN: packets at +-{abs(ph.x0)}, meeting time t0 = {t0:.4g}")

        reach = abs(ph.x0) + abs(ph.p0) / mass * times.max() + 8.0 * spec.packet_a.width_at(times.max())
        x = np.linspace(-reach, reach, config.grids.x_points)
        sigma_t0 = spec.packet_a.width_at(t0)
        x_vis = np.linspace(-3.0 * sigma_t0, 3.0 * sigma_t0, config.grids.x_points)
        report.add_summary("normalization", spec.normalization)
        report.add_summary("t0", t0)

        files = []
        for gamma_inv in config.gamma_inv_list:
            params = self.params(config, gamma_inv)
            tag = gamma_tag(gamma_inv)
            run_logger.info(f"INTERFERENCE PLUGIN: gamma_inv = {gamma_inv:g}")
            for t in times:
                rho_t = evolve_free_momentum(rho0, float(t), params)
                density = Profile(coordinates=x, values=position_density_momentum(rho_t, x), label="P")
                files.append(self._write(density, output_dir, f"density_{tag}_{time_tag(t)}.csv", report, "P", "1/length"))
            report.add_summary(f"{tag}.linear_entropy_t{times.max():g}", linear_entropy(rho_t))

            profile = visibility(parts, grid, x_vis, t0, params, ph.hbar, mass)
            files.append(self._write(profile, output_dir, f"visibility_{tag}.csv", report, "V"))
            if profile.values.size:
                report.add_summary(f"{tag}.visibility_center", float(np.interp(0.0, profile.coordinates, profile.values)))
                report.add_summary(f"{tag}.visibility_min", float(profile.values.min()))
        return files
