# decoherence_lab/plugins/tunnel_plugin.py

import logging
from typing import List

import numpy as np

from ..config import ScenarioConfig
from ..evolution import evolve_eigenbasis
from ..models import BarrierSpec, WavePacketSpec
from ..observables import (
    dwell_statistics,
    monochromatic_dwell_average,
    scattering_density_series,
    stationary_transmission,
    transmission_cutoff,
    transmission_series,
)
from ..report_collector import RunReport
from ..spectra import build_scattering_basis
from ..states import density_from_coefficients
from ..utils import Timer, gamma_tag, time_tag
from .base import ScenarioPlugin

SNAPSHOT_TIMES = (1.0, 5.0, 10.0, 40.0)


class TunnelPlugin(ScenarioPlugin):
    """Gaussian packet on a rectangular barrier, expanded in scattering states."""

    @property
    def name(self) -> str:
        return "tunnel"

    @property
    def description(self) -> str:
        return "Transmission probability, dwell probability and density snapshots for a rectangular barrier."

    def default_times(self, config: ScenarioConfig):
        return np.linspace(0.0, 40.0, config.grids.time_points or 801)

    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        ph = config.physics
        mass = ph.mass or 1.0
        packet = WavePacketSpec(sigma0=ph.sigma0, x0=ph.x0, p0=ph.p0, hbar=ph.hbar, mass=mass)
        barrier = BarrierSpec(V0=ph.V0, L=ph.L, hbar=ph.hbar, mass=mass)
        times = self.times(config)

        with Timer(run_logger, "scattering basis"):
            basis = build_scattering_basis(packet, barrier, config.grids.k_points)
        coefficients = basis.packet_coefficients(packet)
        rho0 = density_from_coefficients(coefficients, basis)
        run_logger.info(f"TUNNEL PLUGIN: k-grid coverage {coefficients.coverage:.6f}")

        report.add_summary("coverage", coefficients.coverage)
        report.add_summary("stationary_transmission", stationary_transmission(packet, basis))
        report.add_summary("tau_dwell_monochromatic", monochromatic_dwell_average(packet, basis))

        snapshots = [t for t in SNAPSHOT_TIMES if t <= times.max()]
        files = []
        for gamma_inv in config.gamma_inv_list:
            params = self.params(config, gamma_inv)
            tag = gamma_tag(gamma_inv)

            def rho_t(t, params=params):
                return evolve_eigenbasis(rho0, t, params)

            x_max = transmission_cutoff(packet, barrier, float(times.max()), params, basis.k_grid)
            with Timer(run_logger, f"transmission {tag}"):
                transmitted = transmission_series(rho_t, basis, times, x_max)
                dwell, tau = dwell_statistics(rho_t, basis, times)
            files.append(self._write(transmitted, output_dir, f"transmission_{tag}.csv", report, "P_tr"))
            files.append(self._write(dwell, output_dir, f"dwell_probability_{tag}.csv", report, "P_D"))
            report.add_summary(f"{tag}.transmission_final", float(transmitted.values[-1]))
            report.add_summary(f"{tag}.tau_dwell", tau)
            report.add_summary(f"{tag}.x_max", x_max)
            run_logger.info(f"TUNNEL PLUGIN: gamma_inv={gamma_inv:g} P_tr={transmitted.values[-1]:.5f} tau_D={tau:.4f}")

            if snapshots:
                left = packet.x0 - packet.p0 / mass * max(snapshots) - 8.0 * packet.width_at(max(snapshots))
                x = np.linspace(left, x_max, config.grids.x_points)
                for t, profile in scattering_density_series(rho_t, basis, x, snapshots).items():
                    files.append(self._write(profile, output_dir, f"density_{tag}_{time_tag(t)}.csv", report, "P", "1/length"))
        return files
