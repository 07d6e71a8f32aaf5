# decoherence_lab/plugins/bouncer_plugin.py

import logging
from typing import List

import numpy as np

from ..config import ScenarioConfig
from ..evolution import evolve_eigenbasis
from ..models import MapOrder, WavePacketSpec
from ..observables import Profile, entropy_series_exact, expectation_series, oscillation_amplitude
from ..report_collector import RunReport
from ..spectra import BouncerBasis, bouncer_position_matrix, build_bouncer_basis
from ..states import CoefficientVector, density_from_coefficients, position_amplitude, project_onto_basis
from ..utils import Timer, gamma_tag
from .base import ScenarioPlugin

# natural units: alpha = 1, E_n = -R_n
BOUNCER_MASS = 0.5
BOUNCER_GRAVITY = 2.0
DAMPING_CHECK_TIME = 20.0
DAMPING_CHECK_WINDOW = 5.0


def bouncer_setup(config: ScenarioConfig, run_logger: logging.Logger):
    """Basis and projected Gaussian shared by the bouncer and entropy scenarios."""
    ph = config.physics
    mass = ph.mass or BOUNCER_MASS
    g = ph.g or BOUNCER_GRAVITY
    with Timer(run_logger, "bouncer basis"):
        basis = build_bouncer_basis(config.grids.n_max, mass=mass, g=g, hbar=ph.hbar)
    packet = WavePacketSpec(sigma0=ph.sigma0, x0=ph.z0, p0=ph.p0 or 0.0, hbar=ph.hbar, mass=mass)
    coefficients = project_onto_basis(lambda z: position_amplitude(packet, z), basis)
    run_logger.info(f"BOUNCER: {basis.n_max} states cover {coefficients.coverage:.6f} of the packet")
    return basis, coefficients


class BouncerPlugin(ScenarioPlugin):
    """Gaussian dropped onto a hard floor in uniform gravity."""

    @property
    def name(self) -> str:
        return "bouncer"

    @property
    def description(self) -> str:
        return "Expansion weights, <z>(t) with collapse and revivals, and the exact-map linear entropy."

    def default_times(self, config: ScenarioConfig):
        return np.linspace(0.0, 40.0, config.grids.time_points or 801)

    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        basis, coefficients = bouncer_setup(config, run_logger)
        rho0 = density_from_coefficients(coefficients, basis)
        z_matrix = bouncer_position_matrix(basis)
        times = self.times(config)

        files = [self._write(self._weights_profile(coefficients), output_dir, "weights.csv", report, "|C_n|^2")]
        z_inf = self.long_time_position(rho0.entries, basis)
        report.add_summary("coverage", coefficients.coverage)
        report.add_summary("z_inf", z_inf)
        run_logger.info(f"BOUNCER: long-time <z> = {z_inf:.5f}")

        for gamma_inv in config.gamma_inv_list:
            params = self.params(config, gamma_inv)
            tag = gamma_tag(gamma_inv)

            def rho_t(t, params=params):
                return evolve_eigenbasis(rho0, t, params)

            position = expectation_series(rho_t, z_matrix, times, label="z_mean")
            files.append(self._write(position, output_dir, f"position_mean_{tag}.csv", report, "<z>", "length"))
            report.add_summary(f"{tag}.z_final", float(position.values[-1]))
            if times.max() >= DAMPING_CHECK_TIME:
                amplitude = oscillation_amplitude(position, DAMPING_CHECK_TIME, DAMPING_CHECK_WINDOW)
                report.add_summary(f"{tag}.oscillation_amplitude_t{DAMPING_CHECK_TIME:g}", amplitude)

            exact = params.model_copy(update={"order": MapOrder.EXACT})
            entropy = entropy_series_exact(rho0, exact, times)
            files.append(self._write(entropy, output_dir, f"entropy_{tag}.csv", report, "S_L"))
            report.add_summary(f"{tag}.entropy_final", float(entropy.values[-1]))
        return files

    @staticmethod
    def _weights_profile(coefficients: CoefficientVector) -> Profile:
        n = np.arange(1, len(coefficients.values) + 1, dtype=float)
        return Profile(coordinates=n, values=np.abs(coefficients.values) ** 2, label="weight", coordinate_name="n")

    @staticmethod
    def long_time_position(entries: np.ndarray, basis: BouncerBasis) -> float:
        """sum_n rho_nn <u_n|z|u_n>, the gamma-independent limit of <z>."""
        return float(np.sum(np.real(np.diag(entries)) * basis.diagonal_position()))
