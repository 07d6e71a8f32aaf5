# decoherence_lab/plugins/ehrenfest_plugin.py

import logging
import math
from typing import List

import numpy as np

from ..config import ScenarioConfig
from ..errors import PeakHeightError
from ..evolution import evolve_eigenbasis
from ..models import EhrenfestKind, EhrenfestSpec, WavePacketSpec
from ..observables import ehrenfest_closed_forms, expectation_series, projectile_peak_height
from ..report_collector import RunReport
from ..spectra import build_harmonic_basis
from ..states import density_from_coefficients, position_amplitude, project_onto_basis
from ..utils import gamma_tag
from .base import ScenarioPlugin


class EhrenfestPlugin(ScenarioPlugin):
    """First moments under the first-order map: oscillator damping and projectile drift."""

    @property
    def name(self) -> str:
        return "ehrenfest"

    @property
    def description(self) -> str:
        return "<x>(t), <p>(t) for the harmonic oscillator (eigenbasis vs closed form) and uniform gravity."

    def default_times(self, config: ScenarioConfig):
        return np.linspace(0.0, 20.0, config.grids.time_points or 401)

    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        files = []
        if config.physics.omega is not None:
            files.extend(self._harmonic(config, output_dir, report, run_logger))
        if config.physics.g is not None:
            files.extend(self._gravity(config, output_dir, report, run_logger))
        return files

    def _harmonic(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        ph = config.physics
        mass = ph.mass or 1.0
        basis = build_harmonic_basis(ph.omega, config.grids.n_max, mass=mass, hbar=ph.hbar)
        # coherent state unless a width is given
        sigma0 = ph.sigma0 or basis.length_scale / math.sqrt(2.0)
        packet = WavePacketSpec(sigma0=sigma0, x0=ph.x0, p0=ph.p0, hbar=ph.hbar, mass=mass)
        coefficients = project_onto_basis(lambda x: position_amplitude(packet, x), basis)
        rho0 = density_from_coefficients(coefficients, basis)
        spec = EhrenfestSpec(kind=EhrenfestKind.HARMONIC, omega=ph.omega, mass=mass)
        times = self.times(config)
        report.add_summary("harmonic.coverage", coefficients.coverage)

        files = []
        for gamma_inv in config.gamma_inv_list:
            params = self.params(config, gamma_inv)
            tag = gamma_tag(gamma_inv)

            def rho_t(t, params=params):
                return evolve_eigenbasis(rho0, t, params)

            x_num = expectation_series(rho_t, basis.x_elements, times, label="x_mean").values
            p_num = expectation_series(rho_t, basis.p_elements, times, label="p_mean").values
            x_cf, p_cf = ehrenfest_closed_forms(spec, ph.x0, ph.p0, gamma_inv, times)
            deviation = float(max(np.max(np.abs(x_num - x_cf)), np.max(np.abs(p_num - p_cf))))
            report.add_summary(f"harmonic.{tag}.max_deviation", deviation)
            run_logger.info(f"EHRENFEST PLUGIN: harmonic gamma_inv={gamma_inv:g} max |numeric - closed form| = {deviation:.3e}")

            columns = {
                "t [hbar=m=1 units]": times,
                "x_numeric [length]": x_num,
                "x_closed_form [length]": x_cf,
                "p_numeric [momentum]": p_num,
                "p_closed_form [momentum]": p_cf,
            }
            files.append(self._write_columns(columns, output_dir, f"harmonic_moments_{tag}.csv", report))
        return files

    def _gravity(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        ph = config.physics
        mass = ph.mass or 1.0
        spec = EhrenfestSpec(kind=EhrenfestKind.GRAVITY, g=ph.g, mass=mass)
        times = self.times(config)

        files = []
        for gamma_inv in config.gamma_inv_list:
            tag = gamma_tag(gamma_inv)
            x, p = ehrenfest_closed_forms(spec, ph.x0, ph.p0, gamma_inv, times)
            columns = {"t [hbar=m=1 units]": times, "x [length]": x, "p [momentum]": p}
            files.append(self._write_columns(columns, output_dir, f"gravity_moments_{tag}.csv", report))
            try:
                height = projectile_peak_height(ph.p0, gamma_inv, mass, ph.g)
            except PeakHeightError as e:
                run_logger.warning(f"EHRENFEST PLUGIN: no peak for gamma_inv={gamma_inv:g}: {e}")
                continue
            report.add_summary(f"gravity.{tag}.peak_height", height)
        return files
