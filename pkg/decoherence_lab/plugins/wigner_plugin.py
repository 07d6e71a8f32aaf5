# decoherence_lab/plugins/wigner_plugin.py

import logging
import math
from typing import Callable, List

from ..config import ScenarioConfig
from ..evolution import evolve_free_momentum, evolve_linear_momentum
from ..models import Grid1D, LinearPotentialSpec, MilburnParams, WavePacketSpec
from ..report_collector import RunReport
from ..states import DensityMatrix, initial_density_momentum
from ..utils import Timer, gamma_tag, time_tag
from ..wigner import RESIDUAL_TOLERANCE, PhaseSpaceField, converged_residual, linear_evolution_residual, wigner_transform
from .base import ScenarioPlugin

RESIDUAL_DELTA = 0.02
WINDOW_WIDTHS = 6.0


class WignerPlugin(ScenarioPlugin):
    """Phase-space snapshots and residual checks of the decoherence-corrected Wigner equation."""

    @property
    def name(self) -> str:
        return "wigner"

    @property
    def description(self) -> str:
        return "W(R, u, t) snapshots for a Gaussian packet, free or in V = c1 x, with evolution-equation residuals."

    def default_times(self, config: ScenarioConfig):
        return [0.0, 1.0, 2.0, 4.0]

    def execute(self, config: ScenarioConfig, output_dir: str, report: RunReport, run_logger: logging.Logger) -> List[str]:
        ph = config.physics
        mass = ph.mass or 1.0
        packet = WavePacketSpec(sigma0=ph.sigma0, x0=ph.x0, p0=ph.p0, hbar=ph.hbar, mass=mass)
        potential = LinearPotentialSpec(c1=ph.c1 or 0.0, mass=mass, hbar=ph.hbar)
        times = self.times(config)
        grid = self._momentum_grid(packet, potential, float(times.max()) + RESIDUAL_DELTA, config.grids.momentum_points)
        rho0 = initial_density_momentum(packet, grid)
        positive = times[times > RESIDUAL_DELTA]
        t_check = float(positive[len(positive) // 2]) if positive.size else 1.0

        files = []
        for gamma_inv in config.gamma_inv_list:
            params = self.params(config, gamma_inv)
            tag = gamma_tag(gamma_inv)
            evolve = self._evolver(packet, rho0, grid, potential, params)

            for t in times:
                field = self._snapshot(evolve, packet, potential, float(t), float(t), params, config)
                files.append(self._write(field, output_dir, f"wigner_{tag}_{time_tag(t)}.csv", report, "W"))
                report.add_summary(f"{tag}.{time_tag(t)}.normalization", field.normalization())
                report.add_summary(f"{tag}.{time_tag(t)}.min_W", float(field.values.min()))

            def snapshot(t, params=params, evolve=evolve):
                return self._snapshot(evolve, packet, potential, t, t_check, params, config)

            with Timer(run_logger, f"wigner residual {tag}"):
                residual = self._residual(snapshot, potential, params, t_check, include_decoherence=True)
                ablated = self._residual(snapshot, potential, params, t_check, include_decoherence=False)
            report.add_summary(f"{tag}.residual_t{t_check:g}", residual)
            report.add_summary(f"{tag}.residual_without_decoherence", ablated)

            before, after = snapshot(t_check - RESIDUAL_DELTA), snapshot(t_check + RESIDUAL_DELTA)
            force = (after.momentum_mean() - before.momentum_mean()) / (2.0 * RESIDUAL_DELTA)
            report.add_summary(f"{tag}.momentum_rate", force)
            run_logger.info(
                f"WIGNER PLUGIN: gamma_inv={gamma_inv:g} residual={residual:.3e} "
                f"(without decoherence {ablated:.3e}), d<u>/dt={force:.5f} vs -c1={-potential.c1:g}"
            )
        return files

    @staticmethod
    def _residual(snapshot, potential: LinearPotentialSpec, params, t, include_decoherence) -> float:
        def residual(fields, delta):
            return linear_evolution_residual(fields, potential.c1, delta, params, potential.mass, include_decoherence)

        # without the decoherence terms the residual is expected to stay large
        tolerance = RESIDUAL_TOLERANCE if include_decoherence else math.inf
        return converged_residual(snapshot, residual, t, RESIDUAL_DELTA, tolerance=tolerance)

    @staticmethod
    def _momentum_grid(packet: WavePacketSpec, potential: LinearPotentialSpec, t_max: float, count: int) -> Grid1D:
        spread = 8.0 * packet.momentum_width
        low, high = sorted((packet.p0, potential.mean_momentum(packet.p0, t_max)))
        return Grid1D(lower=low - spread, upper=high + spread, count=count)

    @staticmethod
    def _evolver(
        packet: WavePacketSpec,
        rho0: DensityMatrix,
        grid: Grid1D,
        potential: LinearPotentialSpec,
        params: MilburnParams,
    ) -> Callable[[float], DensityMatrix]:
        if potential.is_free:
            return lambda t: evolve_free_momentum(rho0, t, params)
        return lambda t: evolve_linear_momentum(packet, grid, t, params, potential.c1)

    @staticmethod
    def _snapshot(
        evolve,
        packet: WavePacketSpec,
        potential: LinearPotentialSpec,
        t: float,
        t_window: float,
        params: MilburnParams,
        config: ScenarioConfig,
    ) -> PhaseSpaceField:
        """W at time t on the window that follows the packet at t_window."""
        g = params.gamma_inv
        u_centre = potential.mean_momentum(packet.p0, t_window)
        velocity = u_centre / potential.mass
        x_width = math.sqrt(packet.width_at(t_window) ** 2 + velocity ** 2 * t_window * g)
        u_width = math.sqrt(packet.momentum_width ** 2 + potential.c1 ** 2 * t_window * g)
        R_grid = Grid1D.centered(
            potential.mean_position(packet.x0, packet.p0, t_window), WINDOW_WIDTHS * x_width, config.grids.R_points
        )
        u_grid = Grid1D.centered(u_centre, WINDOW_WIDTHS * u_width, config.grids.u_points)
        return wigner_transform(evolve(t), R_grid, u_grid, t=t)
