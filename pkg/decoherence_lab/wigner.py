# decoherence_lab/wigner.py

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from .errors import ObservableError, WignerResolutionError
from .models import Grid1D, MilburnParams, QuadratureRule
from .numerics import integrate_samples, quadrature_weights
from .states import DensityMatrix, position_density_matrix

logger = logging.getLogger(__name__)

# --- Configuration ---
IMAGINARY_TOLERANCE = 1e-8
WINDOW_EDGE_TOLERANCE = 1e-6
RESIDUAL_TOLERANCE = 5e-3
INTERIOR_MARGIN = 2


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    """W(R, u) sampled on R_grid x u_grid (rows R, columns u)."""
    R_grid: Grid1D
    u_grid: Grid1D
    values: np.ndarray
    hbar: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def normalization(self) -> float:
        return float(
            quadrature_weights(QuadratureRule(grid=self.R_grid))
            @ self.values
            @ quadrature_weights(QuadratureRule(grid=self.u_grid))
        )

    def position_marginal(self) -> np.ndarray:
        return integrate_samples(self.values, QuadratureRule(grid=self.u_grid), axis=1).real

    def momentum_marginal(self) -> np.ndarray:
        return integrate_samples(self.values, QuadratureRule(grid=self.R_grid), axis=0).real

    def momentum_mean(self) -> float:
        return float(integrate_samples(self.u_grid.points * self.momentum_marginal(), QuadratureRule(grid=self.u_grid)).real)


def wigner_transform(
    rho: DensityMatrix,
    R_grid: Grid1D,
    u_grid: Grid1D,
    t: float = 0.0,
    r_max: Optional[float] = None,
) -> PhaseSpaceField:
    """
    W(R, u) = (1/2 pi hbar) integral e^{-i u r / hbar} rho(R + r/2, R - r/2) dr.

    rho(x, x') is synthesized once on a uniform x lattice that contains every
    R +- r/2, so each row is a gather plus one matrix product.

    Args:
        rho: momentum-grid density matrix (already evolved to t).
        R_grid: odd-count grid of centre positions.
        u_grid: odd-count grid of momenta.
        t: time label stored in metadata.
        r_max: half-width of the r window; defaults to the R span.
    """
    hbar = rho.hbar
    u_abs = max(abs(u_grid.lower), abs(u_grid.upper), abs(rho.basis.grid.lower), abs(rho.basis.grid.upper))
    # lattice step h gives r spacing 2h, which must resolve e^{-iur/hbar}
    refine = max(1, math.ceil(R_grid.spacing * 2.0 * u_abs / (math.pi * hbar) * 2.0))
    h = R_grid.spacing / refine
    r_max = (R_grid.upper - R_grid.lower) if r_max is None else r_max
    half_steps = max(1, math.ceil(r_max / (2.0 * h)))

    x_count = (R_grid.count - 1) * refine + 1 + 2 * half_steps
    x = R_grid.lower - half_steps * h + h * np.arange(x_count)
    rho_x = position_density_matrix(rho, x)

    centres = half_steps + refine * np.arange(R_grid.count)
    offsets = np.arange(-half_steps, half_steps + 1)
    rho_rr = rho_x[centres[:, None] + offsets[None, :], centres[:, None] - offsets[None, :]]

    r = 2.0 * h * offsets
    r_weights = quadrature_weights(QuadratureRule(grid=Grid1D(lower=r[0], upper=r[-1], count=r.size)))
    kernel = r_weights[:, None] * np.exp(-1j * np.outer(r, u_grid.points) / hbar)
    W = rho_rr @ kernel / (2.0 * math.pi * hbar)

    scale = float(np.max(np.abs(W))) if W.size else 1.0
    residue = float(np.max(np.abs(W.imag))) if W.size else 0.0
    if residue > IMAGINARY_TOLERANCE * max(1.0, scale):
        raise ObservableError(f"Wigner transform has imaginary residue {residue:.3e}")

    edge = float(np.max(np.abs(rho_rr[:, [0, -1]])))
    if edge > WINDOW_EDGE_TOLERANCE * max(1e-300, float(np.max(np.abs(rho_rr)))):
        logger.warning(f"Wigner r-window +-{r[-1]:.4g} truncates coherences ({edge:.3e} at the edge)")

    return PhaseSpaceField(
        R_grid=R_grid,
        u_grid=u_grid,
        values=W.real,
        hbar=hbar,
        metadata={"t": t, "r_max": float(r[-1]), "lattice_step": h},
    )


def _central_differences(fields: Sequence[PhaseSpaceField], delta: float):
    if len(fields) != 3:
        raise ObservableError("Residuals need fields at t - delta, t, t + delta")
    before, now, after = (f.values for f in fields)
    dR, du = fields[1].R_grid.spacing, fields[1].u_grid.spacing
    W = now
    d = {"t": (after - before) / (2.0 * delta)}
    d["R"] = (W[2:, 1:-1] - W[:-2, 1:-1]) / (2.0 * dR)
    d["RR"] = (W[2:, 1:-1] - 2.0 * W[1:-1, 1:-1] + W[:-2, 1:-1]) / dR ** 2
    d["u"] = (W[1:-1, 2:] - W[1:-1, :-2]) / (2.0 * du)
    d["uu"] = (W[1:-1, 2:] - 2.0 * W[1:-1, 1:-1] + W[1:-1, :-2]) / du ** 2
    d["Ru"] = (W[2:, 2:] - W[2:, :-2] - W[:-2, 2:] + W[:-2, :-2]) / (4.0 * dR * du)
    d["t"] = d["t"][1:-1, 1:-1]
    return d


def _normalized_max(residual: np.ndarray, rate: np.ndarray, margin: int) -> float:
    inner = (slice(margin, -margin or None), slice(margin, -margin or None))
    scale = float(np.max(np.abs(rate[inner])))
    if scale == 0:
        raise WignerResolutionError("W does not change in time; residual is undefined")
    return float(np.max(np.abs(residual[inner]))) / scale


def linear_evolution_residual(
    fields: Sequence[PhaseSpaceField],
    c1: float,
    delta: float,
    params: MilburnParams,
    mass: float = 1.0,
    include_decoherence: bool = True,
    margin: int = INTERIOR_MARGIN,
) -> float:
    """
    Normalized interior maximum of

        dW/dt + (u/m) dW/dR - c1 dW/du
          - (1/gamma) [ (u^2/2m^2) d2W/dR2 - (c1/2m) dW/dR - c1 (u/m) d2W/dRdu + (c1^2/2) d2W/du2 ]

    by central differences at the middle field.
    """
    d = _central_differences(fields, delta)
    u = fields[1].u_grid.points[None, 1:-1]
    g = params.gamma_inv if include_decoherence else 0.0
    bracket = (
        u ** 2 / (2.0 * mass ** 2) * d["RR"]
        - c1 / (2.0 * mass) * d["R"]
        - c1 * u / mass * d["Ru"]
        + 0.5 * c1 ** 2 * d["uu"]
    )
    residual = d["t"] + u / mass * d["R"] - c1 * d["u"] - g * bracket
    return _normalized_max(residual, d["t"], margin)


def free_evolution_residual(
    fields: Sequence[PhaseSpaceField],
    delta: float,
    params: MilburnParams,
    mass: float = 1.0,
    include_decoherence: bool = True,
    margin: int = INTERIOR_MARGIN,
) -> float:
    """Residual of dW/dt + (u/m) dW/dR - (u^2/(2 m^2 gamma)) d2W/dR2 = 0."""
    return linear_evolution_residual(fields, 0.0, delta, params, mass, include_decoherence, margin)


def converged_residual(
    snapshot: Callable[[float], PhaseSpaceField],
    residual: Callable[[Sequence[PhaseSpaceField], float], float],
    t: float,
    delta: float,
    tolerance: float = RESIDUAL_TOLERANCE,
) -> float:
    """
    Residual at delta/2, after checking it improves on delta.

    Raises:
        WignerResolutionError: the refined residual is above tolerance and
            halving delta did not reduce it, so the phase-space grid is too coarse.
    """
    coarse = residual([snapshot(t - delta), snapshot(t), snapshot(t + delta)], delta)
    half = 0.5 * delta
    fine = residual([snapshot(t - half), snapshot(t), snapshot(t + half)], half)
    logger.debug(f"Wigner residual {coarse:.3e} at delta={delta:g}, {fine:.3e} at delta={half:g}")
    if fine > tolerance and fine > 0.5 * coarse:
        raise WignerResolutionError(
            f"Residual {fine:.3e} does not converge under delta halving ({coarse:.3e}); refine the R/u grids"
        )
    return fine
