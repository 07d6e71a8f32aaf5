# decoherence_lab/observables.py

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import BasisMismatchError, CurrentSignError, ObservableError, PeakHeightError
from .evolution import exact_map_modulus, free_energy_gaps, phase_factor_from_gap
from .models import (
    BarrierSpec,
    EhrenfestKind,
    EhrenfestSpec,
    Grid1D,
    MapOrder,
    MilburnParams,
    QuadratureKind,
    QuadratureRule,
    WavePacketSpec,
)
from .numerics import integrate_samples, quadrature_weights, rule_for
from .spectra import ScatteringBasis, SpectralBasis, barrier_eigenfunction, solve_barrier
from .states import (
    CoefficientVector,
    DensityMatrix,
    MomentumGridBasis,
    default_momentum_grid,
    gaussian_momentum_amplitude,
    initial_density_momentum,
)

logger = logging.getLogger(__name__)

# --- Configuration ---
DENSITY_FLOOR = -1e-6
REALITY_TOLERANCE = 1e-10
CURRENT_REALITY_TOLERANCE = 1e-9
SIGN_VIOLATION_LIMIT = 0.05
SIGN_VIOLATION_ABS_SWITCH = 1e-3
VISIBILITY_FLOOR = 1e-14
TAIL_WARNING_FRACTION = 0.01
REGION_GRID_POINTS = 201
COVERAGE_WARNING = 1e-4
ARRIVAL_TIME_POINTS = 2001
ARRIVAL_WINDOW = 10.0
ARRIVAL_HORIZON = 20.0
ARRIVAL_TAIL_POINTS = 1001
ENTROPY_SLOPE_WINDOW = 1e-3


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.shape != values.shape:
            raise ObservableError(f"TimeSeries '{self.label}': {times.size} times vs {values.size} values")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ObservableError(f"TimeSeries '{self.label}': times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True, eq=False)
class Profile:
    """Values sampled along a coordinate other than time (x, n, ...)."""
    coordinates: np.ndarray
    values: np.ndarray
    label: str
    coordinate_name: str = "x"
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class ArrivalStats:
    mean_t: float
    variance_t: float
    normalization: float
    detector_x: float
    current_sign_violation: float
    second_moment: float = 0.0
    density: Optional[TimeSeries] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.variance_t < 0:
            raise ObservableError(f"Negative arrival-time variance {self.variance_t:.3e}")


DensitySupplier = Callable[[float], DensityMatrix]


def _time_rule(times: np.ndarray) -> Optional[QuadratureRule]:
    """A uniform-grid rule for `times`, or None when the samples are not equally spaced."""
    if times.size < 2:
        return None
    grid = Grid1D(lower=float(times[0]), upper=float(times[-1]), count=times.size)
    if not np.allclose(times, grid.points, rtol=0, atol=1e-9 * max(1.0, abs(grid.upper))):
        return None
    return rule_for(grid)


def integrate_series(series: TimeSeries) -> float:
    rule = _time_rule(series.times)
    if rule is None:
        return float(np.sum(0.5 * (series.values[1:] + series.values[:-1]) * np.diff(series.times)))
    return float(integrate_samples(series.values, rule))


def _real_part(values: np.ndarray, tolerance: float, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > tolerance * scale:
        raise ObservableError(f"{what} has imaginary residue {residue:.3e}")
    return values.real


def _warn_negative(values: np.ndarray, what: str) -> None:
    if values.size and float(np.min(values)) < DENSITY_FLOOR:
        logger.warning(f"{what} reaches {float(np.min(values)):.3e}; basis truncation likely")


# --- Densities ---

def position_density_eigenbasis(rho: DensityMatrix, basis: SpectralBasis, x: np.ndarray) -> np.ndarray:
    """P(x) = sum_EE' rho_EE' u_E(x) conj(u_E'(x))."""
    if rho.is_momentum_grid:
        raise BasisMismatchError("position_density_eigenbasis needs an eigenbasis density matrix")
    modes = basis.evaluate(np.atleast_1d(np.asarray(x, dtype=float)))
    if modes.shape[0] != rho.dimension:
        raise BasisMismatchError(f"Basis has {modes.shape[0]} states, density has {rho.dimension}")
    density = _real_part(np.sum((rho.entries.T @ modes) * modes.conj(), axis=0), REALITY_TOLERANCE, "Density")
    _warn_negative(density, "Position density")
    return density


def _plane_waves(grid: Grid1D, hbar: float, x: np.ndarray) -> np.ndarray:
    basis = MomentumGridBasis(grid=grid)
    return basis.weights[None, :] * np.exp(1j * np.outer(np.atleast_1d(np.asarray(x, dtype=float)), grid.points) / hbar)


def _momentum_synthesis(entries: np.ndarray, grid: Grid1D, hbar: float, x: np.ndarray) -> np.ndarray:
    """(1/2 pi hbar) sum_pp' w w' e^{ipx/hbar} M_pp' e^{-ip'x/hbar} for each x."""
    plane = _plane_waves(grid, hbar, x)
    return np.sum((plane @ entries) * plane.conj(), axis=1) / (2.0 * math.pi * hbar)


def position_density_momentum(rho: DensityMatrix, x: np.ndarray) -> np.ndarray:
    """Diagonal rho(x, x) from the momentum representation."""
    if not rho.is_momentum_grid:
        raise BasisMismatchError("position_density_momentum needs a momentum-grid density matrix")
    density = _real_part(_momentum_synthesis(rho.entries, rho.basis.grid, rho.hbar, x), REALITY_TOLERANCE, "Density")
    _warn_negative(density, "Position density")
    return density


def _current_kernel(rho0: DensityMatrix, params: MilburnParams) -> np.ndarray:
    """(p + p')(1 - i (p^2 - p'^2)/(4 hbar m gamma)) rho0(p, p')."""
    p = rho0.basis.grid.points
    gaps = free_energy_gaps(rho0.basis.grid, rho0.mass)
    correction = 1.0 - 1j * params.gamma_inv * gaps / (2.0 * params.hbar)
    return (p[:, None] + p[None, :]) * correction * rho0.entries


def _check_current_inputs(rho: DensityMatrix, params: MilburnParams) -> None:
    if not rho.is_momentum_grid:
        raise BasisMismatchError("current_density needs a momentum-grid density matrix")
    if params.order is not MapOrder.FIRST_ORDER and not params.is_unitary:
        raise ObservableError("The probability current is only available for the first-order map")


def current_density(rho: DensityMatrix, x: np.ndarray, t: float, params: MilburnParams) -> np.ndarray:
    """
    Probability current J(x, t) of a free packet.

    Args:
        rho: the initial momentum-grid density matrix; it is propagated to t here.
        x: positions.
        t: time.
        params: first-order map parameters.

    Returns:
        Real J at each x.

    Raises:
        ObservableError: exact-map parameters or a non-real result.
    """
    _check_current_inputs(rho, params)
    factor = phase_factor_from_gap(free_energy_gaps(rho.basis.grid, rho.mass), t, params)
    kernel = _current_kernel(rho, params) * factor
    current = _momentum_synthesis(kernel, rho.basis.grid, rho.hbar, x) / (2.0 * rho.mass)
    return _real_part(current, CURRENT_REALITY_TOLERANCE, "Current")


def _detector_current_series(rho0: DensityMatrix, params: MilburnParams, detector_x: float, times: np.ndarray) -> np.ndarray:
    plane = _plane_waves(rho0.basis.grid, rho0.hbar, detector_x)[0]
    contracted = np.outer(plane, plane.conj()) * _current_kernel(rho0, params)
    gaps = free_energy_gaps(rho0.basis.grid, rho0.mass)
    prefactor = 1.0 / (4.0 * math.pi * rho0.mass * rho0.hbar)

    values = np.empty(times.size)
    uniform = _time_rule(times) is not None
    step = phase_factor_from_gap(gaps, float(times[1] - times[0]), params) if uniform and times.size > 1 else None
    factor = phase_factor_from_gap(gaps, float(times[0]), params)
    for i, t in enumerate(times):
        if i > 0:
            factor = factor * step if step is not None else phase_factor_from_gap(gaps, float(t), params)
        total = np.sum(contracted * factor) * prefactor
        values[i] = total.real
    return values


def _far_field_flux(spec: WavePacketSpec, detector_x: float, times: np.ndarray) -> np.ndarray:
    """Large-t arrival density (m d / t^2) |phi(m d / t)|^2, d the flight distance."""
    distance = detector_x - spec.x0
    momenta = spec.mass * distance / times
    return spec.mass * distance / times ** 2 * np.abs(gaussian_momentum_amplitude(spec, momenta)) ** 2


def _arrival_tails(spec: WavePacketSpec, detector_x: float, t_max: float, horizon: float) -> Tuple[float, float, float]:
    """Far-field contributions beyond t_max to the zeroth, first and second moments."""
    # momenta in (0, m d / t_max) arrive after t_max
    p_edge = spec.mass * (detector_x - spec.x0) / t_max
    width = spec.momentum_width
    norm_tail = float(stats.norm.cdf(p_edge, spec.p0, width) - stats.norm.cdf(0.0, spec.p0, width))
    if horizon <= t_max:
        return norm_tail, 0.0, 0.0
    rule = rule_for(Grid1D(lower=t_max, upper=horizon, count=ARRIVAL_TAIL_POINTS))
    t = rule.grid.points
    flux = _far_field_flux(spec, detector_x, t)
    return norm_tail, float(integrate_samples(flux * t, rule)), float(integrate_samples(flux * t ** 2, rule))


def arrival_statistics(
    spec: WavePacketSpec,
    params: MilburnParams,
    detector_x: float = 0.0,
    t_max: Optional[float] = None,
    grid: Optional[Grid1D] = None,
    time_points: int = ARRIVAL_TIME_POINTS,
    with_reference: bool = True,
) -> ArrivalStats:
    """
    Arrival-time moments from the probability current at the detector.

    Integrates J(detector_x, t) on [0, t_max] (default ARRIVAL_WINDOW classical
    arrival times) with Simpson's rule. Beyond t_max the density is the
    far-field flux of the momentum distribution: the normalization tail runs
    to infinity, the first and second moments stop at ARRIVAL_HORIZON classical
    times. A packet with weight at p = 0 has <t> and <t^2> that grow with the
    horizon; their gamma shifts do not. For gamma_inv > 0 the unitary moments
    are computed too and the first-order predictions are attached to metadata.

    Raises:
        CurrentSignError: if more than 5% of the current is negative.
    """
    _check_arrival_geometry(spec, detector_x)
    classical = spec.mass * (detector_x - spec.x0) / spec.p0
    t_max = ARRIVAL_WINDOW * classical if t_max is None else t_max
    horizon = max(ARRIVAL_HORIZON * classical, t_max)
    grid = grid or default_momentum_grid(spec)
    times = np.linspace(0.0, t_max, time_points)
    rho0 = initial_density_momentum(spec, grid)
    _check_current_inputs(rho0, params)

    current = _detector_current_series(rho0, params, detector_x, times)
    total = float(np.sum(np.abs(current)))
    violation = float(np.sum(np.abs(np.minimum(current, 0.0)))) / total if total > 0 else 0.0
    if violation > SIGN_VIOLATION_LIMIT:
        raise CurrentSignError(f"Current at x={detector_x} is negative for {violation:.1%} of its weight")
    flux = current
    if violation >= SIGN_VIOLATION_ABS_SWITCH:
        logger.warning(f"Current sign violation {violation:.2e}; using |J| as the arrival density")
        flux = np.abs(current)

    rule = rule_for(Grid1D(lower=0.0, upper=t_max, count=time_points))
    moments = [float(integrate_samples(flux * times ** k, rule)) for k in range(3)]
    tails = _arrival_tails(spec, detector_x, t_max, horizon)
    n0, n1, n2 = (m + tail for m, tail in zip(moments, tails))
    if n0 <= 0:
        raise ObservableError("Arrival density has no positive weight")
    mean = n1 / n0
    second = n2 / n0
    variance = second - mean ** 2
    tail_fraction = tails[0] / n0
    if tail_fraction > TAIL_WARNING_FRACTION:
        logger.warning(f"Arrival tail beyond t_max holds {tail_fraction:.2%} of the flux")
    far_field_edge = float(_far_field_flux(spec, detector_x, np.array([t_max]))[0])

    metadata: Dict[str, Any] = {
        "t_max": t_max,
        "horizon": horizon,
        "tail_edge_ratio": float(flux[-1]) / far_field_edge if far_field_edge > 0 else float("nan"),
        "time_points": time_points,
        "tail_normalization": tails[0],
        "tail_first_moment": tails[1],
        "tail_second_moment": tails[2],
        "tail_fraction": tail_fraction,
    }
    if with_reference and not params.is_unitary:
        ref = arrival_statistics(
            spec, params.model_copy(update={"gamma_inv": 0.0}), detector_x, t_max, grid, time_points, False
        )
        g = params.gamma_inv
        metadata.update(
            {
                "mean_t_unitary": ref.mean_t,
                "variance_t_unitary": ref.variance_t,
                "second_moment_unitary": ref.second_moment,
                "predicted_mean_t": ref.mean_t + 0.5 * g,
                "predicted_second_moment": ref.second_moment + 2.0 * ref.mean_t * g,
                "predicted_variance_t": ref.variance_t + 2.0 * ref.mean_t * g,
                "expanded_variance_t": ref.variance_t + ref.mean_t * g,
                "mean_shift": mean - ref.mean_t,
                "second_moment_shift": second - ref.second_moment,
                "variance_shift": variance - ref.variance_t,
            }
        )

    density = TimeSeries(times=times, values=flux / n0, label="arrival_density", metadata={"detector_x": detector_x})
    return ArrivalStats(
        mean_t=mean,
        variance_t=variance,
        normalization=n0,
        detector_x=detector_x,
        current_sign_violation=violation,
        second_moment=second,
        density=density,
        metadata=metadata,
    )


def _check_arrival_geometry(spec: WavePacketSpec, detector_x: float) -> None:
    if spec.p0 <= 0 or detector_x <= spec.x0:
        raise ObservableError("Arrival statistics need a packet moving toward a detector on its right")
    if spec.p0 < 4.0 * spec.momentum_width:
        logger.warning(f"Packet p0={spec.p0} carries noticeable negative-momentum weight")


# --- Entropy ---

def linear_entropy(rho: DensityMatrix) -> float:
    """S_L = 1 - tr(rho^2), quadrature-weighted for momentum grids."""
    return 1.0 - rho.purity()


def _eigen_gaps(rho0: DensityMatrix) -> np.ndarray:
    if rho0.is_momentum_grid:
        raise BasisMismatchError("Entropy series need an eigenbasis density matrix")
    energies = rho0.basis.energies
    return energies[:, None] - energies[None, :]


def _exact_entropy(weights: np.ndarray, gaps: np.ndarray, t: float, params: MilburnParams) -> float:
    return 1.0 - float(np.sum(weights * exact_map_modulus(gaps, t, params) ** 2))


def entropy_series_exact(rho0: DensityMatrix, params: MilburnParams, times: Sequence[float]) -> TimeSeries:
    """
    S_L(t) = 1 - sum |rho_EE'(0)|^2 exp[-4 gamma t sin^2((E - E')/(2 hbar gamma))].

    metadata carries the predicted initial slope and the finite-difference one.
    """
    if params.order is not MapOrder.EXACT:
        raise ObservableError("entropy_series_exact needs the exact map")
    gaps = _eigen_gaps(rho0)
    weights = np.abs(rho0.entries) ** 2
    times = np.asarray(times, dtype=float)
    values = np.array([_exact_entropy(weights, gaps, float(t), params) for t in times])

    if params.is_unitary:
        predicted = 0.0
    else:
        g = params.gamma_inv
        predicted = float(4.0 / g * np.sum(weights * np.sin(gaps * g / (2.0 * params.hbar)) ** 2))
    fitted = (
        _exact_entropy(weights, gaps, ENTROPY_SLOPE_WINDOW, params) - _exact_entropy(weights, gaps, 0.0, params)
    ) / ENTROPY_SLOPE_WINDOW
    return TimeSeries(
        times=times,
        values=values,
        label="entropy_exact",
        metadata={"predicted_initial_slope": predicted, "fitted_initial_slope": fitted},
    )


def entropy_series_first_order(rho0: DensityMatrix, params: MilburnParams, times: Sequence[float]) -> TimeSeries:
    """S_L(t) = 1 - sum |rho_EE'(0)|^2 exp[-(E - E')^2 t / (hbar^2 gamma)]."""
    gaps = _eigen_gaps(rho0)
    weights = np.abs(rho0.entries) ** 2
    times = np.asarray(times, dtype=float)
    rate = gaps ** 2 * params.gamma_inv / params.hbar ** 2
    values = np.array([1.0 - float(np.sum(weights * np.exp(-rate * t))) for t in times])
    return TimeSeries(times=times, values=values, label="entropy_first_order")


def entropy_first_order_slope(rho0: DensityMatrix, params: MilburnParams) -> Tuple[float, float]:
    """
    Leading-order entropy growth rate, two ways.

    Returns:
        (expansion slope, commutator slope): (1/(gamma hbar^2)) sum |rho_EE'|^2 (E - E')^2,
        and (1/(gamma hbar^2)) tr([H, rho]^2), which is its negative.
    """
    gaps = _eigen_gaps(rho0)
    scale = params.gamma_inv / params.hbar ** 2
    expansion = scale * float(np.sum(np.abs(rho0.entries) ** 2 * gaps ** 2))
    H = np.diag(rho0.basis.energies)
    comm = H @ rho0.entries - rho0.entries @ H
    commutator = scale * float(np.real(np.trace(comm @ comm)))
    return expansion, commutator


# --- Interference ---

def visibility(
    parts: Dict[str, np.ndarray],
    grid: Grid1D,
    x: np.ndarray,
    t0: float,
    params: MilburnParams,
    hbar: float = 1.0,
    mass: float = 1.0,
) -> Profile:
    """
    V(x) = |P_ab| / sqrt(P_aa P_bb) with each component density evolved to t0.

    Points where P_aa or P_bb drop below 1e-14 are left out of the profile.
    """
    gaps = free_energy_gaps(grid, mass)
    factor = phase_factor_from_gap(gaps, t0, params)
    x = np.asarray(x, dtype=float)
    p_aa = _momentum_synthesis(parts["aa"] * factor, grid, hbar, x).real
    p_bb = _momentum_synthesis(parts["bb"] * factor, grid, hbar, x).real
    p_ab = _momentum_synthesis(parts["ab"] * factor, grid, hbar, x)

    defined = (p_aa > VISIBILITY_FLOOR) & (p_bb > VISIBILITY_FLOOR)
    if not np.all(defined):
        logger.debug(f"Visibility undefined at {int(np.sum(~defined))} of {x.size} points")
    values = np.abs(p_ab[defined]) / np.sqrt(p_aa[defined] * p_bb[defined])
    return Profile(coordinates=x[defined], values=values, label="visibility", metadata={"t0": t0})


# --- Barrier scattering ---

def region_overlap_matrix(basis: ScatteringBasis, a: float, b: float, count: int = REGION_GRID_POINTS) -> np.ndarray:
    """
    G_ij = integral_a^b u_i(x) conj(u_j(x)) dx over the weighted modes of basis.evaluate.

    Regions inside the transmitted side (a >= L) are done in closed form;
    anything else by Simpson quadrature.
    """
    if b <= a:
        raise ObservableError(f"Empty region [{a}, {b}]")
    L = basis.barrier.L
    if a >= L:
        k = basis.k
        T = basis.transmission
        dk = k[:, None] - k[None, :]
        z = dk * (b - a)
        integral = (b - a) * np.exp(1j * dk * a) * np.exp(0.5j * z) * np.sinc(z / (2.0 * math.pi))
        amplitude = np.sqrt(basis.weights) * T
        return np.outer(amplitude, amplitude.conj()) * integral / (2.0 * math.pi)
    rule = QuadratureRule(grid=Grid1D(lower=a, upper=b, count=count), kind=QuadratureKind.SIMPSON)
    modes = basis.evaluate(rule.grid.points)
    return (modes * quadrature_weights(rule)[None, :]) @ modes.conj().T


def region_probability_series(rho_t: DensitySupplier, overlap: np.ndarray, times: Sequence[float], label: str) -> TimeSeries:
    times = np.asarray(times, dtype=float)
    values = np.empty(times.size)
    for i, t in enumerate(times):
        values[i] = float(np.real(np.sum(rho_t(float(t)).entries * overlap)))
    if values.size and (values.min() < -1e-6 or values.max() > 1 + 1e-6):
        logger.warning(f"{label} leaves [0, 1]: range [{values.min():.3e}, {values.max():.6f}]")
    return TimeSeries(times=times, values=values, label=label)


def transmission_cutoff(spec: WavePacketSpec, barrier: BarrierSpec, t_max: float, params: MilburnParams, k_grid: Grid1D) -> float:
    """
    x_max = L + (p0/m) t_max + 8 sigma(t_max), with the decoherence spread
    folded into sigma, kept below the periodic image of the k synthesis.
    """
    velocity = spec.p0 / spec.mass
    spread = spec.width_at(t_max) ** 2
    decoherence = velocity ** 2 * t_max * params.gamma_inv
    sigma = math.sqrt(spread + decoherence)
    x_max = barrier.L + velocity * t_max + 8.0 * sigma
    period = 2.0 * math.pi / k_grid.spacing
    ceiling = spec.x0 + 0.9 * period
    if x_max > ceiling:
        logger.warning(f"Transmission window capped at {ceiling:.4g} by the k-grid period {period:.4g}")
        x_max = ceiling
    return x_max


def transmission_series(
    rho_t: DensitySupplier,
    basis: ScatteringBasis,
    times: Sequence[float],
    x_max: float,
) -> TimeSeries:
    """
    P_tr(t) = integral_L^x_max rho(x, x, t) dx.

    A warning is logged when widening the window by half changes the final
    value by more than 1e-4.
    """
    L = basis.barrier.L
    if x_max <= L:
        raise ObservableError(f"x_max={x_max} must lie beyond the barrier end L={L}")
    series = region_probability_series(rho_t, region_overlap_matrix(basis, L, x_max), times, "transmission")
    if len(series):
        wider = L + 1.5 * (x_max - L)
        final = float(np.real(np.sum(rho_t(float(series.times[-1])).entries * region_overlap_matrix(basis, L, wider))))
        if abs(final - series.values[-1]) > COVERAGE_WARNING:
            logger.warning(
                f"Transmitted mass beyond x_max={x_max:.4g} is {final - series.values[-1]:.3e} at t={series.times[-1]:.4g}"
            )
    series.metadata["x_max"] = x_max
    return series


def dwell_statistics(
    rho_t: DensitySupplier, basis: ScatteringBasis, times: Sequence[float]
) -> Tuple[TimeSeries, float]:
    """
    P_D(t) = integral_0^L rho(x, x, t) dx and tau_D = integral_0^inf P_D dt,
    closing the time integral with an exponential tail fitted to the last
    tenth of the samples.
    """
    series = region_probability_series(rho_t, region_overlap_matrix(basis, 0.0, basis.barrier.L), times, "dwell_probability")
    body = integrate_series(series)

    tail = 0.0
    n = len(series)
    if n >= 10:
        start = n - max(2, n // 10)
        p_start, p_end = series.values[start], series.values[-1]
        span = series.times[-1] - series.times[start]
        if p_end > 0 and p_start > p_end and span > 0:
            rate = math.log(p_start / p_end) / span
            tail = p_end / rate
        elif p_end > 1e-12:
            logger.warning(f"Dwell probability is not decaying at t={series.times[-1]:.4g}")
    tau = body + tail
    if tau > 0 and tail > TAIL_WARNING_FRACTION * tau:
        logger.warning(f"Dwell-time tail estimate is {tail / tau:.2%} of tau_D")
    series.metadata.update({"tau_dwell": tau, "tail": tail})
    return series, tau


def monochromatic_dwell_time(k: float, barrier: BarrierSpec, count: int = REGION_GRID_POINTS) -> float:
    """tau_D(k) = (2 pi m / (hbar k)) integral_0^L |u_k(x)|^2 dx."""
    state = solve_barrier(k, barrier)
    rule = QuadratureRule(grid=Grid1D(lower=0.0, upper=barrier.L, count=count))
    inside = float(integrate_samples(np.abs(barrier_eigenfunction(state, rule.grid.points)) ** 2, rule).real)
    return 2.0 * math.pi * barrier.mass / (barrier.hbar * k) * inside


def monochromatic_dwell_average(spec: WavePacketSpec, basis: ScatteringBasis) -> float:
    """Packet-averaged tau_D = sum_k rho_kk tau_D(k)."""
    weights = np.abs(basis.packet_coefficients(spec).values) ** 2
    times = np.array([monochromatic_dwell_time(k, basis.barrier) for k in basis.k])
    return float(np.sum(weights * times) / np.sum(weights))


def stationary_transmission(spec: WavePacketSpec, basis: ScatteringBasis) -> float:
    """P_tr(inf) = integral dk |phi(k)|^2 |T(k)|^2, the gamma-independent limit."""
    weights = np.abs(basis.packet_coefficients(spec).values) ** 2
    return float(np.sum(weights * np.abs(basis.transmission) ** 2))


def scattering_density_series(
    rho_t: DensitySupplier, basis: SpectralBasis, x: np.ndarray, times: Sequence[float]
) -> Dict[float, Profile]:
    """Position density snapshots rho(x, x, t)."""
    return {
        float(t): Profile(
            coordinates=np.asarray(x, dtype=float),
            values=position_density_eigenbasis(rho_t(float(t)), basis, x),
            label="density",
            metadata={"t": float(t)},
        )
        for t in times
    }


# --- Expectation values ---

def expectation_series(rho_t: DensitySupplier, operator: np.ndarray, times: Sequence[float], label: str = "expectation") -> TimeSeries:
    """<A>(t) = tr(rho(t) A)."""
    times = np.asarray(times, dtype=float)
    operator = np.asarray(operator, dtype=complex)
    values = np.empty(times.size)
    for i, t in enumerate(times):
        rho = rho_t(float(t))
        if operator.shape != rho.entries.shape:
            raise BasisMismatchError(f"Operator {operator.shape} vs density {rho.entries.shape}")
        value = np.sum(rho.entries * operator.T)
        if abs(value.imag) > CURRENT_REALITY_TOLERANCE * max(1.0, abs(value)):
            raise ObservableError(f"<{label}> has imaginary part {value.imag:.3e} at t={t}")
        values[i] = value.real
    return TimeSeries(times=times, values=values, label=label)


def long_time_density(coefficients: CoefficientVector, basis: SpectralBasis, x: np.ndarray) -> np.ndarray:
    """sum_E |C_E|^2 |u_E(x)|^2."""
    modes = basis.evaluate(np.asarray(x, dtype=float))
    return (np.abs(coefficients.values) ** 2) @ (np.abs(modes) ** 2)


def oscillation_amplitude(series: TimeSeries, t_center: float, window: float) -> float:
    """max - min of the series inside [t_center - window/2, t_center + window/2]."""
    inside = np.abs(series.times - t_center) <= 0.5 * window
    if not np.any(inside):
        raise ObservableError(f"No samples of '{series.label}' within {window} of t={t_center}")
    chunk = series.values[inside]
    return float(chunk.max() - chunk.min())


# --- Ehrenfest closed forms ---

def ehrenfest_closed_forms(spec: EhrenfestSpec, x0: float, p0: float, gamma_inv: float, t: np.ndarray):
    """
    First moments (<x>, <p>) under the first-order map.

    free:     x0 + p0 t / m,                                 p0
    gravity:  x0 + (p0/m - g/(2 gamma)) t - g t^2 / 2,         p0 - m g t
    harmonic: e^{-w^2 t/(2 gamma)} (x0 cos wt + p0/(m w) sin wt),
              e^{-w^2 t/(2 gamma)} (p0 cos wt - m w x0 sin wt)
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ObservableError("Closed forms are defined for t >= 0")
    m = spec.mass
    if spec.kind is EhrenfestKind.FREE:
        return x0 + p0 * t / m, np.full_like(t, p0)
    if spec.kind is EhrenfestKind.GRAVITY:
        g = spec.g
        return x0 + (p0 / m - 0.5 * g * gamma_inv) * t - 0.5 * g * t ** 2, p0 - m * g * t
    w = spec.omega
    damping = np.exp(-0.5 * w ** 2 * gamma_inv * t)
    c, s = np.cos(w * t), np.sin(w * t)
    return damping * (x0 * c + p0 / (m * w) * s), damping * (p0 * c - m * w * x0 * s)


def ehrenfest_rates(spec: EhrenfestSpec, x_mean, p_mean, gamma_inv: float):
    """Right-hand sides (d<x>/dt, d<p>/dt) of the first-order moment equations."""
    m = spec.mass
    if spec.kind is EhrenfestKind.FREE:
        return p_mean / m, np.zeros_like(np.asarray(p_mean, dtype=float))
    if spec.kind is EhrenfestKind.GRAVITY:
        return p_mean / m - 0.5 * spec.g * gamma_inv, np.full_like(np.asarray(p_mean, dtype=float), -m * spec.g)
    a = 0.5 * spec.omega ** 2 * gamma_inv
    return p_mean / m - a * x_mean, -m * spec.omega ** 2 * x_mean - a * p_mean


def projectile_peak_height(p0: float, gamma_inv: float, mass: float, g: float) -> float:
    """
    Rise of <x> above its start, (p0^2 / (2 m^2 g)) (1 - m g / (gamma p0)).

    Raises:
        PeakHeightError: unless p0 > m g / gamma.
    """
    threshold = mass * g * gamma_inv
    if not p0 > threshold:
        raise PeakHeightError(f"Initial momentum {p0} does not exceed m g / gamma = {threshold}")
    return p0 ** 2 / (2.0 * mass ** 2 * g) * (1.0 - threshold / p0)
