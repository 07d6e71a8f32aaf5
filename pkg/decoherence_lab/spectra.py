# decoherence_lab/spectra.py

import logging
import math
from dataclasses import dataclass, field
from typing import List, Protocol

import numpy as np
from scipy import special

from .errors import ScatteringError
from .models import BarrierSpec, Grid1D, QuadratureKind, QuadratureRule, WavePacketSpec
from .numerics import AIRY_WINDOW, airy_ai_prime, airy_roots, hermite_functions, integrate_samples, quadrature_weights
from .states import CoefficientVector, gaussian_momentum_amplitude

logger = logging.getLogger(__name__)

# --- Configuration ---
FLUX_TOLERANCE = 1e-10
MATCHING_CONDITION_LIMIT = 1e12
CRITICAL_ENERGY_TOLERANCE = 1e-12
BOUNCER_TAIL_MARGIN = 10.0
BOUNCER_GRID_POINTS = 4001
BOUNCER_NORM_TOLERANCE = 1e-7
BOUNCER_TAIL_TOLERANCE = 1e-8
SCATTERING_GRID_POINTS = 400
SCATTERING_HALF_WIDTH = 8.0


class SpectralBasis(Protocol):
    """Anything a state can be expanded in: labelled energies plus mode functions."""
    label: str
    hbar: float
    mass: float

    @property
    def energies(self) -> np.ndarray: ...

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Mode functions at x, shape (n_states, len(x))."""
        ...

    def default_grid(self, count: int = ...) -> Grid1D: ...


# --- Rectangular barrier ---

@dataclass(frozen=True)
class ScatteringState:
    """
    Left-incident stationary state of the rectangular barrier:

        u_k(x) = (e^{ikx} + R e^{-ikx}) / sqrt(2 pi)     x < 0
                 (A f(x) + B g(x)) / sqrt(2 pi)           0 <= x <= L
                 T e^{ikx} / sqrt(2 pi)                   x > L

    inside_kind selects f, g: evanescent {e^{kx}, e^{-kx}}, oscillatory
    {cos qx, sin qx}, or critical {1, x} at E = V0.
    """
    k: float
    R: complex
    T: complex
    A: complex
    B: complex
    inside_kind: str
    inside_wavenumber: float
    barrier: BarrierSpec

    @property
    def energy(self) -> float:
        return (self.barrier.hbar * self.k) ** 2 / (2.0 * self.barrier.mass)

    def interface_mismatch(self) -> float:
        """Largest value or derivative jump across x = 0 and x = L."""
        jumps = []
        L = self.barrier.L
        left = _plane_wave_matrix(self.k, 0.0) @ np.array([1.0, self.R])
        inside_0 = _interior_matrix(self.inside_kind, self.inside_wavenumber, 0.0) @ np.array([self.A, self.B])
        inside_L = _interior_matrix(self.inside_kind, self.inside_wavenumber, L) @ np.array([self.A, self.B])
        right = _plane_wave_matrix(self.k, L) @ np.array([self.T, 0.0])
        jumps.extend(np.abs(left - inside_0))
        jumps.extend(np.abs(inside_L - right))
        return float(max(jumps)) / math.sqrt(2.0 * math.pi)


def _plane_wave_matrix(k: float, x: float) -> np.ndarray:
    e = np.exp(1j * k * x)
    return np.array([[e, 1.0 / e], [1j * k * e, -1j * k / e]], dtype=complex)


def _interior_matrix(kind: str, s: float, x: float) -> np.ndarray:
    if kind == "evanescent":
        ep, em = math.exp(s * x), math.exp(-s * x)
        return np.array([[ep, em], [s * ep, -s * em]], dtype=complex)
    if kind == "oscillatory":
        c, sn = math.cos(s * x), math.sin(s * x)
        return np.array([[c, sn], [-s * sn, s * c]], dtype=complex)
    return np.array([[1.0, x], [0.0, 1.0]], dtype=complex)


def _solve_matching(matrix: np.ndarray, rhs: np.ndarray, k: float) -> np.ndarray:
    if np.linalg.cond(matrix) > MATCHING_CONDITION_LIMIT:
        raise ScatteringError(f"Interface matching matrix is numerically singular at k={k:.6g}")
    return np.linalg.solve(matrix, rhs)


def solve_barrier(k: float, barrier: BarrierSpec) -> ScatteringState:
    """
    Matches plane waves to the interior solution at x = 0 and x = L.

    Args:
        k: incident wavenumber, > 0.
        barrier: height, width and units.

    Returns:
        The ScatteringState with R, T, A, B filled in.

    Raises:
        ScatteringError: for k <= 0 or a singular matching system.
    """
    if not k > 0:
        raise ScatteringError(f"Wavenumber must be positive, got {k}")
    hbar, m, V0, L = barrier.hbar, barrier.mass, barrier.V0, barrier.L
    E = (hbar * k) ** 2 / (2.0 * m)
    kappa_sq = 2.0 * m * (V0 - E) / hbar ** 2
    scale = 2.0 * m * V0 / hbar ** 2

    if abs(kappa_sq) <= CRITICAL_ENERGY_TOLERANCE * max(1.0, scale):
        kind, s = "critical", 0.0
    elif kappa_sq > 0:
        kind, s = "evanescent", math.sqrt(kappa_sq)
    else:
        kind, s = "oscillatory", math.sqrt(-kappa_sq)

    inside_0 = _interior_matrix(kind, s, 0.0)
    inside_L = _interior_matrix(kind, s, L)
    left_0 = _plane_wave_matrix(k, 0.0)
    right_L = _plane_wave_matrix(k, L)

    # M maps left amplitudes (1, R) onto right amplitudes (T, 0)
    to_inside = _solve_matching(inside_0, left_0, k)
    transfer = _solve_matching(right_L, inside_L @ to_inside, k)
    if abs(transfer[1, 1]) < 1e-300:
        raise ScatteringError(f"Transfer matrix is degenerate at k={k:.6g}")
    R = -transfer[1, 0] / transfer[1, 1]
    T = transfer[0, 0] + transfer[0, 1] * R
    A, B = to_inside @ np.array([1.0, R])

    state = ScatteringState(
        k=float(k), R=complex(R), T=complex(T), A=complex(A), B=complex(B),
        inside_kind=kind, inside_wavenumber=s, barrier=barrier,
    )
    flux = abs(R) ** 2 + abs(T) ** 2
    if abs(flux - 1.0) > FLUX_TOLERANCE:
        logger.warning(f"Flux not conserved at k={k:.6g}: |R|^2+|T|^2 = {flux:.12f}")
    return state


def barrier_eigenfunction(state: ScatteringState, x: np.ndarray) -> np.ndarray:
    """Piecewise u_k(x); vectorized over x."""
    x = np.asarray(x, dtype=float)
    k, L, s = state.k, state.barrier.L, state.inside_wavenumber
    out = np.empty(x.shape, dtype=complex)

    left = x < 0
    right = x > L
    inside = ~(left | right)
    out[left] = np.exp(1j * k * x[left]) + state.R * np.exp(-1j * k * x[left])
    out[right] = state.T * np.exp(1j * k * x[right])
    xi = x[inside]
    if state.inside_kind == "evanescent":
        out[inside] = state.A * np.exp(s * xi) + state.B * np.exp(-s * xi)
    elif state.inside_kind == "oscillatory":
        out[inside] = state.A * np.cos(s * xi) + state.B * np.sin(s * xi)
    else:
        out[inside] = state.A + state.B * xi
    return out / math.sqrt(2.0 * math.pi)


def closed_form_transmission(k: float, barrier: BarrierSpec) -> float:
    """Textbook |T|^2 of the rectangular barrier, independent of the matching solver."""
    hbar, m, V0, L = barrier.hbar, barrier.mass, barrier.V0, barrier.L
    E = (hbar * k) ** 2 / (2.0 * m)
    if E < V0:
        kappa = math.sqrt(2.0 * m * (V0 - E)) / hbar
        return 1.0 / (1.0 + V0 ** 2 * math.sinh(kappa * L) ** 2 / (4.0 * E * (V0 - E)))
    if E > V0:
        q = math.sqrt(2.0 * m * (E - V0)) / hbar
        return 1.0 / (1.0 + V0 ** 2 * math.sin(q * L) ** 2 / (4.0 * E * (E - V0)))
    return 1.0 / (1.0 + m * V0 * L ** 2 / (2.0 * hbar ** 2))


@dataclass(frozen=True, eq=False)
class ScatteringBasis:
    """Scattering states on a uniform k grid, used like a discrete eigenbasis."""
    barrier: BarrierSpec
    k_grid: Grid1D
    states: List[ScatteringState] = field(repr=False)
    label: str = "barrier"

    @property
    def hbar(self) -> float:
        return self.barrier.hbar

    @property
    def mass(self) -> float:
        return self.barrier.mass

    @property
    def k(self) -> np.ndarray:
        return self.k_grid.points

    @property
    def energies(self) -> np.ndarray:
        return (self.hbar * self.k) ** 2 / (2.0 * self.mass)

    @property
    def weights(self) -> np.ndarray:
        return quadrature_weights(QuadratureRule(grid=self.k_grid, kind=QuadratureKind.TRAPEZOID))

    @property
    def transmission(self) -> np.ndarray:
        return np.array([s.T for s in self.states])

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """sqrt(w_k) u_k(x), so the k grid behaves as a discrete orthonormal set."""
        modes = np.stack([barrier_eigenfunction(s, x) for s in self.states])
        return np.sqrt(self.weights)[:, None] * modes

    def default_grid(self, count: int = 2001) -> Grid1D:
        return Grid1D(lower=-self.barrier.L * 20.0, upper=self.barrier.L * 21.0, count=count)

    def packet_coefficients(self, spec: WavePacketSpec) -> CoefficientVector:
        """
        c_k = sqrt(w_k) phi(k) with phi the packet's wavenumber amplitude, so
        sum |c_k|^2 approximates the positive-k norm.
        """
        phi_k = math.sqrt(self.hbar) * gaussian_momentum_amplitude(spec, self.hbar * self.k)
        return CoefficientVector(label=self.label, values=np.sqrt(self.weights) * phi_k)


def build_scattering_basis(
    spec: WavePacketSpec, barrier: BarrierSpec, count: int = SCATTERING_GRID_POINTS
) -> ScatteringBasis:
    """k grid on [max(1e-3, p0/hbar - 8/(2 sigma0)), p0/hbar + 8/(2 sigma0)]."""
    center = spec.p0 / barrier.hbar
    half = SCATTERING_HALF_WIDTH / (2.0 * spec.sigma0)
    grid = Grid1D(lower=max(1e-3, center - half), upper=center + half, count=count)
    states = [solve_barrier(k, barrier) for k in grid.points]
    logger.info(f"Built {count} barrier scattering states on k in [{grid.lower:.4g}, {grid.upper:.4g}]")
    return ScatteringBasis(barrier=barrier, k_grid=grid, states=states)


# --- Bouncing ball ---

@dataclass(frozen=True, eq=False)
class BouncerBasis:
    """
    Eigenstates of V(z) = m g z above a hard floor at z = 0:
    u_n(z) = sqrt(alpha) Ai(alpha z + R_n) / Ai'(R_n).
    """
    alpha: float
    roots: np.ndarray
    energies: np.ndarray
    n_max: int
    mass: float
    g: float
    hbar: float
    label: str = "bouncer"

    @property
    def z_cut(self) -> float:
        return (-self.roots[-1] + BOUNCER_TAIL_MARGIN) / self.alpha

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        args = self.alpha * z[None, :] + self.roots[:, None]
        # beyond the Airy window the mode is zero to double precision
        inside = (z[None, :] > 0) & (args <= AIRY_WINDOW)
        ai, _, _, _ = special.airy(np.where(inside, args, 0.0))
        norms = math.sqrt(self.alpha) / airy_ai_prime(self.roots)
        return np.where(inside, ai, 0.0) * norms[:, None]

    def default_grid(self, count: int = BOUNCER_GRID_POINTS) -> Grid1D:
        return Grid1D(lower=0.0, upper=self.z_cut, count=count)

    def diagonal_position(self) -> np.ndarray:
        """<u_n|z|u_n> = -2 R_n / (3 alpha)."""
        return -2.0 * self.roots / (3.0 * self.alpha)


def build_bouncer_basis(n_max: int, mass: float = 0.5, g: float = 2.0, hbar: float = 1.0) -> BouncerBasis:
    """
    The first n_max bouncer eigenstates. The defaults are the natural units in
    which alpha = 1 and energies are -R_n.
    """
    roots = airy_roots(n_max)
    alpha = (2.0 * mass ** 2 * g / hbar ** 2) ** (1.0 / 3.0)
    energy_unit = (mass * g ** 2 * hbar ** 2 / 2.0) ** (1.0 / 3.0)
    basis = BouncerBasis(
        alpha=alpha, roots=roots, energies=-roots * energy_unit, n_max=n_max, mass=mass, g=g, hbar=hbar,
    )

    grid = basis.default_grid()
    norms = integrate_samples(basis.evaluate(grid.points) ** 2, QuadratureRule(grid=grid), axis=-1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > BOUNCER_NORM_TOLERANCE:
        logger.warning(f"Bouncer mode normalization off by {worst:.3e} on {grid.count} points")
    return basis


def bouncer_position_matrix(basis: BouncerBasis, count: int = BOUNCER_GRID_POINTS) -> np.ndarray:
    """
    z_nm = integral u_n(z) z u_m(z) dz on [0, z_cut] by Simpson quadrature.

    A warning is logged if any mode keeps more than 1e-8 of its norm past z_cut.
    """
    grid = basis.default_grid(count)
    z = grid.points
    modes = basis.evaluate(z)
    weights = quadrature_weights(QuadratureRule(grid=grid))
    matrix = (modes * (weights * z)[None, :]) @ modes.T

    tail_grid = Grid1D(lower=basis.z_cut, upper=basis.z_cut + 5.0 / basis.alpha, count=201)
    tail = integrate_samples(basis.evaluate(tail_grid.points) ** 2, QuadratureRule(grid=tail_grid), axis=-1)
    if float(np.max(tail)) > BOUNCER_TAIL_TOLERANCE:
        logger.warning(f"Bouncer modes leak {float(np.max(tail)):.3e} of their norm beyond z_cut")
    return 0.5 * (matrix + matrix.T)


# --- Harmonic oscillator ---

@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """Oscillator states |0>..|n_max - 1> with ladder-algebra x and p matrices."""
    omega: float
    n_max: int
    energies: np.ndarray
    x_elements: np.ndarray
    p_elements: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0
    label: str = "harmonic"

    @property
    def length_scale(self) -> float:
        return math.sqrt(self.hbar / (self.mass * self.omega))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scale = self.length_scale
        return hermite_functions(self.n_max - 1, x / scale) / math.sqrt(scale)

    def default_grid(self, count: int = 2001) -> Grid1D:
        half = (math.sqrt(2.0 * self.n_max + 1.0) + 8.0) * self.length_scale
        return Grid1D(lower=-half, upper=half, count=count)


def build_harmonic_basis(omega: float, n_max: int, mass: float = 1.0, hbar: float = 1.0) -> HarmonicBasis:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    n = np.arange(n_max)
    upper = np.sqrt(n[1:])
    x_elements = math.sqrt(hbar / (2.0 * mass * omega)) * (np.diag(upper, 1) + np.diag(upper, -1))
    p_scale = math.sqrt(mass * hbar * omega / 2.0)
    p_elements = p_scale * (-1j * np.diag(upper, 1) + 1j * np.diag(upper, -1))
    return HarmonicBasis(
        omega=omega, n_max=n_max, energies=hbar * omega * (n + 0.5),
        x_elements=x_elements, p_elements=p_elements, mass=mass, hbar=hbar,
    )
