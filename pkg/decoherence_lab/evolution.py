# decoherence_lab/evolution.py

import logging
import math
from typing import Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import linalg, stats

from .errors import BasisMismatchError, EvolutionError
from .models import CatStateSpec, Grid1D, LindbladSpec, MapOrder, MilburnParams, WavePacketSpec
from .states import DensityMatrix, MomentumGridBasis, momentum_amplitude

logger = logging.getLogger(__name__)

# --- Configuration ---
TWO_PARTICLE_TOLERANCE = 1e-10
GAUSS_HERMITE_NODES = 96
POISSON_TAIL = 1e-13


def _check_time(t: float) -> None:
    if not math.isfinite(t) or t < 0:
        raise EvolutionError(f"Evolution time must be finite and >= 0, got {t}")


def phase_factor_from_gap(delta: np.ndarray, t: float, params: MilburnParams) -> np.ndarray:
    """Milburn factor for energy gaps `delta` (array in, array out)."""
    _check_time(t)
    delta = np.asarray(delta, dtype=float)
    hbar, g = params.hbar, params.gamma_inv
    if g == 0:
        return np.exp(-1j * delta * t / hbar)
    if params.order is MapOrder.FIRST_ORDER:
        return np.exp(-1j * delta * t / hbar - delta ** 2 * t * g / (2.0 * hbar ** 2))
    theta = delta * g / hbar
    return np.exp((t / g) * (-2.0 * np.sin(0.5 * theta) ** 2 - 1j * np.sin(theta)))


def milburn_phase_factor(E: float, E_prime: float, t: float, params: MilburnParams) -> complex:
    """
    Factor multiplying rho_EE' after time t.

    first_order: exp[-i D t/hbar - D^2 t/(2 hbar^2 gamma)]
    exact:       exp[gamma t (exp(-i D/(hbar gamma)) - 1)],  D = E - E'

    Raises:
        EvolutionError: for t < 0.
    """
    return complex(phase_factor_from_gap(E - E_prime, t, params))


def exact_map_modulus(delta: np.ndarray, t: float, params: MilburnParams) -> np.ndarray:
    """|factor| of the exact map: exp[-2 gamma t sin^2(D/(2 hbar gamma))]."""
    _check_time(t)
    if params.gamma_inv == 0:
        return np.ones_like(np.asarray(delta, dtype=float))
    g = params.gamma_inv
    return np.exp(-(2.0 * t / g) * np.sin(np.asarray(delta, dtype=float) * g / (2.0 * params.hbar)) ** 2)


def evolve_eigenbasis(rho0: DensityMatrix, t: float, params: MilburnParams) -> DensityMatrix:
    """rho_EE'(t) = factor(E, E', t) rho_EE'(0)."""
    if rho0.is_momentum_grid:
        raise BasisMismatchError("evolve_eigenbasis needs an eigenbasis density matrix")
    energies = rho0.basis.energies
    factor = phase_factor_from_gap(energies[:, None] - energies[None, :], t, params)
    return rho0.with_entries(factor * rho0.entries, time=t)


def free_energy_gaps(grid: Grid1D, mass: float) -> np.ndarray:
    p2 = grid.points ** 2
    return (p2[:, None] - p2[None, :]) / (2.0 * mass)


def evolve_free_momentum(rho0: DensityMatrix, t: float, params: MilburnParams) -> DensityMatrix:
    """Free-particle map in momentum space with D = (p^2 - p'^2)/2m."""
    if not rho0.is_momentum_grid:
        raise BasisMismatchError("evolve_free_momentum needs a momentum-grid density matrix")
    factor = phase_factor_from_gap(free_energy_gaps(rho0.basis.grid, rho0.mass), t, params)
    return rho0.with_entries(factor * rho0.entries, time=t)


def lindblad_momentum_propagator(rho0: DensityMatrix, spec: LindbladSpec, t: float) -> DensityMatrix:
    """
    Free evolution with one Hermitian Lindblad operator L = f(p) at rate kappa:
    rho(p, p', t) = exp[(-i (p^2 - p'^2)/(2 m hbar) - kappa (f(p) - f(p'))^2 / 2) t] rho(p, p', 0)
    """
    if not rho0.is_momentum_grid:
        raise BasisMismatchError("lindblad_momentum_propagator needs a momentum-grid density matrix")
    _check_time(t)
    p = rho0.basis.grid.points
    f = np.broadcast_to(np.asarray(spec.function(p), dtype=float), p.shape)
    gaps = free_energy_gaps(rho0.basis.grid, rho0.mass)
    exponent = (-1j * gaps / rho0.hbar - 0.5 * spec.kappa * (f[:, None] - f[None, :]) ** 2) * t
    return rho0.with_entries(np.exp(exponent) * rho0.entries, time=t)


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _check_square_pair(H: np.ndarray, rho: np.ndarray) -> None:
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape != rho.shape:
        raise EvolutionError(f"Hamiltonian {H.shape} and density {rho.shape} must be equal square matrices")


def milburn_generator_apply(H: np.ndarray, rho: np.ndarray, params: MilburnParams) -> np.ndarray:
    """
    Right-hand side of the Milburn equation.

    first_order: -(i/hbar)[H, rho] - (1/(2 hbar^2 gamma)) [H, [H, rho]]
    exact:       gamma (U rho U^dagger - rho) with U = exp(-i H / (hbar gamma))
    """
    H = np.asarray(H, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _check_square_pair(H, rho)
    hbar, g = params.hbar, params.gamma_inv
    comm = _commutator(H, rho)
    if g == 0:
        return -1j * comm / hbar
    if params.order is MapOrder.EXACT:
        step = linalg.expm(-1j * H * g / hbar)
        return (step @ rho @ step.conj().T - rho) / g
    return -1j * comm / hbar - (g / (2.0 * hbar ** 2)) * _commutator(H, comm)


def two_particle_residual(
    H1: np.ndarray, H2: np.ndarray, rho1: np.ndarray, rho2: np.ndarray, params: MilburnParams
) -> np.ndarray:
    """
    Non-additivity of the first-order generator for an uncoupled product state.

    Returns D = G_{H1 (+) H2}(rho1 x rho2) - [G_{H1}(rho1) x rho2 + rho1 x G_{H2}(rho2)]
    and checks it against -(1/(gamma hbar^2)) [H1, rho1] x [H2, rho2].

    Raises:
        EvolutionError: on dimension mismatch or if the identity fails.
    """
    H1, H2 = np.asarray(H1, dtype=complex), np.asarray(H2, dtype=complex)
    rho1, rho2 = np.asarray(rho1, dtype=complex), np.asarray(rho2, dtype=complex)
    _check_square_pair(H1, rho1)
    _check_square_pair(H2, rho2)
    first_order = params.model_copy(update={"order": MapOrder.FIRST_ORDER})

    eye1, eye2 = np.eye(H1.shape[0]), np.eye(H2.shape[0])
    H = np.kron(H1, eye2) + np.kron(eye1, H2)
    rho = np.kron(rho1, rho2)
    residual = milburn_generator_apply(H, rho, first_order) - (
        np.kron(milburn_generator_apply(H1, rho1, first_order), rho2)
        + np.kron(rho1, milburn_generator_apply(H2, rho2, first_order))
    )
    expected = -(params.gamma_inv / params.hbar ** 2) * np.kron(_commutator(H1, rho1), _commutator(H2, rho2))
    mismatch = float(np.max(np.abs(residual - expected)))
    scale = max(1.0, float(np.max(np.abs(expected))))
    if mismatch > TWO_PARTICLE_TOLERANCE * scale:
        raise EvolutionError(f"Two-particle identity violated by {mismatch:.3e}")
    return residual


# --- Linear potential ---

def _duration_samples(t: float, params: MilburnParams, nodes: int):
    """
    Unitary durations tau and weights whose average reproduces the Milburn map:
    tau ~ N(t, t/gamma) for first order, tau = N/gamma with N ~ Poisson(gamma t) for the exact map.
    """
    g = params.gamma_inv
    if g == 0 or t == 0:
        return np.array([t]), np.array([1.0])
    if params.order is MapOrder.FIRST_ORDER:
        x, w = hermegauss(nodes)
        return t + math.sqrt(t * g) * x, w / math.sqrt(2.0 * math.pi)
    mu = t / g
    upper = int(stats.poisson.ppf(1.0 - POISSON_TAIL, mu)) + 1
    steps = np.arange(0, upper + 1)
    weights = stats.poisson.pmf(steps, mu)
    return steps * g, weights / weights.sum()


def evolve_linear_momentum(
    spec: Union[WavePacketSpec, CatStateSpec],
    grid: Grid1D,
    t: float,
    params: MilburnParams,
    c1: float,
    nodes: int = GAUSS_HERMITE_NODES,
) -> DensityMatrix:
    """
    Milburn evolution of a pure packet in V(x) = c1 x, in momentum space.

    The unitary solution for duration tau is
    psi(p, tau) = psi0(p + c1 tau) exp[-i ((p + c1 tau)^3 - p^3) / (6 m c1 hbar)],
    and the map averages psi psi^dagger over the duration distribution.
    """
    _check_time(t)
    hbar, mass = spec.hbar, spec.mass
    p = grid.points
    taus, weights = _duration_samples(t, params, nodes)

    shifted = p[None, :] + c1 * taus[:, None]
    # ((p + c1 tau)^3 - p^3) / (6 m c1) expanded so that c1 = 0 is regular
    tt = taus[:, None]
    action = (p[None, :] ** 2 * tt + p[None, :] * c1 * tt ** 2 + c1 ** 2 * tt ** 3 / 3.0) / (2.0 * mass)
    amplitudes = momentum_amplitude(spec, shifted) * np.exp(-1j * action / hbar)

    entries = (amplitudes.T * weights[None, :]) @ amplitudes.conj()
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix(
        entries=entries,
        basis=MomentumGridBasis(grid=grid),
        hbar=hbar,
        mass=mass,
        metadata={"time": t, "c1": c1, "duration_samples": len(taus)},
    )
