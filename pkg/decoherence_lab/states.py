# decoherence_lab/states.py

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Dict, Optional, Union

import numpy as np

from .errors import BasisMismatchError, StateConstructionError
from .models import CatStateSpec, Grid1D, QuadratureKind, QuadratureRule, WavePacketSpec
from .numerics import integrate_samples, quadrature_weights

if TYPE_CHECKING:
    from .spectra import SpectralBasis

logger = logging.getLogger(__name__)

# --- Configuration ---
HERMITICITY_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-6
COVERAGE_THRESHOLD = 0.9999
GRID_HALF_WIDTH_IN_STD = 8.0

PacketSpec = Union[WavePacketSpec, CatStateSpec]


@dataclass(frozen=True)
class MomentumGridBasis:
    """Density matrix entries indexed by (p, p') on a uniform momentum grid."""
    grid: Grid1D

    @property
    def dimension(self) -> int:
        return self.grid.count

    @property
    def weights(self) -> np.ndarray:
        # uniform weights keep the synthesis sum periodic without Simpson's 2h sub-lattice
        return quadrature_weights(QuadratureRule(grid=self.grid, kind=QuadratureKind.TRAPEZOID))


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Discrete energy eigenbasis; entries indexed by (n, n')."""
    label: str
    energies: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.energies)

    @property
    def weights(self) -> np.ndarray:
        return np.ones(self.dimension)


Basis = Union[MomentumGridBasis, EigenBasis]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Density operator in a momentum-grid or discrete eigenbasis representation.

    For a momentum grid the entries are rho(p, p') and the trace is the
    quadrature sum of the diagonal.
    """
    entries: np.ndarray
    basis: Basis
    hbar: float = 1.0
    mass: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", entries)
        n = self.basis.dimension
        if entries.shape != (n, n):
            raise BasisMismatchError(f"Density entries {entries.shape} do not match basis dimension {n}")
        scale = max(1.0, float(np.max(np.abs(entries)))) if entries.size else 1.0
        herm = self.hermiticity_error()
        if herm > HERMITICITY_TOLERANCE * scale:
            raise StateConstructionError(f"Density matrix is not Hermitian (max deviation {herm:.3e})")
        deficit = abs(self.trace() - 1.0)
        if deficit > TRACE_TOLERANCE:
            self.metadata.setdefault("trace_deficit", deficit)

    @property
    def is_momentum_grid(self) -> bool:
        return isinstance(self.basis, MomentumGridBasis)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def weights(self) -> np.ndarray:
        return self.basis.weights

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) if self.entries.size else 0.0

    def trace(self) -> float:
        return float(np.real(np.sum(self.weights * np.diag(self.entries))))

    def purity(self) -> float:
        """tr(rho^2) with quadrature weights on both indices."""
        w = self.weights
        return float(np.sum(np.abs(self.entries) ** 2 * np.outer(w, w)))

    def min_eigenvalue(self) -> float:
        root_w = np.sqrt(self.weights)
        scaled = root_w[:, None] * self.entries * root_w[None, :]
        return float(np.min(np.linalg.eigvalsh(0.5 * (scaled + scaled.conj().T))))

    def with_entries(self, entries: np.ndarray, **metadata: Any) -> "DensityMatrix":
        merged = {**self.metadata, **metadata}
        merged.pop("trace_deficit", None)
        return DensityMatrix(entries=entries, basis=self.basis, hbar=self.hbar, mass=self.mass, metadata=merged)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Expansion coefficients C_n of a pure state in a labelled basis."""
    label: str
    values: np.ndarray

    @property
    def coverage(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


# --- Wave packets ---

def gaussian_momentum_amplitude(spec: WavePacketSpec, p: np.ndarray) -> np.ndarray:
    """
    phi(p) = (2 sigma0^2 / (pi hbar^2))^(1/4) exp[-sigma0^2 (p - p0)^2 / hbar^2 - i p x0 / hbar]
    """
    p = np.asarray(p, dtype=float)
    s, hbar = spec.sigma0, spec.hbar
    prefactor = (2.0 * s ** 2 / (math.pi * hbar ** 2)) ** 0.25
    return prefactor * np.exp(-(s ** 2) * (p - spec.p0) ** 2 / hbar ** 2 - 1j * p * spec.x0 / hbar)


def gaussian_position_amplitude(spec: WavePacketSpec, x: np.ndarray) -> np.ndarray:
    """Position-space partner of gaussian_momentum_amplitude (same phase convention)."""
    x = np.asarray(x, dtype=float)
    s = spec.sigma0
    envelope = (2.0 * math.pi * s ** 2) ** -0.25 * np.exp(-((x - spec.x0) ** 2) / (4.0 * s ** 2))
    return envelope * np.exp(1j * spec.p0 * (x - spec.x0) / spec.hbar)


def cat_normalization(spec: CatStateSpec) -> float:
    """
    Normalization constant of the symmetric two-packet superposition.

    Raises:
        StateConstructionError: widths differ or packets are not mirror images.
    """
    a, b = spec.packet_a, spec.packet_b
    if not math.isclose(a.sigma0, b.sigma0, rel_tol=1e-12):
        raise StateConstructionError(f"Cat packets have different widths: {a.sigma0} vs {b.sigma0}")
    if not spec.is_symmetric:
        raise StateConstructionError("Cat packets must sit at (+x0, -x0) with momenta (+p0, -p0)")
    return spec.normalization


def cat_momentum_amplitude(spec: CatStateSpec, p: np.ndarray) -> np.ndarray:
    n = cat_normalization(spec)
    return n * (gaussian_momentum_amplitude(spec.packet_a, p) + gaussian_momentum_amplitude(spec.packet_b, p))


def cat_position_amplitude(spec: CatStateSpec, x: np.ndarray) -> np.ndarray:
    n = cat_normalization(spec)
    return n * (gaussian_position_amplitude(spec.packet_a, x) + gaussian_position_amplitude(spec.packet_b, x))


def momentum_amplitude(spec: PacketSpec, p: np.ndarray) -> np.ndarray:
    if isinstance(spec, CatStateSpec):
        return cat_momentum_amplitude(spec, p)
    return gaussian_momentum_amplitude(spec, p)


def position_amplitude(spec: PacketSpec, x: np.ndarray) -> np.ndarray:
    if isinstance(spec, CatStateSpec):
        return cat_position_amplitude(spec, x)
    return gaussian_position_amplitude(spec, x)


def _packets(spec: PacketSpec):
    return [spec.packet_a, spec.packet_b] if isinstance(spec, CatStateSpec) else [spec]


def default_momentum_grid(spec: PacketSpec, count: int = 512) -> Grid1D:
    """Grid spanning 8 momentum standard deviations around every packet centre."""
    packets = _packets(spec)
    lower = min(pk.p0 - GRID_HALF_WIDTH_IN_STD * pk.momentum_width for pk in packets)
    upper = max(pk.p0 + GRID_HALF_WIDTH_IN_STD * pk.momentum_width for pk in packets)
    return Grid1D(lower=lower, upper=upper, count=count)


def initial_density_momentum(spec: PacketSpec, grid: Grid1D) -> DensityMatrix:
    """
    rho(p, p', 0) = phi(p) conj(phi(p')) on the grid.

    Short grid coverage is logged as a warning and kept in metadata.
    """
    p = grid.points
    phi = momentum_amplitude(spec, p)
    basis = MomentumGridBasis(grid=grid)
    coverage = float(np.sum(basis.weights * np.abs(phi) ** 2))
    metadata: Dict[str, Any] = {"coverage": coverage}

    for pk in _packets(spec):
        reach = GRID_HALF_WIDTH_IN_STD * pk.momentum_width
        if pk.p0 - reach < grid.lower - 1e-12 or pk.p0 + reach > grid.upper + 1e-12:
            logger.warning(
                f"Momentum grid [{grid.lower:.4g}, {grid.upper:.4g}] spans less than "
                f"{GRID_HALF_WIDTH_IN_STD:g} std around p0={pk.p0:.4g}"
            )
            metadata["narrow_grid"] = True
    if coverage < COVERAGE_THRESHOLD:
        logger.warning(f"Momentum grid captures only {coverage:.6f} of the packet norm")
        metadata["coverage_warning"] = True

    return DensityMatrix(
        entries=np.outer(phi, phi.conj()), basis=basis, hbar=spec.hbar, mass=spec.mass, metadata=metadata
    )


def cat_component_densities(spec: CatStateSpec, grid: Grid1D) -> Dict[str, np.ndarray]:
    """
    Unnormalized partial density matrices phi_i(p) conj(phi_j(p')) for the
    cat components. Keys: "aa", "bb", "ab".
    """
    cat_normalization(spec)
    p = grid.points
    phi_a = gaussian_momentum_amplitude(spec.packet_a, p)
    phi_b = gaussian_momentum_amplitude(spec.packet_b, p)
    return {
        "aa": np.outer(phi_a, phi_a.conj()),
        "bb": np.outer(phi_b, phi_b.conj()),
        "ab": np.outer(phi_a, phi_b.conj()),
    }


def position_density_matrix(rho: DensityMatrix, x: np.ndarray) -> np.ndarray:
    """rho(x, x') on the points x, from a momentum-grid density matrix."""
    if not rho.is_momentum_grid:
        raise BasisMismatchError("position_density_matrix needs a momentum-grid density matrix")
    p = rho.basis.grid.points
    plane = rho.weights[None, :] * np.exp(1j * np.outer(np.asarray(x, dtype=float), p) / rho.hbar)
    return plane @ rho.entries @ plane.conj().T / (2.0 * math.pi * rho.hbar)


# --- Spectral expansions ---

def project_onto_basis(
    psi0: Callable[[np.ndarray], np.ndarray],
    basis: "SpectralBasis",
    grid: Optional[Grid1D] = None,
    threshold: float = 0.999,
) -> CoefficientVector:
    """
    C_n = integral conj(u_n(x)) psi0(x) dx by Simpson quadrature.

    Args:
        psi0: vectorized initial wavefunction.
        basis: any object with `label`, `energies`, `evaluate(x)` and `default_grid()`.
        grid: integration grid; defaults to the basis' own support grid.
        threshold: coverage below this is logged as a warning.
    """
    grid = grid or basis.default_grid()
    rule = QuadratureRule(grid=grid)
    x = grid.points
    modes = basis.evaluate(x)
    values = np.asarray(psi0(x), dtype=complex)
    coefficients = integrate_samples(modes.conj() * values[None, :], rule, axis=-1)
    result = CoefficientVector(label=basis.label, values=np.asarray(coefficients))
    if result.coverage < threshold:
        logger.warning(
            f"Basis '{basis.label}' with {len(result.values)} states covers only "
            f"{result.coverage:.6f} of the initial state"
        )
    return result


def density_from_coefficients(
    coefficients: CoefficientVector, basis: "SpectralBasis", renormalize: bool = True
) -> DensityMatrix:
    """Pure-state density C_n conj(C_n') in the eigenbasis, optionally renormalized to unit trace."""
    if len(coefficients.values) != len(basis.energies):
        raise BasisMismatchError(
            f"{len(coefficients.values)} coefficients for a basis of {len(basis.energies)} states"
        )
    c = coefficients.values
    coverage = coefficients.coverage
    if renormalize:
        if coverage <= 0:
            raise StateConstructionError("Initial state has no weight in the basis")
        c = c / math.sqrt(coverage)
    return DensityMatrix(
        entries=np.outer(c, c.conj()),
        basis=EigenBasis(label=basis.label, energies=np.asarray(basis.energies, dtype=float)),
        hbar=basis.hbar,
        mass=basis.mass,
        metadata={"coverage": coverage},
    )


def synthesize(coefficients: CoefficientVector, basis: "SpectralBasis", x: np.ndarray) -> np.ndarray:
    """psi(x) = sum_n C_n u_n(x)."""
    return coefficients.values @ basis.evaluate(np.asarray(x, dtype=float))
