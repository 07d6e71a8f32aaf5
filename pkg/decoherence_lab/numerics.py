# decoherence_lab/numerics.py

import logging
import math
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import optimize, special

from .errors import AiryDomainError, HermiteOverflowError, QuadratureError, RootFindingError
from .models import Grid1D, QuadratureKind, QuadratureRule

logger = logging.getLogger(__name__)

# --- Configuration ---
AIRY_WINDOW = 50.0
AIRY_MAX_ROOTS = 50
AIRY_ROOT_RESIDUAL = 1e-10
HERMITE_MAX_ORDER = 64

ArrayLike = Union[float, np.ndarray]


# --- Quadrature ---

def quadrature_weights(rule: QuadratureRule) -> np.ndarray:
    """Composite trapezoid or Simpson weights for a uniform grid."""
    n = rule.grid.count
    h = rule.grid.spacing
    if rule.kind is QuadratureKind.TRAPEZOID:
        weights = np.full(n, h)
        weights[0] = weights[-1] = 0.5 * h
        return weights
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return weights * (h / 3.0)


def rule_for(grid: Grid1D) -> QuadratureRule:
    """Simpson when the point count allows it, trapezoid otherwise."""
    kind = QuadratureKind.SIMPSON if grid.count % 2 == 1 else QuadratureKind.TRAPEZOID
    return QuadratureRule(grid=grid, kind=kind)


def _sample(f: Callable, *axes: np.ndarray) -> np.ndarray:
    values = np.asarray(f(*axes), dtype=complex)
    shape = np.broadcast_shapes(*(a.shape for a in axes))
    values = np.broadcast_to(values, shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        index = tuple(int(i[0]) for i in np.nonzero(bad))
        where = ", ".join(f"{a[index]:.6g}" for a in axes)
        raise QuadratureError(f"Integrand is not finite at ({where})")
    return values


def integrate_samples(values: np.ndarray, rule: QuadratureRule, axis: int = -1) -> np.ndarray:
    """Apply the rule's weights to pre-sampled values along `axis`."""
    values = np.asarray(values)
    if values.shape[axis] != rule.grid.count:
        raise QuadratureError(
            f"Sample count {values.shape[axis]} does not match grid count {rule.grid.count}"
        )
    if not np.all(np.isfinite(values)):
        raise QuadratureError("Sampled integrand contains non-finite values")
    return np.tensordot(np.moveaxis(values, axis, -1), quadrature_weights(rule), axes=([-1], [0]))


def integrate_1d(f: Callable[[np.ndarray], ArrayLike], rule: QuadratureRule) -> complex:
    """
    Integrates f over the rule's grid.

    Args:
        f: vectorized callable, real points -> complex values.
        rule: trapezoid or Simpson rule on a uniform grid.

    Returns:
        The quadrature sum as a complex number.

    Raises:
        QuadratureError: if f is not finite at some grid point.
    """
    x = rule.grid.points
    values = _sample(f, x)
    return complex(np.dot(quadrature_weights(rule), values))


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], ArrayLike],
    rule_a: QuadratureRule,
    rule_b: QuadratureRule,
) -> complex:
    """Tensor-product rule; f is called once on the full meshgrid."""
    a, b = np.meshgrid(rule_a.grid.points, rule_b.grid.points, indexing="ij")
    values = _sample(f, a, b)
    return complex(quadrature_weights(rule_a) @ values @ quadrature_weights(rule_b))


# --- Airy functions ---

def _airy_argument(z: ArrayLike) -> np.ndarray:
    z_arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z_arr)) or np.any(np.abs(z_arr) > AIRY_WINDOW):
        worst = float(np.max(np.abs(z_arr)))
        raise AiryDomainError(f"Airy argument {worst:.6g} outside [-{AIRY_WINDOW}, {AIRY_WINDOW}]")
    return z_arr


def _like_input(values: np.ndarray, z: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(z) == 0 else values


def airy_ai(z: ArrayLike) -> ArrayLike:
    ai, _, _, _ = special.airy(_airy_argument(z))
    return _like_input(ai, z)


def airy_ai_prime(z: ArrayLike) -> ArrayLike:
    _, aip, _, _ = special.airy(_airy_argument(z))
    return _like_input(aip, z)


def _airy_root_seed(n: int) -> float:
    return -((3.0 * math.pi * (4 * n - 1) / 8.0) ** (2.0 / 3.0))


@lru_cache(maxsize=None)
def _airy_roots(n_max: int) -> tuple:
    roots = []
    for n in range(1, n_max + 1):
        seed = _airy_root_seed(n)
        # bracket a quarter of the local zero spacing on each side
        half = 0.25 * math.pi / math.sqrt(abs(seed))
        lo, hi = seed - half, seed + half
        if airy_ai(lo) * airy_ai(hi) > 0:
            raise RootFindingError(f"Cannot bracket Airy root n={n} in [{lo:.6f}, {hi:.6f}]")

        root = None
        try:
            sol = optimize.root_scalar(
                airy_ai, x0=seed, fprime=airy_ai_prime, method="newton", xtol=1e-15, maxiter=50
            )
            if sol.converged and lo < sol.root < hi:
                root = sol.root
        except (RuntimeError, ZeroDivisionError) as e:
            logger.debug(f"Newton failed for Airy root n={n}: {e}")
        if root is None:
            logger.debug(f"Falling back to brentq for Airy root n={n}")
            root = optimize.brentq(airy_ai, lo, hi, xtol=1e-15, maxiter=200)

        if abs(airy_ai(root)) > AIRY_ROOT_RESIDUAL:
            raise RootFindingError(f"Airy root n={n} residual {abs(airy_ai(root)):.3e}")
        if roots and not root < roots[-1]:
            raise RootFindingError(f"Airy roots out of order at n={n}")
        roots.append(root)
    return tuple(roots)


def airy_roots(n_max: int) -> np.ndarray:
    """
    First n_max zeros of Ai, in decreasing order (R_1 > R_2 > ... , all negative).

    Raises:
        RootFindingError: if n_max is outside 1..50 or a zero cannot be bracketed.
    """
    if not 1 <= n_max <= AIRY_MAX_ROOTS:
        raise RootFindingError(f"n_max must be in 1..{AIRY_MAX_ROOTS}, got {n_max}")
    return np.array(_airy_roots(int(n_max)))


# --- Hermite functions ---

def hermite_functions(n_max: int, xi: ArrayLike) -> np.ndarray:
    """
    Orthonormal Hermite functions h_0..h_n_max at xi, shape (n_max + 1, len(xi)).

    Upward three-term recurrence, which stays bounded where H_n itself overflows.
    """
    if not 0 <= n_max <= HERMITE_MAX_ORDER:
        raise HermiteOverflowError(f"Hermite order {n_max} outside 0..{HERMITE_MAX_ORDER}")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty((n_max + 1, xi.size))
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * xi ** 2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for k in range(1, n_max):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * xi * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    if not np.all(np.isfinite(out)):
        raise HermiteOverflowError(f"Non-finite Hermite function values up to order {n_max}")
    return out


def hermite_function(n: int, xi: ArrayLike) -> ArrayLike:
    values = hermite_functions(n, xi)[n]
    return float(values[0]) if np.ndim(xi) == 0 else values
