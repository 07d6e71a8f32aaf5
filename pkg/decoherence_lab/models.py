# decoherence_lab/models.py

import math
from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class MapOrder(str, Enum):
    EXACT = "exact"
    FIRST_ORDER = "first_order"


class QuadratureKind(str, Enum):
    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"


class Grid1D(BaseModel):
    """Uniform grid on [lower, upper] with `count` points (both ends included)."""
    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    count: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_bounds(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("grid bounds must be finite")
        if self.upper <= self.lower:
            raise ValueError(f"upper ({self.upper}) must exceed lower ({self.lower})")
        return self

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.count)

    @classmethod
    def centered(cls, center: float, half_width: float, count: int) -> "Grid1D":
        return cls(lower=center - half_width, upper=center + half_width, count=count)


class QuadratureRule(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid: Grid1D
    kind: QuadratureKind = QuadratureKind.SIMPSON

    @model_validator(mode="after")
    def _simpson_needs_odd_count(self):
        if self.kind is QuadratureKind.SIMPSON and self.grid.count % 2 == 0:
            raise ValueError(f"simpson rule needs an odd point count, got {self.grid.count}")
        return self


class WavePacketSpec(BaseModel):
    """Gaussian packet of width sigma0 centred at x0 with kick momentum p0."""
    model_config = ConfigDict(frozen=True)

    sigma0: float = Field(gt=0)
    x0: float = 0.0
    p0: float = 0.0
    hbar: float = Field(1.0, gt=0)
    mass: float = Field(1.0, gt=0)

    @property
    def momentum_width(self) -> float:
        return self.hbar / (2.0 * self.sigma0)

    def width_at(self, t: float) -> float:
        """Free-spreading position width sigma_t."""
        return self.sigma0 * math.sqrt(1.0 + (self.hbar * t) ** 2 / (4.0 * self.mass ** 2 * self.sigma0 ** 4))


def symmetric_overlap_normalization(sigma0: float, x0: float, p0: float, hbar: float) -> float:
    """N = {2(1 + exp[-x0^2/(2 sigma0^2) - 2 p0^2 sigma0^2 / hbar^2])}^(-1/2)."""
    overlap = math.exp(-x0 ** 2 / (2.0 * sigma0 ** 2) - 2.0 * p0 ** 2 * sigma0 ** 2 / hbar ** 2)
    return (2.0 * (1.0 + overlap)) ** -0.5


class CatStateSpec(BaseModel):
    """Superposition N (psi_a + psi_b) of two Gaussian packets."""
    model_config = ConfigDict(frozen=True)

    packet_a: WavePacketSpec
    packet_b: WavePacketSpec

    @model_validator(mode="after")
    def _check_units(self):
        if self.packet_a.hbar != self.packet_b.hbar or self.packet_a.mass != self.packet_b.mass:
            raise ValueError("both packets must share hbar and mass")
        return self

    @property
    def hbar(self) -> float:
        return self.packet_a.hbar

    @property
    def mass(self) -> float:
        return self.packet_a.mass

    @property
    def is_symmetric(self) -> bool:
        a, b = self.packet_a, self.packet_b
        return (
            math.isclose(a.sigma0, b.sigma0, rel_tol=1e-12)
            and math.isclose(a.x0, -b.x0, rel_tol=1e-12, abs_tol=1e-14)
            and math.isclose(a.p0, -b.p0, rel_tol=1e-12, abs_tol=1e-14)
        )

    @property
    def normalization(self) -> float:
        a = self.packet_a
        return symmetric_overlap_normalization(a.sigma0, a.x0, a.p0, a.hbar)

    @classmethod
    def symmetric(
        cls,
        sigma0: float,
        x0: float,
        p0: float,
        hbar: float = 1.0,
        mass: float = 1.0,
        converging: bool = True,
    ) -> "CatStateSpec":
        """
        Packets at +x0 and -x0. With converging=True packet a (at +x0) carries
        momentum -p0 so the two meet at t0 = m x0 / p0; otherwise it carries +p0.
        """
        kick = -p0 if converging else p0
        a = WavePacketSpec(sigma0=sigma0, x0=x0, p0=kick, hbar=hbar, mass=mass)
        b = WavePacketSpec(sigma0=sigma0, x0=-x0, p0=-kick, hbar=hbar, mass=mass)
        return cls(packet_a=a, packet_b=b)


class MilburnParams(BaseModel):
    """gamma_inv is the mean duration of one stochastic unitary step (1/gamma)."""
    model_config = ConfigDict(frozen=True)

    gamma_inv: float = Field(0.0, ge=0)
    order: MapOrder = MapOrder.FIRST_ORDER
    hbar: float = Field(1.0, gt=0)

    @property
    def gamma(self) -> float:
        return math.inf if self.gamma_inv == 0 else 1.0 / self.gamma_inv

    @property
    def is_unitary(self) -> bool:
        return self.gamma_inv == 0


class LindbladSpec(BaseModel):
    """Single Hermitian Lindblad operator L = f(p) with rate kappa."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kappa: float = Field(ge=0)
    function: Callable[[np.ndarray], np.ndarray]


class BarrierSpec(BaseModel):
    """Rectangular barrier V0 on [0, L]."""
    model_config = ConfigDict(frozen=True)

    V0: float = Field(gt=0)
    L: float = Field(gt=0)
    hbar: float = Field(1.0, gt=0)
    mass: float = Field(1.0, gt=0)


class LinearPotentialSpec(BaseModel):
    """V(x) = c1 x."""
    model_config = ConfigDict(frozen=True)

    c1: float = 0.0
    mass: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)

    @property
    def is_free(self) -> bool:
        return self.c1 == 0

    def mean_momentum(self, p0: float, t: float) -> float:
        """<p>(t) = p0 - c1 t; decoherence leaves it unchanged."""
        return p0 - self.c1 * t

    def mean_position(self, x0: float, p0: float, t: float) -> float:
        return x0 + p0 * t / self.mass - 0.5 * self.c1 * t ** 2 / self.mass


class EhrenfestKind(str, Enum):
    FREE = "free"
    GRAVITY = "gravity"
    HARMONIC = "harmonic"


class EhrenfestSpec(BaseModel):
    """Potential for the first-moment closed forms: free, m g x, or m w^2 x^2 / 2."""
    model_config = ConfigDict(frozen=True)

    kind: EhrenfestKind = EhrenfestKind.FREE
    g: Optional[float] = None
    omega: Optional[float] = Field(None, gt=0)
    mass: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _check_parameters(self):
        if self.kind is EhrenfestKind.GRAVITY and self.g is None:
            raise ValueError("gravity needs g")
        if self.kind is EhrenfestKind.HARMONIC and self.omega is None:
            raise ValueError("harmonic needs omega")
        return self
