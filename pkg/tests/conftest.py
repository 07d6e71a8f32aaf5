# tests/conftest.py

import numpy as np
import pytest

from decoherence_lab.models import CatStateSpec, MapOrder, MilburnParams, WavePacketSpec
from decoherence_lab.states import DensityMatrix, EigenBasis


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_hermitian(rng, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def random_density(rng, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def hermitian_pair(rng):
    return random_hermitian(rng, 4), random_density(rng, 4)


@pytest.fixture
def eigen_density(rng):
    energies = np.sort(rng.uniform(0.0, 5.0, size=6))
    return DensityMatrix(entries=random_density(rng, 6), basis=EigenBasis(label="random", energies=energies))


@pytest.fixture
def packet():
    return WavePacketSpec(sigma0=1.0, x0=-10.0, p0=2.0)


@pytest.fixture
def cat():
    return CatStateSpec.symmetric(sigma0=1.0, x0=5.0, p0=1.0)


@pytest.fixture
def first_order():
    return MilburnParams(gamma_inv=0.5, order=MapOrder.FIRST_ORDER)


@pytest.fixture
def exact():
    return MilburnParams(gamma_inv=0.5, order=MapOrder.EXACT)
