# tests/test_states.py

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from decoherence_lab.errors import BasisMismatchError, StateConstructionError
from decoherence_lab.models import CatStateSpec, Grid1D, QuadratureRule, WavePacketSpec
from decoherence_lab.numerics import integrate_samples
from decoherence_lab.states import (
    CoefficientVector,
    DensityMatrix,
    EigenBasis,
    cat_component_densities,
    cat_normalization,
    cat_position_amplitude,
    default_momentum_grid,
    density_from_coefficients,
    gaussian_momentum_amplitude,
    gaussian_position_amplitude,
    initial_density_momentum,
    position_amplitude,
    position_density_matrix,
    project_onto_basis,
)
from decoherence_lab.spectra import build_harmonic_basis


def _norm(values, grid):
    return float(integrate_samples(np.abs(values) ** 2, QuadratureRule(grid=grid)).real)


def test_gaussian_amplitudes_are_normalized(packet):
    x_grid = Grid1D(lower=-30.0, upper=10.0, count=2001)
    p_grid = Grid1D(lower=-4.0, upper=8.0, count=2001)
    assert _norm(gaussian_position_amplitude(packet, x_grid.points), x_grid) == pytest.approx(1.0, abs=1e-10)
    assert _norm(gaussian_momentum_amplitude(packet, p_grid.points), p_grid) == pytest.approx(1.0, abs=1e-10)


def test_momentum_amplitude_is_fourier_partner(packet):
    x_grid = Grid1D(lower=-25.0, upper=5.0, count=3001)
    x = x_grid.points
    psi = gaussian_position_amplitude(packet, x)
    for p in (1.5, 2.0, 2.7):
        kernel = np.exp(-1j * p * x) / math.sqrt(2.0 * math.pi)
        phi = integrate_samples(kernel * psi, QuadratureRule(grid=x_grid))
        assert abs(phi - gaussian_momentum_amplitude(packet, np.array([p]))[0]) < 1e-9


def test_cat_normalization_matches_quadrature(cat):
    grid = Grid1D(lower=-20.0, upper=20.0, count=4001)
    assert _norm(cat_position_amplitude(cat, grid.points), grid) == pytest.approx(1.0, abs=1e-10)
    assert cat_normalization(cat) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-6)


def test_overlapping_cat_normalization():
    spec = CatStateSpec.symmetric(sigma0=1.0, x0=0.5, p0=0.1)
    overlap = math.exp(-0.25 / 2.0 - 2.0 * 0.01)
    assert cat_normalization(spec) == pytest.approx((2.0 * (1.0 + overlap)) ** -0.5)
    grid = Grid1D(lower=-12.0, upper=12.0, count=2401)
    assert _norm(cat_position_amplitude(spec, grid.points), grid) == pytest.approx(1.0, abs=1e-10)


def test_asymmetric_cat_is_rejected():
    a = WavePacketSpec(sigma0=1.0, x0=5.0, p0=-1.0)
    b = WavePacketSpec(sigma0=2.0, x0=-5.0, p0=1.0)
    with pytest.raises(StateConstructionError):
        cat_normalization(CatStateSpec(packet_a=a, packet_b=b))


def test_initial_density_has_unit_trace_and_purity(packet):
    rho = initial_density_momentum(packet, default_momentum_grid(packet, 512))
    assert rho.trace() == pytest.approx(1.0, abs=1e-10)
    assert rho.purity() == pytest.approx(1.0, abs=1e-9)
    assert rho.hermiticity_error() == 0.0
    assert "narrow_grid" not in rho.metadata


def test_narrow_grid_warns(packet, caplog):
    grid = Grid1D(lower=1.0, upper=3.0, count=201)
    rho = initial_density_momentum(packet, grid)
    assert rho.metadata["narrow_grid"]
    assert "spans less than" in caplog.text


def test_cat_components_add_up(cat):
    grid = default_momentum_grid(cat, 256)
    parts = cat_component_densities(cat, grid)
    n = cat.normalization
    total = n ** 2 * (parts["aa"] + parts["bb"] + parts["ab"] + parts["ab"].conj().T)
    assert_allclose(total, initial_density_momentum(cat, grid).entries, atol=1e-14)


def test_position_density_matrix_diagonal_is_packet_density(packet):
    rho = initial_density_momentum(packet, default_momentum_grid(packet, 512))
    x = np.linspace(-14.0, -6.0, 41)
    expected = np.abs(gaussian_position_amplitude(packet, x)) ** 2
    assert_allclose(np.diag(position_density_matrix(rho, x)).real, expected, atol=1e-7)


def test_position_density_matrix_needs_momentum_grid(eigen_density):
    with pytest.raises(BasisMismatchError):
        position_density_matrix(eigen_density, np.zeros(3))


def test_density_rejects_non_hermitian():
    with pytest.raises(StateConstructionError):
        DensityMatrix(entries=np.array([[0.5, 1.0], [0.0, 0.5]]), basis=EigenBasis(label="two", energies=np.zeros(2)))


def test_density_rejects_wrong_shape():
    with pytest.raises(BasisMismatchError):
        DensityMatrix(entries=np.eye(3) / 3.0, basis=EigenBasis(label="two", energies=np.zeros(2)))


def test_trace_deficit_is_recorded():
    rho = DensityMatrix(entries=np.eye(2) * 0.4, basis=EigenBasis(label="two", energies=np.array([0.0, 1.0])))
    assert rho.metadata["trace_deficit"] == pytest.approx(0.2)


class _TwoLevel:
    label = "two"
    hbar = 1.0
    mass = 1.0
    energies = np.array([0.0, 1.0])


def test_density_from_coefficients_renormalizes():
    coefficients = CoefficientVector(label="two", values=np.array([0.6, 0.6j]))
    rho = density_from_coefficients(coefficients, _TwoLevel())
    assert rho.trace() == pytest.approx(1.0)
    assert rho.metadata["coverage"] == pytest.approx(0.72)
    assert rho.entries[0, 1] == pytest.approx(-0.5j)


def test_density_from_coefficients_checks_dimension():
    with pytest.raises(BasisMismatchError):
        density_from_coefficients(CoefficientVector(label="x", values=np.ones(3)), _TwoLevel())


# --- Projection onto a spectral basis ---

def test_projecting_a_basis_state_picks_it_out():
    basis = build_harmonic_basis(omega=1.0, n_max=12)
    coefficients = project_onto_basis(lambda x: basis.evaluate(x)[3], basis)
    expected = np.zeros(12)
    expected[3] = 1.0
    assert_allclose(coefficients.values, expected, atol=1e-7)
    assert coefficients.coverage == pytest.approx(1.0, abs=1e-7)


def test_projecting_zero_gives_zero_coefficients(caplog):
    basis = build_harmonic_basis(omega=1.0, n_max=12)
    coefficients = project_onto_basis(lambda x: np.zeros_like(x), basis)
    assert_allclose(coefficients.values, np.zeros(12), atol=1e-15)
    assert "covers only" in caplog.text


def test_coefficients_resynthesize_the_packet():
    basis = build_harmonic_basis(omega=1.0, n_max=40)
    packet = WavePacketSpec(sigma0=basis.length_scale / math.sqrt(2.0), x0=1.0, p0=0.5)
    coefficients = project_onto_basis(lambda x: position_amplitude(packet, x), basis)
    assert coefficients.coverage == pytest.approx(1.0, abs=1e-8)

    x = np.linspace(-4.0, 4.0, 161)
    synthesized = coefficients.values @ basis.evaluate(x)
    assert_allclose(synthesized, position_amplitude(packet, x), atol=1e-4)
