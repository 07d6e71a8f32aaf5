# tests/test_evolution.py

import numpy as np
import pytest
from numpy.testing import assert_allclose

from decoherence_lab.errors import BasisMismatchError, EvolutionError
from decoherence_lab.evolution import (
    evolve_eigenbasis,
    evolve_free_momentum,
    evolve_linear_momentum,
    exact_map_modulus,
    lindblad_momentum_propagator,
    milburn_generator_apply,
    milburn_phase_factor,
    two_particle_residual,
)
from decoherence_lab.models import Grid1D, LindbladSpec, MapOrder, MilburnParams, QuadratureRule, WavePacketSpec
from decoherence_lab.numerics import integrate_samples
from decoherence_lab.observables import position_density_momentum
from decoherence_lab.states import default_momentum_grid, initial_density_momentum

from .conftest import random_density, random_hermitian


def test_unitary_factor_is_pure_phase():
    params = MilburnParams(gamma_inv=0.0)
    assert milburn_phase_factor(2.0, 0.5, 3.0, params) == pytest.approx(np.exp(-4.5j))


def test_first_order_factor(first_order):
    expected = np.exp(-1.5j * 2.0 - 1.5 ** 2 * 2.0 * 0.5 / 2.0)
    assert milburn_phase_factor(2.0, 0.5, 2.0, first_order) == pytest.approx(expected)


def test_exact_factor_closed_form(exact):
    delta, t, g = 1.5, 2.0, 0.5
    expected = np.exp((t / g) * (np.exp(-1j * delta * g) - 1.0))
    assert milburn_phase_factor(delta, 0.0, t, exact) == pytest.approx(expected)
    assert abs(expected) == pytest.approx(float(exact_map_modulus(np.array(delta), t, exact)))


def test_maps_agree_for_small_gamma_inv():
    fo = MilburnParams(gamma_inv=1e-4, order=MapOrder.FIRST_ORDER)
    ex = MilburnParams(gamma_inv=1e-4, order=MapOrder.EXACT)
    assert milburn_phase_factor(1.0, 0.0, 1.0, fo) == pytest.approx(milburn_phase_factor(1.0, 0.0, 1.0, ex), abs=1e-8)


def test_negative_time_is_rejected(first_order):
    with pytest.raises(EvolutionError):
        milburn_phase_factor(1.0, 0.0, -0.1, first_order)


@pytest.mark.parametrize("order", [MapOrder.FIRST_ORDER, MapOrder.EXACT])
def test_eigenbasis_evolution_keeps_trace_hermiticity_and_positivity(eigen_density, order):
    params = MilburnParams(gamma_inv=0.5, order=order)
    for t in (0.1, 1.0, 10.0):
        rho = evolve_eigenbasis(eigen_density, t, params)
        assert rho.trace() == pytest.approx(1.0, abs=1e-8)
        assert rho.hermiticity_error() < 1e-12
        assert rho.min_eigenvalue() > -1e-12
        assert_allclose(np.diag(rho.entries), np.diag(eigen_density.entries))


@pytest.mark.parametrize("order", [MapOrder.FIRST_ORDER, MapOrder.EXACT])
def test_eigenbasis_semigroup(eigen_density, order):
    params = MilburnParams(gamma_inv=0.3, order=order)
    once = evolve_eigenbasis(eigen_density, 2.5, params)
    twice = evolve_eigenbasis(evolve_eigenbasis(eigen_density, 1.0, params), 1.5, params)
    assert_allclose(once.entries, twice.entries, atol=1e-12)


def test_purity_decays_under_decoherence(eigen_density, first_order):
    purities = [evolve_eigenbasis(eigen_density, t, first_order).purity() for t in (0.0, 0.5, 2.0, 8.0)]
    assert all(b <= a + 1e-14 for a, b in zip(purities, purities[1:]))
    assert purities[-1] < purities[0]


def test_evolve_eigenbasis_rejects_momentum_grid(packet, first_order):
    rho = initial_density_momentum(packet, default_momentum_grid(packet, 64))
    with pytest.raises(BasisMismatchError):
        evolve_eigenbasis(rho, 1.0, first_order)


def test_free_milburn_equals_lindblad(packet):
    rho0 = initial_density_momentum(packet, default_momentum_grid(packet, 128))
    g = 0.4
    params = MilburnParams(gamma_inv=g)
    lindblad = LindbladSpec(kappa=g, function=lambda p: p ** 2 / 2.0)
    for t in (0.5, 3.0):
        milburn = evolve_free_momentum(rho0, t, params).entries
        assert_allclose(milburn, lindblad_momentum_propagator(rho0, lindblad, t).entries, rtol=0, atol=1e-12)


def test_free_evolution_keeps_momentum_diagonal(packet, first_order):
    rho0 = initial_density_momentum(packet, default_momentum_grid(packet, 128))
    rho = evolve_free_momentum(rho0, 5.0, first_order)
    assert_allclose(np.diag(rho.entries), np.diag(rho0.entries), atol=1e-15)
    assert rho.metadata["time"] == 5.0


@pytest.mark.parametrize("gamma_inv", [0.0, 0.5])
def test_free_packet_width_follows_spreading_law(gamma_inv):
    packet = WavePacketSpec(sigma0=1.0, x0=0.0, p0=1.0)
    rho0 = initial_density_momentum(packet, default_momentum_grid(packet, 256))
    t = 4.0
    expected = packet.width_at(t) ** 2 + (packet.p0 ** 2 + packet.momentum_width ** 2) * gamma_inv * t
    rule = QuadratureRule(grid=Grid1D.centered(packet.p0 * t, 10.0 * np.sqrt(expected), 801))
    x = rule.grid.points
    density = position_density_momentum(evolve_free_momentum(rho0, t, MilburnParams(gamma_inv=gamma_inv)), x)

    assert float(integrate_samples(density, rule).real) == pytest.approx(1.0, abs=1e-7)
    mean = float(integrate_samples(x * density, rule).real)
    assert mean == pytest.approx(packet.p0 * t, abs=1e-7)
    variance = float(integrate_samples((x - mean) ** 2 * density, rule).real)
    assert variance == pytest.approx(expected, rel=1e-6)


def test_generator_first_order_matches_double_commutator(hermitian_pair, first_order):
    H, rho = hermitian_pair
    comm = H @ rho - rho @ H
    expected = -1j * comm - 0.25 * (H @ comm - comm @ H)
    assert_allclose(milburn_generator_apply(H, rho, first_order), expected, atol=1e-12)


def test_generator_exact_reduces_to_first_order_for_small_gamma_inv(hermitian_pair):
    H, rho = hermitian_pair
    g = 1e-5
    exact = milburn_generator_apply(H, rho, MilburnParams(gamma_inv=g, order=MapOrder.EXACT))
    first = milburn_generator_apply(H, rho, MilburnParams(gamma_inv=g, order=MapOrder.FIRST_ORDER))
    assert_allclose(exact, first, atol=1e-6 * max(1.0, np.max(np.abs(H)) ** 3))


def test_generator_is_traceless(hermitian_pair, exact):
    H, rho = hermitian_pair
    assert abs(np.trace(milburn_generator_apply(H, rho, exact))) < 1e-12


def test_generator_shape_mismatch(first_order):
    with pytest.raises(EvolutionError):
        milburn_generator_apply(np.eye(2), np.eye(3), first_order)


def test_two_particle_residual_identity(rng):
    params = MilburnParams(gamma_inv=0.7)
    for _ in range(5):
        H1, H2 = random_hermitian(rng, 2), random_hermitian(rng, 2)
        rho1, rho2 = random_density(rng, 2), random_density(rng, 2)
        residual = two_particle_residual(H1, H2, rho1, rho2, params)
        c1, c2 = H1 @ rho1 - rho1 @ H1, H2 @ rho2 - rho2 @ H2
        assert_allclose(residual, -0.7 * np.kron(c1, c2), atol=1e-10)


def test_two_particle_residual_vanishes_without_decoherence(rng):
    H1, H2 = random_hermitian(rng, 2), random_hermitian(rng, 3)
    rho1, rho2 = random_density(rng, 2), random_density(rng, 3)
    residual = two_particle_residual(H1, H2, rho1, rho2, MilburnParams(gamma_inv=0.0))
    assert np.max(np.abs(residual)) < 1e-12


def test_linear_potential_without_force_is_free_evolution(packet, first_order):
    grid = default_momentum_grid(packet, 128)
    rho0 = initial_density_momentum(packet, grid)
    linear = evolve_linear_momentum(packet, grid, 0.5, first_order, c1=0.0)
    assert_allclose(linear.entries, evolve_free_momentum(rho0, 0.5, first_order).entries, atol=1e-9)


@pytest.mark.parametrize("order", [MapOrder.FIRST_ORDER, MapOrder.EXACT])
def test_linear_potential_shifts_mean_momentum(order):
    spec = WavePacketSpec(sigma0=1.0, x0=0.0, p0=1.0)
    c1, t = 0.5, 2.0
    grid = Grid1D(lower=-8.0, upper=5.0, count=401)
    rho = evolve_linear_momentum(spec, grid, t, MilburnParams(gamma_inv=0.3, order=order), c1)
    p = grid.points
    weights = rho.weights * np.diag(rho.entries).real
    assert rho.trace() == pytest.approx(1.0, abs=1e-8)
    assert np.sum(weights * p) == pytest.approx(1.0 - c1 * t, abs=1e-8)
