# tests/test_numerics.py

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from decoherence_lab.errors import AiryDomainError, HermiteOverflowError, QuadratureError, RootFindingError
from decoherence_lab.models import Grid1D, QuadratureKind, QuadratureRule
from decoherence_lab.numerics import (
    airy_ai,
    airy_ai_prime,
    airy_roots,
    hermite_function,
    hermite_functions,
    integrate_1d,
    integrate_2d,
    integrate_samples,
    quadrature_weights,
    rule_for,
)


def test_simpson_integrates_gaussian():
    rule = QuadratureRule(grid=Grid1D(lower=-10.0, upper=10.0, count=401))
    value = integrate_1d(lambda x: np.exp(-x ** 2), rule)
    assert value.real == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert abs(value.imag) < 1e-14


def test_simpson_is_exact_for_cubics():
    rule = QuadratureRule(grid=Grid1D(lower=0.0, upper=2.0, count=5))
    assert integrate_1d(lambda x: x ** 3 - x, rule).real == pytest.approx(2.0, abs=1e-13)


def test_simpson_rejects_even_count():
    with pytest.raises(ValueError):
        QuadratureRule(grid=Grid1D(lower=0.0, upper=1.0, count=10), kind=QuadratureKind.SIMPSON)


def test_rule_for_picks_trapezoid_on_even_grids():
    assert rule_for(Grid1D(lower=0.0, upper=1.0, count=10)).kind is QuadratureKind.TRAPEZOID
    assert rule_for(Grid1D(lower=0.0, upper=1.0, count=11)).kind is QuadratureKind.SIMPSON


def test_weights_sum_to_interval_length():
    for kind, count in ((QuadratureKind.TRAPEZOID, 10), (QuadratureKind.SIMPSON, 11)):
        rule = QuadratureRule(grid=Grid1D(lower=-1.0, upper=2.0, count=count), kind=kind)
        assert quadrature_weights(rule).sum() == pytest.approx(3.0)


def test_non_finite_integrand_is_reported():
    rule = QuadratureRule(grid=Grid1D(lower=-1.0, upper=1.0, count=11))
    with pytest.raises(QuadratureError):
        integrate_1d(lambda x: 1.0 / x, rule)


def test_integrate_samples_checks_length():
    rule = QuadratureRule(grid=Grid1D(lower=0.0, upper=1.0, count=11))
    with pytest.raises(QuadratureError):
        integrate_samples(np.ones(12), rule)


def test_integrate_2d_separable():
    rule = QuadratureRule(grid=Grid1D(lower=-8.0, upper=8.0, count=201))
    value = integrate_2d(lambda a, b: np.exp(-a ** 2 - 2.0 * b ** 2), rule, rule)
    assert value.real == pytest.approx(math.pi / math.sqrt(2.0), rel=1e-9)


def test_airy_values():
    assert airy_ai(0.0) == pytest.approx(0.355028053887817, rel=1e-12)
    assert airy_ai_prime(0.0) == pytest.approx(-0.258819403792807, rel=1e-12)
    assert isinstance(airy_ai(1.0), float)
    assert airy_ai(np.array([0.0, 1.0])).shape == (2,)


def test_airy_satisfies_its_differential_equation():
    z = np.linspace(-10.0, 5.0, 31)
    h = 2e-4
    second = (airy_ai(z + h) - 2.0 * airy_ai(z) + airy_ai(z - h)) / h ** 2
    assert_allclose(second, z * airy_ai(z), atol=1e-6)


def test_airy_window():
    with pytest.raises(AiryDomainError):
        airy_ai(60.0)


def test_airy_roots_known_values():
    roots = airy_roots(5)
    assert_allclose(
        roots,
        [-2.338107410459767, -4.087949444130971, -5.520559828095551, -6.786708090071759, -7.944133587120853],
        rtol=1e-12,
    )
    assert np.all(np.diff(roots) < 0)


def test_airy_roots_are_zeros():
    roots = airy_roots(50)
    assert np.max(np.abs(airy_ai(roots))) < 1e-10


@pytest.mark.parametrize("n_max", [0, 51])
def test_airy_roots_range(n_max):
    with pytest.raises(RootFindingError):
        airy_roots(n_max)


def test_hermite_functions_orthonormal():
    rule = QuadratureRule(grid=Grid1D(lower=-15.0, upper=15.0, count=1201))
    h = hermite_functions(20, rule.grid.points)
    gram = (h * quadrature_weights(rule)[None, :]) @ h.T
    assert_allclose(gram, np.eye(21), atol=1e-10)


def test_hermite_function_low_orders():
    xi = np.linspace(-2.0, 2.0, 9)
    assert_allclose(hermite_function(0, xi), math.pi ** -0.25 * np.exp(-xi ** 2 / 2))
    assert_allclose(hermite_function(1, xi), math.pi ** -0.25 * math.sqrt(2.0) * xi * np.exp(-xi ** 2 / 2))
    assert isinstance(hermite_function(2, 0.5), float)


def test_hermite_order_limit():
    with pytest.raises(HermiteOverflowError):
        hermite_functions(65, 0.0)
