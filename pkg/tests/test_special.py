import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d2dcache.coverage import bs_coverage_integral
from d2dcache.errors import DomainError
from d2dcache.special import gamma_fn, gauss_2f1


def test_gamma_known_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("x", np.linspace(0.01, 10.0, 37))
def test_gamma_against_mpmath(x):
    assert gamma_fn(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-12)


@pytest.mark.parametrize("x", [0, -1, -2, -7])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


@pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0, 5.5, 8.0])
def test_gamma_reflection_product(alpha):
    d = 2.0 / alpha
    # Gamma(1+d) Gamma(1-d) = pi d / sin(pi d)
    assert gamma_fn(1 + d) * gamma_fn(1 - d) == pytest.approx(math.pi * d / math.sin(math.pi * d),
                                                              rel=1e-13)
    if alpha == 4.0:
        assert gamma_fn(1 + d) * gamma_fn(1 - d) == pytest.approx(math.pi / 2, rel=1e-14)


def test_2f1_at_zero():
    assert gauss_2f1(0.3, -1.7, 2.2, 0.0) == 1.0


def test_2f1_coverage_point():
    assert gauss_2f1(1.0, -0.5, 0.5, -1.0) == pytest.approx(1 + math.pi / 4, rel=1e-12)


@pytest.mark.parametrize("alpha", [2.2, 2.5, 3.0, 4.0, 5.0, 6.0])
@pytest.mark.parametrize("theta", [1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0, 1e4])
def test_2f1_coverage_family_against_mpmath(alpha, theta):
    d = 2.0 / alpha
    ref = float(mpmath.hyp2f1(1, -mpmath.mpf(2) / alpha, 1 - mpmath.mpf(2) / alpha, -theta))
    assert gauss_2f1(1.0, -d, 1.0 - d, -theta) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a,b,c,z", [
    (0.5, 0.25, 1.5, -0.3),
    (1.2, 2.5, 3.1, -0.9),
    (-0.7, 1.3, 0.4, -4.0),
    (2.0, 0.5, 1.25, -20.0),
    (0.5, 1.5, 2.0, -200.0),
    (-3.0, 1.5, 2.5, -7.0),     # terminating
    (1.0, 1.0, 2.0, -1.0),      # log(2)
])
def test_2f1_general_against_mpmath(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assert gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-10)


def test_2f1_log_identity():
    assert gauss_2f1(1.0, 1.0, 2.0, -1.0) == pytest.approx(math.log(2.0), rel=1e-12)


@pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0, 6.0])
@pytest.mark.parametrize("theta", [0.05, 1.0, 7.0, 300.0])
def test_series_and_integral_forms_agree(alpha, theta):
    d = 2.0 / alpha
    assert 1.0 / gauss_2f1(1.0, -d, 1.0 - d, -theta) == pytest.approx(
        bs_coverage_integral(theta, alpha), rel=1e-10)


def test_2f1_monotone_along_negative_axis():
    d = 0.5
    thetas = np.logspace(-3, 3, 80)
    vals = [gauss_2f1(1.0, -d, 1.0 - d, -t) for t in thetas]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_2f1_domain_errors():
    with pytest.raises(DomainError):
        gauss_2f1(1.0, 1.0, -2.0, -0.5)
    with pytest.raises(DomainError):
        gauss_2f1(1.0, 1.0, 2.0, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(2.05, 10.0), st.floats(1e-4, 1e3))
def test_2f1_property_against_mpmath(alpha, theta):
    d = 2.0 / alpha
    ref = float(mpmath.hyp2f1(1, -d, 1 - d, -theta))
    assert gauss_2f1(1.0, -d, 1.0 - d, -theta) == pytest.approx(ref, rel=1e-10)
