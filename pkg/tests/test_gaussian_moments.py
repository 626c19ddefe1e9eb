"""Moment recursion of the shifted complex Gaussian weight vs quadrature."""

import cmath

import numpy as np
import pytest
from scipy.integrate import quad

from cohevol import DomainError, gaussian_moment_ratios


def _quad_moment(j, w, b, hbar):
    # direct numerical moment of exp(-(w x^2 - 2 sqrt(2) b x)/(2 hbar));
    # integration limits chosen so the dropped tail is below 1e-14 of the peak
    def integrand_re(x):
        return (x**j * cmath.exp(-(w * x * x - 2.0 * np.sqrt(2.0) * b * x) / (2.0 * hbar))).real

    def integrand_im(x):
        return (x**j * cmath.exp(-(w * x * x - 2.0 * np.sqrt(2.0) * b * x) / (2.0 * hbar))).imag

    limit = 14.0 * np.sqrt(hbar / w.real) + 6.0 * abs(b) / w.real
    re, _ = quad(integrand_re, -limit, limit, epsabs=1e-13, epsrel=1e-12, limit=400)
    im, _ = quad(integrand_im, -limit, limit, epsabs=1e-13, epsrel=1e-12, limit=400)
    return complex(re, im)


@pytest.mark.parametrize(
    "w,b,hbar",
    [
        (1.5 + 0.0j, 0.4 + 0.0j, 0.3),
        (1.0 + 0.8j, 0.4 - 0.2j, 0.3),
        (0.4 - 0.9j, -0.3 + 0.5j, 0.15),
        (2.0 + 1.5j, 0.0j, 0.5),
    ],
)
def test_recursion_matches_quadrature(w, b, hbar):
    ratios = gaussian_moment_ratios(6, w, b, hbar)
    m0 = _quad_moment(0, w, b, hbar)
    for j in range(1, 7):
        expected = _quad_moment(j, w, b, hbar) / m0
        assert ratios[j] == pytest.approx(expected, rel=5e-11, abs=1e-13)


def test_seed_integral_closed_form():
    # M0 = sqrt(2 pi hbar / w) exp(b^2 / (hbar w)) with the principal root
    w, b, hbar = 1.2 + 0.7j, 0.3 - 0.4j, 0.25
    m0 = _quad_moment(0, w, b, hbar)
    expected = cmath.sqrt(2.0 * np.pi * hbar / w) * cmath.exp(b * b / (hbar * w))
    assert m0 == pytest.approx(expected, rel=1e-11)


def test_rejects_nonpositive_real_part():
    with pytest.raises(DomainError):
        gaussian_moment_ratios(2, -1.0 + 0.5j, 0.1 + 0j, 0.3)


def test_pure_gaussian_odd_moments_vanish():
    ratios = gaussian_moment_ratios(5, 2.0 + 0j, 0j, 0.4)
    assert ratios[1] == 0
    assert ratios[3] == 0
    assert ratios[5] == 0
    # even moments follow (hbar/w)^k (2k-1)!!
    assert ratios[2] == pytest.approx(0.4 / 2.0)
    assert ratios[4] == pytest.approx(3.0 * (0.4 / 2.0) ** 2)
