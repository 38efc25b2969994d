import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reglab.errors import ConvergenceRegion, NomeOutOfRange, PoleEncountered
from reglab.kronecker import (B3Reading, EvalSettings, J, Jq, Route, Rq, bernoulli3, bloch_wigner,
                              calibrate_b3_reading, completed_kronecker, dilog, elliptic_dilog_Dq,
                              functional_equation_residual, k21, k21_continued, k21_crosscheck,
                              k21_direct, k21_qseries, kronecker_continued, kronecker_direct,
                              reduce_to_annulus, upper_gamma)
from reglab.lattice import make_lattice

# Frozen K_{2,1} values; each agreed across the q-series, continued and direct
# (radius 1500) routes when frozen.
K21_FROZEN = [
    ("gaussian", (1 / 7, 2 / 7), 1.4011010869418183 - 2.2717843413430296j),
    ("eisenstein", (1 / 4, 0), 3.6048008602414474 + 0j),
    ("sqrt7", (1 / 5, 0), 1.7826423377848635 + 0j),
]

CLAUSEN_PI_3 = 1.0149416064096536  # Cl_2(pi/3) = D(exp(i pi/3))
Q = 0.01 + 0.02j

complex_pts = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)).filter(
    lambda z: abs(z) > 1e-3 and abs(z - 1) > 1e-3)


def _series_li2(z, terms=400):
    return sum(z ** n / n ** 2 for n in range(1, terms))


def test_dilog_closed_forms():
    assert dilog(0.5).real == pytest.approx(math.pi ** 2 / 12 - math.log(2) ** 2 / 2, abs=1e-15)
    assert dilog(0.5) == pytest.approx(_series_li2(0.5), abs=1e-15)
    assert dilog(-1).real == pytest.approx(-math.pi ** 2 / 12, abs=1e-15)
    assert dilog(1) == pytest.approx(math.pi ** 2 / 6)
    assert dilog(0) == 0


@given(complex_pts)
@settings(max_examples=200)
def test_dilog_matches_mpmath(z):
    ref = complex(mpmath.polylog(2, z))
    if z.imag == 0 and z.real > 1:
        ref = complex(mpmath.polylog(2, mpmath.mpc(z.real, 1e-30)))
    assert abs(dilog(z) - ref) < 1e-13 * max(1, abs(ref))


def test_dilog_cut_returns_upper_side():
    z = 3.0
    above = complex(mpmath.polylog(2, mpmath.mpc(3, 1e-30)))
    assert abs(dilog(z) - above) < 1e-13
    assert dilog(z).imag == pytest.approx(math.pi * math.log(3))


def test_bloch_wigner_special_values():
    assert bloch_wigner(cmath.exp(1j * math.pi / 3)) == pytest.approx(CLAUSEN_PI_3, abs=1e-14)
    assert float(mpmath.clsin(2, mpmath.pi / 3)) == pytest.approx(CLAUSEN_PI_3, abs=1e-15)
    assert bloch_wigner(1 + 0j) == 0
    assert bloch_wigner(2.5) == 0


@given(complex_pts.filter(lambda z: abs(z.imag) > 1e-3))
def test_bloch_wigner_symmetries(z):
    d = bloch_wigner(z)
    assert bloch_wigner(z.conjugate()) == pytest.approx(-d, abs=1e-12)
    assert bloch_wigner(1 / z) == pytest.approx(-d, abs=1e-12)
    assert bloch_wigner(1 - z) == pytest.approx(-d, abs=1e-12)


def test_bernoulli3_and_J():
    assert bernoulli3(0) == 0 and bernoulli3(1) == 0 and bernoulli3(0.5) == 0
    assert bernoulli3(0.25) == pytest.approx(3 / 64)
    assert J(0) == 0 and J(1) == 0
    assert J(0.5) == pytest.approx(math.log(0.5) ** 2)


def test_reduce_to_annulus():
    z = reduce_to_annulus(5 + 1j, Q)
    assert abs(Q) < abs(z) <= 1
    with pytest.raises(NomeOutOfRange):
        reduce_to_annulus(0.5, 1.5)
    with pytest.raises(NomeOutOfRange):
        elliptic_dilog_Dq(0.5, 0)


@given(complex_pts)
@settings(max_examples=50)
def test_elliptic_dilog_periodicity_and_oddness(z):
    d = elliptic_dilog_Dq(z, Q)
    assert elliptic_dilog_Dq(Q * z, Q) == pytest.approx(d, abs=1e-12)
    assert elliptic_dilog_Dq(1 / z, Q) == pytest.approx(-d, abs=1e-12)
    assert Jq(Q * z, Q) == pytest.approx(Jq(z, Q), abs=1e-10)
    assert Rq(z, Q) == pytest.approx(complex(d, -Jq(z, Q)))


def test_b3_calibration(gaussian):
    pts = [complex(0.1, 0.3), complex(0.4, 0.15), complex(0.23, 0.71)]
    out = calibrate_b3_reading(pts, gaussian)
    assert out[B3Reading.CALIBRATED.value] < 1e-12
    assert out[B3Reading.PRINTED.value] > 1.0


@pytest.mark.parametrize("s", [2.5, 0.7, -1.5, -2.0, 0.0, 3.0])
def test_upper_gamma_real(s):
    c = np.array([0.1, 1.0, 7.5])
    ref = [float(mpmath.gammainc(s, ci)) for ci in c]
    assert np.allclose(upper_gamma(s, c), ref, rtol=1e-12, atol=1e-300)


def test_upper_gamma_complex():
    c = np.array([0.3, 2.0])
    s = 1 + 0.5j
    ref = [complex(mpmath.gammainc(s, ci)) for ci in c]
    assert np.allclose(upper_gamma(s, c), ref, rtol=1e-12)


def test_settings_validation():
    with pytest.raises(ValueError):
        EvalSettings(tol=1.0)
    with pytest.raises(ValueError):
        EvalSettings(max_q_terms=2)
    with pytest.raises(ValueError):
        EvalSettings(shell_radius=1)
    assert EvalSettings().with_route("direct").route is Route.DIRECT


@pytest.mark.parametrize("name,pt,value", K21_FROZEN)
def test_k21_frozen_values(name, pt, value, gaussian, eisenstein, sqrt7):
    lat = {"gaussian": gaussian, "eisenstein": eisenstein, "sqrt7": sqrt7}[name]
    u = lat.point(*pt)
    assert abs(k21_qseries(u, lat) - value) < 1e-12
    assert abs(k21_continued(u, lat) - value) < 1e-12
    assert abs(k21_direct(u, lat, EvalSettings(shell_radius=400)) - value) < 2e-2 * abs(value)


def test_k21_crosscheck_reports_rq_identity(gaussian):
    cc = k21_crosscheck(gaussian.point(0.2, 0.1), gaussian)
    assert cc.reg_identity_residual < 1e-12
    assert cc.residuals[("qseries", "continued")] < 1e-12
    assert set(cc.to_json()["values"]) == {"qseries", "continued", "direct"}


def test_k21_auto_route_on_wide_lattice():
    lat = make_lattice(1, complex(0.4, 0.45))  # |q| > e^{-pi}: continued route
    u = lat.point(0.3, 0.2)
    assert k21(u, lat) == k21_continued(u, lat)
    assert abs(k21_qseries(u, lat) - k21_continued(u, lat)) < 1e-9


def test_direct_sum_needs_convergence(gaussian):
    with pytest.raises(ConvergenceRegion):
        kronecker_direct(1, 0j, 0.3, 1.5, gaussian)


def test_pole_encountered(gaussian):
    with pytest.raises(PoleEncountered):
        completed_kronecker(0, 0j, 0.3, 0, gaussian)
    with pytest.raises(PoleEncountered):
        completed_kronecker(0, 0.3, 0j, 1, gaussian)


@pytest.mark.parametrize("a", [0, 1])
@pytest.mark.parametrize("x,x0", [(0.21 + 0.4j, 0.13 - 0.2j), (0j, 0.3 + 0.1j), (0.3 + 0.1j, 0j),
                                  (1 + 1j, 0.25)])
def test_continued_matches_direct(eisenstein, a, x, x0):
    s = 3.5
    direct = kronecker_direct(a, x, x0, s, eisenstein, EvalSettings(shell_radius=300))
    assert abs(kronecker_continued(a, x, x0, s, eisenstein) - direct) < 1e-9


def test_printed_functional_equation_phase_fails(gaussian):
    x, x0 = gaussian.point(0.2, 0.4), gaussian.point(1 / 7, 3 / 7)
    assert functional_equation_residual(1, x, x0, 0.7, gaussian) < 1e-10
    assert functional_equation_residual(1, x, x0, 0.7, gaussian, printed_phase=True) > 1e-3


@given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.integers(-3, 3), st.integers(-3, 3))
@settings(max_examples=40, deadline=None)
def test_k21_odd_and_periodic(a, b, m, n):
    lat = make_lattice(1, complex(-0.5, math.sqrt(3) / 2))
    u = lat.point(a, b)
    v = k21(u, lat)
    assert abs(k21(-u, lat) + v) < 1e-10
    assert abs(k21(u + lat.point(m, n), lat) - v) < 1e-10


def test_k21_homothety(gaussian):
    # A(cL)^2 K_{2,1}(cu, cL) = conj(c) A(L)^2 K_{2,1}(u, L)
    c = 1.3 - 0.4j
    u = gaussian.point(0.17, 0.33)
    big = gaussian.scaled(c)
    lhs = big.area ** 2 * k21(c * u, big)
    rhs = gaussian.area ** 2 * k21(u, gaussian) * c.conjugate()
    assert abs(lhs - rhs) < 1e-10
