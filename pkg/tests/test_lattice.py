import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reglab.errors import DegenerateLattice, NotAnIsogeny, NotUnimodular
from reglab.intlinalg import matmul, smith_normal_form
from reglab.lattice import (TorsionCoord, cm_matrix, elementary_divisors, gauss_reduce,
                            kernel_cosets, make_lattice, orthogonality_sum, pairing, sl2_change,
                            torsion_points)

small = st.integers(-6, 6)


def test_orientation_is_normalized():
    lat = make_lattice(1, -1j)
    assert lat.delta == -1
    assert lat.tau == 1j
    assert lat.raw_omega2 == -1j
    assert lat.defining_residual() < 1e-12


@pytest.mark.parametrize("w1,w2", [(1, 2), (0, 1j), (1 + 1j, 2 + 2j)])
def test_degenerate_bases_rejected(w1, w2):
    with pytest.raises(DegenerateLattice):
        make_lattice(w1, w2)


def test_area_of_gaussian_lattice(gaussian):
    assert gaussian.area == pytest.approx(1 / math.pi)
    assert gaussian.scaled(2).area == pytest.approx(4 / math.pi)


def test_coordinates_roundtrip(eisenstein):
    z = eisenstein.point(0.3, -1.7)
    a, b = eisenstein.coordinates(z)
    assert (a, b) == pytest.approx((0.3, -1.7))
    assert eisenstein.contains(eisenstein.point(3, -2))
    assert not eisenstein.contains(eisenstein.point(0.5, 0))


@given(small, small, small, small)
def test_pairing_trivial_on_lattice(a, b, c, d):
    lat = make_lattice(1, complex(0.5, math.sqrt(7) / 2))
    assert abs(pairing(lat.point(a, b), lat.point(c, d), lat) - 1) < 1e-9


@given(st.floats(-2, 2), st.floats(-2, 2), small, small)
def test_pairing_is_unimodular_and_antisymmetric(x, y, c, d):
    lat = make_lattice(1, 1j)
    z, w = complex(x, y), lat.point(c, d) + 0.37j
    p = pairing(z, w, lat)
    assert abs(abs(p) - 1) < 1e-12
    assert abs(p * pairing(w, z, lat) - 1) < 1e-9


@pytest.mark.parametrize("d", [2, 3, 4])
def test_orthogonality_sum(gaussian, d):
    for a in range(-3, 4):
        for b in range(-3, 4):
            expected = d * d if a % d == 0 and b % d == 0 else 0
            assert abs(orthogonality_sum(gaussian.point(a, b), d, gaussian) - expected) < 1e-9


def test_sl2_change_transforms_tau(gaussian):
    a, b, c, d = 2, 1, 1, 1
    new = sl2_change(gaussian, a, b, c, d)
    tau = gaussian.tau
    assert abs(new.tau - (a * tau + b) / (c * tau + d)) < 1e-12
    assert new.area == pytest.approx(gaussian.area)
    with pytest.raises(NotUnimodular):
        sl2_change(gaussian, 2, 0, 0, 1)


@given(st.floats(-3, 3), st.floats(0.2, 5))
def test_gauss_reduce(x, y):
    lat = make_lattice(1, complex(x, y))
    red = gauss_reduce(lat)
    assert red.area == pytest.approx(lat.area, rel=1e-9)
    assert abs(red.tau.real) <= 0.5 + 1e-9
    assert abs(red.tau) >= 1 - 1e-9
    assert lat.contains(red.omega1) and lat.contains(red.omega2)


def test_torsion_coord_normalization():
    p = TorsionCoord(Fraction(-1, 3), Fraction(7, 4))
    assert (p.a, p.b) == (Fraction(2, 3), Fraction(3, 4))
    assert p.order == 12
    assert (-p + p).is_zero()
    assert p.times(12).is_zero()


@given(st.tuples(small, small), st.tuples(small, small), st.integers(1, 12))
def test_torsion_group_laws(u, v, n):
    p = TorsionCoord(Fraction(u[0], n), Fraction(u[1], n))
    q = TorsionCoord(Fraction(v[0], n), Fraction(v[1], n))
    assert p + q == q + p
    assert (p - q) + q == p
    assert p.times(n).is_zero()


@given(small, small, st.tuples(small, small))
def test_cm_matrix_is_multiplication(x, y, pt):
    # Z[w] with w = (-3 + sqrt -3)/2: w^2 = -3w - 3
    trace, norm = -3, 3
    w = complex(-1.5, math.sqrt(3) / 2)
    lat = make_lattice(1, w)
    a, b = Fraction(pt[0], 5), Fraction(pt[1], 5)
    image = TorsionCoord(a, b).transform(cm_matrix(x, y, trace, norm))
    direct = (x + y * w) * lat.point(a, b)
    assert lat.contains(direct - image.value(lat))


@pytest.mark.parametrize("phi,divs", [(2, (2, 2)), (1 + 1j, (1, 2)), (2 + 1j, (1, 5)), (3, (3, 3))])
def test_elementary_divisors_gaussian(gaussian, phi, divs):
    iso = elementary_divisors(phi, gaussian)
    assert (iso.d1, iso.d2) == divs
    assert iso.degree == round(abs(phi) ** 2)
    ker = kernel_cosets(iso)
    assert len(ker) == iso.degree
    for t in ker:
        assert gaussian.contains(phi * t.value(gaussian))


def test_elementary_divisors_eisenstein(eisenstein):
    iso = elementary_divisors(2, eisenstein)
    assert (iso.d1, iso.d2) == (2, 2)
    src, tgt = iso.adapted_bases
    assert abs(2 * src[0] - iso.d1 * tgt[0]) < 1e-9
    assert abs(2 * src[1] - iso.d2 * tgt[1]) < 1e-9


def test_non_isogeny_rejected(gaussian):
    with pytest.raises(NotAnIsogeny):
        elementary_divisors(0.5, gaussian)


def test_image_preimage_roundtrip(gaussian):
    iso = elementary_divisors(2 + 1j, gaussian)
    for q in torsion_points(5):
        p = iso.preimage(q)
        assert iso.image(p) == q


def _matrices():
    return st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=2, max_size=3)


@given(_matrices())
@settings(max_examples=60)
def test_smith_normal_form(m):
    S, P, Q = smith_normal_form(m)
    assert matmul(matmul(P, m), Q) == S
    diag = [S[i][i] for i in range(min(len(S), len(S[0])))]
    for i, row in enumerate(S):
        for j, v in enumerate(row):
            if i != j:
                assert v == 0
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
