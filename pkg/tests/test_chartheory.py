import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reglab.chartheory import (CharacterData, CosetSystem, FiniteAbelianGroup, Subgroup,
                               all_characters, dedekind_det_matrix, dedekind_det_spectral,
                               dedekind_matrix, extensions_of, group_convolution, present,
                               scalar_product, subgroup_characters, subgroup_from_elements)
from reglab.checks import dedekind_configurations
from reglab.errors import NotASubgroup

Z6 = FiniteAbelianGroup((6,))
Z2Z4 = FiniteAbelianGroup((2, 4))


def test_group_arithmetic():
    assert Z2Z4.order == 8 and len(Z2Z4.elements) == 8
    assert Z2Z4.add((1, 3), (1, 2)) == (0, 1)
    assert Z2Z4.neg((1, 1)) == (1, 3)
    assert Z2Z4.times(4, (1, 1)) == Z2Z4.identity
    with pytest.raises(ValueError):
        FiniteAbelianGroup((0, 2))


def test_character_values_and_order():
    chi = CharacterData(Z6, (1,))
    assert chi((1,)) == pytest.approx(cmath.exp(1j * cmath.pi / 3))
    assert chi.angle((3,)) == Fraction(1, 2)
    assert chi.order == 6 and CharacterData(Z6, (2,)).order == 3
    assert (chi * chi.conj()).is_trivial()
    assert CharacterData(Z6, (3,)).is_real() and not chi.is_real()


def test_orthogonality():
    chars = all_characters(Z2Z4)
    for a in chars:
        for b in chars:
            numeric = sum(a(x) * b(x).conjugate() for x in Z2Z4.elements) / Z2Z4.order
            assert abs(numeric - float(scalar_product(a, b))) < 1e-12


def test_presentation_from_relations():
    # Z^2 / <(2, 0), (0, 6), (1, 3)> is cyclic of order 6
    pres = present(2, [(2, 0), (0, 6), (1, 3)])
    assert pres.group.order == 6
    assert pres.to_group((2, 0)) == pres.group.identity
    assert pres.to_group((1, 3)) == pres.group.identity
    with pytest.raises(ValueError):
        present(2, [(1, 0)])


def test_subgroups():
    H = Subgroup(Z2Z4, ((0, 2),))
    assert H.order == 2 and H.index == 4
    assert Subgroup.whole(Z2Z4).order == 8 and Subgroup.trivial(Z2Z4).order == 1
    assert subgroup_from_elements(Z6, [(0,), (2,), (4,)]).order == 3
    with pytest.raises(NotASubgroup):
        subgroup_from_elements(Z6, [(0,), (1,)])


def test_extension_counts():
    for Gamma, G, chi in dedekind_configurations():
        exts = extensions_of(Gamma, G, chi)
        assert len(exts) == G.index
        assert len(subgroup_characters(G)) == G.order


def test_extensions_require_common_group():
    with pytest.raises(NotASubgroup):
        extensions_of(Z6, Subgroup(Z2Z4, ()), CharacterData(Z6, (0,)))


def test_factor_set_lies_in_subgroup():
    G = Subgroup(Z2Z4, ((1, 1),))
    cs = CosetSystem.random(G, np.random.default_rng(1))
    for (c, c1), g in cs.factor_set.items():
        assert G.contains(g)
        assert Z2Z4.add(g, c) == Z2Z4.add(c1, cs.rep(Z2Z4.sub(c, c1)))


def test_bad_transversal_rejected():
    G = Subgroup(Z6, ((3,),))
    with pytest.raises(NotASubgroup):
        CosetSystem(G, ((0,), (3,), (1,)))


def test_trivial_subgroup_gives_group_determinant():
    f = {x: complex(k + 1, k * k) for k, x in enumerate(Z6.elements)}.__getitem__
    G = Subgroup.trivial(Z6)
    M = dedekind_matrix(Z6, G, CharacterData(Z6, (0,)), f)
    # circulant: entries f(c' - c)
    assert M[1, 3] == f((2,))
    spec = dedekind_det_spectral(Z6, G, CharacterData(Z6, (0,)), f)
    assert abs(np.linalg.det(M) - spec) < 1e-9 * abs(spec)


def test_whole_group_is_single_character_sum():
    f = {x: 1.0 + x[0] for x in Z6.elements}.__getitem__
    chi = CharacterData(Z6, (1,))
    det = dedekind_det_matrix(Z6, Subgroup.whole(Z6), chi, f)
    assert abs(det - sum(chi(x) * f(x) for x in Z6.elements)) < 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 5))
@settings(max_examples=30, deadline=None)
def test_dedekind_routes_agree(seed, k):
    Gamma, G, chi = dedekind_configurations()[k]
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=Gamma.order) + 1j * rng.normal(size=Gamma.order)
    f = dict(zip(Gamma.elements, vals)).__getitem__
    spec = dedekind_det_spectral(Gamma, G, chi, f)
    mat = dedekind_det_matrix(Gamma, G, chi, f, CosetSystem.random(G, rng))
    assert abs(spec - mat) < 1e-10 * max(1.0, abs(spec))


def test_convolution_diagonalizes():
    rng = np.random.default_rng(4)
    f = dict(zip(Z2Z4.elements, rng.normal(size=8))).__getitem__
    g = dict(zip(Z2Z4.elements, rng.normal(size=8))).__getitem__
    h = group_convolution(Z2Z4, f, g)
    for psi in all_characters(Z2Z4):
        hat = lambda u: sum(u(x) * psi(x) for x in Z2Z4.elements)
        assert abs(hat(h) - hat(f) * hat(g)) < 1e-12
