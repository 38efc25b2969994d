import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reglab.checks import random_divisor, random_symbol
from reglab.errors import NonInvertibleMultiplier, SingularEntry
from reglab.kronecker import EvalSettings
from reglab.lattice import TorsionCoord, elementary_divisors
from reglab.symbols import (Embedding, MinkowskiVector, SymbolDivisorData, TorsionDivisor,
                            conjugate_lattice, convolve, embedding_pair, galois_act, is_principal,
                            lambda_map, point_pair_symbol, pullback_divisor, pullback_symbol,
                            regulator_at_embedding, regulator_conjugate_direct, regulator_of_divisor)


def P(a, b):
    return TorsionCoord(Fraction(a), Fraction(b))


def test_divisor_merges_and_sorts():
    d = TorsionDivisor(((P("1/3", 0), 2), (P("4/3", 0), -2), (P(0, "1/2"), 1)))
    assert d.entries == ((P(0, "1/2"), 1),)
    assert d.degree() == 1
    assert d.torsion_level == 2


def test_divisor_json_roundtrip():
    d = TorsionDivisor.from_points([("1/5", "2/5", 3), ("0", "1/2", -1)])
    assert TorsionDivisor.from_json(d.to_json()) == d


def test_convolution_small_case():
    f = TorsionDivisor(((P("1/3", 0), 1), (P(0, 0), -1)))
    g = TorsionDivisor(((P(0, "1/3"), 1),))
    conv = convolve(f, g)
    assert conv == TorsionDivisor(((P("1/3", "2/3"), 1), (P(0, "2/3"), -1)))


def test_abel_criterion():
    # (P) + (-P) - 2(0) is principal, (P) - (0) is not for P != 0
    p = P("1/4", "1/2")
    assert is_principal(TorsionDivisor(((p, 1), (-p, 1), (P(0, 0), -2))))
    assert not is_principal(TorsionDivisor(((p, 1), (P(0, 0), -1))))
    assert not point_pair_symbol(p).check_principal()


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_negation_symmetric_divisor_has_zero_regulator(seed):
    from reglab.lattice import make_lattice
    rng = np.random.default_rng(seed)
    d = random_divisor(rng, int(rng.choice([3, 4, 5, 6, 8])), 3, symmetric=True)
    assert d.is_negation_symmetric()
    assert abs(regulator_of_divisor(d, make_lattice(1, 1j))) < 1e-9


def test_origin_entry_dropped_or_rejected(gaussian, caplog):
    d = TorsionDivisor(((P(0, 0), 2), (P("1/3", 0), 1)))
    with caplog.at_level(logging.WARNING):
        r = regulator_of_divisor(d, gaussian)
    assert "origin" in caplog.text
    assert r == regulator_of_divisor(TorsionDivisor(((P("1/3", 0), 1),)), gaussian)
    with pytest.raises(SingularEntry):
        regulator_of_divisor(d, gaussian, EvalSettings(strict=True))


def test_regulator_depends_only_on_tau(gaussian):
    sym = point_pair_symbol(P("1/5", "2/5"))
    assert regulator_at_embedding(sym, gaussian) == pytest.approx(
        regulator_at_embedding(sym, gaussian.scaled(2.5 - 1j)), abs=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_conjugate_embedding(seed, eisenstein):
    sym = random_symbol(np.random.default_rng(seed), 7)
    direct = regulator_conjugate_direct(sym, eisenstein)
    assert abs(direct - regulator_at_embedding(sym, eisenstein).conjugate()) < 1e-10


def test_conjugate_lattice(gaussian, sqrt7):
    for lat in (gaussian, sqrt7):
        bar = conjugate_lattice(lat)
        assert abs(bar.tau + lat.tau.conjugate()) < 1e-14


def test_galois_act_multiplies_points():
    sym = point_pair_symbol(P("1/3", 0))
    out = galois_act(sym, (0, 1), 0, 1)  # multiplication by i on Z[i]
    assert out.f_div == TorsionDivisor(((P(0, "1/3"), 1), (P(0, "2/3"), -1)))
    with pytest.raises(NonInvertibleMultiplier):
        galois_act(sym, (3, 0), 0, 1)


def test_galois_act_split_prime_allowed():
    # on Q(sqrt -7), w = (-7 + sqrt -7)/2: 1 + w has norm 8 but is prime to (4 + w)
    trace, norm = -7, 14
    sym = point_pair_symbol(P("1/2", "1/2"))
    galois_act(sym, (1, 1), trace, norm)


@pytest.mark.parametrize("phi", [2, 1 + 1j, 2 + 1j])
def test_pullback_scales_regulator(gaussian, phi):
    iso = elementary_divisors(phi, gaussian)
    sym = random_symbol(np.random.default_rng(11), 5)
    pulled = pullback_symbol(iso, sym)
    assert pulled.f_div.degree() == iso.degree * sym.f_div.degree()
    lhs = regulator_at_embedding(pulled, gaussian)
    assert abs(lhs - phi * regulator_at_embedding(sym, gaussian)) < 1e-9


@pytest.mark.parametrize("alpha", [1j, 1 + 1j])
def test_ok_module_structure(gaussian, alpha):
    sym = random_symbol(np.random.default_rng(3), 4)
    iso = elementary_divisors(alpha, gaussian)
    emb = embedding_pair("Phi", gaussian)
    lhs = lambda_map(pullback_symbol(iso, sym), emb)
    rhs = lambda_map(sym, emb).scaled(alpha)
    for lab in ("Phi", "Phibar"):
        assert abs(lhs[lab] - rhs[lab]) < 1e-9


def test_pullback_divisor_points_map_back(gaussian):
    iso = elementary_divisors(1 + 1j, gaussian)
    d = TorsionDivisor(((P("1/2", 0), 1),))
    for pt, m in pullback_divisor(iso, d):
        assert iso.image(pt) == P("1/2", 0) and m == 1


def test_lambda_map_requires_closed_family(gaussian):
    sym = point_pair_symbol(P("1/3", "1/3"))
    with pytest.raises(ValueError):
        lambda_map(sym, [Embedding("Phi", gaussian, "Phibar")])
    vec = lambda_map(sym, embedding_pair("Phi", gaussian))
    assert vec.in_real_space()


def test_minkowski_vector_scaling():
    v = MinkowskiVector({"a": 1 + 2j, "abar": 1 - 2j}, {"a": "abar", "abar": "a"})
    s = v.scaled(1j)
    assert s["a"] == 1j * (1 + 2j)
    assert s["abar"] == (1j * (1 + 2j)).conjugate()
    assert s.conjugation_residual() == 0
    assert not MinkowskiVector({"a": 1j, "abar": 1j}, {"a": "abar", "abar": "a"}).in_real_space()


def test_symbol_json_roundtrip():
    sym = random_symbol(np.random.default_rng(5), 6)
    again = SymbolDivisorData.from_json(sym.to_json())
    assert again == sym and again.convolution == sym.convolution
