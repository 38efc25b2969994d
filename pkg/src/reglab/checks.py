"""Named invariant suites shared by the CLI and the acceptance tests.

Each suite draws its random inputs from a seeded numpy Generator, so a suite
run is reproducible from (name, seed, settings).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chartheory import (CharacterData, CosetSystem, FiniteAbelianGroup, Subgroup,
                         dedekind_det_matrix, dedekind_det_spectral)
from .errors import ConfigError
from .kronecker import (DEFAULT_SETTINGS, EvalSettings, functional_equation_residual, k21,
                        kronecker_continued)
from .lattice import (ComplexLattice, TorsionCoord, elementary_divisors, kernel_cosets,
                      make_lattice, pairing, torsion_points)
from .stark import laplace_block_check
from .symbols import (SymbolDivisorData, TorsionDivisor, embedding_pair, lambda_map,
                      pullback_symbol, regulator_at_embedding, regulator_conjugate_direct,
                      regulator_of_divisor)

log = logging.getLogger(__name__)


def standard_lattices() -> dict[str, ComplexLattice]:
    """Z[i], the Eisenstein lattice and the ring of integers of Q(sqrt -7)."""
    return {
        "gaussian": make_lattice(1, 1j),
        "eisenstein": make_lattice(1, complex(-0.5, math.sqrt(3) / 2)),
        "sqrt-7": make_lattice(1, complex(0.5, math.sqrt(7) / 2)),
    }


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def to_json(self) -> dict:
        return {"name": self.name, "residual": float(self.residual), "tol": self.tol,
                "passed": self.passed, **self.detail}


@dataclass
class SuiteResult:
    suite: str
    seed: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> CheckResult:
        return max(self.checks, key=lambda c: c.residual / c.tol)

    def to_json(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "passed": self.passed,
                "n_checks": len(self.checks), "checks": [c.to_json() for c in self.checks]}


def random_divisor(rng: np.random.Generator, level: int, n_points: int,
                   symmetric: bool = False) -> TorsionDivisor:
    entries = []
    for _ in range(n_points):
        pt = TorsionCoord(0, 0)
        while pt.is_zero():
            pt = TorsionCoord(Fraction(int(rng.integers(level)), level),
                              Fraction(int(rng.integers(level)), level))
        m = int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)
        entries.append((pt, m))
        if symmetric:
            entries.append((-pt, m))
    return TorsionDivisor(tuple(entries))


def random_symbol(rng: np.random.Generator, level: int) -> SymbolDivisorData:
    """Random symbol data whose convolution avoids the origin."""
    while True:
        sym = SymbolDivisorData(random_divisor(rng, level, 2), random_divisor(rng, level, 2))
        if all(not pt.is_zero() for pt, _ in sym.convolution):
            return sym


# --------------------------------------------------------------------------
# suites


def suite_fneqn(rng, settings: EvalSettings = DEFAULT_SETTINGS, n: int = 20) -> list:
    """Functional equation at (x, x0) in (1/5)L x (1/7)L."""
    lats = list(standard_lattices().items())
    out = []
    for k in range(n):
        name, lat = lats[k % len(lats)]
        i, j = rng.integers(-5, 10, size=2)
        p, q = rng.integers(-7, 14, size=2)
        x, x0 = lat.point(i / 5, j / 5), lat.point(p / 7, q / 7)
        a = int(rng.integers(2))
        for s in (0.7, 1.3, 1 + 0.5j):
            r = functional_equation_residual(a, x, x0, s, lat)
            out.append(CheckResult(f"fneqn[{name},a={a},x=({i},{j})/5,x0=({p},{q})/7,s={s}]", r, 1e-8))
    return out


def _relative(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def suite_distribution(rng, settings: EvalSettings = DEFAULT_SETTINGS, n: int = 4) -> list:
    lats = standard_lattices()
    cases = [("gaussian", 2), ("gaussian", 1 + 1j), ("gaussian", 2 + 1j), ("eisenstein", 2)]
    out = []
    for name, phi in cases:
        lat = lats[name]
        iso = elementary_divisors(phi, lat)
        ker = [t.value(lat) for t in kernel_cosets(iso)]
        for _ in range(n):
            u = lat.point(*rng.uniform(0.02, 0.98, size=2))
            lhs = phi * k21(phi * u, lat, settings)
            rhs = iso.degree * sum(k21(u - t, lat, settings) for t in ker)
            out.append(CheckResult(f"distribution[{name},phi={phi}]", _relative(lhs, rhs), 1e-9))
    # multiplication by d, general (a, s), with x0 in (1/d)L
    for name, lat in lats.items():
        for d in (2, 3):
            x0 = lat.point(int(rng.integers(d)) / d, int(rng.integers(1, d)) / d)
            x = lat.point(*rng.uniform(0.05, 0.95, size=2))
            for a in (0, 1):
                lhs = d ** (2 + a - 5.0) * kronecker_continued(a, x0, d * x, 2.5, lat, settings)
                rhs = sum(pairing(d * x0, x + t.value(lat), lat)
                          * kronecker_continued(a, 0j, x + t.value(lat), 2.5, lat, settings)
                          for t in torsion_points(d))
                out.append(CheckResult(f"mult-by-d[{name},d={d},a={a},s=2.5]", abs(lhs - rhs), 1e-6))
    # regulator compatibility with pullback
    lat = lats["gaussian"]
    for phi in (2, 1 + 1j):
        iso = elementary_divisors(phi, lat)
        for _ in range(2):
            sym = random_symbol(rng, 5)
            lhs = regulator_at_embedding(pullback_symbol(iso, sym), lat, settings)
            rhs = phi * regulator_at_embedding(sym, lat, settings)
            out.append(CheckResult(f"pullback[gaussian,phi={phi}]", abs(lhs - rhs) / max(1.0, abs(rhs)), 1e-9))
    return out


def dedekind_configurations() -> list:
    """(Gamma, G, chi) triples covering trivial, whole and proper subgroups."""
    Z6 = FiniteAbelianGroup((6,))
    Z2Z4 = FiniteAbelianGroup((2, 4))
    Z3Z3 = FiniteAbelianGroup((3, 3))
    return [
        (Z6, Subgroup.trivial(Z6), CharacterData(Z6, (0,))),
        (Z6, Subgroup(Z6, ((2,),)), CharacterData(Z6, (1,))),
        (Z6, Subgroup(Z6, ((3,),)), CharacterData(Z6, (3,))),
        (Z2Z4, Subgroup(Z2Z4, ((0, 2),)), CharacterData(Z2Z4, (0, 2))),
        (Z2Z4, Subgroup(Z2Z4, ((1, 1),)), CharacterData(Z2Z4, (1, 1))),
        (Z3Z3, Subgroup(Z3Z3, ((1, 2),)), CharacterData(Z3Z3, (2, 0))),
    ]


def suite_dedekind(rng, settings: EvalSettings = DEFAULT_SETTINGS, n: int = 100) -> list:
    out = []
    configs = dedekind_configurations()
    for k in range(n):
        Gamma, G, chi = configs[k % len(configs)]
        vals = rng.normal(size=Gamma.order) + 1j * rng.normal(size=Gamma.order)
        table = dict(zip(Gamma.elements, vals))
        f = table.__getitem__
        spec = dedekind_det_spectral(Gamma, G, chi, f)
        mat = dedekind_det_matrix(Gamma, G, chi, f)
        resampled = dedekind_det_matrix(Gamma, G, chi, f, CosetSystem.random(G, rng))
        scale = max(1.0, abs(spec))
        label = f"dedekind[{Gamma.cyclic_orders},G={G.gens},chi={chi.exponents}]"
        out.append(CheckResult(label, abs(spec - mat) / scale, 1e-10))
        out.append(CheckResult(label + "[resampled]", abs(spec - resampled) / scale, 1e-10))
    return out


def _random_field_element(rng) -> tuple:
    return (Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))),
            Fraction(int(rng.integers(1, 5)) * (1 if rng.random() < 0.5 else -1), int(rng.integers(1, 4))))


def suite_laplace(rng, settings: EvalSettings = DEFAULT_SETTINGS, n: int = 50) -> list:
    out = []
    for h in (1, 2, 3):
        for _ in range(n):
            D = int(rng.choice([-3, -4, -7, -8, -11]))
            R = rng.normal(size=(h, h)) + 1j * rng.normal(size=(h, h))
            pp, pm = _random_field_element(rng), _random_field_element(rng)
            res = laplace_block_check(R, pp, pm, D)
            rel = abs(res.kappa - res.kappa_exact) / max(1.0, abs(res.kappa_exact))
            rec_res = res.recognition.residual / max(1.0, abs(res.kappa_exact))
            resid = max(rel, rec_res) if res.parity_ok else math.inf
            out.append(CheckResult(f"laplace[h={h},D={D}]", resid, 1e-9,
                                   {"classification": res.classification,
                                    "recognized_as": res.recognition.kind}))
    return out


def suite_conjugation(rng, settings: EvalSettings = DEFAULT_SETTINGS, n: int = 10) -> list:
    lats = list(standard_lattices().items())
    out = []
    for k in range(n):
        name, lat = lats[k % len(lats)]
        sym = random_symbol(rng, int(rng.choice([3, 4, 5, 7])))
        direct = regulator_conjugate_direct(sym, lat, settings)
        reg = regulator_at_embedding(sym, lat, settings)
        out.append(CheckResult(f"conjugation[{name}]", abs(direct - reg.conjugate()), 1e-10))
        vec = lambda_map(sym, embedding_pair("Phi", lat), settings)
        out.append(CheckResult(f"minkowski[{name}]", vec.conjugation_residual(), 1e-10))
    return out


def suite_oddness(rng, settings: EvalSettings = DEFAULT_SETTINGS, n: int = 5) -> list:
    out = []
    for name, lat in standard_lattices().items():
        for half in ((0.5, 0), (0, 0.5), (0.5, 0.5)):
            out.append(CheckResult(f"two-torsion[{name},{half}]", abs(k21(lat.point(*half), lat, settings)), 1e-9))
        for _ in range(n):
            u = lat.point(*rng.uniform(0.02, 0.98, size=2))
            v = k21(u, lat, settings)
            out.append(CheckResult(f"odd[{name}]", abs(k21(-u, lat, settings) + v), 1e-10))
            shift = lat.point(*rng.integers(-2, 3, size=2))
            out.append(CheckResult(f"periodic[{name}]", abs(k21(u + shift, lat, settings) - v), 1e-10))
            d = random_divisor(rng, int(rng.choice([3, 5, 6, 8])), 2, symmetric=True)
            out.append(CheckResult(f"symmetric-divisor[{name}]",
                                   abs(regulator_of_divisor(d, lat, settings)), 1e-9))
    return out


SUITES = {
    "fneqn": suite_fneqn,
    "distribution": suite_distribution,
    "dedekind": suite_dedekind,
    "laplace": suite_laplace,
    "conjugation": suite_conjugation,
    "oddness": suite_oddness,
}


def run_suite(name: str, seed: int = 0, settings: EvalSettings = DEFAULT_SETTINGS) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    rng = np.random.default_rng(seed)
    return SuiteResult(name, seed, fn(rng, settings))
