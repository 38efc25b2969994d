"""Torsion-supported divisors, symbols, their regulators and the map into Minkowski space.

A symbol {f, g} is represented only through the divisors of f and g; every
regulator formula consumes the convolution div(f) * div(g).
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NonInvertibleMultiplier, SingularEntry
from .kronecker import DEFAULT_SETTINGS, EvalSettings, k21
from .lattice import (ComplexLattice, IsogenyData, TorsionCoord, cm_matrix, kernel_cosets,
                      make_lattice)

log = logging.getLogger(__name__)

M_R_TOL = 1e-10


@dataclass(frozen=True)
class TorsionDivisor:
    """A finite formal sum of torsion points with integer multiplicities."""

    entries: tuple = ()

    def __post_init__(self):
        acc = defaultdict(int)
        for pt, m in self.entries:
            acc[pt] += int(m)
        object.__setattr__(self, "entries",
                           tuple(sorted((pt, m) for pt, m in acc.items() if m)))

    @classmethod
    def from_points(cls, points) -> "TorsionDivisor":
        """Build from (a, b, mult) triples with a, b anything Fraction accepts."""
        return cls(tuple((TorsionCoord(Fraction(a), Fraction(b)), m) for a, b, m in points))

    @property
    def torsion_level(self) -> int:
        return math.lcm(*(pt.order for pt, _ in self.entries)) if self.entries else 1

    def degree(self) -> int:
        return sum(m for _, m in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __add__(self, other: "TorsionDivisor") -> "TorsionDivisor":
        return TorsionDivisor(self.entries + other.entries)

    def __neg__(self) -> "TorsionDivisor":
        return TorsionDivisor(tuple((pt, -m) for pt, m in self.entries))

    def __sub__(self, other: "TorsionDivisor") -> "TorsionDivisor":
        return self + (-other)

    def scale(self, n: int) -> "TorsionDivisor":
        return TorsionDivisor(tuple((pt, n * m) for pt, m in self.entries))

    def negated_points(self) -> "TorsionDivisor":
        """The divisor [-1]^* D, i.e. every point P replaced by -P."""
        return TorsionDivisor(tuple((-pt, m) for pt, m in self.entries))

    def is_negation_symmetric(self) -> bool:
        return self.negated_points() == self

    def map_points(self, fn) -> "TorsionDivisor":
        return TorsionDivisor(tuple((fn(pt), m) for pt, m in self.entries))

    def to_json(self) -> list:
        return [dict(pt.to_json(), mult=m) for pt, m in self.entries]

    @classmethod
    def from_json(cls, data) -> "TorsionDivisor":
        return cls.from_points((d["a"], d["b"], int(d["mult"])) for d in data)


def convolve(f_div: TorsionDivisor, g_div: TorsionDivisor) -> TorsionDivisor:
    """sum_{Q, Q'} ord_Q(f) ord_Q'(g) (Q - Q')."""
    return TorsionDivisor(tuple((p - q, m * n) for p, m in f_div for q, n in g_div))


def is_principal(d: TorsionDivisor, lat: ComplexLattice | None = None) -> bool:
    """Abel's criterion: degree zero and the weighted point sum lies in the lattice."""
    if d.degree() != 0:
        return False
    total = TorsionCoord(0, 0)
    for pt, m in d:
        total = total + pt.times(m)
    return total.is_zero()


@dataclass(frozen=True)
class SymbolDivisorData:
    f_div: TorsionDivisor
    g_div: TorsionDivisor
    convolution: TorsionDivisor = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "convolution", convolve(self.f_div, self.g_div))

    def check_principal(self) -> bool:
        return is_principal(self.f_div) and is_principal(self.g_div)

    def map_points(self, fn) -> "SymbolDivisorData":
        return SymbolDivisorData(self.f_div.map_points(fn), self.g_div.map_points(fn))

    def to_json(self) -> dict:
        return {"f_div": self.f_div.to_json(), "g_div": self.g_div.to_json(),
                "convolution": self.convolution.to_json()}

    @classmethod
    def from_json(cls, data) -> "SymbolDivisorData":
        return cls(TorsionDivisor.from_json(data["f_div"]), TorsionDivisor.from_json(data["g_div"]))


def point_pair_symbol(pt: TorsionCoord) -> SymbolDivisorData:
    """Formal symbol with convolution (P) - (-P): f = (P) - (-P), g = (0).

    f is not principal; such data stands in for a multiple of a genuine
    symbol with the same convolution (realizable for torsion supports).
    """
    f = TorsionDivisor(((pt, 1), (-pt, -1)))
    g = TorsionDivisor(((TorsionCoord(0, 0), 1),))
    return SymbolDivisorData(f, g)


# --------------------------------------------------------------------------
# Regulators


def _unit_lattice(lat: ComplexLattice) -> ComplexLattice:
    return make_lattice(1, lat.tau)


def regulator_of_divisor(d: TorsionDivisor, lat: ComplexLattice,
                         settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """sum_P a_P A^2([1, tau]) K_{2,1}(u_P / w1, [1, tau])."""
    unit = _unit_lattice(lat)
    a2 = unit.area ** 2
    total = 0j
    for pt, m in d:
        if pt.is_zero():
            if settings.strict:
                raise SingularEntry(f"convolution has multiplicity {m} at the origin")
            log.warning("dropping origin entry (multiplicity %d) from regulator sum", m)
            continue
        total += m * a2 * k21(pt.value(unit), unit, settings)
    return total


def regulator_at_embedding(sym: SymbolDivisorData, lat: ComplexLattice,
                           settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    return regulator_of_divisor(sym.convolution, lat, settings)


def conjugate_lattice(lat: ComplexLattice) -> ComplexLattice:
    """Basis (conj w1, -conj w2) of the complex-conjugate lattice, so tau' = -conj(tau)."""
    return make_lattice(lat.omega1.conjugate(), -lat.omega2.conjugate())


def conjugate_point(pt: TorsionCoord) -> TorsionCoord:
    """Coordinates of conj(u) in the conjugate basis."""
    return TorsionCoord(pt.a, -pt.b)


def regulator_conjugate_direct(sym: SymbolDivisorData, lat: ComplexLattice,
                               settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """reg at the conjugate embedding, evaluated on the conjugate lattice itself."""
    conv = sym.convolution.map_points(conjugate_point)
    return regulator_of_divisor(conv, conjugate_lattice(lat), settings)


# --------------------------------------------------------------------------
# Galois action and pullback


def _support_group(points) -> list:
    """The finite subgroup of E_tors generated by ``points``."""
    seen = {TorsionCoord(0, 0)}
    frontier = list(seen)
    gens = [p for p in points if not p.is_zero()]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x + g
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def galois_act(sym: SymbolDivisorData, multiplier: tuple[int, int], trace: int, norm: int,
               level: int | None = None) -> SymbolDivisorData:
    """Scale every torsion point by the CM element x + y*w (w^2 = trace*w - norm).

    Coordinates must be with respect to a basis (W, W*w) of the lattice W*O_K.
    The multiplier must act injectively on the group generated by the support;
    gcd(N(alpha), level) = 1 is the quick sufficient test, otherwise the kernel
    is searched on that group.
    """
    x, y = multiplier
    points = [pt for pt, _ in sym.f_div] + [pt for pt, _ in sym.g_div]
    level = level or math.lcm(sym.f_div.torsion_level, sym.g_div.torsion_level)
    alpha_norm = x * x + x * y * trace + y * y * norm
    mat = cm_matrix(x, y, trace, norm)
    if math.gcd(alpha_norm, level) != 1:
        kernel = [t for t in _support_group(points) if not t.is_zero() and t.transform(mat).is_zero()]
        if kernel:
            raise NonInvertibleMultiplier(
                f"{x}+{y}w kills the support point {kernel[0].to_json()} (N = {alpha_norm}, level {level})")
    return sym.map_points(lambda pt: pt.transform(mat))


def pullback_divisor(iso: IsogenyData, d: TorsionDivisor) -> TorsionDivisor:
    """sum_Q sum_{T in ker phi} ord_Q (P - T) with phi(P) = Q."""
    kernel = kernel_cosets(iso)
    entries = []
    for q, m in d:
        p = iso.preimage(q)
        entries.extend((p - t, m) for t in kernel)
    return TorsionDivisor(tuple(entries))


def pullback_symbol(iso: IsogenyData, sym: SymbolDivisorData) -> SymbolDivisorData:
    return SymbolDivisorData(pullback_divisor(iso, sym.f_div), pullback_divisor(iso, sym.g_div))


# --------------------------------------------------------------------------
# Minkowski space


@dataclass(frozen=True)
class Embedding:
    label: str
    lattice: ComplexLattice
    conj_partner: str
    # integer matrix carrying torsion coordinates into this embedding's basis
    point_map: tuple | None = None


@dataclass(frozen=True)
class MinkowskiVector:
    values: dict
    partners: dict = field(default_factory=dict)

    def __getitem__(self, label):
        return self.values[label]

    def conjugation_residual(self) -> float:
        worst = 0.0
        for lab, partner in self.partners.items():
            worst = max(worst, abs(self.values[partner] - self.values[lab].conjugate()))
        return worst

    def in_real_space(self, tol: float = M_R_TOL) -> bool:
        return self.conjugation_residual() <= tol

    def scaled(self, c: complex) -> "MinkowskiVector":
        """Action of a CM scalar: multiply at each label, conjugate at partners."""
        out = {}
        done = set()
        for lab, partner in self.partners.items():
            if lab in done:
                continue
            out[lab] = c * self.values[lab]
            out[partner] = (c * self.values[lab]).conjugate()
            done.update({lab, partner})
        return MinkowskiVector(out, dict(self.partners))

    def to_json(self) -> dict:
        from .lattice import complex_to_json
        return {k: complex_to_json(v) for k, v in self.values.items()}


def embedding_pair(label: str, lat: ComplexLattice, point_map=None) -> list[Embedding]:
    """An embedding and its complex conjugate, using the conjugate basis for the latter."""
    bar = label + "bar"
    return [Embedding(label, lat, bar, point_map),
            Embedding(bar, conjugate_lattice(lat), label, None)]


def lambda_map(sym: SymbolDivisorData, embeddings,
               settings: EvalSettings = DEFAULT_SETTINGS) -> MinkowskiVector:
    """Regulators at each embedding; conjugate partners filled in by conjugation."""
    by_label = {e.label: e for e in embeddings}
    for e in embeddings:
        if by_label.get(e.conj_partner) is None or by_label[e.conj_partner].conj_partner != e.label:
            raise ValueError(f"embedding list not closed under conjugation at {e.label!r}")
    values, partners = {}, {}
    for e in embeddings:
        partners[e.label] = e.conj_partner
        if e.label in values:
            continue
        s = sym if e.point_map is None else sym.map_points(lambda pt: pt.transform(e.point_map))
        val = regulator_at_embedding(s, e.lattice, settings)
        values[e.label] = val
        values[e.conj_partner] = val.conjugate()
    return MinkowskiVector(values, partners)
