"""Class-number-one imaginary quadratic fields, ray class groups, Hecke characters
and partial Hecke L-functions evaluated through Kronecker series.

Ring elements are integer pairs (x, y) standing for x + y*w, where w is the
standard generator of O_K with w^2 = t*w - n.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .chartheory import CharacterData, FiniteAbelianGroup, Subgroup, present
from .errors import ConvergenceRegion, NotCoprime, ZeroModulus
from .kronecker import DEFAULT_SETTINGS, EvalSettings, k21, kronecker_continued
from .lattice import ComplexLattice, make_lattice

CLASS_NUMBER_ONE = (-3, -4, -7, -8, -11, -19, -43, -67, -163)


def _egcd(a: int, b: int):
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _hnf(vectors):
    """Basis (A, 0), (B, C) with 0 <= B < A of the Z-span of integer 2-vectors."""
    C = 0
    # gcd of second coordinates and a combination realizing it
    combo = [0] * len(vectors)
    for i, (_, y) in enumerate(vectors):
        g, s, t = _egcd(C, y)
        combo = [s * c for c in combo]
        combo[i] += t
        C = g
    if C == 0:
        raise ZeroModulus("lattice has rank < 2")
    Bx = sum(c * v[0] for c, v in zip(combo, vectors))
    # first coordinates of vectors with zero second coordinate generate A
    A = 0
    for x, y in vectors:
        A = math.gcd(A, x - (y // C) * Bx)
    if A == 0:
        raise ZeroModulus("lattice has rank < 2")
    return A, Bx % A, C


@dataclass(frozen=True)
class ImagQuadField:
    D: int

    def __post_init__(self):
        if self.D not in CLASS_NUMBER_ONE:
            raise ValueError(f"D = {self.D} is not a supported class-number-one discriminant")

    @property
    def trace(self) -> int:
        return self.D if self.D % 4 == 1 else 0

    @property
    def norm_w(self) -> int:
        D = self.D
        return (D * D - D) // 4 if D % 4 != 0 else -D // 4

    @cached_property
    def w(self) -> complex:
        D = self.D
        if D % 4 == 0:
            return complex(0, math.sqrt(-D) / 2)
        return complex(D / 2, math.sqrt(-D) / 2)

    @property
    def sqrtD(self) -> complex:
        return complex(0, math.sqrt(-self.D))

    def value(self, a) -> complex:
        return a[0] + a[1] * self.w

    def mul(self, a, b) -> tuple:
        x1, y1 = a
        x2, y2 = b
        n, t = self.norm_w, self.trace
        return (x1 * x2 - n * y1 * y2, x1 * y2 + x2 * y1 + t * y1 * y2)

    def add(self, a, b) -> tuple:
        return (a[0] + b[0], a[1] + b[1])

    def neg(self, a) -> tuple:
        return (-a[0], -a[1])

    def conj(self, a) -> tuple:
        x, y = a
        return (x + self.trace * y, -y)

    def norm(self, a) -> int:
        x, y = a
        return x * x + self.trace * x * y + self.norm_w * y * y

    def power(self, a, k: int) -> tuple:
        out = (1, 0)
        for _ in range(k):
            out = self.mul(out, a)
        return out

    @cached_property
    def units(self) -> tuple:
        """Roots of unity, ordered by argument starting at 1."""
        out = []
        for x in range(-2, 3):
            for y in range(-2, 3):
                if self.norm((x, y)) == 1:
                    out.append((x, y))
        return tuple(sorted(out, key=lambda u: cmath.phase(self.value(u)) % (2 * math.pi)))

    def unit_angle(self, u) -> Fraction:
        """u = exp(2 pi i * angle), exactly."""
        m = len(self.units)
        k = round(cmath.phase(self.value(u)) / (2 * math.pi) * m) % m
        return Fraction(k, m)

    def ideal_lattice(self, Omega: complex = 1.0) -> ComplexLattice:
        return make_lattice(Omega, Omega * self.w)

    def parse(self, text) -> tuple:
        """Accept an integer pair, an int, or a string such as '3', '2+w', '1-2i', '-w'."""
        if isinstance(text, (tuple, list)):
            return (int(text[0]), int(text[1]))
        if isinstance(text, int):
            return (text, 0)
        m = _ELEMENT_RE.fullmatch(str(text).replace(" ", ""))
        if not m:
            raise ValueError(f"cannot parse ring element {text!r}")
        real, coef = m.group("real"), m.group("coef")
        x = int(real) if real else 0
        if coef is None:
            return (x, 0)
        return (x, int(coef + "1") if coef in ("", "+", "-") else int(coef))


_ELEMENT_RE = re.compile(r"(?P<real>[+-]?\d+)?(?:(?P<coef>[+-]?\d*)[wi])?")


# --------------------------------------------------------------------------
# Residues modulo a principal ideal


@dataclass(frozen=True)
class Modulus:
    K: ImagQuadField
    g: tuple

    def __post_init__(self):
        g = (int(self.g[0]), int(self.g[1]))
        if g == (0, 0):
            raise ZeroModulus("modulus must be nonzero")
        object.__setattr__(self, "g", g)

    @cached_property
    def hnf(self):
        K = self.K
        return _hnf([self.g, K.mul(self.g, (0, 1))])

    @property
    def norm(self) -> int:
        return self.K.norm(self.g)

    def reduce(self, a) -> tuple:
        A, B, C = self.hnf
        x, y = a
        k = y // C
        x, y = x - k * B, y - k * C
        return (x % A, y)

    def contains(self, a) -> bool:
        return self.reduce(a) == (0, 0)

    @cached_property
    def residues(self) -> list:
        A, _, C = self.hnf
        return [(x, y) for y in range(C) for x in range(A)]

    def is_coprime(self, a) -> bool:
        K = self.K
        A, _, C = _hnf([a, K.mul(a, (0, 1)), self.g, K.mul(self.g, (0, 1))])
        return A * C == 1

    @cached_property
    def unit_residues(self) -> list:
        return [r for r in self.residues if self.is_coprime(r)]

    def mul(self, a, b) -> tuple:
        return self.reduce(self.K.mul(a, b))

    def divides(self, other: "Modulus") -> bool:
        """True when (self.g) contains (other.g)."""
        return self.contains(other.g)


@dataclass
class UnitGroupMod:
    """(O_K / g)^x with an invariant-factor structure and discrete logarithms."""

    modulus: Modulus

    def __post_init__(self):
        m = self.modulus
        elements = m.unit_residues
        one = m.reduce((1, 0))
        order_of = {}
        for e in elements:
            k, x = 1, e
            while x != one:
                x = m.mul(x, e)
                k += 1
            order_of[e] = k
        gens, relations = [], []
        known = {one: ()}
        while len(known) < len(elements):
            # greedy: element of largest order outside the current subgroup
            cand = max((e for e in elements if e not in known), key=lambda e: (order_of[e], e))
            new = dict()
            for h, vec in known.items():
                new[h] = vec + (0,)
            x, j = cand, 1
            while x not in known:
                for h, vec in known.items():
                    new[m.mul(x, h)] = vec + (j,)
                x = m.mul(x, cand)
                j += 1
            rel = tuple(-c for c in known[x]) + (j,)
            relations = [r + (0,) for r in relations] + [rel]
            gens.append(cand)
            known = new
        self.generators = gens
        self._raw_log = known
        self.presentation = present(len(gens), relations) if gens else None
        self.group = self.presentation.group if gens else FiniteAbelianGroup(())
        self.order = len(elements)

    def log(self, a) -> tuple:
        r = self.modulus.reduce(a)
        if r not in self._raw_log:
            raise NotCoprime(f"{a} is not invertible modulo {self.modulus.g}")
        if self.presentation is None:
            return ()
        return self.presentation.to_group(self._raw_log[r])


@dataclass
class RayClassGroupData:
    K: ImagQuadField
    modulus: Modulus
    residue_units: UnitGroupMod
    unit_image: Subgroup
    quotient: FiniteAbelianGroup
    _present: object
    section: dict

    def artin_symbol(self, lam) -> tuple:
        lam = self.K.parse(lam)
        if not self.modulus.is_coprime(lam):
            raise NotCoprime(f"({lam}) is not coprime to the modulus {self.modulus.g}")
        v = self.residue_units.log(lam)
        if self._present is None:
            return ()
        return self._present.to_group(v)

    def representative(self, cls) -> tuple:
        return self.section[tuple(cls)]

    @property
    def order(self) -> int:
        return self.quotient.order


def ray_class_group(K: ImagQuadField, g) -> RayClassGroupData:
    g = K.parse(g)
    if g == (0, 0):
        raise ZeroModulus("modulus must be nonzero")
    if K.norm(g) == 1:
        raise ValueError("modulus must not be a unit")
    mod = Modulus(K, g)
    U = UnitGroupMod(mod)
    A = U.group
    unit_logs = [U.log(u) for u in K.units]
    image = Subgroup(A, tuple(unit_logs))
    rels = [tuple(n if i == j else 0 for j in range(len(A.cyclic_orders)))
            for i, n in enumerate(A.cyclic_orders)] + [tuple(v) for v in unit_logs]
    pres = present(len(A.cyclic_orders), rels) if A.cyclic_orders else None
    Q = pres.group if pres else FiniteAbelianGroup(())
    section = {}
    for r in sorted(mod.unit_residues, key=lambda r: _lift_key(mod, r)):
        cls = pres.to_group(U.log(r)) if pres else ()
        section.setdefault(cls, _small_lift(mod, r))
    rc = RayClassGroupData(K, mod, U, image, Q, pres, section)
    assert Q.order * image.order == U.order
    return rc


def _lift_key(mod: Modulus, r):
    c = _small_lift(mod, r)
    return (mod.K.norm(c), c != (1, 0), abs(c[0]) + abs(c[1]), c)


def _small_lift(mod: Modulus, r) -> tuple:
    """A lift of the residue r with small norm (searching nearby translates)."""
    K = mod.K
    A, B, C = mod.hnf
    best = None
    for i in range(-2, 3):
        for j in range(-2, 3):
            cand = (r[0] + i * A + j * B, r[1] + j * C)
            key = (K.norm(cand), cand != (1, 0), abs(cand[0]) + abs(cand[1]), cand)
            if best is None or key < best[0]:
                best = (key, cand)
    return best[1]


# --------------------------------------------------------------------------
# Hecke characters


@dataclass(frozen=True)
class HeckeCharData:
    """phi((lam)) = phi_fin(lam) * lam with phi_fin a character of (O_K/g)^x."""

    field: ImagQuadField
    rc: RayClassGroupData
    phi_fin: CharacterData
    index: int = 0

    @property
    def modulus(self) -> Modulus:
        return self.rc.modulus

    def fin_angle(self, lam) -> Fraction:
        return self.phi_fin.angle(self.rc.residue_units.log(lam))

    def fin(self, lam) -> complex:
        return self.phi_fin(self.rc.residue_units.log(lam))

    def __call__(self, lam) -> complex:
        lam = self.field.parse(lam)
        return self.fin(lam) * self.field.value(lam)

    def conj_value(self, lam) -> complex:
        return self(lam).conjugate()

    def inflate(self, rc_big: RayClassGroupData) -> "HeckeCharData":
        """The same character viewed modulo a multiple of the modulus."""
        U = rc_big.residue_units
        small = self.rc.residue_units
        # solve for the exponent vector on the bigger group generator by generator
        A = U.group
        target = [self.phi_fin.angle(small.log(r)) for r in _basis_residues(U)]
        for e in A.elements:
            psi = CharacterData(A, e)
            if all(psi.angle(U.log(r)) == t for r, t in zip(_basis_residues(U), target)):
                return HeckeCharData(self.field, rc_big, psi, self.index)
        raise AssertionError("inflation failed")

    def to_json(self) -> dict:
        return {"D": self.field.D, "modulus": list(self.modulus.g), "phi_fin_index": self.index,
                "phi_fin_exponents": list(self.phi_fin.exponents)}


def _basis_residues(U: UnitGroupMod) -> list:
    """Residues whose logs are the standard generators of U.group."""
    out = []
    inv = {}
    for r in U.modulus.unit_residues:
        inv.setdefault(U.log(r), r)
    for e in U.group.generators():
        out.append(inv[e])
    return out


def hecke_characters(K: ImagQuadField, g) -> list[HeckeCharData]:
    """All phi_fin on (O_K/g)^x with phi_fin(u) = u^{-1} for every unit u."""
    rc = ray_class_group(K, g)
    U = rc.residue_units
    out = []
    for e in U.group.elements:
        chi = CharacterData(U.group, e)
        if all(chi.angle(U.log(u)) == (-K.unit_angle(u)) % 1 for u in K.units):
            out.append(HeckeCharData(K, rc, chi, len(out)))
    return out


# --------------------------------------------------------------------------
# Ideal enumeration


def enumerate_elements(K: ImagQuadField, norm_bound: float):
    """All nonzero x + y*w with norm <= norm_bound, as integer arrays."""
    h = K.w.imag
    ymax = int(math.sqrt(norm_bound) / h) + 1
    xs, ys = [], []
    for y in range(-ymax, ymax + 1):
        c = y * K.w.real
        rest = norm_bound - (y * h) ** 2
        if rest < 0:
            continue
        r = math.sqrt(rest)
        lo, hi = math.ceil(-c - r - 1), math.floor(-c + r + 1)
        x = np.arange(lo, hi + 1, dtype=np.int64)
        xs.append(x)
        ys.append(np.full_like(x, y))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    nrm = x * x + K.trace * x * y + K.norm_w * y * y
    keep = (nrm <= norm_bound) & (nrm > 0)
    return x[keep], y[keep], nrm[keep]


def _residue_arrays(mod: Modulus, x, y):
    A, B, C = mod.hnf
    k = np.floor_divide(y, C)
    return np.mod(x - k * B, A), y - k * C


# --------------------------------------------------------------------------
# Partial L-functions


@dataclass(frozen=True)
class PartialLSpec:
    hecke: HeckeCharData
    class_element: tuple
    conjugated: bool = True  # True: L(s, conj(phi), gamma)


def partial_L_direct(spec: PartialLSpec, s: complex, norm_bound: float) -> complex:
    """sum over ideals C in the class, N(C) <= norm_bound, of phi(C)^(-bar) N(C)^{-s}.

    Every ideal contributes through all of its |mu_K| generators and the sum
    is divided by |mu_K|; the summand is unit invariant so this is exact.
    """
    s = complex(s)
    if s.real <= 1.5 + 0.25:
        raise ConvergenceRegion(f"Re(s) = {s.real} too small for the direct ideal sum")
    hecke = spec.hecke
    K = hecke.field
    rc = hecke.rc
    mod = rc.modulus
    A, _, C = mod.hnf
    cls_of = np.full((A, C), -1, dtype=np.int64)
    fin = np.zeros((A, C), dtype=complex)
    target = tuple(spec.class_element)
    for r in mod.unit_residues:
        cls_of[r] = 1 if rc.artin_symbol(r) == target else 0
        fin[r] = hecke.fin(r)
    x, y, nrm = enumerate_elements(K, norm_bound)
    rx, ry = _residue_arrays(mod, x, y)
    sel = cls_of[rx, ry] == 1
    x, y, nrm = x[sel], y[sel], nrm[sel]
    vals = fin[rx[sel], ry[sel]] * (x + y * K.w)
    if spec.conjugated:
        vals = np.conj(vals)
    terms = vals * np.exp(-s * np.log(nrm.astype(float)))
    order = np.argsort(nrm, kind="stable")
    terms = terms[order]
    total = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return total / len(K.units)


def _kernel_units_trivial(rc: RayClassGroupData) -> None:
    mod = rc.modulus
    one = mod.reduce((1, 0))
    bad = [u for u in rc.K.units if u != (1, 0) and mod.reduce(u) == one]
    if bad:
        raise ValueError("units congruent to 1 modulo the modulus; no Hecke character exists")


def _class_members(hecke: HeckeCharData, rc_big: RayClassGroupData, cls) -> list:
    """Unit-orbit representatives of residues mod the big modulus lying over ``cls``."""
    K = hecke.field
    mod = rc_big.modulus
    seen, reps = set(), []
    for r in sorted(mod.unit_residues, key=lambda r: _lift_key(mod, r)):
        if r in seen:
            continue
        orbit = {mod.mul(u, r) for u in K.units}
        seen.update(orbit)
        lift = _small_lift(mod, r)
        if hecke.rc.artin_symbol(lift) == tuple(cls):
            reps.append(lift)
    return reps


def _kronecker_data(hecke: HeckeCharData, beta, modulus_elt, Omega: complex):
    K = hecke.field
    lat = K.ideal_lattice(Omega)
    nu = Omega / K.value(modulus_elt)
    return lat, nu, K.value(beta) * nu


def partial_L_kronecker(spec: PartialLSpec, s: complex, Omega: complex = 1.0,
                        settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """L(s, conj(phi), gamma) = conj(phi_fin(beta)) |nu|^{2s} / conj(nu) K_1(beta nu, 0, s, Omega O_K)."""
    hecke = spec.hecke
    _kernel_units_trivial(hecke.rc)
    beta = hecke.rc.representative(spec.class_element)
    lat, nu, x = _kronecker_data(hecke, beta, hecke.modulus.g, Omega)
    s = complex(s)
    val = hecke.fin(beta).conjugate() * abs(nu) ** (2 * s) / nu.conjugate() * \
        kronecker_continued(1, x, 0j, s, lat, settings)
    if spec.conjugated:
        return val
    if s.imag != 0:
        raise ValueError("the unconjugated partial L-function is only provided for real s")
    return val.conjugate()


def partial_L_deriv0(spec: PartialLSpec, Omega: complex = 1.0,
                     settings: EvalSettings = DEFAULT_SETTINGS, beta=None) -> complex:
    """L'(0, conj(phi), gamma) = conj(phi_fin(beta)) / conj(nu) * A^2(L) K_{2,1}(beta nu, L).

    ``beta`` may be any generator representing the class; the value does not
    depend on the choice. With ``conjugated=False`` the complex conjugate
    (the derivative of L(s, phi, gamma)) is returned.
    """
    hecke = spec.hecke
    _kernel_units_trivial(hecke.rc)
    if beta is None:
        beta = hecke.rc.representative(spec.class_element)
    beta = hecke.field.parse(beta)
    if hecke.rc.artin_symbol(beta) != tuple(spec.class_element):
        raise ValueError(f"{beta} does not represent the class {spec.class_element}")
    val = _deriv0_term(hecke, beta, hecke.modulus.g, Omega, settings)
    return val if spec.conjugated else val.conjugate()


def _deriv0_term(hecke, beta, modulus_elt, Omega, settings) -> complex:
    lat, nu, x = _kronecker_data(hecke, beta, modulus_elt, Omega)
    return hecke.fin(beta).conjugate() / nu.conjugate() * lat.area ** 2 * k21(x, lat, settings)


def partial_L_deriv0_at(hecke: HeckeCharData, cls, modulus_elt, Omega: complex = 1.0,
                        settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """L'_{m}(0, conj(phi), cls): ideals prime to m = g*P whose class mod g is ``cls``."""
    K = hecke.field
    modulus_elt = K.parse(modulus_elt)
    rc_big = ray_class_group(K, modulus_elt)
    if not rc_big.modulus.contains(modulus_elt) or not hecke.modulus.divides(rc_big.modulus):
        raise ValueError("the larger modulus must be a multiple of the character's modulus")
    total = 0j
    for beta in _class_members(hecke, rc_big, cls):
        total += _deriv0_term(hecke, beta, modulus_elt, Omega, settings)
    return total


def twist_factor(hecke: HeckeCharData, chi: CharacterData, P) -> complex:
    """pi = 1 - conj(phi((P))) chi([P])."""
    P = hecke.field.parse(P)
    if not hecke.modulus.is_coprime(P):
        raise NotCoprime(f"({P}) is not coprime to the modulus")
    return 1 - hecke(P).conjugate() * chi(hecke.rc.artin_symbol(P))


def area_of_class_lattice(K: ImagQuadField, Omega: complex, A=(1, 0), h: complex = 1.0) -> float:
    """|h Omega|^2 sqrt|D| / (2 pi N(A))."""
    return abs(h * Omega) ** 2 * math.sqrt(-K.D) / (2 * math.pi * K.norm(K.parse(A)))


def class_lattice(K: ImagQuadField, Omega: complex, A=(1, 0), h: complex = 1.0) -> ComplexLattice:
    """h Omega A^{-1} for a principal ideal A = (a)."""
    a = K.value(K.parse(A))
    return make_lattice(h * Omega / a, h * Omega * K.w / a)


# --------------------------------------------------------------------------
# Type (R) witness scan


@dataclass(frozen=True)
class TypeRWitness:
    generator: tuple
    norm: int
    psi_value: tuple

    def to_json(self) -> dict:
        return {"generator": list(self.generator), "norm": self.norm,
                "psi_value": list(self.psi_value)}


@dataclass(frozen=True)
class TypeRScan:
    witness: TypeRWitness | None
    scanned: int
    skipped_nonintegral: int

    def to_json(self) -> dict:
        return {"witness": self.witness.to_json() if self.witness else None,
                "scanned": self.scanned, "skipped_nonintegral": self.skipped_nonintegral}


def type_R_scan(hecke: HeckeCharData, N, norm_bound: int) -> TypeRScan:
    """First ideal (lam) with psi((lam)) = phi_fin(lam) lam congruent to -1 mod N.

    psi((lam)) is only an element of O_K when phi_fin(lam) is a root of unity of
    K; other ideals are counted as skipped.
    """
    K = hecke.field
    N = K.parse(N)
    if K.norm(N) == 1:
        return TypeRScan(None, 0, 0)
    modN = Modulus(K, N)
    m = len(K.units)
    unit_by_angle = {K.unit_angle(u): u for u in K.units}
    x, y, nrm = enumerate_elements(K, norm_bound)
    order = np.lexsort((y, x, nrm))
    scanned = skipped = 0
    seen = set()
    for i in order:
        lam = (int(x[i]), int(y[i]))
        if not hecke.modulus.is_coprime(lam):
            continue
        key = frozenset(hecke.modulus.K.mul(u, lam) for u in K.units)
        if key in seen:
            continue
        seen.add(key)
        scanned += 1
        ang = hecke.fin_angle(lam)
        if (ang * m).denominator != 1:
            skipped += 1
            continue
        psi = K.mul(unit_by_angle[ang], lam)
        if modN.contains(K.add(psi, (1, 0))):
            return TypeRScan(TypeRWitness(lam, int(nrm[i]), psi), scanned, skipped)
    return TypeRScan(None, scanned, skipped)
