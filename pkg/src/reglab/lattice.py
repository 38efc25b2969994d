"""Complex lattices, torsion coordinates, pairings, basis changes and isogenies.

A lattice is stored in a normalized basis with ``tau = omega2/omega1`` in the
upper half-plane; the sign that was needed to get there is kept in ``delta``.
Torsion points are exact rational coordinates in that basis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DegenerateLattice, NotAnIsogeny, NotUnimodular
from .intlinalg import det2, inverse2, smith_normal_form

# Single global acceptance threshold for recovering integers from floats.
INTEGER_TOL = 1e-9
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class ComplexLattice:
    omega1: complex
    omega2: complex
    delta: int = 1

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    @property
    def area(self) -> float:
        return abs(self.omega1) ** 2 * self.tau.imag / math.pi

    @property
    def raw_omega2(self) -> complex:
        """Second basis vector as originally supplied (before sign normalization)."""
        return self.delta * self.omega2

    @property
    def euclidean_covolume(self) -> float:
        return math.pi * self.area

    def defining_residual(self) -> float:
        """|w1 conj(w2) - conj(w1) w2 + 2 pi i delta A| for the supplied basis."""
        w1, w2 = self.omega1, self.raw_omega2
        lhs = w1 * w2.conjugate() - w1.conjugate() * w2
        return abs(lhs + 2j * math.pi * self.delta * self.area)

    def point(self, a, b) -> complex:
        return float(a) * self.omega1 + float(b) * self.omega2

    def coordinates(self, z: complex) -> tuple[float, float]:
        """Real coordinates (a, b) with z = a*omega1 + b*omega2."""
        w1, w2 = self.omega1, self.omega2
        det = (w1.conjugate() * w2).imag
        a = (z * w2.conjugate()).imag / -det
        b = (w1.conjugate() * z).imag / det
        return a, b

    def contains(self, z: complex) -> bool:
        a, b = self.coordinates(z)
        return abs(a - round(a)) < INTEGER_TOL and abs(b - round(b)) < INTEGER_TOL

    def scaled(self, c: complex) -> "ComplexLattice":
        return make_lattice(c * self.omega1, c * self.omega2)

    def to_json(self) -> dict:
        return {"omega1": complex_to_json(self.omega1), "omega2": complex_to_json(self.omega2),
                "delta": self.delta}


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": repr(z.real), "im": repr(z.imag)}


def complex_from_json(d) -> complex:
    return complex(float(d["re"]), float(d["im"]))


def make_lattice(omega1: complex, omega2: complex) -> ComplexLattice:
    omega1, omega2 = complex(omega1), complex(omega2)
    if omega1 == 0 or omega2 == 0:
        raise DegenerateLattice("lattice generators must be nonzero")
    ratio = omega2 / omega1
    if abs(ratio.imag) <= DEGENERACY_TOL * max(1.0, abs(ratio)):
        raise DegenerateLattice(f"omega2/omega1 = {ratio} is (numerically) real")
    delta = 1 if ratio.imag > 0 else -1
    return ComplexLattice(omega1, delta * omega2, delta)


def pairing(x0: complex, omega: complex, lat: ComplexLattice) -> complex:
    """exp((conj(x0) w - x0 conj(w)) / A(lattice)); the exponent is purely imaginary."""
    x0, omega = complex(x0), complex(omega)
    phase = 2.0 * (x0.conjugate() * omega).imag / lat.area
    return complex(math.cos(phase), math.sin(phase))


def sl2_change(lat: ComplexLattice, a: int, b: int, c: int, d: int) -> ComplexLattice:
    """New basis (d w1 + c w2, b w1 + a w2); tau goes to (a tau + b)/(c tau + d)."""
    if a * d - b * c != 1:
        raise NotUnimodular(f"ad - bc = {a * d - b * c}, expected 1")
    w1, w2 = lat.omega1, lat.omega2
    return make_lattice(d * w1 + c * w2, b * w1 + a * w2)


def gauss_reduce(lat: ComplexLattice) -> ComplexLattice:
    """Lagrange-Gauss reduced basis of the same lattice (|w1| <= |w2|, |Re tau| <= 1/2)."""
    u, v = lat.omega1, lat.omega2
    if abs(u) > abs(v):
        u, v = v, u
    while True:
        mu = round(((v * u.conjugate()) / abs(u) ** 2).real)
        v = v - mu * u
        if abs(v) >= abs(u):
            break
        u, v = v, u
    return make_lattice(u, v)


# --------------------------------------------------------------------------
# Torsion coordinates


def _frac01(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


@dataclass(frozen=True, order=True)
class TorsionCoord:
    """The point a*omega1 + b*omega2 mod the lattice, 0 <= a, b < 1 exact rationals."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", _frac01(self.a))
        object.__setattr__(self, "b", _frac01(self.b))

    @property
    def a_num(self) -> int:
        return self.a.numerator

    @property
    def a_den(self) -> int:
        return self.a.denominator

    @property
    def b_num(self) -> int:
        return self.b.numerator

    @property
    def b_den(self) -> int:
        return self.b.denominator

    @property
    def order(self) -> int:
        return math.lcm(self.a.denominator, self.b.denominator)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __neg__(self) -> "TorsionCoord":
        return TorsionCoord(-self.a, -self.b)

    def __add__(self, other: "TorsionCoord") -> "TorsionCoord":
        return TorsionCoord(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "TorsionCoord") -> "TorsionCoord":
        return TorsionCoord(self.a - other.a, self.b - other.b)

    def times(self, n: int) -> "TorsionCoord":
        return TorsionCoord(n * self.a, n * self.b)

    def transform(self, matrix) -> "TorsionCoord":
        """Apply an integer 2x2 matrix acting on the row vector (a, b)."""
        (p, q), (r, s) = matrix
        return TorsionCoord(self.a * p + self.b * r, self.a * q + self.b * s)

    def value(self, lat: ComplexLattice) -> complex:
        return lat.point(self.a, self.b)

    def to_json(self) -> dict:
        return {"a": f"{self.a.numerator}/{self.a.denominator}",
                "b": f"{self.b.numerator}/{self.b.denominator}"}


def cm_matrix(x: int, y: int, trace: int, norm: int):
    """Matrix of multiplication by x + y*w on coordinates in the basis (1, w).

    ``w`` satisfies w^2 = trace*w - norm; a point a + b*w maps to (a, b) @ M.
    """
    return ((x, y), (-y * norm, x + y * trace))


# --------------------------------------------------------------------------
# Isogenies


@dataclass(frozen=True)
class IsogenyData:
    scalar: complex
    source: ComplexLattice
    target: ComplexLattice
    d1: int
    d2: int
    # integer matrix with scalar*(source basis) = matrix @ (target basis)
    matrix: tuple = field(repr=False)
    # adapted bases: source' = P @ source basis, target' = Qinv @ target basis
    P: tuple = field(repr=False)
    Qinv: tuple = field(repr=False)

    @property
    def degree(self) -> int:
        return self.d1 * self.d2

    @property
    def adapted_bases(self):
        s = (self.source.omega1, self.source.omega2)
        t = (self.target.omega1, self.target.omega2)
        src = tuple(r[0] * s[0] + r[1] * s[1] for r in self.P)
        tgt = tuple(r[0] * t[0] + r[1] * t[1] for r in self.Qinv)
        return src, tgt

    def image(self, pt: TorsionCoord) -> TorsionCoord:
        """phi(pt) in target coordinates."""
        return pt.transform(self.matrix)

    def preimage(self, pt: TorsionCoord) -> TorsionCoord:
        """The preimage of a target point with smallest adapted coordinates."""
        # target coords c (row) in target basis; adapted coords c' = c @ Q
        Q = inverse2(self.Qinv)
        ca = pt.a * Q[0][0] + pt.b * Q[1][0]
        cb = pt.a * Q[0][1] + pt.b * Q[1][1]
        adapted = (_frac01(ca) / self.d1, _frac01(cb) / self.d2)
        return TorsionCoord(adapted[0] * self.P[0][0] + adapted[1] * self.P[1][0],
                            adapted[0] * self.P[0][1] + adapted[1] * self.P[1][1])


def _integer_matrix(phi: complex, source: ComplexLattice, target: ComplexLattice):
    rows = []
    for w in (source.omega1, source.omega2):
        a, b = target.coordinates(phi * w)
        ra, rb = round(a), round(b)
        if abs(a - ra) > INTEGER_TOL or abs(b - rb) > INTEGER_TOL:
            raise NotAnIsogeny(f"phi*{w} has non-integral coordinates ({a}, {b}) in the target")
        rows.append([ra, rb])
    return rows


def elementary_divisors(phi: complex, source: ComplexLattice,
                        target: ComplexLattice | None = None) -> IsogenyData:
    """Adapted bases with phi*w1 = d1*w1', phi*w2 = d2*w2' and d1 | d2."""
    target = source if target is None else target
    phi = complex(phi)
    M = _integer_matrix(phi, source, target)
    if det2(M) == 0:
        raise NotAnIsogeny("phi maps the source lattice to a rank-deficient sublattice")
    S, P, Q = smith_normal_form(M)
    d1, d2 = S[0][0], S[1][1]
    # keep adapted source basis positively oriented (phi preserves orientation)
    if det2(P) < 0:
        P = [P[0], [-x for x in P[1]]]
        Q = [[Q[0][0], -Q[0][1]], [Q[1][0], -Q[1][1]]]
    Qinv = inverse2(Q)
    return IsogenyData(phi, source, target, d1, d2, tuple(map(tuple, M)),
                       tuple(map(tuple, P)), tuple(map(tuple, Qinv)))


def kernel_cosets(iso: IsogenyData) -> list[TorsionCoord]:
    """Representatives of phi^{-1}(target)/source in source coordinates."""
    P = iso.P
    out = []
    for j in range(iso.d1):
        for k in range(iso.d2):
            x, y = Fraction(j, iso.d1), Fraction(k, iso.d2)
            out.append(TorsionCoord(x * P[0][0] + y * P[1][0], x * P[0][1] + y * P[1][1]))
    return sorted(out)


def torsion_points(n: int) -> list[TorsionCoord]:
    """All n-torsion points (the kernel of multiplication by n)."""
    return [TorsionCoord(Fraction(i, n), Fraction(j, n)) for i in range(n) for j in range(n)]


def orthogonality_sum(omega: complex, d: int, lat: ComplexLattice) -> complex:
    """Sum of <omega, t> over t in d^{-1} lattice / lattice."""
    return sum(pairing(omega, t.value(lat), lat) for t in torsion_points(d))
