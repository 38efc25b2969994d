"""Dilogarithms, the elliptic regulator function and Kronecker-Eisenstein-Lerch sums.

Three independent evaluations of K_{2,1}(u, L) are provided:

* ``qseries``   -- R_q = D_q - i J_q summed over powers of the nome, then rescaled
                   to the lattice by homothety;
* ``continued`` -- the theta-kernel Mellin integral split at t = 1 (in units of
                   A(L)), giving two exponentially convergent incomplete-gamma
                   lattice sums; valid for every s off the poles;
* ``direct``    -- the defining lattice sum truncated at ``shell_radius``.

The Bernoulli correction in J_q is (1/3) log^2|q| B_3(log|z| / log|q|). This is
the reading that makes R_q(exp(2 pi i u)) = pi A^2 K_{2,1}(u) hold; the literal
typeset form ``(2/3) log|q|^2 B_3(log(|z|/|q|))`` is kept as
``B3Reading.PRINTED`` so the discrepancy can be reported (see
``calibrate_b3_reading``).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from .errors import ConvergenceRegion, NomeOutOfRange, PoleEncountered
from .lattice import ComplexLattice, make_lattice, INTEGER_TOL

PI2_6 = math.pi ** 2 / 6


class Route(str, enum.Enum):
    QSERIES = "qseries"
    CONTINUED = "continued"
    DIRECT = "direct"
    AUTO = "auto"


class B3Reading(str, enum.Enum):
    CALIBRATED = "calibrated"
    PRINTED = "printed"


@dataclass(frozen=True)
class EvalSettings:
    tol: float = 1e-13
    max_q_terms: int = 400
    shell_radius: float = 1500.0
    route: Route = Route.AUTO
    strict: bool = False

    def __post_init__(self):
        if not 1e-14 <= self.tol <= 1e-2:
            raise ValueError(f"tol={self.tol} outside [1e-14, 1e-2]")
        if self.max_q_terms < 8:
            raise ValueError("max_q_terms must be at least 8")
        if self.shell_radius < 10:
            raise ValueError("shell_radius must be at least 10")
        object.__setattr__(self, "route", Route(self.route))

    def with_route(self, route) -> "EvalSettings":
        return replace(self, route=Route(route))

    def to_json(self) -> dict:
        return {"tol": self.tol, "max_q_terms": self.max_q_terms,
                "shell_radius": self.shell_radius, "route": self.route.value,
                "strict": self.strict}


DEFAULT_SETTINGS = EvalSettings()


# --------------------------------------------------------------------------
# Classical dilogarithm


def _bernoulli_numbers(n):
    B = [Fraction(0)] * (n + 1)
    B[0] = Fraction(1)
    for m in range(1, n + 1):
        B[m] = -sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1)
    return B


# Li2(z) = sum_n B_n w^(n+1)/(n+1)!, w = -log(1-z); B_1 = -1/2 convention.
_LI2_COEFFS = [float(b / math.factorial(n + 1)) for n, b in enumerate(_bernoulli_numbers(60))]


def _li2_bernoulli(z: complex) -> complex:
    w = -cmath.log(1 - z)
    total = 0j
    wp = w
    w2 = w * w
    total = w + _LI2_COEFFS[1] * w2
    wp = w2 * w  # odd Bernoulli numbers beyond B_1 vanish
    for n in range(2, 61, 2):
        term = _LI2_COEFFS[n] * wp
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        wp *= w2
    return total


def dilog(z: complex) -> complex:
    """Principal branch of Li_2; on the cut (1, inf) the limit from above is returned."""
    z = complex(z)
    if z == 0:
        return 0j
    if z == 1:
        return complex(PI2_6)
    if abs(z) > 1:
        # Li2(z) = -pi^2/6 - log(-z)^2/2 - Li2(1/z)
        if z.imag == 0 and z.real > 1:
            log_mz = complex(math.log(z.real), -math.pi)
        else:
            log_mz = cmath.log(-z)
        return -PI2_6 - 0.5 * log_mz * log_mz - dilog(1 / z)
    if z.real > 0.5:
        # Li2(z) = pi^2/6 - log z log(1-z) - Li2(1-z)
        return PI2_6 - cmath.log(z) * cmath.log(1 - z) - _li2_bernoulli(1 - z)
    if abs(z) < 0.25:
        total, zp, n = 0j, z, 1
        while True:
            term = zp / (n * n)
            total += term
            if abs(term) < 1e-18:
                return total
            n += 1
            zp *= z
    return _li2_bernoulli(z)


def bloch_wigner(z: complex) -> float:
    """D(z) = Im Li2(z) + log|z| arg(1 - z); zero on the real line."""
    z = complex(z)
    if z.imag == 0:
        return 0.0
    return dilog(z).imag + math.log(abs(z)) * cmath.phase(1 - z)


def bernoulli3(t: float) -> float:
    return t ** 3 - 1.5 * t ** 2 + 0.5 * t


def J(z: complex) -> float:
    """log|z| log|1 - z|, extended by its limit 0 at z = 0 and z = 1."""
    z = complex(z)
    if z == 0 or z == 1:
        return 0.0
    return math.log(abs(z)) * math.log(abs(1 - z))


# --------------------------------------------------------------------------
# Elliptic dilogarithm and the regulator function R_q


def _check_nome(q: complex) -> float:
    aq = abs(q)
    if not 0 < aq < 1:
        raise NomeOutOfRange(f"|q| = {aq} not in (0, 1)")
    return math.log(aq)


def reduce_to_annulus(z: complex, q: complex) -> complex:
    """Rescale z by an integer power of q so that |q| < |z| <= 1."""
    lq = _check_nome(q)
    if z == 0:
        raise ValueError("z must be nonzero")
    t = math.log(abs(z)) / lq
    k = math.floor(t)
    if k:
        z = z * q ** (-k)
    if abs(z) > 1:  # rounding at the boundary
        z *= q
    return z


def _q_sums(f, z: complex, q: complex, s: EvalSettings) -> float:
    """sum_{n>=0} f(z q^n) - sum_{n>=1} f(q^n / z), truncated by a geometric tail bound."""
    aq = abs(q)
    pos, neg = [], []
    zinv = 1 / z
    wp, wn = z, q * zinv
    for n in range(s.max_q_terms):
        pos.append(f(wp))
        neg.append(f(wn))
        # both f = D and f = J are O(|w| (1 + |log|w||)) near 0
        r = max(abs(wp), abs(wn))
        if r < 1 and r * (1 + abs(math.log(r))) / (1 - aq) < 0.01 * s.tol:
            break
        wp *= q
        wn *= q
    return math.fsum(pos) - math.fsum(neg)


def elliptic_dilog_Dq(z: complex, q: complex, s: EvalSettings = DEFAULT_SETTINGS) -> float:
    _check_nome(q)
    z = reduce_to_annulus(complex(z), complex(q))
    return _q_sums(bloch_wigner, z, complex(q), s)


def _b3_term(z: complex, q: complex, reading: B3Reading) -> float:
    lq = math.log(abs(q))
    if reading is B3Reading.CALIBRATED:
        return lq * lq / 3.0 * bernoulli3(math.log(abs(z)) / lq)
    return 2.0 / 3.0 * math.log(abs(q) ** 2) * bernoulli3(math.log(abs(z) / abs(q)))


def Jq(z: complex, q: complex, s: EvalSettings = DEFAULT_SETTINGS,
       reading: B3Reading = B3Reading.CALIBRATED) -> float:
    _check_nome(q)
    z = reduce_to_annulus(complex(z), complex(q))
    return _q_sums(J, z, complex(q), s) + _b3_term(z, complex(q), B3Reading(reading))


def Rq(z: complex, q: complex, s: EvalSettings = DEFAULT_SETTINGS,
       reading: B3Reading = B3Reading.CALIBRATED) -> complex:
    """R_q(z) = D_q(z) - i J_q(z)."""
    return complex(elliptic_dilog_Dq(z, q, s), -Jq(z, q, s, reading))


# --------------------------------------------------------------------------
# Lattice enumeration helpers


def _coordinate_bounds(lat: ComplexLattice, radius: float) -> tuple[float, float]:
    w1, w2 = lat.omega1, lat.omega2
    det = abs((w1.conjugate() * w2).imag)
    return radius * abs(w2) / det, radius * abs(w1) / det


def _lattice_box(lat: ComplexLattice, center: complex, radius: float):
    """Integer coordinate ranges covering the disk |center + w| <= radius."""
    ca, cb = lat.coordinates(-center)
    ba, bb = _coordinate_bounds(lat, radius)
    return (range(math.floor(ca - ba) - 1, math.ceil(ca + ba) + 2),
            range(math.floor(cb - bb) - 1, math.ceil(cb + bb) + 2))


def _in_lattice(z: complex, lat: ComplexLattice) -> bool:
    return lat.contains(z)


@lru_cache(maxsize=64)
def _points_near(lat: ComplexLattice, center: complex, radius: float):
    """Lattice points w (as an array) with |center + w| <= radius."""
    ra, rb = _lattice_box(lat, center, radius)
    m, n = np.meshgrid(np.arange(ra.start, ra.stop), np.arange(rb.start, rb.stop), indexing="ij")
    w = (m * lat.omega1 + n * lat.omega2).ravel()
    keep = np.abs(center + w) <= radius
    w = w[keep]
    w.setflags(write=False)
    return w


def _pairing_array(x0: complex, w: np.ndarray, area: float) -> np.ndarray:
    phase = 2.0 * (np.conj(x0) * w).imag / area
    return np.exp(1j * phase)


def _csum(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


# --------------------------------------------------------------------------
# Direct lattice sum


def kronecker_direct(a: int, x: complex, x0: complex, s: complex, lat: ComplexLattice,
                     settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """Truncated defining sum, accumulated shell by shell in increasing modulus."""
    s = complex(s)
    if s.real <= a / 2 + 1 + 0.25:
        raise ConvergenceRegion(f"Re(s) = {s.real} too small for the direct sum with a = {a}")
    x, x0 = complex(x), complex(x0)
    R = float(settings.shell_radius)
    x_in_lattice = _in_lattice(x, lat)
    width = math.sqrt(lat.euclidean_covolume)
    nshell = int(R / width) + 2
    acc_re = np.zeros(nshell)
    acc_im = np.zeros(nshell)
    ra, rb = _lattice_box(lat, x, R)
    nvals = np.arange(rb.start, rb.stop)
    chunk = max(1, 2_000_000 // max(1, len(nvals)))
    for start in range(ra.start, ra.stop, chunk):
        m = np.arange(start, min(start + chunk, ra.stop))
        w = (m[:, None] * lat.omega1 + nvals[None, :] * lat.omega2).ravel()
        z = x + w
        r = np.abs(z)
        keep = r <= R
        if x_in_lattice:
            keep &= r > 1e-9 * width
        w, z, r = w[keep], z[keep], r[keep]
        if not len(w):
            continue
        terms = _pairing_array(x0, w, lat.area) * np.exp(-2.0 * s * np.log(r))
        if a:
            terms = terms * np.conj(z) ** a
        idx = (r / width).astype(np.int64)
        acc_re += np.bincount(idx, weights=terms.real, minlength=nshell)
        acc_im += np.bincount(idx, weights=terms.imag, minlength=nshell)
    return complex(math.fsum(acc_re), math.fsum(acc_im))


# --------------------------------------------------------------------------
# Analytic continuation via incomplete gamma functions


def upper_gamma(s: complex, c: np.ndarray) -> np.ndarray:
    """Gamma(s, c) for an array of c > 0."""
    c = np.asarray(c, dtype=float)
    s = complex(s)
    if s.imag == 0:
        sr = s.real
        if sr > 0:
            return special.gammaincc(sr, c) * special.gamma(sr)
        if sr == 0:
            return special.exp1(c)
        # recurrence Gamma(s, c) = (Gamma(s + 1, c) - c^s e^{-c}) / s
        k = math.ceil(-sr)
        base = sr + k
        g = special.exp1(c) if base == 0 else special.gammaincc(base, c) * special.gamma(base)
        for j in range(k - 1, -1, -1):
            sj = sr + j
            g = (g - c ** sj * np.exp(-c)) / sj
        return g
    return np.array([complex(mpmath.gammainc(s, float(ci))) for ci in c], dtype=complex)


def _incomplete_sum(a: int, x: complex, x0: complex, s: complex, lat: ComplexLattice,
                    cut: float) -> complex:
    """sum*_w <x0, w> conj(x + w)^a |x + w|^{-2s} Gamma(s, |x + w|^2 / A)."""
    A = lat.area
    w = _points_near(lat, complex(x), math.sqrt(cut * A))
    z = x + w
    r2 = (z * np.conj(z)).real
    keep = r2 > (1e-9 * abs(lat.omega1)) ** 2
    w, z, r2 = w[keep], z[keep], r2[keep]
    terms = _pairing_array(x0, w, A) * np.exp(-s * np.log(r2)) * upper_gamma(s, r2 / A)
    if a:
        terms = terms * np.conj(z) ** a
    return _csum(terms)


def _gamma_cut(a: int, s: complex) -> float:
    return 48.0 + 3.0 * (abs(s.real) + abs(a + 1 - s.real)) + 2.0 * a


def completed_kronecker(a: int, x: complex, x0: complex, s: complex,
                        lat: ComplexLattice) -> complex:
    """Gamma(s) K_a(x, x0, s, L) by the two-sided incomplete-gamma expansion."""
    if a not in (0, 1):
        raise ValueError("only a in {0, 1} is supported")
    x, x0, s = complex(x), complex(x0), complex(s)
    A = lat.area
    x_in = _in_lattice(x, lat)
    x0_in = _in_lattice(x0, lat)
    if a == 0 and ((x_in and s == 0) or (x0_in and s == 1)):
        raise PoleEncountered(f"completed K_0 has a pole at s = {s}")
    cut = _gamma_cut(a, s)
    sd = a + 1 - s
    total = _incomplete_sum(a, x, x0, s, lat, cut)
    total += A ** sd * A ** (-s) * _pair(x, x0, A) * _incomplete_sum(a, x0, x, sd, lat, cut)
    if a == 0:
        if x_in:
            total -= A ** (-s) * _pair(x0, -x, A) / s
        if x0_in:
            total += A ** (-s) / (s - 1)
    return total


def _pair(x0: complex, w: complex, A: float) -> complex:
    return cmath.exp(2j * (x0.conjugate() * w).imag / A)


def kronecker_continued(a: int, x: complex, x0: complex, s: complex, lat: ComplexLattice,
                        settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    s = complex(s)
    return completed_kronecker(a, x, x0, s, lat) * complex(mpmath.rgamma(s))


def functional_equation_residual(a: int, x: complex, x0: complex, s: complex,
                                 lat: ComplexLattice, printed_phase: bool = False) -> float:
    """Relative residual of Gamma(s)K_a(x,x0,s) = A^{a+1-2s} Gamma(a+1-s) K_a(x0,x,a+1-s) <x,x0>.

    With ``printed_phase`` the factor <x0,x> is used instead; that version only
    holds when <x0,x> is real.
    """
    s = complex(s)
    A = lat.area
    lhs = completed_kronecker(a, x, x0, s, lat)
    x, x0 = complex(x), complex(x0)
    phase = _pair(x0, x, A) if printed_phase else _pair(x, x0, A)
    rhs = A ** (a + 1 - 2 * s) * phase * completed_kronecker(a, x0, x, a + 1 - s, lat)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


# --------------------------------------------------------------------------
# K_{2,1}


def k21_qseries(u: complex, lat: ComplexLattice, settings: EvalSettings = DEFAULT_SETTINGS,
                reading: B3Reading = B3Reading.CALIBRATED) -> complex:
    """conj(w1) R_q(exp(2 pi i u / w1)) / (pi A(L)^2)."""
    w1 = lat.omega1
    z = cmath.exp(2j * math.pi * complex(u) / w1)
    return w1.conjugate() * Rq(z, lat.q, settings, reading) / (math.pi * lat.area ** 2)


def k21_continued(u: complex, lat: ComplexLattice,
                  settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    # Gamma(2) = 1
    return completed_kronecker(1, 0j, complex(u), 2.0, lat)


def k21_direct(u: complex, lat: ComplexLattice,
               settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    return kronecker_direct(1, 0j, complex(u), 2.0, lat, settings)


AUTO_NOME_LIMIT = math.exp(-math.pi)


def k21(u: complex, lat: ComplexLattice, settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """K_{2,1}(u, L) = K_1(0, u, 2, L) by the route selected in ``settings``."""
    route = settings.route
    if route is Route.AUTO:
        route = Route.QSERIES if abs(lat.q) < AUTO_NOME_LIMIT else Route.CONTINUED
    if route is Route.QSERIES:
        return k21_qseries(u, lat, settings)
    if route is Route.CONTINUED:
        return k21_continued(u, lat, settings)
    return k21_direct(u, lat, settings)


@dataclass
class CrossCheck:
    values: dict
    residuals: dict = field(default_factory=dict)
    reg_identity_residual: float = float("nan")

    def to_json(self) -> dict:
        from .lattice import complex_to_json
        return {"values": {k: complex_to_json(v) for k, v in self.values.items()},
                "residuals": {f"{a}-{b}": r for (a, b), r in self.residuals.items()},
                "reg_identity_residual": self.reg_identity_residual}


def k21_crosscheck(u: complex, lat: ComplexLattice,
                   settings: EvalSettings = DEFAULT_SETTINGS) -> CrossCheck:
    """Evaluate every route and the R_q identity on the normalized lattice [1, tau]."""
    values = {
        Route.QSERIES.value: k21_qseries(u, lat, settings),
        Route.CONTINUED.value: k21_continued(u, lat, settings),
        Route.DIRECT.value: k21_direct(u, lat, settings),
    }
    names = list(values)
    residuals = {(p, q): abs(values[p] - values[q])
                 for i, p in enumerate(names) for q in names[i + 1:]}
    unit = make_lattice(1, lat.tau)
    v = complex(u) / lat.omega1
    lhs = Rq(cmath.exp(2j * math.pi * v), unit.q, settings)
    rhs = math.pi * unit.area ** 2 * k21_continued(v, unit, settings)
    return CrossCheck(values, residuals, abs(lhs - rhs))


def calibrate_b3_reading(points, lat: ComplexLattice,
                         settings: EvalSettings = DEFAULT_SETTINGS) -> dict:
    """Max |R_q - pi A^2 K_{2,1}| over ``points`` (coordinates on [1, tau]) per reading."""
    unit = make_lattice(1, lat.tau)
    out = {}
    for reading in B3Reading:
        worst = 0.0
        for v in points:
            lhs = Rq(cmath.exp(2j * math.pi * v), unit.q, settings, reading)
            rhs = math.pi * unit.area ** 2 * k21_continued(v, unit, settings)
            worst = max(worst, abs(lhs - rhs))
        out[reading.value] = worst
    return out
