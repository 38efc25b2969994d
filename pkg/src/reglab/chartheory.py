"""Finite abelian groups, characters with exact rational angles, and the Dedekind determinant."""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import NotASubgroup
from .intlinalg import smith_normal_form


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z/n_1 + ... + Z/n_k with elements as integer tuples reduced componentwise."""

    cyclic_orders: tuple

    def __post_init__(self):
        orders = tuple(int(n) for n in self.cyclic_orders)
        if any(n < 1 for n in orders):
            raise ValueError("cyclic orders must be positive")
        object.__setattr__(self, "cyclic_orders", orders)

    @property
    def order(self) -> int:
        return math.prod(self.cyclic_orders)

    @property
    def identity(self) -> tuple:
        return tuple(0 for _ in self.cyclic_orders)

    def reduce(self, x) -> tuple:
        return tuple(int(a) % n for a, n in zip(x, self.cyclic_orders))

    def add(self, x, y) -> tuple:
        return self.reduce(a + b for a, b in zip(x, y))

    def neg(self, x) -> tuple:
        return self.reduce(-a for a in x)

    def sub(self, x, y) -> tuple:
        return self.reduce(a - b for a, b in zip(x, y))

    def times(self, k: int, x) -> tuple:
        return self.reduce(k * a for a in x)

    @cached_property
    def elements(self) -> list:
        return [tuple(e) for e in itertools.product(*(range(n) for n in self.cyclic_orders))]

    def generators(self) -> list:
        gens = []
        for i, _ in enumerate(self.cyclic_orders):
            e = [0] * len(self.cyclic_orders)
            e[i] = 1
            gens.append(tuple(e))
        return gens


@dataclass(frozen=True)
class CharacterData:
    """chi(x) = exp(2 pi i sum_k exponents[k] x_k / n_k)."""

    group: FiniteAbelianGroup
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", self.group.reduce(self.exponents))

    def angle(self, x) -> Fraction:
        """Exact value of chi(x) as a fraction of a full turn, in [0, 1)."""
        t = sum(Fraction(e * a, n) for e, a, n in zip(self.exponents, x, self.group.cyclic_orders))
        return t - math.floor(t)

    def __call__(self, x) -> complex:
        t = self.angle(x)
        if t == 0:
            return 1 + 0j
        return cmath.exp(2j * math.pi * float(t))

    @property
    def order(self) -> int:
        return math.lcm(*(n // math.gcd(e, n) for e, n in zip(self.exponents, self.group.cyclic_orders)))

    def conj(self) -> "CharacterData":
        return CharacterData(self.group, self.group.neg(self.exponents))

    def __mul__(self, other: "CharacterData") -> "CharacterData":
        return CharacterData(self.group, self.group.add(self.exponents, other.exponents))

    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def is_real(self) -> bool:
        return self.conj() == self

    def to_json(self) -> dict:
        return {"orders": list(self.group.cyclic_orders), "chi_exponents": list(self.exponents)}


@dataclass(frozen=True)
class Presentation:
    """Z^k / (row span of ``relations``) identified with a FiniteAbelianGroup.

    ``to_group`` sends an integer vector of Z^k to its element.
    """

    group: FiniteAbelianGroup
    Q: tuple
    keep: tuple

    def to_group(self, v) -> tuple:
        k = len(self.Q)
        w = [sum(v[i] * self.Q[i][j] for i in range(k)) for j in range(k)]
        return self.group.reduce(w[j] for j in self.keep)


def present(num_generators: int, relations) -> Presentation:
    """Invariant-factor presentation of a finite abelian group given by relations."""
    rel = [list(map(int, r)) for r in relations] or [[0] * num_generators]
    S, _, Q = smith_normal_form(rel)
    diag = [S[i][i] if i < len(S) else 0 for i in range(num_generators)]
    if any(d == 0 for d in diag):
        raise ValueError("relations do not define a finite group")
    keep = tuple(j for j, d in enumerate(diag) if d != 1)
    return Presentation(FiniteAbelianGroup(tuple(diag[j] for j in keep)),
                        tuple(map(tuple, Q)), keep)


def all_characters(G: FiniteAbelianGroup) -> list[CharacterData]:
    return [CharacterData(G, e) for e in G.elements]


def scalar_product(chi1: CharacterData, chi2: CharacterData) -> Fraction:
    """(1/|G|) sum chi1(x) conj(chi2(x)), exactly (the sum of roots of unity is 0 or |G|)."""
    diff = chi1 * chi2.conj()
    return Fraction(1) if diff.is_trivial() else Fraction(0)


@dataclass(frozen=True)
class Subgroup:
    """The subgroup of ``ambient`` generated by ``gens``."""

    ambient: FiniteAbelianGroup
    gens: tuple = ()

    def __post_init__(self):
        gens = tuple(self.ambient.reduce(g) for g in self.gens)
        for g in gens:
            if len(g) != len(self.ambient.cyclic_orders):
                raise NotASubgroup(f"generator {g} has the wrong length")
        object.__setattr__(self, "gens", gens)

    @cached_property
    def elements(self) -> list:
        A = self.ambient
        seen = {A.identity}
        frontier = [A.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.gens:
                    y = A.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.ambient.order // self.order

    def contains(self, x) -> bool:
        return self.ambient.reduce(x) in self.element_set

    @classmethod
    def whole(cls, A: FiniteAbelianGroup) -> "Subgroup":
        return cls(A, tuple(A.generators()))

    @classmethod
    def trivial(cls, A: FiniteAbelianGroup) -> "Subgroup":
        return cls(A, ())


def subgroup_from_elements(A: FiniteAbelianGroup, elements) -> Subgroup:
    els = {A.reduce(e) for e in elements}
    sub = Subgroup(A, tuple(sorted(els)))
    if set(sub.elements) != els:
        raise NotASubgroup("element set is not closed under addition")
    return sub


def restricts_to(big: CharacterData, sub: Subgroup, chi: CharacterData) -> bool:
    return all(big.angle(x) == chi.angle(x) for x in sub.gens)


def extensions_of(Gamma: FiniteAbelianGroup, G: Subgroup, chi: CharacterData) -> list[CharacterData]:
    """Characters of Gamma restricting to chi on G (chi given as a character of Gamma)."""
    if G.ambient != Gamma or chi.group != Gamma:
        raise NotASubgroup("subgroup and character must live in the same ambient group")
    out = [psi for psi in all_characters(Gamma) if restricts_to(psi, G, chi)]
    assert len(out) == G.index
    return out


def subgroup_characters(G: Subgroup) -> list[CharacterData]:
    """One ambient character per distinct character of G."""
    seen, out = set(), []
    for psi in all_characters(G.ambient):
        key = tuple(psi.angle(g) for g in G.gens)
        if key not in seen:
            seen.add(key)
            out.append(psi)
    return out


# --------------------------------------------------------------------------
# Cosets and the Dedekind determinant


@dataclass(frozen=True)
class CosetSystem:
    subgroup: Subgroup
    representatives: tuple = field(default=())

    def __post_init__(self):
        G = self.subgroup
        A = G.ambient
        if not self.representatives:
            reps, covered = [], set()
            for x in A.elements:
                if x not in covered:
                    reps.append(x)
                    covered.update(A.add(x, g) for g in G.elements)
            object.__setattr__(self, "representatives", tuple(reps))
        else:
            reps = tuple(A.reduce(r) for r in self.representatives)
            keys = {self._coset_key(r) for r in reps}
            if len(reps) != G.index or len(keys) != G.index:
                raise NotASubgroup("representatives do not form a transversal")
            object.__setattr__(self, "representatives", reps)

    def _coset_key(self, x):
        A = self.subgroup.ambient
        return min(A.add(x, g) for g in self.subgroup.elements)

    @cached_property
    def _rep_of(self) -> dict:
        return {self._coset_key(r): r for r in self.representatives}

    def rep(self, x) -> tuple:
        return self._rep_of[self._coset_key(x)]

    @cached_property
    def factor_set(self) -> dict:
        """g(c, c') in G with g(c, c') + c = c' + c'' where c'' represents c - c'."""
        A = self.subgroup.ambient
        table = {}
        for c in self.representatives:
            for c1 in self.representatives:
                c2 = self.rep(A.sub(c, c1))
                g = A.sub(A.add(c1, c2), c)
                assert self.subgroup.contains(g)
                table[(c, c1)] = g
        return table

    @classmethod
    def random(cls, subgroup: Subgroup, rng) -> "CosetSystem":
        base = cls(subgroup)
        A = subgroup.ambient
        els = subgroup.elements
        reps = tuple(A.add(r, els[rng.integers(len(els))]) for r in base.representatives)
        return cls(subgroup, reps)


def dedekind_det_spectral(Gamma: FiniteAbelianGroup, G: Subgroup, chi: CharacterData, f) -> complex:
    """prod_i sum_gamma f(gamma) chi_i(gamma) over the extensions chi_i of chi."""
    out = 1 + 0j
    for psi in extensions_of(Gamma, G, chi):
        out *= sum(f(x) * psi(x) for x in Gamma.elements)
    return out


def dedekind_matrix(Gamma: FiniteAbelianGroup, G: Subgroup, chi: CharacterData, f,
                    cs: CosetSystem | None = None) -> np.ndarray:
    """[sum_{tau in G} chi(tau) f(tau + c' - c)]_{c, c'} over coset representatives."""
    cs = cs or CosetSystem(G)
    reps = cs.representatives
    n = len(reps)
    M = np.zeros((n, n), dtype=complex)
    for i, c in enumerate(reps):
        for j, c1 in enumerate(reps):
            d = Gamma.sub(c1, c)
            M[i, j] = sum(chi(t) * f(Gamma.add(t, d)) for t in G.elements)
    return M


def dedekind_det_matrix(Gamma: FiniteAbelianGroup, G: Subgroup, chi: CharacterData, f,
                        cs: CosetSystem | None = None) -> complex:
    return complex(np.linalg.det(dedekind_matrix(Gamma, G, chi, f, cs)))


def group_convolution(Gamma: FiniteAbelianGroup, f, g):
    """(f * g)(x) = sum_y f(y) g(x - y), returned as a dict-backed function."""
    table = {x: sum(f(y) * g(Gamma.sub(x, y)) for y in Gamma.elements) for x in Gamma.elements}
    return table.__getitem__
