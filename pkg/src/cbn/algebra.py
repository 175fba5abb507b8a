"""Exact polynomial layer: model polynomials, Möbius inversion on the genotype
lattice, Hibi binomials and their expansion in probability coordinates.

All symbolic arithmetic uses :class:`fractions.Fraction`; floating point only
enters when :func:`verify_invariants` is fed a float distribution.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import CapExceeded, DimensionMismatch, NotIdealError, ZeroPolynomial
from .poset import (
    GenotypeLattice,
    Poset,
    enumerate_order_ideals,
    events_of,
    format_genotype,
    incomparable_pairs,
    is_order_ideal,
    min_complement,
)

Exponent = tuple[int, ...]


def _tidy(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


class SymbolicPolynomial:
    """Sparse polynomial in ``nvars`` variables with rational coefficients.

    Terms map exponent tuples to nonzero coefficients (``int`` when integral,
    otherwise ``Fraction``).  Instances are treated as immutable values.
    """

    __slots__ = ("nvars", "terms", "_sparse")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        self._sparse = None
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != nvars:
                raise DimensionMismatch(f"exponent {exp} has length != {nvars}")
            if not isinstance(c, int):
                c = Fraction(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: _tidy(c) for e, c in clean.items() if c}

    @classmethod
    def constant(cls, nvars: int, value=1) -> "SymbolicPolynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "SymbolicPolynomial":
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "SymbolicPolynomial":
        return cls(len(exp), {tuple(exp): coeff})

    def _coerce(self, other) -> "SymbolicPolynomial":
        if isinstance(other, SymbolicPolynomial):
            if other.nvars != self.nvars:
                raise DimensionMismatch(f"{self.nvars} vs {other.nvars} variables")
            return other
        return SymbolicPolynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return SymbolicPolynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return SymbolicPolynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return SymbolicPolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, SymbolicPolynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == SymbolicPolynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def coefficients(self) -> list[Fraction]:
        return list(self.terms.values())

    def evaluate(self, values: Sequence):
        if len(values) != self.nvars:
            raise DimensionMismatch(f"{len(values)} values for {self.nvars} variables")
        if self._sparse is None:
            self._sparse = [
                (c, [(i, k) for i, k in enumerate(exp) if k]) for exp, c in self.terms.items()
            ]
        total = 0
        for c, factors in self._sparse:
            term = c
            for i, k in factors:
                term = term * (values[i] if k == 1 else values[i] ** k)
            total = total + term
        return total

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        order = sorted(self.terms, key=lambda e: (-sum(e), self.terms[e] < 0, tuple(-k for k in e)))
        parts = []
        for exp in order:
            c = self.terms[exp]
            factors = []
            for name, k in zip(names, exp):
                if k == 1:
                    factors.append(name)
                elif k:
                    factors.append(f"{name}^{k}")
            mono = "*".join(factors)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[1:]

    def __repr__(self):
        return f"SymbolicPolynomial({self.format()})"


# -- model polynomials -----------------------------------------------------------

def symbolic_genotype_polynomial(p: Poset, g: int) -> SymbolicPolynomial:
    """Expanded product of ``theta_e`` over ``g`` and ``1 - theta_e`` over the next events."""
    if not is_order_ideal(p, g):
        raise NotIdealError(f"{format_genotype(g, p.labels)} is not an order ideal")
    n = p.n
    base = tuple(1 if g >> e & 1 else 0 for e in range(n))
    nxt = events_of(min_complement(p, g))
    terms = {}
    for k in range(len(nxt) + 1):
        for subset in combinations(nxt, k):
            exp = list(base)
            for e in subset:
                exp[e] = 1
            terms[tuple(exp)] = (-1) ** k
    return SymbolicPolynomial(n, terms)


def symbolic_sum_check(p: Poset, lattice: GenotypeLattice | None = None) -> SymbolicPolynomial:
    if lattice is None:
        lattice = enumerate_order_ideals(p)
    total = SymbolicPolynomial(p.n)
    for g in lattice:
        total = total + symbolic_genotype_polynomial(p, g)
    return total


def leading_monomial(poly: SymbolicPolynomial) -> Exponent:
    """Largest term for the local order: lowest total degree, ties by larger exponent tuple."""
    if not poly:
        raise ZeroPolynomial("the zero polynomial has no leading monomial")
    return min(poly.terms, key=lambda e: (sum(e), tuple(-k for k in e)))


# -- Möbius transform ------------------------------------------------------------

def _check_vector(lattice: GenotypeLattice, vec: Sequence) -> None:
    if len(vec) != len(lattice):
        raise DimensionMismatch(f"vector of length {len(vec)} for a lattice of size {len(lattice)}")


def moebius_transform(lattice: GenotypeLattice, pvec: Sequence) -> list:
    """Superset sums ``q_h = sum of p_g over lattice members g containing h``."""
    _check_vector(lattice, pvec)
    n = lattice.poset.n
    m = len(lattice)
    if m * m <= n << n:
        return [sum((v for g, v in zip(lattice, pvec) if g & h == h), 0 * pvec[0])
                for h in lattice]
    if n > 22:
        raise CapExceeded("superset sums are limited to 22 events")
    zero = 0 * pvec[0]
    dense = [zero] * (1 << n)
    for g, v in zip(lattice, pvec):
        dense[g] = v
    for e in range(n):
        bit = 1 << e
        for h in range(1 << n):
            if not h & bit:
                dense[h] = dense[h] + dense[h | bit]
    return [dense[h] for h in lattice]


def moebius_inverse(lattice: GenotypeLattice, qvec: Sequence) -> list:
    """Inverse of :func:`moebius_transform`.

    On a distributive lattice the Möbius function is ``(-1)**|S|`` on
    intervals ``[g, g + S]`` with ``S`` a set of next events of ``g``, so
    ``p_g`` is an alternating sum over subsets of ``min(g^c)``.
    """
    _check_vector(lattice, qvec)
    p = lattice.poset
    out = []
    for g in lattice:
        nxt = events_of(min_complement(p, g))
        acc = 0 * qvec[0]
        for k in range(len(nxt) + 1):
            for subset in combinations(nxt, k):
                h = g
                for e in subset:
                    h |= 1 << e
                term = qvec[lattice.index[h]]
                acc = acc + term if k % 2 == 0 else acc - term
        out.append(acc)
    return out


def moebius_inverse_polynomials(lattice: GenotypeLattice) -> list[SymbolicPolynomial]:
    """``p_g`` as linear polynomials in the ``q`` variables, one per lattice element."""
    m = len(lattice)
    qs = [SymbolicPolynomial.variable(m, i) for i in range(m)]
    return moebius_inverse(lattice, qs)


def _supersets(lattice: GenotypeLattice) -> list[list[int]]:
    """For each lattice element, positions of the lattice elements containing it."""
    return [[j for j, g in enumerate(lattice) if g & h == h] for h in lattice]


# -- invariants --------------------------------------------------------------------

@dataclass(frozen=True)
class QuadricSpec:
    """One model invariant.

    ``kind`` is ``"q-binomial"`` (a Hibi binomial in superset-sum
    coordinates), ``"p-quadric"`` (the same binomial rewritten in probability
    coordinates) or ``"linear"`` (probabilities sum to one).  Pairs hold
    genotypes; ``polynomial`` is over the lattice variables in canonical order.
    """

    kind: str
    positive_pair: tuple[int, int] | None
    negative_pair: tuple[int, int] | None
    polynomial: SymbolicPolynomial

    def evaluate(self, values: Sequence):
        return self.polynomial.evaluate(values)

    def format(self, lattice: GenotypeLattice) -> str:
        prefix = "q" if self.kind == "q-binomial" else "p"
        names = [f"{prefix}_{lattice.label(g)}" for g in lattice]
        return self.polynomial.format(names)


def hibi_quadrics(lattice: GenotypeLattice) -> list[QuadricSpec]:
    """``q_g q_h - q_{g|h} q_{g&h}`` for every incomparable pair, canonical pair order."""
    m = len(lattice)
    idx = lattice.index
    out = []
    for g, h in incomparable_pairs(lattice):
        plus = [0] * m
        plus[idx[g]] += 1
        plus[idx[h]] += 1
        minus = [0] * m
        minus[idx[g | h]] += 1
        minus[idx[g & h]] += 1
        poly = SymbolicPolynomial(m, {tuple(plus): 1, tuple(minus): -1})
        out.append(QuadricSpec("q-binomial", (g, h), (g | h, g & h), poly))
    return out


def linear_invariant(lattice: GenotypeLattice) -> QuadricSpec:
    m = len(lattice)
    terms = {}
    for i in range(m):
        exp = [0] * m
        exp[i] = 1
        terms[tuple(exp)] = 1
    terms[(0,) * m] = -1
    return QuadricSpec("linear", None, None, SymbolicPolynomial(m, terms))


def p_coordinate_quadrics(lattice: GenotypeLattice) -> list[QuadricSpec]:
    """Hibi binomials with each ``q_h`` replaced by its superset sum, plus the linear invariant."""
    up = _supersets(lattice)
    idx = lattice.index
    m = len(lattice)
    out = []
    for spec in hibi_quadrics(lattice):
        coeffs: dict[tuple[int, int], int] = {}
        for pair, sign in ((spec.positive_pair, 1), (spec.negative_pair, -1)):
            rows, cols = up[idx[pair[0]]], up[idx[pair[1]]]
            for i in rows:
                for j in cols:
                    key = (i, j) if i <= j else (j, i)
                    coeffs[key] = coeffs.get(key, 0) + sign
        terms = {}
        for (i, j), c in coeffs.items():
            if c:
                exp = [0] * m
                exp[i] += 1
                exp[j] += 1
                terms[tuple(exp)] = c
        poly = SymbolicPolynomial(m, terms)
        out.append(QuadricSpec("p-quadric", spec.positive_pair, spec.negative_pair, poly))
    out.append(linear_invariant(lattice))
    return out


def verify_invariants(
    lattice: GenotypeLattice,
    pvec: Sequence,
    p_quadrics: Iterable[QuadricSpec] | None = None,
    q_binomials: Iterable[QuadricSpec] | None = None,
):
    """Largest absolute value of any invariant at ``pvec``.

    Probability-coordinate quadrics are evaluated at ``pvec`` directly; the
    Hibi binomials at its Möbius transform.  Exact inputs give an exact
    residual.  Precomputed invariant lists may be passed to avoid re-expansion.
    """
    _check_vector(lattice, pvec)
    if p_quadrics is None:
        p_quadrics = p_coordinate_quadrics(lattice)
    if q_binomials is None:
        q_binomials = hibi_quadrics(lattice)
    qvec = moebius_transform(lattice, pvec)
    worst = 0 * pvec[0]
    for spec in p_quadrics:
        worst = max(worst, abs(spec.evaluate(pvec)))
    for spec in q_binomials:
        worst = max(worst, abs(spec.evaluate(qvec)))
    return worst
