"""Closed-form maximum likelihood for CBNs and their noise mixtures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .counts import CountVector
from .errors import (
    DegenerateMixture,
    DimensionMismatch,
    DomainError,
    EmptyData,
    IncompatibleData,
    NotNested,
)
from .poset import (
    Poset,
    count_order_ideals,
    events_of,
    format_genotype,
    is_order_ideal,
    is_refinement,
    min_complement,
)

if TYPE_CHECKING:
    from .selection import EventMerge

__all__ = [
    "CountVector",
    "MixtureFit",
    "NestedRatio",
    "log_likelihood",
    "mixture_log_likelihood",
    "mixture_probability",
    "mle_degree_check_ratio",
    "mle_lambda",
    "mle_theta",
    "nested_likelihood_ratio",
]


@dataclass(frozen=True)
class MixtureFit:
    poset: Poset
    theta_hat: tuple
    lambda_hat: float
    epsilon: float
    lattice_size: int
    log_lik: float
    n_compatible: float
    n_total: float
    unidentified_events: frozenset = frozenset()
    merge: "EventMerge | None" = field(default=None, compare=False)

    @property
    def fraction_incompatible(self) -> float:
        return 1 - self.lambda_hat


def _xlog(c, x) -> float:
    """``c * log(x)`` with ``0 * log(0) = 0``; ``log(0)`` with ``c > 0`` is ``-inf``."""
    if c == 0:
        return 0.0
    if x == 0:
        return -math.inf
    return c * math.log(x)


def _check_width(p: Poset, u: CountVector) -> None:
    if u.n != p.n:
        raise DimensionMismatch(f"data has {u.n} events, poset has {p.n}")


def _check_theta(p: Poset, theta: Sequence) -> None:
    if len(theta) != p.n:
        raise DimensionMismatch(f"{len(theta)} parameters for {p.n} events")


def incompatible_support(p: Poset, u: CountVector) -> list[int]:
    return [g for g in u.support if not is_order_ideal(p, g)]


def mle_theta(p: Poset, u: CountVector) -> tuple[tuple, frozenset]:
    """ML event probabilities and the set of events the data leave undetermined.

    ``theta_e`` is the mass of genotypes containing ``e`` divided by the mass
    of genotypes containing everything below ``e``.  A zero denominator makes
    the likelihood flat in ``theta_e``; such events get 0 and are reported.
    """
    _check_width(p, u)
    u.require_nonempty()
    bad = incompatible_support(p, u)
    if bad:
        names = ", ".join(format_genotype(g, p.labels) for g in bad)
        raise IncompatibleData(f"genotypes not compatible with the poset: {names}", bad)
    theta = []
    unidentified = set()
    for e in range(p.n):
        bit = 1 << e
        need = p.below[e]
        num = den = 0
        for g, c in u.items():
            if g & need == need:
                den += c
                if g & bit:
                    num += c
        if den == 0:
            theta.append(0 * num)
            unidentified.add(e)
        else:
            theta.append(num / den)
    return tuple(theta), frozenset(unidentified)


def log_genotype_probability(p: Poset, theta: Sequence, g: int) -> float:
    if not is_order_ideal(p, g):
        return -math.inf
    out = 0.0
    for e in events_of(g):
        out += _xlog(1, theta[e])
    for e in events_of(min_complement(p, g)):
        out += _xlog(1, 1 - theta[e])
    return out


def log_likelihood(p: Poset, theta: Sequence, u: CountVector) -> float:
    _check_width(p, u)
    _check_theta(p, theta)
    total = 0.0
    for g, c in u.items():
        if not is_order_ideal(p, g):
            return -math.inf
        for e in events_of(g):
            total += _xlog(c, theta[e])
        for e in events_of(min_complement(p, g)):
            total += _xlog(c, 1 - theta[e])
        if total == -math.inf:
            return total
    return total


def _incompatible_states(p: Poset, lattice_size: int | None) -> int:
    size = count_order_ideals(p) if lattice_size is None else lattice_size
    return (1 << p.n) - size


def mixture_probability(
    p: Poset, theta: Sequence, lam, g: int, lattice_size: int | None = None
):
    """Mixture probability: ``lam * P_g`` on the lattice, uniform noise off it."""
    from .model import CbnModel, genotype_probability

    if not 0 <= lam <= 1:
        raise DomainError(f"mixture weight {lam} outside [0, 1]")
    if is_order_ideal(p, g):
        return lam * genotype_probability(CbnModel(p, tuple(theta)), g)
    outside = _incompatible_states(p, lattice_size)
    if outside == 0:
        raise DegenerateMixture("every genotype is compatible; the noise component is empty")
    return (1 - lam) / outside


def mle_lambda(p: Poset, u: CountVector):
    """Fraction of the data mass compatible with ``p``."""
    _check_width(p, u)
    total = u.total
    if total == 0:
        raise EmptyData("no observations")
    compatible = sum(c for g, c in u.items() if is_order_ideal(p, g))
    return compatible / total


def mixture_log_likelihood(
    p: Poset, theta: Sequence, lam, u: CountVector, lattice_size: int | None = None
) -> float:
    _check_width(p, u)
    _check_theta(p, theta)
    outside_mass = 0
    comp = {}
    for g, c in u.items():
        if is_order_ideal(p, g):
            comp[g] = c
        else:
            outside_mass += c
    inside = CountVector(p.n, comp)
    total = _xlog(inside.total, lam) + log_likelihood(p, theta, inside)
    if outside_mass:
        outside = _incompatible_states(p, lattice_size)
        if outside == 0:
            raise DegenerateMixture("incompatible data but no incompatible states")
        total += _xlog(outside_mass, 1 - lam) - outside_mass * math.log(outside)
    return total


def mle_degree_check_ratio(a: float, b: float, x: float, y: float) -> float:
    """``x**b (y-a)**(1-a) / (y (x-a)**(b-a))`` for ``0 <= a <= b <= x <= y <= 1``."""
    if not (0 <= a <= b <= x <= y <= 1):
        raise DomainError(f"need 0 <= a <= b <= x <= y <= 1, got a={a} b={b} x={x} y={y}")
    if y == 0:
        raise DomainError("y must be positive")
    if x == a and b != a:
        raise DomainError("x == a requires b == a")
    return x**b * (y - a) ** (1 - a) / (y * (x - a) ** (b - a))


@dataclass(frozen=True)
class NestedRatio:
    """Likelihood ratio of two posets differing in the single relation ``e < f``.

    ``direct`` comes from the two fitted log-likelihoods.  ``closed_form`` is
    ``M**M (N-V2)**(N-V2) / (N**N (M-V2)**(M-V2))``; ``two_event_form`` is
    ``M**V1 (N-V2)**(1-V2) / (N (M-V2)**(V1-V2))``.  The two coincide when
    ``f`` has no predecessors in the coarser poset (then ``N = 1`` and
    ``M = V1``).
    """

    direct: float
    closed_form: float
    two_event_form: float
    e: int
    f: int
    V1: float
    V2: float
    N: float
    M: float


def added_relation(p1: Poset, p2: Poset) -> tuple[int, int]:
    if p1.n != p2.n:
        raise DimensionMismatch(f"posets on {p1.n} and {p2.n} events")
    if not is_refinement(p1, p2):
        raise NotNested("the finer poset does not contain the coarser one")
    extra = sorted(set(p2.relations()) - set(p1.relations()))
    if len(extra) != 1:
        raise NotNested(f"posets differ by {len(extra)} relations, expected exactly one")
    return extra[0]


def nested_likelihood_ratio(p1: Poset, p2: Poset, u: CountVector) -> NestedRatio:
    e, f = added_relation(p1, p2)
    _check_width(p2, u)
    bad = incompatible_support(p2, u)
    if bad:
        raise IncompatibleData("data not compatible with the finer poset", bad)
    u = u.normalized()
    theta1, _ = mle_theta(p1, u)
    theta2, _ = mle_theta(p2, u)
    direct = math.exp(log_likelihood(p1, theta1, u) - log_likelihood(p2, theta2, u))

    V1 = sum(c for g, c in u.items() if g >> e & 1)
    V2 = sum(c for g, c in u.items() if g >> f & 1)
    b1, b2 = p1.below[f], p2.below[f]
    N = sum(c for g, c in u.items() if g & b1 == b1)
    M = sum(c for g, c in u.items() if g & b2 == b2)
    closed = M**M * (N - V2) ** (N - V2) / (N**N * (M - V2) ** (M - V2))
    two_event = M**V1 / N * (N - V2) ** (1 - V2) / (M - V2) ** (V1 - V2) if N else 1.0
    return NestedRatio(direct, closed, two_event, e, f, V1, V2, N, M)
