"""Structure learning: event merging, the maximal compatible poset, error-tolerant
posets, mixture fits over a tolerance grid, and bootstrap of the fitted likelihood.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .counts import CountVector
from .errors import CallerMustMerge, DimensionMismatch, EmptyData
from .estimation import MixtureFit, mixture_log_likelihood, mle_lambda, mle_theta
from .poset import Poset, count_order_ideals, is_order_ideal, transitive_closure


@dataclass(frozen=True)
class EventMerge:
    """Partition of the original events into classes the data cannot tell apart."""

    groups: tuple[tuple[int, ...], ...]
    n_original: int

    @property
    def reduced_n(self) -> int:
        return len(self.groups)

    @property
    def mapping(self) -> tuple[int, ...]:
        out = [0] * self.n_original
        for k, grp in enumerate(self.groups):
            for e in grp:
                out[e] = k
        return tuple(out)

    @property
    def is_identity(self) -> bool:
        return all(len(grp) == 1 for grp in self.groups)

    def reduce(self, g: int) -> int:
        """Reduced genotype: a class is present iff all of its members are."""
        r = 0
        for k, grp in enumerate(self.groups):
            if all(g >> e & 1 for e in grp):
                r |= 1 << k
        return r

    def expand(self, r: int) -> int:
        g = 0
        for k, grp in enumerate(self.groups):
            if r >> k & 1:
                for e in grp:
                    g |= 1 << e
        return g

    def names(self, original: Sequence[str]) -> list[str]:
        return ["+".join(original[e] for e in grp) for grp in self.groups]


@dataclass(frozen=True)
class ScanEntry:
    epsilon: float
    epsilon_max: float
    fit: MixtureFit
    fraction_incompatible: float


@dataclass(frozen=True)
class ScanResult:
    entries: tuple[ScanEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def best(self) -> ScanEntry:
        """Entry with the largest mixture log-likelihood (first one on ties)."""
        return max(self.entries, key=lambda en: en.fit.log_lik)


@dataclass(frozen=True)
class BootstrapSummary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    replicates: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "min": self.minimum,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.maximum,
            "replicates": self.replicates,
            "seed": self.seed,
        }


# -- separation and merging --------------------------------------------------

def _event_classes(u: CountVector) -> tuple[tuple[int, ...], ...]:
    # two events are inseparable when they co-occur in every observed genotype
    support = u.support
    by_pattern: dict[tuple[bool, ...], list[int]] = {}
    for e in range(u.n):
        key = tuple(bool(g >> e & 1) for g in support)
        by_pattern.setdefault(key, []).append(e)
    return tuple(sorted(tuple(v) for v in by_pattern.values()))


def separates_events(u: CountVector) -> tuple[bool, tuple[tuple[int, ...], ...]]:
    u.require_nonempty()
    groups = _event_classes(u)
    return len(groups) == u.n, groups


def merge_events(u: CountVector) -> tuple[CountVector, EventMerge]:
    u.require_nonempty()
    merge = EventMerge(_event_classes(u), u.n)
    reduced: dict[int, float] = {}
    for g, c in u.items():
        r = merge.reduce(g)
        reduced[r] = reduced.get(r, 0) + c
    return CountVector(merge.reduced_n, reduced), merge


def _require_separated(u: CountVector) -> None:
    ok, groups = separates_events(u)
    if not ok:
        joined = [grp for grp in groups if len(grp) > 1]
        raise CallerMustMerge(f"data do not separate the events; inseparable groups {joined}")


# -- posets from data --------------------------------------------------------

def violation_fractions(u: CountVector) -> list[list[float]]:
    """``v[e][f]``: mass fraction of genotypes containing ``f`` but not ``e``."""
    n = u.n
    total = u.total
    mass = [[0] * n for _ in range(n)]
    for g, c in u.items():
        for f in range(n):
            if g >> f & 1:
                row = ~g
                for e in range(n):
                    if row >> e & 1:
                        mass[e][f] += c
    return [[mass[e][f] / total for f in range(n)] for e in range(n)]


def maximal_compatible_poset(u: CountVector, labels: Sequence[str] | None = None) -> Poset:
    """Largest poset compatible with the data: ``e < f`` unless some genotype has ``f`` without ``e``."""
    u.require_nonempty()
    _require_separated(u)
    n = u.n
    below = [0] * n
    for f in range(n):
        for e in range(n):
            if e != f and not any(g >> f & 1 and not g >> e & 1 for g in u.support):
                below[f] |= 1 << e
    return Poset.from_below(below, labels)


def epsilon_poset(
    u: CountVector, epsilon: float, labels: Sequence[str] | None = None
) -> Poset:
    """Poset of relations violated by at most a fraction ``epsilon`` of the data.

    Pairs passing in both directions are dropped.  The rest is transitively
    closed; a cycle in the closure is broken by removing its worst-supported
    base relation (largest violation fraction) and closing again.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon {epsilon} outside [0, 1]")
    u.require_nonempty()
    _require_separated(u)
    n = u.n
    v = violation_fractions(u)
    base = {(e, f) for e in range(n) for f in range(n) if e != f and v[e][f] <= epsilon}
    base = {(e, f) for e, f in base if (f, e) not in base}
    # Around a cycle the forward and reverse violation masses are equal, so an
    # exact threshold cannot close one; the repair only guards float rounding.
    while True:
        below = [0] * n
        for e, f in base:
            below[f] |= 1 << e
        below = transitive_closure(n, below)
        cyclic = [(e, f) for e, f in base if below[e] >> f & 1]
        if not cyclic:
            return Poset.from_below(below, labels)
        base.discard(max(cyclic, key=lambda r: (v[r[0]][r[1]], r)))


def epsilon_grid(u: CountVector) -> list[float]:
    """Every distinct violation fraction in the data, plus 0, ascending."""
    reduced, _ = merge_events(u)
    v = violation_fractions(reduced)
    values = {0.0}
    for e in range(reduced.n):
        for f in range(reduced.n):
            if e != f:
                values.add(v[e][f])
    return sorted(values)


# -- fitting -------------------------------------------------------------------

def _fit_on_poset(poset: Poset, u: CountVector, epsilon: float, merge=None,
                  lattice_size: int | None = None) -> MixtureFit:
    if lattice_size is None:
        lattice_size = count_order_ideals(poset)
    compatible = u.restrict(lambda g: is_order_ideal(poset, g))
    if compatible:
        theta, unidentified = mle_theta(poset, compatible)
    else:
        theta, unidentified = (0.0,) * poset.n, frozenset(range(poset.n))
    lam = mle_lambda(poset, u)
    ll = mixture_log_likelihood(poset, theta, lam, u, lattice_size)
    return MixtureFit(
        poset=poset,
        theta_hat=theta,
        lambda_hat=lam,
        epsilon=epsilon,
        lattice_size=lattice_size,
        log_lik=ll,
        n_compatible=compatible.total,
        n_total=u.total,
        unidentified_events=unidentified,
        merge=merge,
    )


def fit(u: CountVector, epsilon: float = 0.0, merge: bool = True,
        labels: Sequence[str] | None = None) -> MixtureFit:
    """Fit the error-tolerant mixture CBN at tolerance ``epsilon``.

    Inseparable events are merged first (or rejected when ``merge`` is
    false).  Event probabilities come from the compatible data only; the
    mixture weight is the compatible fraction of all data.
    """
    if u.total == 0:
        raise EmptyData("no observations")
    if merge:
        reduced, em = merge_events(u)
    else:
        _require_separated(u)
        reduced, em = u, EventMerge(tuple((e,) for e in range(u.n)), u.n)
    names = em.names(labels) if labels is not None else None
    poset = epsilon_poset(reduced, epsilon, names)
    return _fit_on_poset(poset, reduced, epsilon, em)


def scan(u: CountVector, epsilons: Sequence[float] | None = None, merge: bool = True,
         labels: Sequence[str] | None = None) -> ScanResult:
    """One fit per tolerance; consecutive tolerances giving the same poset collapse."""
    if epsilons is None:
        epsilons = epsilon_grid(u)
    epsilons = list(epsilons)
    if not epsilons:
        raise ValueError("empty epsilon list")
    for a, b in zip(epsilons, epsilons[1:]):
        if not a < b:
            raise ValueError("epsilons must be strictly increasing")
    if epsilons[0] < 0 or epsilons[-1] > 1:
        raise ValueError("epsilons must lie in [0, 1]")
    entries: list[ScanEntry] = []
    for eps in epsilons:
        f = fit(u, eps, merge=merge, labels=labels)
        if entries and entries[-1].fit.poset == f.poset:
            last = entries[-1]
            entries[-1] = ScanEntry(last.epsilon, eps, last.fit, last.fraction_incompatible)
            continue
        entries.append(ScanEntry(eps, eps, f, f.fraction_incompatible))
    return ScanResult(tuple(entries))


# -- bootstrap -----------------------------------------------------------------

def _replicate(support, probs, n_obs, poset, lattice_size, seed):
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(n_obs, probs)
    resampled = CountVector(poset.n, {g: int(c) for g, c in zip(support, draws)})
    return _fit_on_poset(poset, resampled, math.nan, lattice_size=lattice_size).log_lik


def bootstrap_loglik(u: CountVector, poset: Poset, B: int, seed: int = 0,
                     workers: int | None = None) -> BootstrapSummary:
    """Quartiles of the refitted mixture log-likelihood over ``B`` resamples.

    The poset stays fixed; only the event probabilities and mixture weight
    are re-estimated.  Replicate ``b`` draws from a generator seeded with
    ``seed + b``, so results do not depend on how replicates are scheduled.
    """
    if B < 1:
        raise ValueError("need at least one bootstrap replicate")
    if u.n != poset.n:
        raise DimensionMismatch(f"data has {u.n} events, poset has {poset.n}")
    total = u.total
    if total == 0:
        raise EmptyData("no observations")
    n_obs = int(round(total))
    support = u.support
    probs = np.array([float(u[g]) for g in support])
    probs /= probs.sum()
    lattice_size = count_order_ideals(poset)
    args = [(support, probs, n_obs, poset, lattice_size, seed + b) for b in range(B)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(lambda a: _replicate(*a), args))
    else:
        values = [_replicate(*a) for a in args]
    q = np.percentile(np.asarray(values), [0, 25, 50, 75, 100])
    return BootstrapSummary(*(float(x) for x in q), replicates=B, seed=seed)


def bootstrap_separated(a: BootstrapSummary, b: BootstrapSummary) -> bool:
    """True when the two bootstrap ranges do not overlap."""
    return a.maximum < b.minimum or b.maximum < a.minimum
