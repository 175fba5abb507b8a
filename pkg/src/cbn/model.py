"""The CBN probability model on the lattice of order ideals."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counts import CountVector
from .errors import DimensionMismatch, NotIdealError
from .poset import (
    GenotypeLattice,
    Poset,
    enumerate_order_ideals,
    events_of,
    format_genotype,
    is_order_ideal,
    min_complement,
    parents,
)


@dataclass(frozen=True)
class CbnModel:
    poset: Poset
    theta: tuple

    def __post_init__(self):
        theta = tuple(self.theta)
        if len(theta) != self.poset.n:
            raise DimensionMismatch(f"{len(theta)} parameters for {self.poset.n} events")
        for e, t in enumerate(theta):
            if not 0 <= t <= 1:
                raise ValueError(f"theta[{e}] = {t} is outside [0, 1]")
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.poset.n


def genotype_probability(m: CbnModel, g: int):
    """Probability of genotype ``g``; exactly zero when ``g`` is not an order ideal.

    Works with any numeric type for ``theta`` (floats, Fractions).
    """
    p = m.poset
    if not is_order_ideal(p, g):
        return 0 * m.theta[0]
    theta = m.theta
    present = math.prod(theta[e] for e in events_of(g))
    nxt = math.prod(1 - theta[e] for e in events_of(min_complement(p, g)))
    return present * nxt


def distribution(m: CbnModel, lattice: GenotypeLattice | None = None) -> list:
    """Probabilities of every lattice genotype, in canonical lattice order."""
    if lattice is None:
        lattice = enumerate_order_ideals(m.poset)
    elif lattice.poset != m.poset:
        raise DimensionMismatch("lattice belongs to a different poset")
    return [genotype_probability(m, g) for g in lattice]


def sample(m: CbnModel, count: int, seed: int | None = None) -> CountVector:
    """Forward-sample ``count`` genotypes through the conditional probability tables.

    An event fires with probability ``theta[e]`` once all its parents have
    fired and never otherwise.
    """
    if count < 0:
        raise ValueError("sample size must be nonnegative")
    n = m.n
    if count == 0:
        return CountVector(n)
    rng = np.random.default_rng(seed)
    theta = np.asarray(m.theta, dtype=float)
    x = np.zeros((count, n), dtype=bool)
    for e in m.poset.topological_order():
        draw = rng.random(count) < theta[e]
        pa = parents(m.poset, e)
        if pa:
            draw &= x[:, pa].all(axis=1)
        x[:, e] = draw
    codes = x.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))
    values, freq = np.unique(codes, return_counts=True)
    return CountVector(n, {int(g): int(c) for g, c in zip(values, freq)})


def marginal_subsum(m: CbnModel, h: int, lattice: GenotypeLattice | None = None):
    """Total probability of the genotypes containing ``h``."""
    if not is_order_ideal(m.poset, h):
        raise NotIdealError(f"{format_genotype(h, m.poset.labels)} is not an order ideal")
    if lattice is None:
        lattice = enumerate_order_ideals(m.poset)
    return sum(genotype_probability(m, g) for g in lattice if g & h == h)

