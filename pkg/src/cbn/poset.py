"""Posets on labeled events and their lattices of order ideals.

Events are the integers ``0..n-1``.  A genotype is a plain ``int`` used as a
bit vector: bit ``e`` is set when event ``e`` has occurred.  A poset stores,
for every event, the bitmask of events strictly below it; that mask list is
the transitively closed relation in compact form.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import CapExceeded, CycleError, DimensionMismatch, NotIdealError

DEFAULT_MAX_N = 25


def max_events() -> int:
    """Largest event count accepted; ``CBN_MAX_N`` overrides the default."""
    raw = os.environ.get("CBN_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"CBN_MAX_N must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("CBN_MAX_N must be positive")
    return value


def max_lattice_size() -> int:
    return 1 << max_events()


# -- genotype helpers -------------------------------------------------------

def genotype(events: Iterable[int]) -> int:
    g = 0
    for e in events:
        g |= 1 << e
    return g


def events_of(g: int) -> list[int]:
    out = []
    e = 0
    while g:
        if g & 1:
            out.append(e)
        g >>= 1
        e += 1
    return out


def popcount(g: int) -> int:
    return bin(g).count("1")


def canonical_key(g: int) -> tuple[int, int]:
    """Sort key for the global lattice order: cardinality, then integer value."""
    return (popcount(g), g)


def genotype_from_bits(bits: str) -> int:
    """``"0110"`` -> genotype with events 1 and 2; character ``i`` is event ``i``."""
    g = 0
    for i, ch in enumerate(bits):
        if ch == "1":
            g |= 1 << i
        elif ch != "0":
            raise ValueError(f"not a bit string: {bits!r}")
    return g


def genotype_to_bits(g: int, n: int) -> str:
    return "".join("1" if g >> i & 1 else "0" for i in range(n))


def format_genotype(g: int, labels: Sequence[str] | None = None) -> str:
    """Human label: ``"12"`` for events 1 and 2 (1-indexed), ``"∅"`` when empty.

    Multi-character labels are joined with commas in braces.
    """
    evs = events_of(g)
    if not evs:
        return "∅"
    names = [labels[e] if labels is not None else str(e + 1) for e in evs]
    if all(len(s) == 1 for s in names):
        return "".join(names)
    return "{" + ",".join(names) + "}"


# -- posets -----------------------------------------------------------------

@dataclass(frozen=True)
class Poset:
    """Strict partial order on ``n`` events.

    ``below[e]`` is the bitmask of all events strictly below ``e``.  Build
    instances with :func:`poset_from_relations` (or :meth:`from_below`) rather
    than directly, since those validate the order axioms.
    """

    n: int
    below: tuple[int, ...]
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    @classmethod
    def from_below(cls, below: Sequence[int], labels: Sequence[str] | None = None) -> "Poset":
        below = tuple(below)
        n = len(below)
        _check_n(n)
        full = (1 << n) - 1
        for e, b in enumerate(below):
            if b & ~full:
                raise IndexError(f"relation mask for event {e} references events >= {n}")
            if b >> e & 1:
                raise CycleError(f"event {e} lies below itself")
            for f in events_of(b):
                if below[f] & ~b:
                    raise ValueError("relation is not transitively closed")
        return cls(n, below, _check_labels(labels, n))

    @cached_property
    def above(self) -> tuple[int, ...]:
        up = [0] * self.n
        for f, b in enumerate(self.below):
            for e in events_of(b):
                up[e] |= 1 << f
        return tuple(up)

    @property
    def strict_lt(self) -> tuple[tuple[bool, ...], ...]:
        """Boolean relation matrix: ``strict_lt[e][f]`` iff ``e < f``."""
        return tuple(
            tuple(bool(self.below[f] >> e & 1) for f in range(self.n)) for e in range(self.n)
        )

    def relations(self) -> list[tuple[int, int]]:
        return sorted((e, f) for f in range(self.n) for e in events_of(self.below[f]))

    def lt(self, e: int, f: int) -> bool:
        return bool(self.below[f] >> e & 1)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def with_labels(self, labels: Sequence[str] | None) -> "Poset":
        return Poset(self.n, self.below, _check_labels(labels, self.n))

    def event_names(self) -> list[str]:
        if self.labels is not None:
            return list(self.labels)
        return [str(e + 1) for e in range(self.n)]

    def topological_order(self) -> list[int]:
        """Linear extension: by number of predecessors, then event index."""
        return sorted(range(self.n), key=lambda e: (popcount(self.below[e]), e))

    def __repr__(self) -> str:
        rels = ", ".join(f"{e}<{f}" for e, f in cover_relations(self))
        return f"Poset(n={self.n}, covers=[{rels}])"


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("a poset needs at least one event")
    cap = max_events()
    if n > cap:
        raise CapExceeded(f"{n} events exceeds the cap of {cap} (set CBN_MAX_N to raise it)")


def _check_labels(labels, n):
    if labels is None:
        return None
    labels = tuple(labels)
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} events")
    return labels


def transitive_closure(n: int, below: Sequence[int]) -> list[int]:
    below = list(below)
    for k in range(n):
        bk = below[k]
        for i in range(n):
            if below[i] >> k & 1:
                below[i] |= bk
    return below


def poset_from_relations(
    n: int, pairs: Iterable[tuple[int, int]], labels: Sequence[str] | None = None
) -> Poset:
    """Transitive closure of the pairs ``(e, f)``, each meaning ``e < f``."""
    _check_n(n)
    below = [0] * n
    for e, f in pairs:
        if not (0 <= e < n and 0 <= f < n):
            raise IndexError(f"relation ({e}, {f}) out of range for n={n}")
        if e == f:
            raise CycleError(f"reflexive relation {e} < {e}")
        below[f] |= 1 << e
    below = transitive_closure(n, below)
    cyclic = [e for e in range(n) if below[e] >> e & 1]
    if cyclic:
        raise CycleError(f"relations contain a cycle through events {cyclic}")
    return Poset(n, tuple(below), _check_labels(labels, n))


def antichain(n: int, labels: Sequence[str] | None = None) -> Poset:
    return poset_from_relations(n, (), labels)


def chain(n: int, labels: Sequence[str] | None = None) -> Poset:
    return poset_from_relations(n, [(i, i + 1) for i in range(n - 1)], labels)


def cover_relations(p: Poset) -> list[tuple[int, int]]:
    """Transitive reduction: ``e`` is covered by ``f`` when nothing sits strictly between."""
    out = []
    for f in range(p.n):
        b = p.below[f]
        for e in events_of(b):
            # h strictly between e and f: h < f and e < h
            if not any(p.below[h] >> e & 1 for h in events_of(b)):
                out.append((e, f))
    return sorted(out)


def parents(p: Poset, e: int) -> list[int]:
    return [a for a, b in cover_relations(p) if b == e]


def below(p: Poset, e: int) -> int:
    if not 0 <= e < p.n:
        raise IndexError(f"event {e} out of range for n={p.n}")
    return p.below[e]


def _check_width(p: Poset, g: int) -> None:
    if g < 0 or g >> p.n:
        raise DimensionMismatch(f"genotype {g:#b} is wider than {p.n} events")


def is_order_ideal(p: Poset, g: int) -> bool:
    _check_width(p, g)
    for e in events_of(g):
        if p.below[e] & ~g:
            return False
    return True


def min_complement(p: Poset, g: int) -> int:
    """Events not in ``g`` whose predecessors all lie in ``g``."""
    if not is_order_ideal(p, g):
        raise NotIdealError(f"{format_genotype(g, p.labels)} is not an order ideal")
    out = 0
    for e in range(p.n):
        if not g >> e & 1 and not p.below[e] & ~g:
            out |= 1 << e
    return out


def is_refinement(p1: Poset, p2: Poset) -> bool:
    """True when every relation of ``p1`` also holds in ``p2``."""
    if p1.n != p2.n:
        raise DimensionMismatch(f"posets on {p1.n} and {p2.n} events")
    return all(b1 & ~b2 == 0 for b1, b2 in zip(p1.below, p2.below))


# -- counting and enumeration ----------------------------------------------

def _first_minimal(below: Sequence[int], mask: int) -> int:
    m = mask
    e = 0
    while m:
        if m & 1 and not below[e] & mask:
            return e
        m >>= 1
        e += 1
    raise AssertionError("nonempty poset without a minimal element")


def _up_masks(below: Sequence[int]) -> list[int]:
    up = [0] * len(below)
    for f, b in enumerate(below):
        for e in events_of(b):
            up[e] |= 1 << f
    return up


def count_order_ideals(p: Poset) -> int:
    """Number of order ideals, by recursion on a minimal element with memoization.

    Ideals either contain the minimal element ``m`` (ideals of the rest, plus
    ``m``) or avoid it (and then avoid everything above it too).
    """
    below = p.below
    up = _up_masks(below)

    @lru_cache(maxsize=None)
    def count(mask: int) -> int:
        if not mask:
            return 1
        m = _first_minimal(below, mask)
        bit = 1 << m
        return count(mask & ~bit) + count(mask & ~(bit | up[m]))

    return count(p.full)


def _generate_ideals(below: Sequence[int], mask: int, up: Sequence[int]) -> list[int]:
    if not mask:
        return [0]
    m = _first_minimal(below, mask)
    bit = 1 << m
    with_m = [g | bit for g in _generate_ideals(below, mask & ~bit, up)]
    without_m = _generate_ideals(below, mask & ~(bit | up[m]), up)
    return without_m + with_m


@dataclass(frozen=True)
class GenotypeLattice:
    """All order ideals of a poset in canonical order (cardinality, then integer)."""

    poset: Poset
    ideals: tuple[int, ...]
    index: dict[int, int] = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.ideals)

    def __iter__(self) -> Iterator[int]:
        return iter(self.ideals)

    def __contains__(self, g: object) -> bool:
        return g in self.index

    def __getitem__(self, i: int) -> int:
        return self.ideals[i]

    def position(self, g: int) -> int:
        try:
            return self.index[g]
        except KeyError:
            raise NotIdealError(
                f"{format_genotype(g, self.poset.labels)} is not in the lattice"
            ) from None

    def label(self, g: int) -> str:
        return format_genotype(g, self.poset.labels)


def enumerate_order_ideals(p: Poset, cap: int | None = None) -> GenotypeLattice:
    cap = max_lattice_size() if cap is None else cap
    size = count_order_ideals(p)
    if size > cap:
        raise CapExceeded(f"lattice has {size} order ideals, cap is {cap}")
    ideals = _generate_ideals(p.below, p.full, _up_masks(p.below))
    ideals.sort(key=canonical_key)
    return GenotypeLattice(p, tuple(ideals), {g: i for i, g in enumerate(ideals)})


def incomparable_pairs(lattice: GenotypeLattice) -> list[tuple[int, int]]:
    """Unordered pairs neither of which contains the other, in canonical pair order."""
    ideals = lattice.ideals
    out = []
    for i, g in enumerate(ideals):
        for h in ideals[i + 1:]:
            meet = g & h
            if meet != g and meet != h:
                out.append((g, h))
    return out
