from __future__ import annotations

from typing import Callable, Iterable, Iterator, Mapping

from .errors import DimensionMismatch, EmptyData
from .poset import canonical_key, format_genotype, genotype_to_bits


class CountVector:
    """Nonnegative weights on genotypes of a fixed width ``n``.

    Weights may be integers, floats or Fractions, so raw counts, empirical
    distributions and bootstrap resamples share one type.  Zero entries are
    dropped; iteration is in canonical genotype order.
    """

    __slots__ = ("n", "_counts")

    def __init__(self, n: int, counts: Mapping[int, float] | None = None):
        if n < 1:
            raise ValueError("width must be positive")
        self.n = n
        clean = {}
        for g, c in (counts or {}).items():
            if g < 0 or g >> n:
                raise DimensionMismatch(f"genotype {g:#b} does not fit {n} events")
            if c < 0:
                raise ValueError(f"negative count {c} for genotype {g:#b}")
            if c:
                clean[g] = clean.get(g, 0) + c
        self._counts = dict(sorted(clean.items(), key=lambda kv: canonical_key(kv[0])))

    @classmethod
    def from_genotypes(cls, n: int, genotypes: Iterable[int]) -> "CountVector":
        counts: dict[int, int] = {}
        for g in genotypes:
            counts[g] = counts.get(g, 0) + 1
        return cls(n, counts)

    @property
    def counts(self) -> dict[int, float]:
        return dict(self._counts)

    @property
    def total(self):
        return sum(self._counts.values())

    @property
    def support(self) -> list[int]:
        return list(self._counts)

    def items(self) -> Iterator[tuple[int, float]]:
        return iter(self._counts.items())

    def __getitem__(self, g: int):
        return self._counts.get(g, 0)

    def __len__(self) -> int:
        return len(self._counts)

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CountVector):
            return NotImplemented
        return self.n == other.n and self._counts == other._counts

    def __repr__(self) -> str:
        body = ", ".join(f"{genotype_to_bits(g, self.n)}:{c}" for g, c in self._counts.items())
        return f"CountVector(n={self.n}, {{{body}}})"

    def require_nonempty(self) -> None:
        if not self._counts:
            raise EmptyData("no observations")

    def normalized(self) -> "CountVector":
        self.require_nonempty()
        t = self.total
        return CountVector(self.n, {g: c / t for g, c in self._counts.items()})

    def restrict(self, keep: Callable[[int], bool]) -> "CountVector":
        return CountVector(self.n, {g: c for g, c in self._counts.items() if keep(g)})

    def describe(self, labels=None) -> str:
        return ", ".join(f"{format_genotype(g, labels)}:{c}" for g, c in self._counts.items())
