"""File formats: genotype tables, inline poset syntax, JSON fit reports."""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .counts import CountVector
from .errors import DimensionMismatch, EmptyData, InconsistentWidth, ParseError
from .estimation import MixtureFit
from .poset import Poset, cover_relations, genotype_from_bits, genotype_to_bits, poset_from_relations

SCHEMA_VERSION = 1
NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class GenotypeTable:
    event_names: tuple[str, ...]
    rows: tuple[tuple[str, int], ...]
    source_kind: str

    @property
    def n(self) -> int:
        return len(self.event_names)

    def to_counts(self) -> CountVector:
        return CountVector(self.n, {genotype_from_bits(b): c for b, c in self.rows})

    @classmethod
    def from_counts(cls, names: Sequence[str], u: CountVector) -> "GenotypeTable":
        if len(names) != u.n:
            raise DimensionMismatch(f"{len(names)} names for {u.n} events")
        rows = sorted((genotype_to_bits(g, u.n), c) for g, c in u.items())
        return cls(tuple(names), tuple(rows), "counts")


def _check_names(names: Sequence[str], line: int) -> None:
    if not names:
        raise ParseError("header has no event names", line)
    for name in names:
        if not NAME_RE.match(name):
            raise ParseError(f"event name {name!r} must match [A-Za-z0-9_]+", line)
    if len(set(names)) != len(names):
        raise ParseError("duplicate event names in header", line)


def _parse_count(text: str, line: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"count {text!r} is not an integer", line) from None
    if value < 0:
        raise ParseError(f"negative count {value}", line)
    return value


def read_genotype_data(path, format: str = "auto") -> GenotypeTable:
    """Read a 0/1 observation matrix or a ``bitstring,count`` table.

    Both formats start with a header row of event names.  Matrix rows hold
    one 0/1 entry per event and are aggregated; counts rows hold a bit string
    (character ``i`` is event ``i``) and a count.
    """
    if format not in ("auto", "matrix", "counts"):
        raise ValueError(f"unknown format {format!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        records = [(i + 1, row) for i, row in enumerate(csv.reader(fh))]
    records = [(ln, [c.strip() for c in row]) for ln, row in records if any(c.strip() for c in row)]
    if not records:
        raise EmptyData(f"{path}: file is empty")
    header_line, names = records[0]
    _check_names(names, header_line)
    n = len(names)
    body = records[1:]
    if not body:
        raise EmptyData(f"{path}: no data rows")
    kind = format
    if kind == "auto":
        first = body[0][1]
        kind = "counts" if len(first) == 2 and (n == 1 or len(first[0]) == n) else "matrix"
    counts: dict[str, int] = {}
    for ln, row in body:
        if kind == "matrix":
            if len(row) != n:
                raise InconsistentWidth(f"line {ln}: {len(row)} entries for {n} events")
            for c in row:
                if c not in ("0", "1"):
                    raise ParseError(f"non-binary entry {c!r}", ln)
            bits, c = "".join(row), 1
        else:
            if len(row) != 2:
                raise ParseError("expected 'bitstring,count'", ln)
            bits = row[0]
            if len(bits) != n:
                raise InconsistentWidth(f"line {ln}: bit string of length {len(bits)} for {n} events")
            if set(bits) - {"0", "1"}:
                raise ParseError(f"non-binary bit string {bits!r}", ln)
            c = _parse_count(row[1], ln)
        if c:
            counts[bits] = counts.get(bits, 0) + c
    if not counts:
        raise EmptyData(f"{path}: all counts are zero")
    return GenotypeTable(tuple(names), tuple(sorted(counts.items())), kind)


def write_counts(path, table: GenotypeTable) -> None:
    lines = [",".join(table.event_names)]
    lines += [f"{bits},{count}" for bits, count in table.rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- inline posets -------------------------------------------------------------

def parse_relations(text: str) -> list[tuple[str, str]]:
    """``"A<B;C<B"`` (chains ``A<B<C`` allowed, newlines act like semicolons)."""
    pairs = []
    for chunk in re.split(r"[;\n]", text):
        chunk = chunk.strip()
        if not chunk or chunk.startswith("#"):
            continue
        names = [s.strip() for s in chunk.split("<")]
        if len(names) < 2 or any(not NAME_RE.match(s) for s in names):
            raise ParseError(f"bad relation {chunk!r}; expected NAME<NAME")
        pairs.extend(zip(names, names[1:]))
    return pairs


def _natural(name: str):
    return (0, int(name), "") if name.isdigit() else (1, 0, name)


def parse_poset(text: str, events: Sequence[str] | None = None, n: int | None = None) -> Poset:
    """Build a poset from inline syntax or the path of a file containing it.

    Event names come from ``events``; failing that, ``n`` gives names
    ``"1".."n"``; failing that, the names used in the relations.
    """
    if text and Path(text).is_file():
        text = Path(text).read_text(encoding="utf-8")
    pairs = parse_relations(text or "")
    if events is not None:
        names = list(events)
    elif n is not None:
        names = [str(i + 1) for i in range(n)]
    else:
        seen = {a for pr in pairs for a in pr}
        names = sorted(seen, key=_natural)
        if not names:
            raise ParseError("cannot infer events from an empty poset; pass the event names")
    if len(set(names)) != len(names):
        raise ParseError("duplicate event names")
    pos = {name: i for i, name in enumerate(names)}
    missing = sorted({a for pr in pairs for a in pr} - set(pos))
    if missing:
        raise ParseError(f"relations mention unknown events {missing}")
    return poset_from_relations(len(names), [(pos[a], pos[b]) for a, b in pairs], names)


def format_relations(p: Poset) -> str:
    names = p.event_names()
    return ";".join(f"{names[e]}<{names[f]}" for e, f in cover_relations(p))


# -- reports -------------------------------------------------------------------

@dataclass(frozen=True)
class FitReport:
    event_names: tuple[str, ...]
    cover_relations: tuple[tuple[str, str], ...]
    theta_hat: tuple[float, ...]
    lambda_hat: float
    epsilon: float
    log_lik: float
    lattice_size: int
    n_compatible: float
    n_total: float
    unidentified_events: tuple[str, ...] = ()
    merge_groups: tuple[tuple[str, ...], ...] | None = None
    seed: int | None = None
    epsilon_max: float | None = None
    bootstrap: dict | None = field(default=None, hash=False)

    @classmethod
    def from_fit(cls, f: MixtureFit, original_names: Sequence[str], seed: int | None = None,
                 epsilon_max: float | None = None, bootstrap: dict | None = None) -> "FitReport":
        merge = f.merge
        if merge is not None:
            names = merge.names(original_names)
            groups = None if merge.is_identity else tuple(
                tuple(original_names[e] for e in grp) for grp in merge.groups)
        else:
            names = list(original_names)
            groups = None
        covers = tuple((names[e], names[g]) for e, g in cover_relations(f.poset))
        return cls(
            event_names=tuple(names),
            cover_relations=covers,
            theta_hat=tuple(float(t) for t in f.theta_hat),
            lambda_hat=float(f.lambda_hat),
            epsilon=float(f.epsilon),
            log_lik=float(f.log_lik),
            lattice_size=int(f.lattice_size),
            n_compatible=f.n_compatible,
            n_total=f.n_total,
            unidentified_events=tuple(names[e] for e in sorted(f.unidentified_events)),
            merge_groups=groups,
            seed=seed,
            epsilon_max=epsilon_max,
            bootstrap=bootstrap,
        )

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "event_names": list(self.event_names),
            "cover_relations": [list(r) for r in self.cover_relations],
            "theta_hat": dict(zip(self.event_names, self.theta_hat)),
            "lambda_hat": self.lambda_hat,
            "epsilon": self.epsilon,
            "log_lik": self.log_lik,
            "lattice_size": self.lattice_size,
            "n_compatible": self.n_compatible,
            "n_total": self.n_total,
            "unidentified_events": list(self.unidentified_events),
            "merge_groups": None if self.merge_groups is None else [list(g) for g in self.merge_groups],
            "seed": self.seed,
        }
        if self.epsilon_max is not None:
            d["epsilon_max"] = self.epsilon_max
        if self.bootstrap is not None:
            d["bootstrap"] = dict(self.bootstrap)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ParseError(f"unsupported schema_version {version!r}")
        names = tuple(d["event_names"])
        theta = d["theta_hat"]
        groups = d.get("merge_groups")
        return cls(
            event_names=names,
            cover_relations=tuple(tuple(r) for r in d["cover_relations"]),
            theta_hat=tuple(theta[name] for name in names),
            lambda_hat=d["lambda_hat"],
            epsilon=d["epsilon"],
            log_lik=d["log_lik"],
            lattice_size=d["lattice_size"],
            n_compatible=d["n_compatible"],
            n_total=d["n_total"],
            unidentified_events=tuple(d.get("unidentified_events", ())),
            merge_groups=None if groups is None else tuple(tuple(g) for g in groups),
            seed=d.get("seed"),
            epsilon_max=d.get("epsilon_max"),
            bootstrap=d.get("bootstrap"),
        )

    def poset(self) -> Poset:
        pos = {name: i for i, name in enumerate(self.event_names)}
        return poset_from_relations(
            len(self.event_names), [(pos[a], pos[b]) for a, b in self.cover_relations],
            self.event_names)

    def summary(self) -> str:
        lines = [f"epsilon = {self.epsilon:g}"]
        if self.merge_groups:
            lines.append("merged events: " + ", ".join("+".join(g) for g in self.merge_groups))
        covers = ", ".join(f"{a} < {b}" for a, b in self.cover_relations) or "(none)"
        lines.append(f"cover relations: {covers}")
        for name, t in zip(self.event_names, self.theta_hat):
            flag = "  (unidentified)" if name in self.unidentified_events else ""
            lines.append(f"  theta[{name}] = {t:.6f}{flag}")
        lines.append(f"lambda = {self.lambda_hat:.6f} "
                     f"({_fmt_count(self.n_compatible)}/{_fmt_count(self.n_total)} compatible)")
        lines.append(f"lattice size = {self.lattice_size}")
        lines.append(f"log-likelihood = {self.log_lik:.6f}")
        return "\n".join(lines)


def _fmt_count(x) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:g}"


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_report(path) -> FitReport:
    try:
        return FitReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: not a fit report ({exc})") from None


def write_scan_csv(path, reports: Sequence[FitReport]) -> None:
    lines = ["fraction_incompatible,log_lik"]
    for r in reports:
        lines.append(f"{_float(1 - r.lambda_hat)},{_float(r.log_lik)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _float(x: float) -> str:
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return repr(float(x))
