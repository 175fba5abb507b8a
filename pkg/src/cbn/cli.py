"""Command-line interface: ``cbn fit | scan | simulate | verify``."""
from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import algebra
from .errors import CbnError, DimensionMismatch, ParseError
from .io import (
    FitReport,
    GenotypeTable,
    parse_poset,
    read_genotype_data,
    write_counts,
    write_json,
    write_scan_csv,
)
from .model import CbnModel, distribution, sample
from .poset import enumerate_order_ideals, events_of, incomparable_pairs
from .selection import bootstrap_loglik, fit, merge_events, scan


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _names(text: str | None):
    return None if text is None else [s.strip() for s in text.split(",") if s.strip()]


def _load(args) -> tuple[GenotypeTable, object]:
    table = read_genotype_data(args.data, args.format)
    return table, table.to_counts()


# -- commands ------------------------------------------------------------------

def cmd_fit(args) -> int:
    table, u = _load(args)
    f = fit(u, args.epsilon, merge=args.merge, labels=table.event_names)
    report = FitReport.from_fit(f, table.event_names, seed=args.seed)
    if args.out:
        write_json(args.out, report.to_dict())
    print(report.summary())
    return 0


def cmd_scan(args) -> int:
    table, u = _load(args)
    epsilons = None if args.epsilons == "auto" else _float_list(args.epsilons)
    result = scan(u, epsilons, merge=args.merge, labels=table.event_names)
    reports = []
    for entry in result:
        boot = None
        if args.bootstrap:
            reduced = u if entry.fit.merge.is_identity else merge_events(u)[0]
            boot = bootstrap_loglik(reduced, entry.fit.poset, args.bootstrap, args.seed,
                                    workers=args.workers).as_dict()
        reports.append(FitReport.from_fit(entry.fit, table.event_names, seed=args.seed,
                                          epsilon_max=entry.epsilon_max, bootstrap=boot))
    out = Path(args.out)
    write_json(out, [r.to_dict() for r in reports])
    csv_path = Path(args.csv) if args.csv else out.with_suffix(".csv")
    write_scan_csv(csv_path, reports)
    if args.plot:
        from .plotting import plot_scan

        plot_scan(reports, args.plot)
    best = max(range(len(reports)), key=lambda i: reports[i].log_lik)
    print(f"{'eps_min':>10} {'eps_max':>10} {'frac_incomp':>12} {'log_lik':>14}  covers")
    for i, r in enumerate(reports):
        covers = ";".join(f"{a}<{b}" for a, b in r.cover_relations) or "-"
        mark = " *" if i == best else ""
        print(f"{r.epsilon:10.6f} {r.epsilon_max:10.6f} {1 - r.lambda_hat:12.6f} "
              f"{r.log_lik:14.6f}  {covers}{mark}")
    return 0


def cmd_simulate(args) -> int:
    theta = _float_list(args.theta)
    events = _names(args.events)
    poset = parse_poset(args.poset or "", events=events, n=None if events else len(theta))
    if len(theta) != poset.n:
        raise DimensionMismatch(f"{len(theta)} parameters for {poset.n} events")
    u = sample(CbnModel(poset, tuple(theta)), args.n, args.seed)
    table = GenotypeTable.from_counts(poset.event_names(), u)
    if args.out:
        write_counts(args.out, table)
    else:
        sys.stdout.write(",".join(table.event_names) + "\n")
        for bits, c in table.rows:
            sys.stdout.write(f"{bits},{c}\n")
    return 0


def _random_theta(rng: random.Random, n: int) -> tuple[Fraction, ...]:
    out = []
    for _ in range(n):
        den = rng.randint(2, 97)
        out.append(Fraction(rng.randint(1, den - 1), den))
    return tuple(out)


def cmd_verify(args) -> int:
    events = _names(args.events)
    fixed = None
    if args.theta != "random":
        fixed = tuple(Fraction(s.strip()) for s in args.theta.split(",") if s.strip())
    poset = parse_poset(args.poset or "", events=events,
                        n=None if events or fixed is None else len(fixed))
    if fixed is not None and len(fixed) != poset.n:
        raise DimensionMismatch(f"{len(fixed)} parameters for {poset.n} events")
    lattice = enumerate_order_ideals(poset)
    p_quadrics = algebra.p_coordinate_quadrics(lattice)
    q_binomials = algebra.hibi_quadrics(lattice)
    rng = random.Random(args.seed)

    checks = {}
    total = algebra.symbolic_sum_check(poset, lattice)
    checks["symbolic_sum_is_one"] = total == 1
    checks["leading_monomials"] = all(
        algebra.leading_monomial(algebra.symbolic_genotype_polynomial(poset, g))
        == tuple(g >> e & 1 for e in range(poset.n))
        for g in lattice
    )
    residual = Fraction(0)
    subsum_ok = roundtrip_ok = True
    trials = 1 if fixed is not None else args.trials
    for _ in range(trials):
        theta = fixed if fixed is not None else _random_theta(rng, poset.n)
        pvec = distribution(CbnModel(poset, theta), lattice)
        if args.negative_control:
            pvec[0] += Fraction(1, 10)
        qvec = algebra.moebius_transform(lattice, pvec)
        for h, q in zip(lattice, qvec):
            prod = Fraction(1)
            for e in events_of(h):
                prod *= theta[e]
            subsum_ok &= q == prod
        roundtrip_ok &= algebra.moebius_inverse(lattice, qvec) == pvec
        residual = max(residual, algebra.verify_invariants(lattice, pvec, p_quadrics, q_binomials))
    checks["subsum_identity"] = subsum_ok
    checks["moebius_roundtrip"] = roundtrip_ok
    checks["invariants_vanish"] = residual == 0
    passed = all(checks.values())

    report = {
        "events": poset.event_names(),
        "lattice_size": len(lattice),
        "incomparable_pairs": len(incomparable_pairs(lattice)),
        "quadrics": len(q_binomials),
        "trials": trials,
        "seed": args.seed,
        "negative_control": bool(args.negative_control),
        "checks": checks,
        "max_residual": str(residual),
        "max_residual_float": float(residual),
        "result": "PASS" if passed else "FAIL",
    }
    if args.out:
        write_json(args.out, report)
    print(f"lattice size {len(lattice)}, {len(q_binomials)} quadrics, {trials} trial(s)")
    for name, ok in checks.items():
        print(f"  {name:22s} {'ok' if ok else 'FAILED'}")
    print(f"max residual {residual} ({float(residual):.3e})")
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("data", help="genotype file (0/1 matrix or bitstring,count table)")
        p.add_argument("--format", choices=["auto", "matrix", "counts"], default="auto")
        p.add_argument("--merge", action="store_true",
                       help="merge events the data cannot separate instead of failing")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fit", help="fit the error-tolerant CBN at one tolerance")
    data_args(p)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scan", help="fit across a tolerance grid")
    data_args(p)
    p.add_argument("--epsilons", default="auto",
                   help="comma-separated increasing tolerances, or 'auto'")
    p.add_argument("--bootstrap", type=int, default=0, metavar="B")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="JSON output path")
    p.add_argument("--csv", help="CSV output path (default: --out with .csv)")
    p.add_argument("--plot", help="figure path, e.g. scan.svg")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="sample genotypes from a CBN")
    p.add_argument("--poset", default="", help="'A<B;C<B' or a file containing it")
    p.add_argument("--events", help="comma-separated event names")
    p.add_argument("--theta", required=True, help="comma-separated event probabilities")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="counts file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check the algebraic invariants exactly")
    p.add_argument("--poset", default="", help="'A<B;C<B' or a file containing it")
    p.add_argument("--events", help="comma-separated event names")
    p.add_argument("--theta", default="random", help="'random' or a comma-separated list")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--negative-control", action="store_true",
                   help="corrupt the distribution; the check must then fail")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CbnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
