"""Command-line front end.

Exit codes: 0 solvable, 2 unknown, 3 unsolvable on every branch, 1 usage
or input error.  Other subcommands exit 0 on success.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .equations import EquationError, format_constraint, parse_equation_file
from .group import GroupElement, GroupError, order
from .pipeline import EXIT_CODES, SearchBudget, SolvabilityLedger, decide
from .quotient import multiplication_table_text, psi_table_text, quotient_listing_text
from .splitting import expected_genus, split_standard
from .standard import standardize_constrained, to_standard
from .width import NotInCommutatorSubgroup, theta_orbits, width_probe

USAGE_ERROR = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    max_len: int = 3
    max_rounds: int = 12
    evaluations: int = 200_000
    ledger_path: str | None = None
    trace: bool = False

    def __post_init__(self):
        if self.max_len < 0 or self.max_rounds < 0 or self.evaluations <= 0:
            raise ValueError("budgets must be non-negative")

    def budget(self) -> SearchBudget:
        return SearchBudget(max_len=self.max_len, max_rounds=self.max_rounds, evaluations=self.evaluations)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _witness_lines(witness) -> list[str]:
    return [f"  {v} = {g.word or '1'}" for v, g in sorted(witness.items())]


def cmd_solve(args) -> int:
    cfg = RunConfig(args.max_len, args.max_rounds, args.evaluations, args.ledger, args.trace)
    w, gamma = parse_equation_file(_read(args.file))
    if gamma and set(gamma) != w.vars():
        raise EquationError("constraint must cover every variable (or be omitted)")
    ledger = SolvabilityLedger(cfg.ledger_path)
    try:
        d = decide(w, gamma or None, cfg.budget(), ledger)
    except OverflowError as exc:
        print(f"UNKNOWN\n  {exc}")
        return EXIT_CODES["UNKNOWN"]
    print(d.status)
    print(f"  via {d.how}")
    if d.witness is not None:
        print("witness:")
        print("\n".join(_witness_lines(d.witness)))
    for v in d.leaves:
        print(f"leaf {v.leaf.code}: {v.status} ({v.how})")
    if cfg.trace:
        print("trace:")
        print("\n".join(f"  {line}" for line in d.trace))
    return d.exit_code


def cmd_order(args) -> int:
    print(order(GroupElement.parse(args.word)))
    return 0


def cmd_split(args) -> int:
    w, gamma = parse_equation_file(_read(args.file))
    missing = w.vars() - set(gamma)
    if missing:
        raise EquationError(f"split needs a constraint on {', '.join(sorted(map(str, missing)))}")
    r, zeta, phi = standardize_constrained(w, gamma)
    print(f"standard form: {r}")
    print(f"constraint: {format_constraint(zeta)}")
    if args.trace_split:
        print("standardizing steps:")
        print("\n".join(f"  {line}" for line in phi.trace_lines()))
    res = split_standard(r, zeta)
    print(f"case: {res.case}" + (f" on {res.joined_on}" if res.joined_on is not None else ""))
    if res.case == "joint":
        print(f"expected genus: {expected_genus(r)}")
    if args.trace_split:
        print("\n".join(res.trace))
    print(f"branches: {len(res.branches)}")
    for k, branch in enumerate(res.branches, 1):
        parts = " ; ".join(f"{cs.word} with {format_constraint(cs.gamma())}" for cs in branch)
        print(f"  {k}: {parts}")
    return 0


def cmd_quotient_table(args) -> int:
    print(quotient_listing_text())
    print()
    print(multiplication_table_text())
    print()
    print(psi_table_text())
    return 0


def cmd_width(args) -> int:
    g = GroupElement.parse(args.word)
    budget = SearchBudget(max_len=args.max_len, evaluations=args.evaluations)
    try:
        res = width_probe(g, args.n_max, budget)
    except NotInCommutatorSubgroup as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    for n, status in sorted(res.statuses.items()):
        print(f"n={n}: {status}")
    if res.n is None:
        print(f"width: UNKNOWN (no product of at most {args.n_max} commutators found)")
        return EXIT_CODES["UNKNOWN"]
    print(f"width: {res.n}" + ("" if res.exact else " (upper bound; smaller n undecided)"))
    if res.witness:
        print("witness:")
        print("\n".join(_witness_lines(res.witness)))
    return 0


def cmd_theta(args) -> int:
    report = theta_orbits(range(3, args.n_max + 1))
    text = report.csv()
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    print(text, end="")
    print(f"stabilized at n={report.stabilized_at}" if report.stabilized_at else "no stabilization observed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="grigsolve", description="Quadratic equations in the Grigorchuk group.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="decide solvability of an equation file")
    s.add_argument("file", help="equation on the first line, then optional 'var = element' constraints ('-' for stdin)")
    s.add_argument("--max-len", type=int, default=3, help="search radius for brute force (default 3)")
    s.add_argument("--max-rounds", type=int, default=12, help="splitting depth limit (default 12)")
    s.add_argument("--evaluations", type=int, default=200_000, help="assignments tried per search")
    s.add_argument("--ledger", help="persistent ledger file")
    s.add_argument("--trace", action="store_true", help="print the decision trace")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("order", help="order of a group element")
    s.add_argument("word")
    s.set_defaults(func=cmd_order)

    s = sub.add_parser("split", help="standardize a constrained equation and split it once")
    s.add_argument("file")
    s.add_argument("--trace-split", action="store_true", help="show standardizing steps and block data")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("quotient-table", help="print the finite quotient and the psi-image table")
    s.set_defaults(func=cmd_quotient_table)

    s = sub.add_parser("width", help="least number of commutators giving an element")
    s.add_argument("word")
    s.add_argument("--n-max", type=int, default=3)
    s.add_argument("--max-len", type=int, default=2)
    s.add_argument("--evaluations", type=int, default=200_000)
    s.set_defaults(func=cmd_width)

    s = sub.add_parser("theta", help="class counts of reduced constraint windows")
    s.add_argument("--n-max", type=int, default=8)
    s.add_argument("--csv", help="also write the CSV report here")
    s.set_defaults(func=cmd_theta)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EquationError, GroupError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
