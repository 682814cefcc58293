"""Command-line entry point: ``bernden table ...`` and ``bernden witness ...``."""

from __future__ import annotations

import argparse
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import setstats
from .arith import carmichael_lambda, is_prime
from .denom_sieve import DEFAULT_SEGMENT, residue_statistics, s_class_counts
from .staudt_clausen import d_p, denominator

EXIT_USAGE = 2
EXIT_RESOURCES = 3

TABLES = ("s-counts", "s-residues", "f-count", "d-count", "p-partition", "dp-not-in-d", "d-plus-one")
WITNESSES = ("not-in-d", "in-d", "germain")

# smallest --limit each table accepts, and its default
MIN_LIMIT = {
    "s-counts": 2,
    "s-residues": 2,
    "f-count": 2,
    "d-count": 6,
    "p-partition": 3,
    "dp-not-in-d": 3,
    "d-plus-one": 7,
}
DEFAULT_LIMIT = {
    "s-counts": 10**5,
    "s-residues": 10**6,
    "f-count": 10**5,
    "d-count": 10**5,
    "p-partition": 10**5,
    "dp-not-in-d": 10**5,
    "d-plus-one": 10**5,
}
# decimals the published tables show for ratio columns
PAPER_DIGITS = {"f-count": 3, "d-count": 3, "p-partition": 4, "dp-not-in-d": 3, "d-plus-one": 3}


class CLIError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"argument {flag}: {message}")


def parse_int(text: str) -> int:
    """Integer with 1e7, 10^7 or 10**7 shorthand."""
    s = text.strip().replace("_", "")
    m = re.fullmatch(r"(\d+)(?:\^|\*\*)(\d+)", s)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    m = re.fullmatch(r"(\d+)[eE](\d+)", s)
    if m:
        return int(m.group(1)) * 10 ** int(m.group(2))
    if re.fullmatch(r"\d+", s):
        return int(s)
    raise argparse.ArgumentTypeError(f"invalid integer {text!r}")


def parse_int_list(text: str) -> list[int]:
    return [parse_int(t) for t in text.split(",") if t.strip()]


@dataclass
class TableRequest:
    table_id: str
    limit: int
    format: str = "csv"
    checkpoints: list[int] = field(default_factory=list)
    max_first: int = 112
    moduli: list[int] = field(default_factory=lambda: [8, 3, 5, 7, 11, 13])
    targets: list[int] = field(default_factory=lambda: [6, 30, 42, 66])
    firsts: list[int] = field(default_factory=lambda: [2, 4, 6, 10])
    precision: str = "paper"
    with_tset: bool = False
    segment_size: int = DEFAULT_SEGMENT
    workers: int = 1
    checkpoint_file: str | None = None

    def validate(self) -> None:
        if self.table_id not in TABLES:
            raise CLIError("table", f"unknown table {self.table_id!r}")
        if self.limit < MIN_LIMIT[self.table_id]:
            raise CLIError("--limit", f"{self.table_id} needs limit >= {MIN_LIMIT[self.table_id]}")
        if not self.checkpoints:
            self.checkpoints = [self.limit]
        if self.checkpoints != sorted(set(self.checkpoints)):
            raise CLIError("--checkpoints", "must be strictly ascending")
        if self.checkpoints[-1] > self.limit:
            raise CLIError("--checkpoints", "must not exceed --limit")
        if self.checkpoints[0] < MIN_LIMIT[self.table_id]:
            raise CLIError("--checkpoints", f"values must be >= {MIN_LIMIT[self.table_id]}")
        if self.segment_size < 2 or self.segment_size % 2:
            raise CLIError("--segment-size", "must be even and >= 2")
        if self.workers < 1:
            raise CLIError("--workers", "must be >= 1")
        if not self.moduli or min(self.moduli) < 1:
            raise CLIError("--moduli", "must be positive")
        if any(t < 2 or t % 2 for t in self.targets):
            raise CLIError("--targets", "targets must be even and >= 2")
        bad = [f for f in self.firsts if not setstats.is_first_subscript(f)]
        if self.table_id == "s-residues" and bad:
            raise CLIError("--first", f"{bad[0]} is not a first subscript")


def fmt_ratio(value: float, digits: int, precision: str) -> str:
    if math.isnan(value):
        return ""
    if precision == "full":
        return repr(value)
    text = f"{value:.{digits}f}"
    return text[1:] if text.startswith("0.") else text


def render(header: Sequence[str], rows: Sequence[Sequence[object]], fmt: str) -> str:
    cells = [[str(c) for c in row] for row in rows]
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(r) for r in cells]
    elif fmt == "tsv":
        lines = ["\t".join(header)] + ["\t".join(r) for r in cells]
    else:
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in cells]
    return "\n".join(lines) + "\n"


def _sieve_opts(req: TableRequest) -> dict:
    return {
        "segment_size": req.segment_size,
        "workers": req.workers,
        "checkpoint_file": req.checkpoint_file,
    }


def _s_counts(req: TableRequest):
    reports = s_class_counts(req.limit, req.max_first, req.checkpoints, **_sieve_opts(req))
    header = ["first", "second"] + [f"count_le_{b}" for b in req.checkpoints]
    if req.with_tset:
        header.append("t_set")
    rows = []
    for r in reports:
        row = [r.first, "" if r.second is None else r.second] + [c for _, c in r.counts]
        if req.with_tset:
            row.append(str(r.t_set))
        rows.append(row)
    return header, rows


def _s_residues(req: TableRequest):
    width = max(req.moduli)
    header = ["first", "modulus", "total"] + [f"r{j}" for j in range(width)]
    rows = []
    for f in req.firsts:
        stats = residue_statistics(f, req.limit, req.moduli, **_sieve_opts(req))
        for m in req.moduli:
            cnt = stats[m]
            rows.append([f, m, sum(cnt)] + cnt + [""] * (width - m))
    return header, rows


def _f_count(req: TableRequest):
    reports = setstats.count_F(req.checkpoints, **_sieve_opts(req))
    d = PAPER_DIGITS["f-count"]
    return ["bound", "count", "ratio"], [
        [r.bound, r.count, fmt_ratio(r.ratio, d, req.precision)] for r in reports
    ]


def _d_count(req: TableRequest):
    d = PAPER_DIGITS["d-count"]
    rows = []
    for b in req.checkpoints:
        r = setstats.count_D(b)
        rows.append([r.bound, r.count, fmt_ratio(r.ratio, d, req.precision)])
    return ["bound", "count", "ratio"], rows


def _p_partition(req: TableRequest):
    d = PAPER_DIGITS["p-partition"]
    per_bound = {b: setstats.partition_counts(b, req.targets) for b in req.checkpoints}
    rows = [
        [t, b, per_bound[b][t][0], fmt_ratio(per_bound[b][t][1], d, req.precision)]
        for t in req.targets
        for b in req.checkpoints
    ]
    return ["d", "bound", "count", "fraction"], rows


def _dp_not_in_d(req: TableRequest):
    d = PAPER_DIGITS["dp-not-in-d"]
    rows = []
    for b in req.checkpoints:
        r = setstats.count_dp_not_in_D(b)
        rows.append([r.bound, r.count, fmt_ratio(r.ratio, d, req.precision)])
    return ["bound", "count", "fraction"], rows


def _d_plus_one(req: TableRequest):
    d = PAPER_DIGITS["d-plus-one"]
    rows = []
    for b in req.checkpoints:
        s = setstats.d_plus_one_split(b)
        rows.append(
            [
                b,
                s.composite,
                fmt_ratio(s.composite_fraction, d, req.precision),
                s.prime,
                fmt_ratio(s.prime_fraction, d, req.precision),
            ]
        )
    return ["bound", "composite", "composite_fraction", "prime", "prime_fraction"], rows


BUILDERS: dict[str, Callable] = {
    "s-counts": _s_counts,
    "s-residues": _s_residues,
    "f-count": _f_count,
    "d-count": _d_count,
    "p-partition": _p_partition,
    "dp-not-in-d": _dp_not_in_d,
    "d-plus-one": _d_plus_one,
}


def run_table(req: TableRequest, out=None) -> int:
    out = out or sys.stdout
    req.validate()
    header, rows = BUILDERS[req.table_id](req)
    out.write(render(header, rows, req.format))
    return 0


def witness_rows(kind: str, limit: int) -> tuple[list[str], list[list[int]]]:
    """Witness rows, each verified before it is returned."""
    if kind == "not-in-d":
        rows = []
        for p in setstats.witness_notin_D(limit):
            dp = d_p(p).value
            lam = carmichael_lambda(dp)
            if lam != p - 1 or setstats.is_bernoulli_denominator(dp):
                raise ArithmeticError(f"witness p={p} failed verification")
            rows.append([p, (p + 1) // 2, dp, lam, p - 1])
        return ["p", "q", "d_p", "lambda_d_p", "p_minus_1"], rows
    if kind == "in-d":
        rows = []
        for p in setstats.witness_in_D(limit):
            q = (p - 1) // 6
            r = (q - 1) // 2
            lam = carmichael_lambda(p - 1)
            D = denominator(2 * r).value
            if lam != 2 * r or D != p - 1 or not setstats.is_bernoulli_denominator(p - 1):
                raise ArithmeticError(f"witness p={p} failed verification")
            rows.append([r, q, p, lam, D])
        return ["r", "q", "p", "lambda_p_minus_1", "D_2r"], rows
    if kind == "germain":
        rows = []
        for p in setstats.germain_witnesses(limit):
            q = 2 * p + 1
            D = denominator(2 * p).value
            if not is_prime(q) or D % q:
                raise ArithmeticError(f"witness p={p} failed verification")
            rows.append([p, q, D])
        return ["p", "2p_plus_1", "D_2p"], rows
    raise CLIError("kind", f"unknown witness kind {kind!r}")


def run_witness(kind: str, limit: int, fmt: str = "csv", out=None) -> int:
    out = out or sys.stdout
    if kind not in WITNESSES:
        raise CLIError("kind", f"unknown witness kind {kind!r}")
    if limit < 3:
        raise CLIError("--limit", "must be >= 3")
    header, rows = witness_rows(kind, limit)
    out.write(render(header, rows, fmt))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bernden", description="Bernoulli denominator tables and witness searches."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="regenerate a count table")
    t.add_argument("table_id", metavar="table", choices=TABLES, help=", ".join(TABLES))
    t.add_argument("--limit", type=parse_int)
    t.add_argument("--format", choices=("csv", "tsv", "markdown"), default="csv")
    t.add_argument("--checkpoints", type=parse_int_list, default=[])
    t.add_argument("--max-first", type=parse_int, default=112)
    t.add_argument("--moduli", type=parse_int_list, default=[8, 3, 5, 7, 11, 13])
    t.add_argument("--targets", type=parse_int_list, default=[6, 30, 42, 66])
    t.add_argument("--first", type=parse_int_list, default=[2, 4, 6, 10], dest="firsts")
    t.add_argument("--precision", choices=("paper", "full"), default="paper")
    t.add_argument("--with-tset", action="store_true", help="add the T-set column (s-counts)")
    t.add_argument("--segment-size", type=parse_int, default=DEFAULT_SEGMENT)
    t.add_argument("--workers", type=parse_int, default=None)
    t.add_argument("--checkpoint-file")

    w = sub.add_parser("witness", help="list verified witnesses")
    w.add_argument("kind", choices=WITNESSES)
    w.add_argument("--limit", type=parse_int, required=True)
    w.add_argument("--format", choices=("csv", "tsv", "markdown"), default="csv")
    return parser


def _default_workers(parser: argparse.ArgumentParser) -> int:
    env = os.environ.get("BERNDEN_WORKERS")
    if not env:
        return 1
    try:
        return parse_int(env)
    except argparse.ArgumentTypeError:
        parser.error(f"argument --workers: BERNDEN_WORKERS={env!r} is not an integer")


def _configure_logging(verbose: bool) -> None:
    log = logging.getLogger("bernden")
    for h in [h for h in log.handlers if getattr(h, "_bernden", False)]:
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler._bernden = True
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "table":
            req = TableRequest(
                table_id=args.table_id,
                limit=args.limit if args.limit is not None else DEFAULT_LIMIT[args.table_id],
                format=args.format,
                checkpoints=args.checkpoints,
                max_first=args.max_first,
                moduli=args.moduli,
                targets=args.targets,
                firsts=args.firsts,
                precision=args.precision,
                with_tset=args.with_tset,
                segment_size=args.segment_size,
                workers=args.workers if args.workers is not None else _default_workers(parser),
                checkpoint_file=args.checkpoint_file,
            )
            return run_table(req)
        return run_witness(args.kind, args.limit, args.format)
    except CLIError as exc:
        parser.print_usage(sys.stderr)
        print(f"bernden: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError as exc:
        print(
            f"bernden: out of resources: {exc or 'memory exhausted'}; "
            "try a smaller --segment-size or --limit",
            file=sys.stderr,
        )
        return EXIT_RESOURCES


if __name__ == "__main__":
    sys.exit(main())
