"""Command-line front end.

Exit codes: 0 success (or a rainbow tree for ``check``), 1 violation or
oracle disagreement, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (
    CELL_FIELDS,
    TRIAL_FIELDS,
    SweepSpec,
    dump_records,
    metadata,
    run_batch,
    run_trial,
    write_cells,
    write_trials,
)
from .intersection import (
    TreeCertificate,
    certify,
    max_rainbow_forest,
    validate_tree,
    validate_violation,
)
from .oracle import OracleRefused, compare
from .process import (
    InvalidConfigError,
    ProcessConfig,
    TraceFormatError,
    format_trace,
    generate_trace,
    num_pairs,
    read_trace,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rainbowtree",
        description="Rainbow spanning trees in the colored random graph process.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def process_flags(p, m=False):
        p.add_argument("--n", type=int, required=True, help="number of vertices")
        p.add_argument("--k", type=int, required=True, help="colors per edge")
        p.add_argument("--w-size", type=int, default=None, help="palette size (default n-1)")
        p.add_argument("--seed", type=int, default=0)
        if m:
            p.add_argument("--m", type=int, default=None, help="number of steps (default all)")

    p = sub.add_parser("simulate", help="write a trace file")
    process_flags(p, m=True)
    p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("check", help="certify a trace prefix: rainbow tree or violating colors")
    p.add_argument("trace", help="trace file written by simulate")
    p.add_argument("--m", type=int, default=None, help="prefix length (default whole trace)")
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("hitting-times", help="m_C, m_N, m_R for one seeded process")
    process_flags(p)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("sweep", help="Monte Carlo estimates of the threshold laws")
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated vertex counts")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--w-size", type=int, default=None)
    p.add_argument("--c-grid", type=_float_list, default=None,
                   help="comma-separated c values, e.g. --c-grid=-1,0,1")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default=None,
                   help="cell table path; trials go next to it as <stem>.trials.<ext>")
    p.add_argument("--format", choices=("jsonl", "csv"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("oracle-compare", help="matroid intersection vs exhaustive oracles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--w-size", type=int, default=None)
    p.add_argument("--m", type=int, default=None, help="prefix length (default random)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pretty", action="store_true")
    return parser


def _config(parser, args, m_max=None) -> ProcessConfig:
    try:
        return ProcessConfig(args.n, args.k, args.w_size, args.seed, m_max)
    except InvalidConfigError as exc:
        parser.error(str(exc))


def _simulate(parser, args) -> int:
    if args.n >= 2 and args.m is not None and args.m > num_pairs(args.n):
        parser.error(f"--m {args.m} exceeds C(n,2) = {num_pairs(args.n)}")
    config = _config(parser, args, args.m)
    text = format_trace(generate_trace(config))
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _check(parser, args) -> int:
    try:
        trace = read_trace(args.trace)
    except (OSError, TraceFormatError) as exc:
        print(f"rainbowtree check: {exc}", file=sys.stderr)
        return EXIT_USAGE
    m = len(trace) if args.m is None else args.m
    if not 0 <= m <= len(trace):
        parser.error(f"--m {m} outside [0, {len(trace)}]")
    state = max_rainbow_forest(trace, m)
    cert = certify(state)
    if isinstance(cert, TreeCertificate):
        ok = validate_tree(cert, trace)
    else:
        ok = validate_violation(cert, trace, m)
    if not ok:
        print("rainbowtree check: certificate failed validation", file=sys.stderr)
        return EXIT_USAGE
    record = {"n": trace.n, "k": trace.k, "w_size": trace.w_size, "m": m, **cert.as_record()}
    if args.pretty:
        if isinstance(cert, TreeCertificate):
            print(f"rainbow spanning tree in the first {m} edges:")
            for e in cert.elements:
                edge = trace[e.edge_index - 1]
                print(f"  e{e.edge_index} = ({edge.u},{edge.v}) color {e.color}")
        else:
            print(f"no rainbow spanning tree in the first {m} edges")
            print(f"  colors I = {list(cert.colors)}: kappa(G_I) = {cert.kappa} > |W| + 1 - |I| = "
                  f"{trace.w_size + 1 - len(cert.colors)}")
    else:
        print(json.dumps(record))
    return EXIT_OK if isinstance(cert, TreeCertificate) else EXIT_VIOLATION


def _hitting_times(parser, args) -> int:
    config = _config(parser, args)
    result = run_trial(config)
    if args.pretty:
        print(f"n={result.n} k={result.k} seed={result.seed}")
        print(f"  m_C = {result.m_C}")
        print(f"  m_N = {result.m_N}")
        print(f"  m_R = {result.m_R}")
        print(f"  m_R == max(m_C, m_N): {result.identity_holds}")
    else:
        sys.stdout.write(dump_records([result], TRIAL_FIELDS, metadata(), args.format))
    return EXIT_OK


def _sweep(parser, args) -> int:
    if args.trials < 1:
        parser.error("--trials must be >= 1")
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    for n in args.n:
        _config(parser, argparse.Namespace(n=n, k=args.k, w_size=args.w_size, seed=args.seed))
    sweep = SweepSpec(
        n_values=tuple(args.n),
        k=args.k,
        c_values=None if args.c_grid is None else tuple(args.c_grid),
        trials=args.trials,
        master_seed=args.seed,
        w_size=args.w_size,
    )
    result = run_batch(sweep, workers=args.workers)
    if args.out:
        out = Path(args.out)
        write_cells(out, result.cells, result.meta, args.format)
        trials_path = out.with_name(f"{out.stem}.trials{out.suffix or '.' + args.format}")
        write_trials(trials_path, result.trials, result.meta, args.format)
    if args.pretty:
        print(f"{'n':>7} {'event':>12} {'c':>8} {'m':>8} {'p_hat':>7} {'stderr':>7} {'limit':>7}")
        for c in result.cells:
            lim = "-" if c.limit is None else f"{c.limit:.4f}"
            print(f"{c.n:>7} {c.event:>12} {c.c:>8.3f} {c.m:>8} {c.p_hat:>7.4f} "
                  f"{c.stderr:>7.4f} {lim:>7}")
    else:
        sys.stdout.write(dump_records(result.cells, CELL_FIELDS, result.meta, args.format))
    return EXIT_OK


def _oracle_compare(parser, args) -> int:
    import numpy as np

    config = _config(parser, args)
    total = num_pairs(args.n)
    if args.m is not None and not 0 <= args.m <= total:
        parser.error(f"--m {args.m} outside [0, {total}]")
    rng = np.random.default_rng(args.seed)
    rows = []
    for t in range(args.trials):
        m = int(rng.integers(0, total + 1)) if args.m is None else args.m
        seed = int(rng.integers(0, 2**63))
        trace = generate_trace(ProcessConfig(config.n, config.k, config.w_size, seed, m))
        try:
            rows.append((seed, compare(trace)))
        except OracleRefused as exc:
            print(f"rainbowtree oracle-compare: {exc}", file=sys.stderr)
            return EXIT_USAGE
    bad = 0
    if args.pretty:
        print(f"{'seed':>20} {'m':>4} {'mi':>3} {'minmax':>6} {'edmonds':>7} {'backtrack':>9} agree")
    for seed, c in rows:
        bad += not c.agree
        if args.pretty:
            print(f"{seed:>20} {c.m:>4} {c.mi_size:>3} {c.minmax_value:>6} "
                  f"{str(c.edmonds_exists):>7} {str(c.backtrack_exists):>9} {c.agree}")
        else:
            print(json.dumps({
                "seed": seed, "n": c.n, "k": c.k, "m": c.m, "mi_size": c.mi_size,
                "minmax_value": c.minmax_value, "edmonds_exists": c.edmonds_exists,
                "backtrack_exists": c.backtrack_exists, "agree": c.agree,
            }))
    return EXIT_VIOLATION if bad else EXIT_OK


COMMANDS = {
    "simulate": _simulate,
    "check": _check,
    "hitting-times": _hitting_times,
    "sweep": _sweep,
    "oracle-compare": _oracle_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return COMMANDS[args.command](parser, args)


if __name__ == "__main__":
    sys.exit(main())
