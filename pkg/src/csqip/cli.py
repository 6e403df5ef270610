"""Command-line driver: ``csqip {run,xor,sweep,threshold,validate}``.

Exit codes: 0 success, 1 XOR verdict inconsistent, 2 parse error or unreadable
circuit, 3 execution error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .circuit import ExecutionError, ParseError, parse_circuit, run_circuit
from .coherent import StateError
from .corpus import NAMES, circuit_text
from .experiments.loss import eta_grid, success_sweep, success_threshold, sweep_csv
from .experiments.xor import optical_xor_protocol
from .fock import CutoffError

EXIT_OK, EXIT_INCONSISTENT, EXIT_PARSE, EXIT_EXEC, EXIT_USAGE = 0, 1, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="csqip", description="Coherent-state quantum information processing simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a circuit file and print its branch report as JSON")
    run.add_argument("circuit", help="path to a .qc file; bundled names such as circuits/fig2_ghz.qc also work")
    run.add_argument("--alpha", type=float, help="override the circuit's alpha parameter")
    run.add_argument("--eta", type=float, help="override the circuit's eta parameter")
    run.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE",
                     help="override any declared parameter (repeatable)")
    run.add_argument("--out", type=Path, help="write to this file instead of stdout")

    xor = sub.add_parser("xor", help="run the optical XOR protocol for bits K and R")
    xor.add_argument("--K", type=int, choices=(0, 1), required=True)
    xor.add_argument("--R", type=int, choices=(0, 1), required=True)
    xor.add_argument("--alpha", type=float, default=2.0, help="coherent amplitude (default: 2.0)")
    xor.add_argument("--format", choices=("table", "json"), default="table")

    sw = sub.add_parser("sweep", help="success probability versus transmissivity, as CSV or JSON")
    sw.add_argument("--alpha", type=float, nargs="+", default=[2.0], help="one or more amplitudes (default: 2.0)")
    sw.add_argument("--eta-start", type=float, default=0.8, help="default: 0.8")
    sw.add_argument("--eta-stop", type=float, default=1.0, help="default: 1.0")
    sw.add_argument("--eta-step", type=float, default=0.01, help="default: 0.01")
    sw.add_argument("--placement", choices=("input", "output"), default="input", help="default: input")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes, one alpha each (default: 1)")
    sw.add_argument("--out", type=Path, help="write to this file instead of stdout")

    th = sub.add_parser("threshold", help="smallest eta with success probability >= target")
    th.add_argument("--alpha", type=float, default=2.0, help="default: 2.0")
    th.add_argument("--target", type=float, default=0.25, help="default: 0.25")

    va = sub.add_parser("validate", help="compare the analytic engine with the Fock-space oracle")
    va.add_argument("--cutoff", type=int, default=40, help="photon-number cutoff per mode (default: 40)")
    va.add_argument("--alpha", type=float, default=2.0, help="default: 2.0")
    va.add_argument("--random", type=int, default=50, help="number of random circuits (default: 50)")
    va.add_argument("--seed", type=int, default=0, help="default: 0")
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _read_circuit(path: str) -> str:
    p = Path(path)
    if p.is_file():
        return p.read_text(encoding="utf-8")
    if p.stem in NAMES:
        return circuit_text(p.stem)
    raise FileNotFoundError(f"cannot read circuit file {path!r}")


def cmd_run(args) -> int:
    try:
        text = _read_circuit(args.circuit)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    circuit = parse_circuit(text)
    overrides = dict(args.param)
    for name in ("alpha", "eta"):
        if getattr(args, name) is not None:
            overrides[name] = getattr(args, name)
    report = run_circuit(circuit, overrides)
    _emit(report.to_json(indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_xor(args) -> int:
    res = optical_xor_protocol(args.alpha, args.K, args.R)
    if args.format == "json":
        print(json.dumps(res.to_dict(), indent=2))
    else:
        print(f"K={res.K} R={res.R} alpha={res.alpha:g}")
        print(" A B C  prob          xor")
        for b in res.branches:
            print(f" {b.A} {b.B} {b.C}  {b.probability:.10f}  {b.xor}")
        verdict = f"xor = {res.K ^ res.R}" if res.consistent else "INCONSISTENT"
        print(f"teleported {verdict}")
    return EXIT_OK if res.consistent else EXIT_INCONSISTENT


def _sweep_one(job):
    alpha, grid, placement = job
    return success_sweep(alpha, grid, placement)


def cmd_sweep(args, parser) -> int:
    try:
        grid = eta_grid(args.eta_start, args.eta_stop, args.eta_step)
    except ValueError as exc:
        parser.error(str(exc))
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    jobs = [(a, grid, args.placement) for a in sorted(set(args.alpha))]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            chunks = list(pool.map(_sweep_one, jobs))
    else:
        chunks = [_sweep_one(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    if args.format == "csv":
        text = sweep_csv(rows)
    else:
        text = json.dumps([{k: float(f"{v:.10g}") for k, v in vars(r).items()} for r in rows], indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_threshold(args) -> int:
    print(f"{success_threshold(args.alpha, args.target):.10g}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import agreement_suite

    cases = agreement_suite(args.cutoff, args.alpha, args.random, args.seed)
    for c in cases:
        if not c.ok:
            print(f"FAIL {c.name}: deficit {c.deficit:.3e}, detection error {c.detection_error:.3e}")
    worst = max(c.deficit for c in cases)
    worst_det = max(c.detection_error for c in cases)
    print(f"cases: {len(cases)}  cutoff: {args.cutoff}")
    print(f"max deficit: {worst:.3e}")
    print(f"max detection error: {worst_det:.3e}")
    ok = all(c.ok for c in cases)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_EXEC


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "xor":
            return cmd_xor(args)
        if args.command == "sweep":
            return cmd_sweep(args, parser)
        if args.command == "threshold":
            return cmd_threshold(args)
        return cmd_validate(args)
    except ParseError as exc:
        print(f"{args.circuit}: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CutoffError, ExecutionError, StateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXEC


if __name__ == "__main__":
    sys.exit(main())
