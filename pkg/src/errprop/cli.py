"""Command-line interface.

Machine-readable output goes to stdout (or ``--out``); anything meant for
people goes to stderr and only with ``--progress``. Exit codes: 0 success,
2 invalid input, 3 solver diagnostic.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from errprop import analytics, planner
from errprop.chain import Arch, ArchitectureSchedule, McConfig, NoiseParams, default_threads, estimate_q
from errprop.errors import DiagnosticError, ValidationError
from errprop.maxcut import (
    CUBIC_GRAPH_RATIO,
    GraphClass,
    approx_ratio_bound,
    brute_force_maxcut,
    classical_superiority_threshold,
    cut_average,
    energy_upper_bound,
    load_graph,
)
from errprop.twirl import CHANNEL_TAGS, builtin_channels, haar_twirl_oracle, lambda_from_kraus

EXIT_OK, EXIT_INVALID, EXIT_DIAGNOSTIC = 0, 2, 3

SWEEP_HEADER = ("arch", "n", "p", "depth", "samples", "q_mean", "q_frac", "q_stderr", "heuristic_q_frac")

# |lam_mc - lam_analytic| may exceed 3 stderr by rounding alone when stderr ~ 0
TWIRL_ABS_TOL = 1e-10


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class SweepRow:
    arch: str
    n: int
    p: float
    depth: int
    samples: int
    q_mean: float
    q_frac: float
    q_stderr: float
    heuristic_q_frac: float | None
    wall_seconds: float

    def csv_fields(self) -> list[str]:
        h = "" if self.heuristic_q_frac is None else repr(self.heuristic_q_frac)
        return [
            self.arch,
            str(self.n),
            repr(self.p),
            str(self.depth),
            str(self.samples),
            repr(self.q_mean),
            repr(self.q_frac),
            repr(self.q_stderr),
            h,
        ]


def _depth_list(text: str) -> list[int]:
    try:
        depths = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--depths must be a list of integers, got {text!r}") from None
    if not depths:
        raise UsageError("--depths is empty")
    odd = [d for d in depths if d % 2 or d < 0]
    if odd:
        raise UsageError(f"depths must be even and nonnegative, got {odd}")
    return sorted(set(depths))


def run_sweep(
    arch: str,
    n: int,
    p: float,
    depths: Sequence[int],
    samples: int,
    seed: int,
    with_heuristic: bool = False,
    threads: int | None = None,
    progress: bool = False,
) -> list[SweepRow]:
    schedule = ArchitectureSchedule.of(arch, n)
    params = NoiseParams(p)
    rows = []
    for depth in sorted(depths):
        t0 = time.perf_counter()
        est = estimate_q(schedule, params, McConfig(samples, seed, depth), threads)
        wall = time.perf_counter() - t0
        heuristic = None
        if with_heuristic and schedule.kind is not Arch.NONLOCAL:
            heuristic = analytics.forward_q(schedule.kind, n, depth, p)
        rows.append(
            SweepRow(schedule.kind.value, n, float(p), depth, samples, est.q_mean, est.q_frac, est.stderr, heuristic, wall)
        )
        if progress:
            print(f"[sweep] {schedule.kind.value} n={n} D={depth}: q/n={est.q_frac:.4f} ({wall:.2f}s)", file=sys.stderr)
    return rows


def format_sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: dict, out: str | None = None) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", out)


def cmd_sweep(args) -> int:
    rows = run_sweep(
        args.arch,
        args.n,
        args.p,
        _depth_list(args.depths),
        args.samples,
        args.seed,
        with_heuristic=args.with_heuristic,
        threads=args.threads,
        progress=args.progress,
    )
    _emit(format_sweep_csv(rows), args.out)
    return EXIT_OK


def cmd_twirl_verify(args) -> int:
    kraus = builtin_channels(args.channel)
    analytic = lambda_from_kraus(kraus)
    mc = haar_twirl_oracle(kraus, samples=args.samples, seed=args.seed)
    diff = abs(mc.lam - analytic.lam)
    report = {
        "channel": args.channel,
        "lambda_analytic": analytic.lam,
        "lambda_mc": mc.lam,
        "stderr": mc.stderr,
        "pass": bool(diff <= 3.0 * mc.stderr + TWIRL_ABS_TOL),
    }
    _emit_json(report, args.out)
    return EXIT_OK


def cmd_threshold(args) -> int:
    ratio = args.classical_ratio
    if not 0.0 < ratio < 1.0:
        raise UsageError(f"--classical-ratio must lie in (0, 1), got {ratio}")
    cls = GraphClass.parse(args.graph_class)
    _emit_json(
        {
            "class": cls.value,
            "classical_ratio": ratio,
            "q_frac_threshold": classical_superiority_threshold(cls, ratio),
        },
        args.out,
    )
    return EXIT_OK


def cmd_plan(args) -> int:
    result = planner.required_error_rate(
        args.arch,
        args.n,
        target_q_frac=args.target_q,
        method=args.method,
        qaoa_layers=args.qaoa_layers,
        samples=args.samples,
        seed=args.seed,
        threads=args.threads,
    )
    _emit_json(result.to_dict(), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.cmax is not None and args.cavg is not None:
        c_max, c_avg = args.cmax, args.cavg
    elif args.graph:
        g = load_graph(args.graph)
        c_max = brute_force_maxcut(g).value if args.cmax is None else args.cmax
        c_avg = cut_average(g) if args.cavg is None else args.cavg
    else:
        raise UsageError("bound needs --graph or both --cmax and --cavg")
    q = args.q_frac
    _emit_json(
        {
            "c_max": c_max,
            "c_avg": c_avg,
            "q_frac": q,
            "energy_upper_bound": energy_upper_bound(c_max, c_avg, q),
            "approx_ratio_upper_bound_deg3": approx_ratio_bound(q, GraphClass.DEG3),
        },
        args.out,
    )
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="errprop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--progress", action="store_true", help="print progress to stderr")

    sweep = sub.add_parser("sweep", parents=[common], help="sample q/n over a list of depths (CSV)")
    sweep.add_argument("--arch", choices=[a.value for a in Arch], required=True)
    sweep.add_argument("--n", type=int, required=True)
    sweep.add_argument("--p", type=float, required=True)
    sweep.add_argument("--depths", required=True, help="comma- or space-separated even depths")
    sweep.add_argument("--samples", type=_positive_int, default=2000)
    sweep.add_argument("--seed", type=_seed, default=0)
    sweep.add_argument("--with-heuristic", action="store_true", help="fill the heuristic_q_frac column (1d/2d)")
    sweep.add_argument("--threads", type=_positive_int, default=None, help=f"worker threads (default {default_threads()})")
    sweep.set_defaults(func=cmd_sweep)

    twirl = sub.add_parser("twirl-verify", parents=[common], help="compare analytic and Haar-sampled lambda (JSON)")
    twirl.add_argument("--channel", choices=CHANNEL_TAGS, required=True)
    twirl.add_argument("--samples", type=_positive_int, default=10_000)
    twirl.add_argument("--seed", type=_seed, default=0)
    twirl.set_defaults(func=cmd_twirl_verify)

    thresh = sub.add_parser("threshold", parents=[common], help="classical-superiority threshold on q/n (JSON)")
    thresh.add_argument("--class", dest="graph_class", choices=["deg3", "bipartite-deg3"], default="deg3")
    thresh.add_argument("--classical-ratio", type=float, default=CUBIC_GRAPH_RATIO)
    thresh.set_defaults(func=cmd_threshold)

    plan = sub.add_parser("plan", parents=[common], help="required single-qubit error rate (JSON)")
    plan.add_argument("--arch", choices=["1d", "2d"], required=True)
    plan.add_argument("--n", type=int, required=True)
    plan.add_argument("--target-q", type=float, default=0.5)
    plan.add_argument("--method", choices=["heuristic", "mc", "mc_bisection"], default="heuristic")
    plan.add_argument("--qaoa-layers", type=_positive_int, default=planner.DEFAULT_QAOA_LAYERS)
    plan.add_argument("--samples", type=_positive_int, default=planner.MC_SAMPLES, help="MC method only")
    plan.add_argument("--seed", type=_seed, default=0)
    plan.add_argument("--threads", type=_positive_int, default=None)
    plan.set_defaults(func=cmd_plan)

    bound = sub.add_parser("bound", parents=[common], help="energy and approximation-ratio bounds (JSON)")
    bound.add_argument("--graph", help="edge-list file")
    bound.add_argument("--q-frac", type=float, required=True)
    bound.add_argument("--cmax", type=float)
    bound.add_argument("--cavg", type=float)
    bound.set_defaults(func=cmd_bound)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except DiagnosticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
