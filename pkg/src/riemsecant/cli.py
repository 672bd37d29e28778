"""Command-line front end: ``solve``, ``certify``, ``order`` and ``bench``.

Exit codes::

    0  success (converged / certified / suite ran)
    1  configuration or I/O error
    2  solver hit max_iters
    3  solver stopped on a singular operator or the cut locus
    4  certificate not established
    5  not enough data for an order estimate
    6  at least one bench entry errored
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .certificate import CertificateReport, OmegaFunction, certify, estimate_K
from .config import RunConfig, load_run_config, parse_run_config, with_overrides
from .errors import InsufficientData, InvalidConfig, RiemSecantError
from .fields import BUILTIN_NAMES, VectorFieldProblem
from .serialization import atomic_write, dumps, fmt_float, read_trace, trace_rows, trace_to_dict, write_trace
from .solver import SolverTrace, Termination, iterate_errors, order_from_errors, refined_root, secant_solve

log = logging.getLogger("riemsecant")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITERS = 2
EXIT_BREAKDOWN = 3
EXIT_NOT_CERTIFIED = 4
EXIT_INSUFFICIENT = 5
EXIT_BENCH_ERRORS = 6

BENCH_COLUMNS = [
    "index", "problem", "manifold", "m", "termination", "iterations",
    "final_residual", "order", "certified", "status", "error",
]

DEFAULT_SUITE = [
    {"problem": "euclid-sqrt2", "omega": {"K": 1.0}, "domain_radius": 1.0},
    {"problem": "euclid-2d", "omega": {"samples": 40}, "domain_radius": 0.5},
    {"problem": "sphere-rayleigh", "omega": {"samples": 40}, "domain_radius": 1.0},
    {"problem": "spd-karcher", "omega": {"samples": 20}, "domain_radius": 1.0},
]


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def _solve_exit(trace: SolverTrace) -> int:
    if trace.termination.converged:
        return EXIT_OK
    if trace.termination is Termination.MAX_ITERS:
        return EXIT_MAX_ITERS
    return EXIT_BREAKDOWN


def format_table(trace: SolverTrace) -> str:
    lines = [f"{'n':>4}  {'residual':>12}  {'step norm':>12}  {'dist to final':>14}"]
    for row in trace_rows(trace):
        step = "" if row["step_norm"] is None else f"{row['step_norm']:.6e}"
        lines.append(f"{row['n']:>4}  {row['residual']:>12.6e}  {step:>12}  {row['dist_to_final']:>14.6e}")
    return "\n".join(lines)


def _omega_for(config: RunConfig, problem: VectorFieldProblem, center, seed: int) -> OmegaFunction:
    spec = config.omega
    if spec.K is not None:
        return OmegaFunction(spec.family, spec.K, spec.exponent)
    return estimate_K(
        problem, center, config.domain_radius, spec.samples, config.solver,
        family=spec.family, exponent=spec.exponent, seed=seed,
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(config: RunConfig, out: Optional[str] = None, fmt: Optional[str] = None) -> int:
    try:
        problem = config.build_problem()
        p0, p1, notes = config.starting_points(problem)
        trace = secant_solve(problem, p0, p1, config.solver)
    except RiemSecantError as exc:
        return _fail(str(exc))
    for note in notes:
        print(f"note: {note}")
    print(f"{problem.name} on {problem.manifold}: {trace.termination.value} after {trace.iterations} iterations")
    print(format_table(trace))
    path = out or config.output_path
    if path:
        try:
            write_trace(path, trace, problem.name, fmt or config.output_format)
        except OSError as exc:
            return _fail(f"output: cannot write {path}: {exc.strerror}")
    return _solve_exit(trace)


def run_certificate(config: RunConfig) -> CertificateReport:
    problem = config.build_problem()
    p_m1, p_0, _ = config.starting_points(problem)
    omega = _omega_for(config, problem, p_0, config.seed)
    return certify(problem, p_m1, p_0, omega, config.domain_radius, config.solver)


def cmd_certify(config: RunConfig, out: Optional[str] = None) -> int:
    try:
        report = run_certificate(config)
    except RiemSecantError as exc:
        return _fail(str(exc))
    text = dumps(report.to_dict())
    label = "empirical certificate" if report.omega.empirical else "certificate"
    print(f"{label}: {'certified' if report.certified else 'NOT certified'}")
    print(text, end="")
    path = out or config.output_path
    if path:
        try:
            atomic_write(path, text)
        except OSError as exc:
            return _fail(f"output: cannot write {path}: {exc.strerror}")
    return EXIT_OK if report.certified else EXIT_NOT_CERTIFIED


def run_order(config: RunConfig, trace: Optional[SolverTrace] = None) -> tuple[float, int]:
    problem = config.build_problem()
    p0, p1, _ = config.starting_points(problem)
    p_star = refined_root(problem, p0, p1, config.solver)
    if trace is None:
        trace = secant_solve(problem, p0, p1, config.solver)
    return order_from_errors(iterate_errors(trace, p_star))


def cmd_order(config: RunConfig, out: Optional[str] = None, trace_path: Optional[str] = None) -> int:
    try:
        trace = None
        if trace_path:
            trace, _ = read_trace(trace_path)
        order, used = run_order(config, trace)
    except InsufficientData as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except OSError as exc:
        return _fail(f"trace: cannot read {trace_path}: {exc.strerror}")
    except (RiemSecantError, KeyError, ValueError) as exc:
        return _fail(str(exc))
    print(f"estimated order {order:.6f} from {used} points")
    path = out or config.output_path
    if path:
        try:
            atomic_write(path, dumps({"order": order, "points_used": used}))
        except OSError as exc:
            return _fail(f"output: cannot write {path}: {exc.strerror}")
    return EXIT_OK


def _entry_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def run_bench_entry(index: int, entry: Mapping[str, Any], seed: int, trace_dir: Optional[str]) -> tuple[dict, float]:
    """Run one suite entry; never raises.  Returns the CSV row and the wall time."""
    start = time.perf_counter()
    row = {col: "" for col in BENCH_COLUMNS}
    row.update(index=index, problem=entry.get("problem", "") if isinstance(entry, Mapping) else "")
    try:
        config = parse_run_config(entry)
        entry_seed = _entry_seed(seed, index)
        config = with_overrides(config, seed=entry_seed)
        problem = config.build_problem()
        p0, p1, _ = config.starting_points(problem)
        row.update(manifold=str(problem.manifold), m=problem.manifold.dim)

        trace = secant_solve(problem, p0, p1, config.solver)
        row.update(
            termination=trace.termination.value,
            iterations=trace.iterations,
            final_residual=fmt_float(trace.residuals[-1]),
        )
        if trace_dir:
            name = f"{index:03d}_{problem.name}.json"
            atomic_write(Path(trace_dir) / name, dumps(trace_to_dict(trace, problem.name)))
        try:
            order, _ = run_order(config, trace)
            row["order"] = fmt_float(order)
        except InsufficientData:
            row["order"] = ""
        row["certified"] = run_certificate(config).certified
        row["status"] = "ok"
    except Exception as exc:  # noqa: BLE001 - recorded in the CSV, suite continues
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return row, time.perf_counter() - start


def load_suite(path: Optional[str]) -> list:
    if path is None:
        return [dict(e) for e in DEFAULT_SUITE]
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidConfig(f"suite: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"suite: invalid JSON ({exc})") from None
    entries = data.get("entries") if isinstance(data, Mapping) else data
    if not isinstance(entries, list):
        raise InvalidConfig("suite: expected a list of run configs or an object with 'entries'")
    return entries


def _rows_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def cmd_bench(suite_path: Optional[str], out_dir: str, seed: int = 0, jobs: int = 1) -> int:
    """Run every suite entry; write ``results.csv``, ``timings.csv`` and ``traces/``."""
    try:
        entries = load_suite(suite_path)
    except InvalidConfig as exc:
        return _fail(str(exc))
    out = Path(out_dir)
    trace_dir = str(out / "traces")
    args = [(i, e, seed, trace_dir) for i, e in enumerate(entries)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_bench_entry, *zip(*args)))
    else:
        results = [run_bench_entry(*a) for a in args]

    rows = [r for r, _ in results]
    timings = [{"index": r["index"], "problem": r["problem"], "wall_time": fmt_float(t)} for r, t in results]
    try:
        atomic_write(out / "results.csv", _rows_csv(rows, BENCH_COLUMNS))
        atomic_write(out / "timings.csv", _rows_csv(timings, ["index", "problem", "wall_time"]))
    except OSError as exc:
        return _fail(f"output: cannot write to {out}: {exc.strerror}")

    for row, wall in results:
        print(
            f"{row['index']:>3} {row['problem']:<16} {row['status']:<6} "
            f"{row['termination']:<17} iters={row['iterations']!s:<3} order={row['order'] or '-'} "
            f"certified={row['certified']}  ({wall:.2f}s)"
        )
    return EXIT_BENCH_ERRORS if any(r["status"] == "error" for r in rows) else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON)")
    common.add_argument("--out", help="output file (directory for bench)")
    common.add_argument("--format", choices=["csv", "json"], help="trace file format")
    common.add_argument("--quad-nodes", type=int, help="Gauss-Legendre nodes for the integral divided difference")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--strict-paper-pivot", action="store_true", default=None,
                        help="projection divided difference pivots on the first nonzero coordinate")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="riemsecant",
        description="Secant method for zeros of vector fields on Riemannian manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="run the secant iteration")
    sub.add_parser("certify", parents=[common], help="check the semilocal convergence certificate")
    order = sub.add_parser("order", parents=[common], help="estimate the convergence order")
    order.add_argument("--trace", help="estimate from a saved trace file instead of re-solving")
    bench = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    bench.add_argument("--suite", help=f"suite file (default: {', '.join(BUILTIN_NAMES)})")
    bench.add_argument("--jobs", type=int, default=1, help="entries run in parallel")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "bench":
        return cmd_bench(args.suite or args.config, args.out or "bench-out", args.seed or 0, args.jobs)

    if not args.config:
        return _fail("config: --config is required")
    try:
        config = load_run_config(args.config)
        config = with_overrides(
            config, quad_nodes=args.quad_nodes, strict_pivot=args.strict_paper_pivot, seed=args.seed,
        )
    except InvalidConfig as exc:
        return _fail(str(exc))

    if args.command == "solve":
        return cmd_solve(config, args.out, args.format)
    if args.command == "certify":
        return cmd_certify(config, args.out)
    return cmd_order(config, args.out, args.trace)


if __name__ == "__main__":
    sys.exit(main())
