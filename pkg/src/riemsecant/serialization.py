"""Trace and report files.

JSON floats use Python's shortest round-trip representation; CSV floats are
written with 17 significant digits.  Either way a value read back is bit-for-bit
the value written.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .manifolds import ManifoldId, ManifoldPoint, TangentVector, distance
from .solver import SolverTrace, Termination


def fmt_float(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def trace_to_dict(trace: SolverTrace, problem_name: str) -> dict:
    manifold = trace.iterates[0].manifold
    return {
        "problem": problem_name,
        "manifold": {"kind": manifold.kind.value, "n": manifold.n},
        "termination": trace.termination.value if trace.termination else None,
        "message": trace.message,
        "iterations": trace.iterations,
        "iterates": [p.coords.tolist() for p in trace.iterates],
        "steps": [v.vec.tolist() for v in trace.steps],
        "residuals": list(trace.residuals),
        "step_norms": list(trace.step_norms),
    }


def trace_from_dict(data: dict) -> tuple[SolverTrace, str]:
    manifold = ManifoldId(data["manifold"]["kind"], data["manifold"]["n"])
    iterates = [ManifoldPoint(manifold, np.array(c)) for c in data["iterates"]]
    steps = [TangentVector(p, np.array(v)) for p, v in zip(iterates, data.get("steps", []))]
    term = data.get("termination")
    trace = SolverTrace(
        iterates=iterates,
        steps=steps,
        residuals=[float(r) for r in data.get("residuals", [])],
        step_norms=[float(s) for s in data.get("step_norms", [])],
        termination=Termination(term) if term else None,
        message=data.get("message", ""),
    )
    return trace, data.get("problem", "")


def trace_rows(trace: SolverTrace) -> list[dict]:
    """Per-iterate table: index, residual, step norm to the next iterate, distance to the last."""
    final = trace.final
    rows = []
    for k, p in enumerate(trace.iterates):
        rows.append({
            "n": k,
            "residual": trace.residuals[k],
            "step_norm": trace.step_norms[k] if k < len(trace.step_norms) else None,
            "dist_to_final": distance(p, final),
        })
    return rows


def trace_to_csv(trace: SolverTrace, problem_name: str) -> str:
    manifold = trace.iterates[0].manifold
    size = int(np.prod(manifold.shape))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["# problem", problem_name, "manifold", manifold.kind.value, manifold.n,
                     "termination", trace.termination.value if trace.termination else ""])
    writer.writerow(["n", "residual", "step_norm", "dist_to_final"] + [f"x{i}" for i in range(size)])
    for row, p in zip(trace_rows(trace), trace.iterates):
        writer.writerow(
            [row["n"], fmt_float(row["residual"]), fmt_float(row["step_norm"]), fmt_float(row["dist_to_final"])]
            + [fmt_float(c) for c in p.coords.ravel()]
        )
    return buf.getvalue()


def trace_from_csv(text: str) -> tuple[SolverTrace, str]:
    lines = list(csv.reader(io.StringIO(text)))
    meta = lines[0]
    problem_name = meta[1]
    manifold = ManifoldId(meta[3], int(meta[4]))
    term = meta[6] if len(meta) > 6 else ""
    iterates, residuals, step_norms = [], [], []
    for row in lines[2:]:
        if not row:
            continue
        residuals.append(float(row[1]))
        if row[2] != "":
            step_norms.append(float(row[2]))
        iterates.append(ManifoldPoint(manifold, np.array([float(x) for x in row[4:]])))
    trace = SolverTrace(
        iterates=iterates,
        residuals=residuals,
        step_norms=step_norms,
        termination=Termination(term) if term else None,
    )
    return trace, problem_name


def write_trace(path: str | Path, trace: SolverTrace, problem_name: str, fmt: str = "json") -> None:
    if fmt == "csv":
        atomic_write(path, trace_to_csv(trace, problem_name))
    else:
        atomic_write(path, dumps(trace_to_dict(trace, problem_name)))


def read_trace(path: str | Path) -> tuple[SolverTrace, str]:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return trace_from_dict(json.loads(text))
    return trace_from_csv(text)
