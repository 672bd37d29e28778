"""Run configuration files (JSON) for the command-line tools.

Schema (all keys optional except ``problem``)::

    {
      "problem": "sphere-rayleigh",
      "problem_params": {"A": [[3, 0, 0], [0, 2, 0], [0, 0, 1]]},
      "initial_points": [[1, 0.1, 0], [1, 0, 0.1]],
      "solver": {"dd_construction": "integral", "quad_nodes": 8,
                 "residual_tol": 1e-10, "step_tol": 1e-12, "max_iters": 100,
                 "strict_pivot": false},
      "omega": {"family": "lipschitz", "K": 2.0, "exponent": 1.0, "samples": 200},
      "domain_radius": 0.5,
      "output": {"path": "trace.json", "format": "json"},
      "seed": 0
    }

Without ``initial_points`` the problem's default starting pair is used.
Without ``omega.K`` the constant is estimated by sampling ``B(p_0, domain_radius)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .errors import InvalidConfig, InvalidPoint
from .fields import VectorFieldProblem, make_problem
from .manifolds import Kind, ManifoldPoint
from .solver import SolverConfig

_SOLVER_KEYS = {"dd_construction", "quad_nodes", "residual_tol", "step_tol", "max_iters", "strict_pivot"}
_TOP_KEYS = {
    "problem", "problem_params", "initial_points", "solver", "omega",
    "domain_radius", "output", "seed",
}


@dataclass(frozen=True)
class OmegaSpec:
    family: str = "lipschitz"
    K: Optional[float] = None
    exponent: float = 1.0
    samples: int = 200


@dataclass(frozen=True)
class RunConfig:
    problem: str
    problem_params: Mapping[str, Any] = field(default_factory=dict)
    initial_points: Optional[tuple] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    omega: OmegaSpec = field(default_factory=OmegaSpec)
    domain_radius: float = 1.0
    output_path: Optional[str] = None
    output_format: str = "json"
    seed: int = 0

    def build_problem(self) -> VectorFieldProblem:
        try:
            return make_problem(self.problem, self.problem_params)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"problem_params: {exc}") from exc

    def starting_points(self, problem: VectorFieldProblem) -> tuple[ManifoldPoint, ManifoldPoint, list[str]]:
        """The two initial points plus notes about any repair applied to them."""
        if self.initial_points is None:
            if problem.default_start is None:
                raise InvalidConfig("initial_points: required for this problem")
            p0, p1 = problem.default_start()
            return p0, p1, []
        notes = []
        points = []
        for i, raw in enumerate(self.initial_points):
            arr = np.asarray(raw, dtype=float)
            try:
                p = problem.manifold.point(arr)
            except InvalidPoint as exc:
                raise InvalidConfig(f"initial_points[{i}]: {exc}") from exc
            if problem.manifold.kind is Kind.SPHERE and abs(np.linalg.norm(arr) - 1.0) > 1e-12:
                notes.append(f"initial_points[{i}] renormalized onto the unit sphere")
            points.append(p)
        return points[0], points[1], notes


def _float(value, name: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{name}: expected a number, got {value!r}") from None
    return out


def _int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise InvalidConfig(f"{name}: expected an integer, got {value!r}")
    return int(value)


def parse_run_config(data: Mapping[str, Any]) -> RunConfig:
    if not isinstance(data, Mapping):
        raise InvalidConfig("config: expected a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise InvalidConfig(f"{sorted(unknown)[0]}: unknown config key")
    if "problem" not in data or not isinstance(data["problem"], str):
        raise InvalidConfig("problem: a problem name string is required")

    params = data.get("problem_params", {})
    if not isinstance(params, Mapping):
        raise InvalidConfig("problem_params: expected an object")

    points = data.get("initial_points")
    if points is not None:
        if not isinstance(points, list) or len(points) != 2:
            raise InvalidConfig("initial_points: expected a list of two coordinate arrays")
        try:
            points = tuple(np.asarray(p, dtype=float).tolist() for p in points)
        except (TypeError, ValueError):
            raise InvalidConfig("initial_points: coordinates must be numeric") from None

    solver_raw = data.get("solver", {})
    if not isinstance(solver_raw, Mapping):
        raise InvalidConfig("solver: expected an object")
    bad = set(solver_raw) - _SOLVER_KEYS
    if bad:
        raise InvalidConfig(f"solver.{sorted(bad)[0]}: unknown solver setting")
    solver_kwargs = {}
    for key, value in solver_raw.items():
        if key in ("quad_nodes", "max_iters"):
            value = _int(value, f"solver.{key}")
        elif key in ("residual_tol", "step_tol"):
            value = _float(value, f"solver.{key}")
        elif key == "strict_pivot":
            value = bool(value)
        solver_kwargs[key] = value
    try:
        solver = SolverConfig(**solver_kwargs)
    except InvalidConfig as exc:
        raise InvalidConfig(f"solver: {exc}") from None

    omega_raw = data.get("omega", {}) or {}
    if not isinstance(omega_raw, Mapping):
        raise InvalidConfig("omega: expected an object")
    family = omega_raw.get("family", "lipschitz")
    if family not in ("lipschitz", "hoelder"):
        raise InvalidConfig(f"omega.family: expected 'lipschitz' or 'hoelder', got {family!r}")
    omega = OmegaSpec(
        family=family,
        K=None if omega_raw.get("K") is None else _float(omega_raw["K"], "omega.K"),
        exponent=_float(omega_raw.get("exponent", 1.0), "omega.exponent"),
        samples=_int(omega_raw.get("samples", 200), "omega.samples"),
    )

    radius = _float(data.get("domain_radius", 1.0), "domain_radius")
    if not radius > 0:
        raise InvalidConfig("domain_radius: must be positive")

    output = data.get("output", {}) or {}
    if not isinstance(output, Mapping):
        raise InvalidConfig("output: expected an object")
    fmt = output.get("format", "json")
    if fmt not in ("json", "csv"):
        raise InvalidConfig(f"output.format: expected 'csv' or 'json', got {fmt!r}")

    return RunConfig(
        problem=data["problem"],
        problem_params=dict(params),
        initial_points=points,
        solver=solver,
        omega=omega,
        domain_radius=radius,
        output_path=output.get("path"),
        output_format=fmt,
        seed=_int(data.get("seed", 0), "seed"),
    )


def load_run_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config: invalid JSON ({exc})") from None
    return parse_run_config(data)


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply command-line overrides; ``None`` values are ignored."""
    solver_changes = {}
    top = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("quad_nodes", "strict_pivot"):
            solver_changes[key] = value
        else:
            top[key] = value
    if solver_changes:
        try:
            top["solver"] = replace(config.solver, **solver_changes)
        except InvalidConfig as exc:
            raise InvalidConfig(f"solver: {exc}") from None
    return replace(config, **top)
