"""Secant iteration for zeros of vector fields on manifolds.

Starting from ``p0, p1`` it iterates

    v_n     = -[p_{n-1}, p_n; X]^{-1} X(p_n)
    p_{n+1} = exp_{p_n}(v_n)

for ``n = 1, 2, ...``.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import constants as C
from .divided_difference import Construction, apply, build_dd, solve
from .errors import (
    CutLocus,
    DegeneratePair,
    IndexOutOfRange,
    InsufficientData,
    InvalidConfig,
    SingularOperator,
)
from .fields import VectorFieldProblem, evaluate
from .manifolds import (
    ManifoldPoint,
    TangentVector,
    distance,
    exp_map,
    log_map,
    norm,
    parallel_transport,
)

log = logging.getLogger(__name__)


class Termination(str, enum.Enum):
    RESIDUAL_MET = "ResidualMet"
    STEP_MET = "StepMet"
    MAX_ITERS = "MaxIters"
    SINGULAR_OPERATOR = "SingularOperator"
    CUT_LOCUS = "CutLocus"

    @property
    def converged(self) -> bool:
        return self in (Termination.RESIDUAL_MET, Termination.STEP_MET)


@dataclass(frozen=True)
class SolverConfig:
    dd_construction: Construction = Construction.INTEGRAL
    quad_nodes: int = C.DEFAULT_QUAD_NODES
    residual_tol: float = C.RESIDUAL_TOL
    step_tol: float = C.STEP_TOL
    max_iters: int = C.MAX_ITERS
    strict_pivot: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "dd_construction", Construction(self.dd_construction))
        except ValueError:
            raise InvalidConfig(
                f"dd_construction must be one of {[c.value for c in Construction]}"
            ) from None
        if not (isinstance(self.quad_nodes, (int, np.integer)) and self.quad_nodes >= 1):
            raise InvalidConfig("quad_nodes must be a positive integer")
        if not (self.residual_tol > 0 and self.step_tol > 0):
            raise InvalidConfig("tolerances must be positive")
        if not (isinstance(self.max_iters, (int, np.integer)) and self.max_iters >= 1):
            raise InvalidConfig("max_iters must be an integer >= 1")

    def operator(self, problem: VectorFieldProblem, p: ManifoldPoint, q: ManifoldPoint):
        """``[p, q; X]`` built with this configuration."""
        return build_dd(problem, p, q, self.dd_construction, self.quad_nodes, self.strict_pivot)


@dataclass
class SolverTrace:
    """Record of one run.

    ``steps[k]`` joins ``iterates[k]`` to ``iterates[k + 1]``: ``steps[0]`` is
    ``log_{p0}(p1)`` and ``steps[n]`` for ``n >= 1`` is the secant step ``v_n``.
    """

    iterates: list[ManifoldPoint] = field(default_factory=list)
    steps: list[TangentVector] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)
    termination: Termination | None = None
    message: str = ""

    @property
    def iterations(self) -> int:
        """Number of secant steps taken."""
        return max(0, len(self.iterates) - 2)

    @property
    def final(self) -> ManifoldPoint:
        return self.iterates[-1]


def _validate(problem: VectorFieldProblem, p0: ManifoldPoint, p1: ManifoldPoint, config: SolverConfig):
    for p in (p0, p1):
        if p.manifold != problem.manifold:
            raise InvalidConfig(f"initial point is on {p.manifold}, problem is on {problem.manifold}")
    if config.dd_construction is Construction.PROJECTION and problem.manifold.dim != 1:
        raise InvalidConfig(
            "the projection divided difference is rank one and only invertible on "
            f"1-dimensional manifolds; {problem.manifold} has dimension {problem.manifold.dim}"
        )
    if distance(p0, p1) <= C.DEGENERATE_PAIR:
        raise DegeneratePair("initial points coincide")


def secant_solve(
    problem: VectorFieldProblem,
    p0: ManifoldPoint,
    p1: ManifoldPoint,
    config: SolverConfig | None = None,
) -> SolverTrace:
    config = config or SolverConfig()
    _validate(problem, p0, p1, config)

    trace = SolverTrace()
    v0 = log_map(p0, p1)
    trace.iterates += [p0, p1]
    trace.steps.append(v0)
    trace.step_norms.append(norm(v0))
    x_prev = evaluate(problem, p0)
    x_cur = evaluate(problem, p1)
    trace.residuals += [norm(x_prev), norm(x_cur)]

    if trace.residuals[-1] <= config.residual_tol:
        trace.termination = Termination.RESIDUAL_MET
        return trace

    prev, cur = p0, p1
    for n in range(1, config.max_iters + 1):
        try:
            op = config.operator(problem, prev, cur)
            # field change per unit length: the size a healthy operator should have
            scale = (trace.residuals[-2] + trace.residuals[-1]) / trace.step_norms[-1]
            v = -solve(op, x_cur, scale=scale)
        except SingularOperator as exc:
            trace.termination = Termination.SINGULAR_OPERATOR
            trace.message = str(exc)
            return trace
        except CutLocus as exc:
            trace.termination = Termination.CUT_LOCUS
            trace.message = str(exc)
            return trace

        nxt = exp_map(cur, v)
        x_nxt = evaluate(problem, nxt)
        trace.iterates.append(nxt)
        trace.steps.append(v)
        trace.step_norms.append(norm(v))
        trace.residuals.append(norm(x_nxt))
        log.debug("iter %d: |v|=%.3e |X|=%.3e", n, trace.step_norms[-1], trace.residuals[-1])

        if trace.residuals[-1] <= config.residual_tol:
            trace.termination = Termination.RESIDUAL_MET
            return trace
        if trace.step_norms[-1] <= config.step_tol:
            trace.termination = Termination.STEP_MET
            return trace
        prev, cur, x_cur = cur, nxt, x_nxt

    trace.termination = Termination.MAX_ITERS
    return trace


def lemma1_residual(
    trace: SolverTrace,
    problem: VectorFieldProblem,
    config: SolverConfig,
    n: int,
) -> float:
    """Defect of ``X(p_n) = ([p_{n-1},p_n] o P - P o [p_{n-2},p_{n-1}]) v_{n-1}``.

    ``P`` is transport along the geodesic ``p_{n-1} -> p_n``.  Holds exactly for
    any divided difference used by the iteration; the measured value reflects
    quadrature and rounding error only.
    """
    if not 2 <= n < len(trace.iterates):
        raise IndexOutOfRange(f"n must satisfy 2 <= n < {len(trace.iterates)}, got {n}")
    p_nm2, p_nm1, p_n = trace.iterates[n - 2 : n + 1]
    v = trace.steps[n - 1]
    x_n = evaluate(problem, p_n)
    if norm(v) == 0.0:
        return norm(x_n)
    new_op = config.operator(problem, p_nm1, p_n)
    old_op = config.operator(problem, p_nm2, p_nm1)
    lhs = apply(new_op, parallel_transport(p_nm1, p_n, v))
    rhs = parallel_transport(p_nm1, p_n, apply(old_op, v))
    return norm(x_n - (lhs - rhs))


def order_from_errors(errors: Sequence[float], floor: float = C.ERROR_FLOOR) -> tuple[float, int]:
    """Least-squares slope of ``log e_{k+1}`` against ``log e_k``.

    Only consecutive pairs with both errors above ``floor`` are used.  Returns
    ``(order, pairs_used)``.
    """
    e = np.asarray(errors, dtype=float)
    usable = int(np.sum(e > floor))
    if usable < C.MIN_ORDER_POINTS:
        raise InsufficientData(
            f"need at least {C.MIN_ORDER_POINTS} errors above {floor:g}, have {usable}"
        )
    keep = (e[:-1] > floor) & (e[1:] > floor)
    x, y = np.log(e[:-1][keep]), np.log(e[1:][keep])
    if len(x) < 2 or np.ptp(x) == 0.0:
        raise InsufficientData("not enough distinct consecutive error pairs for a slope")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope), int(len(x))


def iterate_errors(trace: SolverTrace, p_star: ManifoldPoint) -> list[float]:
    return [distance(p, p_star) for p in trace.iterates]


def estimate_order(trace: SolverTrace, p_star: ManifoldPoint) -> float:
    """Empirical convergence order of the trace towards ``p_star``."""
    return order_from_errors(iterate_errors(trace, p_star))[0]


def refined_root(
    problem: VectorFieldProblem,
    p0: ManifoldPoint,
    p1: ManifoldPoint,
    config: SolverConfig | None = None,
) -> ManifoldPoint:
    """Last iterate of a tighter solve, used as the reference zero."""
    config = config or SolverConfig()
    tight = SolverConfig(
        dd_construction=config.dd_construction,
        quad_nodes=config.quad_nodes,
        residual_tol=min(C.TIGHT_RESIDUAL_TOL, config.residual_tol),
        step_tol=min(config.step_tol, C.STEP_TOL),
        max_iters=max(config.max_iters, C.MAX_ITERS),
        strict_pivot=config.strict_pivot,
    )
    trace = secant_solve(problem, p0, p1, tight)
    if not trace.termination.converged and trace.residuals[-1] > config.residual_tol:
        raise InsufficientData(f"reference solve did not converge ({trace.termination.value})")
    return trace.final
