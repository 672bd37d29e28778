"""First-order divided differences ``[p, q; X]`` of a vector field.

An operator acts on ``T_qM`` and is stored as a square matrix in an orthonormal
basis of that tangent space, so its spectral norm is the operator norm induced
by the Riemannian metric.  Two constructions are provided:

* ``projection`` -- rank one, exact in the direction of the joining geodesic;
  needs no derivative, so it works for non-smooth fields.
* ``integral`` -- average of the transported covariant derivative along the
  geodesic, computed with Gauss-Legendre quadrature.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import constants as C
from .errors import BasePointMismatch, DegeneratePair, SingularOperator
from .fields import VectorFieldProblem, covariant_derivative, evaluate
from .manifolds import (
    ManifoldPoint,
    TangentVector,
    _tangent,
    basis_array,
    coordinates,
    distance,
    from_coordinates,
    geodesic_point,
    log_map,
    norm,
    parallel_transport,
    same_point,
)


class Construction(str, enum.Enum):
    INTEGRAL = "integral"
    PROJECTION = "projection"


@dataclass(frozen=True, eq=False)
class DividedDifferenceOperator:
    at: ManifoldPoint
    basis: np.ndarray
    matrix: np.ndarray
    construction: Construction
    pair: tuple[ManifoldPoint, ManifoldPoint]

    def __post_init__(self):
        m = self.at.manifold.dim
        if self.matrix.shape != (m, m):
            raise ValueError(f"operator matrix must be {m}x{m}, got {self.matrix.shape}")


@lru_cache(maxsize=32)
def gauss_legendre_01(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    if nodes < 1:
        raise ValueError("quadrature needs at least one node")
    x, w = np.polynomial.legendre.leggauss(nodes)
    t, wt = 0.5 * (x + 1.0), 0.5 * w
    t.setflags(write=False)
    wt.setflags(write=False)
    return t, wt


def secant_rhs(problem: VectorFieldProblem, p: ManifoldPoint, q: ManifoldPoint) -> TangentVector:
    """``X(q) - P_{p->q} X(p)``, the right-hand side of the defining identity."""
    return evaluate(problem, q) - parallel_transport(p, q, evaluate(problem, p))


def build_projection_dd(
    problem: VectorFieldProblem,
    p: ManifoldPoint,
    q: ManifoldPoint,
    strict_pivot: bool = False,
) -> DividedDifferenceOperator:
    """Rank-one divided difference through a pivot basis vector.

    With ``w = P_{p->q}(log_p q) = sum_i lam_i e_i`` the operator is
    ``v -> (<v, e_i0> / lam_i0) (X(q) - P_{p->q} X(p))``.  The pivot ``i0`` is the
    largest ``|lam_i|``; ``strict_pivot`` takes the first ``|lam_i| > 1e-12``
    instead.
    """
    if distance(p, q) <= C.DEGENERATE_PAIR:
        raise DegeneratePair("projection divided difference needs two distinct points")
    basis = basis_array(q)
    lam = coordinates(parallel_transport(p, q, log_map(p, q)), basis)
    if strict_pivot:
        i0 = int(np.flatnonzero(np.abs(lam) > C.PIVOT_THRESHOLD)[0])
    else:
        i0 = int(np.argmax(np.abs(lam)))
    rhs = coordinates(secant_rhs(problem, p, q), basis)
    matrix = np.zeros((len(basis), len(basis)))
    matrix[:, i0] = rhs / lam[i0]
    return DividedDifferenceOperator(q, basis, matrix, Construction.PROJECTION, (p, q))


def build_integral_dd(
    problem: VectorFieldProblem,
    p: ManifoldPoint,
    q: ManifoldPoint,
    quad_nodes: int = C.DEFAULT_QUAD_NODES,
) -> DividedDifferenceOperator:
    """``[p, q; X] = int_0^1 P_{t->1} DX(gamma(t)) P_{1->t} dt`` along ``gamma: p -> q``."""
    basis = basis_array(q)
    m = len(basis)
    if same_point(p, q):
        cols = [coordinates(covariant_derivative(problem, q, _tangent(q, e)), basis) for e in basis]
        return DividedDifferenceOperator(q, basis, np.array(cols).T, Construction.INTEGRAL, (p, q))

    log_map(p, q)  # surfaces CutLocus before any field work
    ts, ws = gauss_legendre_01(quad_nodes)
    matrix = np.zeros((m, m))
    for t, wt in zip(ts, ws):
        g = geodesic_point(p, q, float(t))
        for j, e in enumerate(basis):
            e_t = parallel_transport(q, g, _tangent(q, e))
            back = parallel_transport(g, q, covariant_derivative(problem, g, e_t))
            matrix[:, j] += wt * coordinates(back, basis)
    return DividedDifferenceOperator(q, basis, matrix, Construction.INTEGRAL, (p, q))


def build_dd(
    problem: VectorFieldProblem,
    p: ManifoldPoint,
    q: ManifoldPoint,
    construction: Construction | str = Construction.INTEGRAL,
    quad_nodes: int = C.DEFAULT_QUAD_NODES,
    strict_pivot: bool = False,
) -> DividedDifferenceOperator:
    if Construction(construction) is Construction.PROJECTION:
        return build_projection_dd(problem, p, q, strict_pivot=strict_pivot)
    return build_integral_dd(problem, p, q, quad_nodes=quad_nodes)


def _check_base(op: DividedDifferenceOperator, v: TangentVector) -> None:
    if not same_point(op.at, v.base):
        raise BasePointMismatch("vector is not tangent at the operator's base point")


def apply(op: DividedDifferenceOperator, v: TangentVector) -> TangentVector:
    _check_base(op, v)
    return from_coordinates(op.at, op.basis, op.matrix @ coordinates(v, op.basis))


def solve(op: DividedDifferenceOperator, w: TangentVector, scale: float | None = None) -> TangentVector:
    """The ``v`` with ``apply(op, v) == w``.

    Parameters
    ----------
    scale : float, optional
        Expected size of the operator.  The condition number cannot see an
        operator that is uniformly tiny (always the case in one dimension), so
        when given, the smallest singular value must also exceed
        ``1e-12 * scale``.
    """
    _check_base(op, w)
    s = np.linalg.svd(op.matrix, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    if not np.isfinite(cond) or cond > C.COND_LIMIT:
        raise SingularOperator(f"divided difference is singular (condition {cond:.3g})", cond)
    if scale is not None and s[-1] <= C.SINGULAR_RATIO * scale:
        raise SingularOperator(
            f"divided difference is negligible ({s[-1]:.3g}) against its scale {scale:.3g}", cond
        )
    c = np.linalg.solve(op.matrix, coordinates(w, op.basis))
    return from_coordinates(op.at, op.basis, c)


def operator_norm(op: DividedDifferenceOperator, inverse: bool = False) -> float:
    """Spectral norm of the operator, or of its inverse when ``inverse`` is set."""
    s = np.linalg.svd(op.matrix, compute_uv=False)
    if not inverse:
        return float(s[0])
    if s[-1] <= C.SINGULAR_RATIO * s[0] or s[-1] == 0.0:
        cond = float("inf") if s[-1] == 0.0 else float(s[0] / s[-1])
        raise SingularOperator("divided difference has no bounded inverse", cond)
    return float(1.0 / s[-1])


def dd_residual(op: DividedDifferenceOperator, problem: VectorFieldProblem) -> float:
    """Normalized defect of ``op(P_{p->q} log_p q) = X(q) - P_{p->q} X(p)``."""
    p, q = op.pair
    direction = parallel_transport(p, q, log_map(p, q))
    rhs = secant_rhs(problem, p, q)
    return norm(apply(op, direction) - rhs) / max(1.0, norm(rhs))


def transport_matrix(p: ManifoldPoint, q: ManifoldPoint, basis_p: np.ndarray, basis_q: np.ndarray) -> np.ndarray:
    """Matrix of ``P_{p->q}`` from the basis at ``p`` to the basis at ``q``."""
    return np.array(
        [coordinates(parallel_transport(p, q, _tangent(p, e)), basis_q) for e in basis_p]
    ).T
