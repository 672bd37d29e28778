"""Vector-field problems and their covariant derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional

import numpy as np

from . import constants as C
from .errors import BasePointMismatch, FieldEvaluation, InvalidConfig, InvalidPoint
from .manifolds import (
    SPD,
    Euclidean,
    ManifoldId,
    ManifoldPoint,
    Sphere,
    TangentVector,
    _tangent,
    exp_map,
    log_map,
    norm,
    parallel_transport,
    random_tangent,
    same_point,
    sym_sqrtm,
    symmetrize,
    zero_vector,
)

FieldFn = Callable[[ManifoldPoint], Any]
DerivFn = Callable[[ManifoldPoint, TangentVector], Any]


@dataclass(frozen=True)
class VectorFieldProblem:
    """A vector field ``X`` on a manifold, optionally with its covariant derivative.

    ``field`` maps a point to an ambient array (or a ``TangentVector`` based at that
    point).  ``cov_derivative``, when given, maps ``(p, v)`` to ``DX(p)(v)`` in the
    same form.  Both must be pure: they are called from worker threads.
    """

    manifold: ManifoldId
    field: FieldFn
    name: str
    cov_derivative: Optional[DerivFn] = None
    zero: Optional[Callable[[], ManifoldPoint]] = None
    default_start: Optional[Callable[[], tuple[ManifoldPoint, ManifoldPoint]]] = None


def _as_tangent(p: ManifoldPoint, value, what: str) -> TangentVector:
    if isinstance(value, TangentVector):
        if not same_point(value.base, p, C.TANGENT_TOL):
            raise FieldEvaluation(f"{what} returned a vector based away from the evaluation point")
        return value if value.base is p else _tangent(p, value.vec)
    arr = np.asarray(value, dtype=float)
    if arr.size != np.prod(p.manifold.shape):
        raise FieldEvaluation(f"{what} returned an array of shape {arr.shape}")
    arr = arr.reshape(p.manifold.shape)
    if not np.all(np.isfinite(arr)):
        raise FieldEvaluation(f"{what} returned non-finite values")
    geo = p.manifold.geometry
    defect = np.max(np.abs(geo.project_tangent(p.coords, arr) - arr))
    if defect > C.TANGENT_TOL * max(1.0, float(np.max(np.abs(arr)))):
        raise FieldEvaluation(f"{what} is not tangent at the evaluation point (defect {defect:.3g})")
    return _tangent(p, arr)


def evaluate(problem: VectorFieldProblem, p: ManifoldPoint) -> TangentVector:
    if p.manifold != problem.manifold:
        raise InvalidPoint(f"{problem.name} lives on {problem.manifold}, got a point on {p.manifold}")
    try:
        value = problem.field(p)
    except (FieldEvaluation, BasePointMismatch):
        raise
    except (np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        raise FieldEvaluation(f"{problem.name}: field evaluation failed: {exc}") from exc
    return _as_tangent(p, value, problem.name)


def covariant_derivative(
    problem: VectorFieldProblem,
    p: ManifoldPoint,
    v: TangentVector,
    h: float | None = None,
) -> TangentVector:
    """``DX(p)(v)``: analytic when the problem provides it, else a central difference.

    The fallback differentiates ``t -> P_{gamma(t) -> p} X(gamma(t))`` at ``t = 0``
    along the unit-speed geodesic in direction ``v`` and rescales by ``|v|``.
    """
    if not same_point(p, v.base):
        raise BasePointMismatch("direction is not tangent at the evaluation point")
    if problem.cov_derivative is not None:
        try:
            value = problem.cov_derivative(p, v)
        except (FieldEvaluation, BasePointMismatch):
            raise
        except (np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
            raise FieldEvaluation(f"{problem.name}: derivative failed: {exc}") from exc
        return _as_tangent(p, value, f"{problem.name} derivative")

    nv = norm(v)
    if nv == 0.0:
        return zero_vector(p)
    if h is None:
        h = C.FD_REL_STEP * max(1.0, nv)
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    u = v / nv
    fwd = exp_map(p, u * h)
    bwd = exp_map(p, u * (-h))
    x_f = parallel_transport(fwd, p, evaluate(problem, fwd))
    x_b = parallel_transport(bwd, p, evaluate(problem, bwd))
    return _tangent(p, (x_f.vec - x_b.vec) * (nv / (2.0 * h)))


# ---------------------------------------------------------------------------
# built-in problems
# ---------------------------------------------------------------------------

def _start_near(center: ManifoldPoint, d0: float, d1: float, seed: int = 7) -> tuple[ManifoldPoint, ManifoldPoint]:
    """Reproducible starting pair at geodesic distances ``d0``, ``d1`` from ``center``."""
    rng = np.random.default_rng(seed)
    return (
        exp_map(center, random_tangent(center, rng, length=d0)),
        exp_map(center, random_tangent(center, rng, length=d1)),
    )


def euclid_sqrt2() -> VectorFieldProblem:
    m = Euclidean(1)
    return VectorFieldProblem(
        manifold=m,
        name="euclid-sqrt2",
        field=lambda p: p.coords**2 - 2.0,
        cov_derivative=lambda p, v: 2.0 * p.coords * v.vec,
        zero=lambda: m.point([np.sqrt(2.0)]),
        default_start=lambda: (m.point([1.0]), m.point([2.0])),
    )


def _euclid_2d_zero() -> np.ndarray:
    # x^4 - 2x^2 - x + 1 = 0 with y = x^2 - 1; largest real root
    roots = np.roots([1.0, 0.0, -2.0, -1.0, 1.0])
    x = max(r.real for r in roots if abs(r.imag) < 1e-12)
    return np.array([x, x * x - 1.0])


def euclid_2d() -> VectorFieldProblem:
    m = Euclidean(2)

    def field(p):
        x, y = p.coords
        return np.array([x * x - y - 1.0, y * y - x])

    def deriv(p, v):
        x, y = p.coords
        return np.array([[2 * x, -1.0], [-1.0, 2 * y]]) @ v.vec

    return VectorFieldProblem(
        manifold=m,
        name="euclid-2d",
        field=field,
        cov_derivative=deriv,
        zero=lambda: m.point(_euclid_2d_zero()),
        default_start=lambda: (m.point([1.4, 1.1]), m.point([1.5, 1.3])),
    )


def euclid_affine(A=None, b=None) -> VectorFieldProblem:
    """``X(x) = A x + b`` on ``E(n)``; the secant step is exact for it."""
    A = np.array([[3.0, 1.0], [0.0, 2.0]] if A is None else A, dtype=float)
    b = np.array([1.0, -1.0] if b is None else b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
        raise InvalidConfig("euclid-affine needs a square matrix A and a matching vector b")
    m = Euclidean(A.shape[0])
    return VectorFieldProblem(
        manifold=m,
        name="euclid-affine",
        field=lambda p: A @ p.coords + b,
        cov_derivative=lambda p, v: A @ v.vec,
        zero=lambda: m.point(np.linalg.solve(A, -b)),
        default_start=lambda: (m.point(np.zeros(len(b))), m.point(np.ones(len(b)))),
    )


def sphere_rayleigh(A=None) -> VectorFieldProblem:
    """Riemannian gradient of the Rayleigh quotient ``X(p) = A p - (p'Ap) p``.

    Zeros are the unit eigenvectors of the symmetric matrix ``A``.
    """
    A = np.array(np.diag([3.0, 2.0, 1.0]) if A is None else A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
        raise InvalidConfig("sphere-rayleigh needs a square matrix A of size >= 2")
    if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
        raise InvalidConfig("sphere-rayleigh needs a symmetric matrix A")
    A = symmetrize(A)
    m = Sphere(A.shape[0])

    def field(p):
        x = p.coords
        return A @ x - (x @ A @ x) * x

    def deriv(p, v):
        # projection of the ambient derivative onto T_pM
        x, w = p.coords, v.vec
        aw = A @ w
        return aw - (x @ aw) * x - (x @ A @ x) * w

    def zero():
        _, vecs = np.linalg.eigh(A)
        top = vecs[:, -1]
        return m.point(top if top[np.argmax(np.abs(top))] > 0 else -top)

    return VectorFieldProblem(
        manifold=m, name="sphere-rayleigh", field=field, cov_derivative=deriv,
        zero=zero, default_start=lambda: _start_near(zero(), 0.5, 0.45),
    )


_KARCHER_DEFAULT = (
    [[2.0, 0.5], [0.5, 1.0]],
    [[1.0, -0.3], [-0.3, 3.0]],
)


def geometric_mean(A, B) -> np.ndarray:
    """Closed-form affine-invariant midpoint ``A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2``."""
    s = sym_sqrtm(A)
    si = np.linalg.inv(s)
    return symmetrize(s @ sym_sqrtm(si @ B @ si) @ s)


def spd_karcher(matrices=None) -> VectorFieldProblem:
    """``X(P) = sum_i log_P(A_i)``, whose zero is the Karcher mean of the ``A_i``.

    No analytic covariant derivative: the finite-difference fallback is used.
    """
    mats = [np.array(a, dtype=float) for a in (_KARCHER_DEFAULT if matrices is None else matrices)]
    if not mats:
        raise InvalidConfig("spd-karcher needs at least one matrix")
    n = mats[0].shape[0]
    m = SPD(n)
    try:
        points = [m.point(a) for a in mats]
    except InvalidPoint as exc:
        raise InvalidConfig(f"spd-karcher matrices: {exc}") from exc

    def field(p):
        return sum(log_map(p, a).vec for a in points)

    zero = None
    if len(points) == 2:
        zero = lambda: m.point(geometric_mean(points[0].coords, points[1].coords))  # noqa: E731
    elif len(points) == 1:
        zero = lambda: points[0]  # noqa: E731

    def start():
        center = zero() if zero is not None else m.point(sum(a.coords for a in points) / len(points))
        # far enough out that the trace is long enough for an order estimate
        return _start_near(center, 1.5, 1.4)

    return VectorFieldProblem(manifold=m, name="spd-karcher", field=field, zero=zero, default_start=start)


def _parse_matrix(value, name: str) -> np.ndarray:
    try:
        return np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"problem_params.{name}: not a numeric array") from exc


def _make_rayleigh(params):
    return sphere_rayleigh(_parse_matrix(params["A"], "A") if "A" in params else None)


def _make_karcher(params):
    if "matrices" not in params:
        return spd_karcher()
    return spd_karcher([_parse_matrix(a, "matrices") for a in params["matrices"]])


def _make_affine(params):
    A = _parse_matrix(params["A"], "A") if "A" in params else None
    b = _parse_matrix(params["b"], "b") if "b" in params else None
    return euclid_affine(A, b)


REGISTRY: dict[str, Callable[[Mapping[str, Any]], VectorFieldProblem]] = {
    "euclid-sqrt2": lambda params: euclid_sqrt2(),
    "euclid-2d": lambda params: euclid_2d(),
    "sphere-rayleigh": _make_rayleigh,
    "spd-karcher": _make_karcher,
    "euclid-affine": _make_affine,
}

BUILTIN_NAMES = ("euclid-sqrt2", "euclid-2d", "sphere-rayleigh", "spd-karcher")


def make_problem(name: str, params: Mapping[str, Any] | None = None) -> VectorFieldProblem:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise InvalidConfig(f"unknown problem {name!r}; choose from {sorted(REGISTRY)}") from None
    return factory(dict(params or {}))


def builtin_problems() -> list[VectorFieldProblem]:
    """The four reference problems with their default parameters."""
    return [make_problem(name) for name in BUILTIN_NAMES]
