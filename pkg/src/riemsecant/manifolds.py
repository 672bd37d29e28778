"""Closed-form geometry of Euclidean space, the unit sphere and SPD matrices.

Points and tangent vectors are stored in their ambient representation: a
length-``n`` vector for ``E(n)`` and ``S(n-1)``, a symmetric ``n x n`` matrix
for ``SPD(n)``.  ``SPD(n)`` carries the affine-invariant metric
``<U, V>_P = tr(P^-1 U P^-1 V)``.

Every public operation is a pure function of immutable values.  The actual
formulas live in small per-manifold geometry classes that work on raw arrays;
the typed wrappers below validate base points and wrap results.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import constants as C
from .errors import BasePointMismatch, CutLocus, InvalidPoint


class Kind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    SPD = "spd"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# symmetric matrix functions
# ---------------------------------------------------------------------------

def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def sym_funm(a: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix through its eigenvalues."""
    w, q = np.linalg.eigh(symmetrize(a))
    return symmetrize((q * fn(w)) @ q.T)


def sym_expm(a: np.ndarray) -> np.ndarray:
    return sym_funm(a, np.exp)


def sym_logm(a: np.ndarray) -> np.ndarray:
    w, q = np.linalg.eigh(symmetrize(a))
    if w.min() <= 0:
        raise InvalidPoint("matrix logarithm of a non positive-definite matrix")
    return symmetrize((q * np.log(w)) @ q.T)


def sym_sqrtm(a: np.ndarray) -> np.ndarray:
    return sym_funm(a, np.sqrt)


def _sqrt_pair(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, q = np.linalg.eigh(p)
    s = np.sqrt(w)
    return symmetrize((q * s) @ q.T), symmetrize((q / s) @ q.T)


# ---------------------------------------------------------------------------
# raw geometry
# ---------------------------------------------------------------------------

class _Euclidean:
    def __init__(self, n: int):
        self.n = n
        self.dim = n
        self.shape = (n,)

    def check_point(self, x):
        if not np.all(np.isfinite(x)):
            raise InvalidPoint("non-finite coordinates")
        return x

    def project_tangent(self, x, v):
        return v

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def exp(self, x, v):
        return x + v

    def log(self, x, y):
        return y - x

    def dist(self, x, y):
        return float(np.linalg.norm(y - x))

    def transport(self, x, y, v):
        return v

    def basis(self, x):
        return np.eye(self.n)

    def coords(self, x, basis, v):
        return basis @ v


class _Sphere:
    def __init__(self, n: int):
        self.n = n
        self.dim = n - 1
        self.shape = (n,)

    def check_point(self, x):
        nrm = np.linalg.norm(x)
        if not np.isfinite(nrm) or nrm == 0:
            raise InvalidPoint("sphere point must be a finite nonzero vector")
        return x / nrm

    def project_tangent(self, x, v):
        return v - np.dot(x, v) * x

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    @staticmethod
    def _split(x, y):
        # atan2 of the normal and tangential parts stays accurate at tiny angles,
        # where acos of the dot product loses half the digits
        c = float(np.dot(x, y))
        w = y - c * x
        w = w - np.dot(x, w) * x
        return math.atan2(float(np.linalg.norm(w)), c), w

    def _angle(self, x, y):
        return self._split(x, y)[0]

    def exp(self, x, v):
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return x
        return math.cos(nv) * x + math.sin(nv) * (v / nv)

    def log(self, x, y):
        theta, w = self._split(x, y)
        if theta >= math.pi - C.CUT_LOCUS_MARGIN:
            raise CutLocus(f"points are (nearly) antipodal, angle {theta!r}")
        if theta <= C.ZERO_ANGLE:
            return np.zeros_like(x)
        return theta * w / np.linalg.norm(w)

    def dist(self, x, y):
        return self._angle(x, y)

    def transport(self, x, y, v):
        u = self.log(x, y)
        theta = float(np.linalg.norm(u))
        if theta <= C.ZERO_ANGLE:
            return v
        e = u / theta
        out = v + np.dot(e, v) * ((math.cos(theta) - 1.0) * e - math.sin(theta) * x)
        return out - np.dot(y, out) * y

    def basis(self, x):
        skip = int(np.argmax(np.abs(x)))
        vecs = []
        for i in range(self.n):
            if i == skip:
                continue
            w = np.zeros(self.n)
            w[i] = 1.0
            w = w - np.dot(x, w) * x
            for b in vecs:
                w = w - np.dot(b, w) * b
            # second pass keeps the basis orthonormal to 1e-15 near degenerate axes
            w = w - np.dot(x, w) * x
            for b in vecs:
                w = w - np.dot(b, w) * b
            vecs.append(w / np.linalg.norm(w))
        return np.array(vecs)

    def coords(self, x, basis, v):
        return basis @ v


class _SPD:
    def __init__(self, n: int):
        self.n = n
        self.dim = n * (n + 1) // 2
        self.shape = (n, n)
        blocks = []
        for i in range(n):
            for j in range(i, n):
                b = np.zeros((n, n))
                if i == j:
                    b[i, i] = 1.0
                else:
                    b[i, j] = b[j, i] = 1.0 / math.sqrt(2.0)
                blocks.append(b)
        self._canonical = np.array(blocks)

    def check_point(self, x):
        if not np.all(np.isfinite(x)):
            raise InvalidPoint("non-finite matrix entries")
        defect = float(np.max(np.abs(x - x.T)))
        if defect > C.REPAIR_LIMIT * max(1.0, float(np.max(np.abs(x)))):
            raise InvalidPoint(f"matrix is not symmetric (defect {defect:.3g})")
        x = symmetrize(x)
        if np.linalg.eigvalsh(x).min() <= 0:
            raise InvalidPoint("matrix is not positive definite")
        return x

    def project_tangent(self, x, v):
        return symmetrize(v)

    def inner(self, x, u, v):
        a = np.linalg.solve(x, u)
        b = np.linalg.solve(x, v)
        return float(np.trace(a @ b))

    def exp(self, x, v):
        s, si = _sqrt_pair(x)
        return symmetrize(s @ sym_expm(si @ v @ si) @ s)

    def log(self, x, y):
        s, si = _sqrt_pair(x)
        return symmetrize(s @ sym_logm(si @ y @ si) @ s)

    def dist(self, x, y):
        _, si = _sqrt_pair(x)
        w = np.linalg.eigvalsh(symmetrize(si @ y @ si))
        return float(np.sqrt(np.sum(np.log(w) ** 2)))

    def transport(self, x, y, v):
        s, si = _sqrt_pair(x)
        e = sym_sqrtm(si @ y @ si)
        f = s @ e @ si
        return symmetrize(f @ v @ f.T)

    def basis(self, x):
        s, _ = _sqrt_pair(x)
        return np.einsum("ij,kjl,lm->kim", s, self._canonical, s)

    def coords(self, x, basis, v):
        xinv = np.linalg.inv(x)
        a = xinv @ v @ xinv
        return np.einsum("kij,ji->k", basis, a)


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifoldId:
    kind: Kind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"manifold size must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.kind is Kind.SPHERE and self.n < 2:
            raise ValueError("Sphere requires n >= 2")

    @property
    def geometry(self):
        return _geometry(self.kind, self.n)

    @property
    def dim(self) -> int:
        """Intrinsic dimension."""
        return self.geometry.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.geometry.shape

    def point(self, coords) -> "ManifoldPoint":
        return ManifoldPoint(self, coords)

    def __str__(self):
        label = {Kind.EUCLIDEAN: "E", Kind.SPHERE: "S", Kind.SPD: "SPD"}[self.kind]
        n = self.n - 1 if self.kind is Kind.SPHERE else self.n
        return f"{label}({n})"


_GEOMETRIES: dict[tuple[Kind, int], object] = {}


def _geometry(kind: Kind, n: int):
    key = (kind, n)
    geo = _GEOMETRIES.get(key)
    if geo is None:
        cls = {Kind.EUCLIDEAN: _Euclidean, Kind.SPHERE: _Sphere, Kind.SPD: _SPD}[kind]
        geo = _GEOMETRIES.setdefault(key, cls(n))
    return geo


def Euclidean(n: int) -> ManifoldId:
    return ManifoldId(Kind.EUCLIDEAN, n)


def Sphere(n: int) -> ManifoldId:
    """Unit sphere in ``R^n`` (intrinsic dimension ``n - 1``)."""
    return ManifoldId(Kind.SPHERE, n)


def SPD(n: int) -> ManifoldId:
    return ManifoldId(Kind.SPD, n)


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    manifold: ManifoldId
    coords: np.ndarray

    def __post_init__(self):
        geo = self.manifold.geometry
        x = np.asarray(self.coords, dtype=float)
        if x.shape != geo.shape:
            x = x.reshape(geo.shape) if x.size == math.prod(geo.shape) else x
        if x.shape != geo.shape:
            raise InvalidPoint(
                f"{self.manifold} expects coordinates of shape {geo.shape}, got {x.shape}"
            )
        object.__setattr__(self, "coords", _frozen(geo.check_point(x)))

    def __repr__(self):
        return f"ManifoldPoint({self.manifold}, {self.coords.tolist()!r})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: ManifoldPoint
    vec: np.ndarray

    def __post_init__(self):
        geo = self.base.manifold.geometry
        v = np.asarray(self.vec, dtype=float)
        if v.shape != geo.shape:
            if v.size != math.prod(geo.shape):
                raise InvalidPoint(
                    f"tangent vector at {self.base.manifold} needs shape {geo.shape}, got {v.shape}"
                )
            v = v.reshape(geo.shape)
        object.__setattr__(self, "vec", _frozen(geo.project_tangent(self.base.coords, v)))

    def __add__(self, other: "TangentVector") -> "TangentVector":
        _require_same_base(self.base, other.base)
        return TangentVector(self.base, self.vec + other.vec)

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        _require_same_base(self.base, other.base)
        return TangentVector(self.base, self.vec - other.vec)

    def __neg__(self) -> "TangentVector":
        return TangentVector(self.base, -self.vec)

    def __mul__(self, scalar: float) -> "TangentVector":
        return TangentVector(self.base, float(scalar) * self.vec)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "TangentVector":
        return TangentVector(self.base, self.vec / float(scalar))

    def __repr__(self):
        return f"TangentVector(at={self.base.coords.tolist()!r}, vec={self.vec.tolist()!r})"


def _tangent(base: ManifoldPoint, vec: np.ndarray) -> TangentVector:
    # for vectors produced by the geometry itself; skips shape checks
    t = object.__new__(TangentVector)
    object.__setattr__(t, "base", base)
    object.__setattr__(t, "vec", _frozen(base.manifold.geometry.project_tangent(base.coords, vec)))
    return t


def same_point(p: ManifoldPoint, q: ManifoldPoint, tol: float = C.BASE_POINT_TOL) -> bool:
    if p is q:
        return True
    if p.manifold != q.manifold:
        return False
    scale = max(1.0, float(np.max(np.abs(p.coords))))
    return float(np.max(np.abs(p.coords - q.coords))) <= tol * scale


def _require_same_base(p: ManifoldPoint, q: ManifoldPoint) -> None:
    if not same_point(p, q):
        raise BasePointMismatch(
            f"tangent vectors live at different base points: {p!r} vs {q!r}"
        )


def _require_same_manifold(p: ManifoldPoint, q: ManifoldPoint) -> None:
    if p.manifold != q.manifold:
        raise InvalidPoint(f"points on different manifolds: {p.manifold} vs {q.manifold}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def zero_vector(p: ManifoldPoint) -> TangentVector:
    return _tangent(p, np.zeros(p.manifold.shape))


def inner(u: TangentVector, v: TangentVector) -> float:
    _require_same_base(u.base, v.base)
    return u.base.manifold.geometry.inner(u.base.coords, u.vec, v.vec)


def norm(v: TangentVector) -> float:
    return math.sqrt(max(0.0, inner(v, v)))


def exp_map(p: ManifoldPoint, v: TangentVector) -> ManifoldPoint:
    _require_same_base(p, v.base)
    return ManifoldPoint(p.manifold, p.manifold.geometry.exp(p.coords, v.vec))


def log_map(p: ManifoldPoint, q: ManifoldPoint) -> TangentVector:
    _require_same_manifold(p, q)
    return _tangent(p, p.manifold.geometry.log(p.coords, q.coords))


def distance(p: ManifoldPoint, q: ManifoldPoint) -> float:
    _require_same_manifold(p, q)
    if p is q:
        return 0.0
    return p.manifold.geometry.dist(p.coords, q.coords)


def parallel_transport(p: ManifoldPoint, q: ManifoldPoint, v: TangentVector) -> TangentVector:
    """Transport ``v`` from ``T_pM`` to ``T_qM`` along the minimal geodesic."""
    _require_same_base(p, v.base)
    _require_same_manifold(p, q)
    return _tangent(q, p.manifold.geometry.transport(p.coords, q.coords, v.vec))


def geodesic_point(p: ManifoldPoint, q: ManifoldPoint, t: float) -> ManifoldPoint:
    """``gamma(t)`` on the minimal geodesic with ``gamma(0) = p``, ``gamma(1) = q``."""
    geo = p.manifold.geometry
    return ManifoldPoint(p.manifold, geo.exp(p.coords, t * geo.log(p.coords, q.coords)))


def basis_array(p: ManifoldPoint) -> np.ndarray:
    """Orthonormal basis of ``T_pM`` stacked along the first axis."""
    return p.manifold.geometry.basis(p.coords)


def orthonormal_basis(p: ManifoldPoint) -> list[TangentVector]:
    return [_tangent(p, b) for b in basis_array(p)]


def coordinates(v: TangentVector, basis: np.ndarray) -> np.ndarray:
    """Coefficients of ``v`` in an orthonormal basis of its tangent space."""
    return v.base.manifold.geometry.coords(v.base.coords, basis, v.vec)


def from_coordinates(p: ManifoldPoint, basis: np.ndarray, c: Sequence[float]) -> TangentVector:
    return _tangent(p, np.tensordot(np.asarray(c, dtype=float), basis, axes=1))


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------

def random_point(manifold: ManifoldId, rng: np.random.Generator, scale: float = 1.0) -> ManifoldPoint:
    if manifold.kind is Kind.EUCLIDEAN:
        return ManifoldPoint(manifold, scale * rng.standard_normal(manifold.n))
    if manifold.kind is Kind.SPHERE:
        return ManifoldPoint(manifold, rng.standard_normal(manifold.n))
    s = symmetrize(rng.standard_normal((manifold.n, manifold.n)))
    return ManifoldPoint(manifold, sym_expm(scale * s))


def random_tangent(p: ManifoldPoint, rng: np.random.Generator, length: float | None = None) -> TangentVector:
    """Random tangent vector; with ``length`` set, exactly that Riemannian norm."""
    basis = basis_array(p)
    c = rng.standard_normal(len(basis))
    if length is not None:
        c *= length / np.linalg.norm(c)
    return from_coordinates(p, basis, c)


def random_point_in_ball(center: ManifoldPoint, radius: float, rng: np.random.Generator) -> ManifoldPoint:
    """Uniform-in-radius-volume draw from the geodesic ball ``B(center, radius)``."""
    m = center.manifold.dim
    r = radius * rng.uniform() ** (1.0 / m)
    return exp_map(center, random_tangent(center, rng, length=r))
