import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemsecant import manifolds as M
from riemsecant.errors import BasePointMismatch, CutLocus, InvalidPoint

from conftest import MANIFOLDS, random_pair

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def tv(p, vec):
    return M.TangentVector(p, np.asarray(vec, dtype=float))


# --- construction ---------------------------------------------------------

def test_intrinsic_dimensions():
    assert M.Euclidean(4).dim == 4
    assert M.Sphere(3).dim == 2
    assert M.SPD(3).dim == 6


def test_sphere_needs_n_at_least_2():
    with pytest.raises(ValueError):
        M.Sphere(1)


def test_sphere_point_is_renormalized():
    p = M.Sphere(3).point([3.0, 0.0, 4.0])
    assert abs(np.linalg.norm(p.coords) - 1.0) <= 1e-12
    np.testing.assert_allclose(p.coords, [0.6, 0.0, 0.8])


def test_sphere_tangent_is_projected():
    p = M.Sphere(3).point([1.0, 0.0, 0.0])
    v = tv(p, [0.5, 1.0, 2.0])
    assert abs(np.dot(p.coords, v.vec)) <= 1e-10


def test_spd_rejects_indefinite_and_asymmetric():
    with pytest.raises(InvalidPoint):
        M.SPD(2).point([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(InvalidPoint):
        M.SPD(2).point([[1.0, 0.5], [0.0, 1.0]])


def test_points_are_immutable():
    p = M.Euclidean(2).point([1.0, 2.0])
    with pytest.raises(ValueError):
        p.coords[0] = 3.0


# --- inner ----------------------------------------------------------------

def test_inner_examples():
    e = M.Euclidean(2).point([0.0, 0.0])
    assert M.inner(tv(e, [1, 0]), tv(e, [0, 1])) == 0.0

    s = M.Sphere(3).point([1.0, 0.0, 0.0])
    assert M.inner(tv(s, [0, 2, 0]), tv(s, [0, 2, 0])) == pytest.approx(4.0)

    # trace(I U I V) with U = V = I expands to 1 + 1
    P = M.SPD(2).point(np.eye(2))
    assert M.inner(tv(P, np.eye(2)), tv(P, np.eye(2))) == pytest.approx(2.0)


def test_inner_rejects_different_bases():
    m = M.Euclidean(2)
    with pytest.raises(BasePointMismatch):
        M.inner(tv(m.point([0, 0]), [1, 0]), tv(m.point([1, 0]), [1, 0]))


def test_spd_inner_is_affine_invariant(rng):
    m = M.SPD(3)
    P = M.random_point(m, rng)
    u, v = M.random_tangent(P, rng), M.random_tangent(P, rng)
    G = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    GP = m.point(G @ P.coords @ G.T)
    gu, gv = tv(GP, G @ u.vec @ G.T), tv(GP, G @ v.vec @ G.T)
    assert M.inner(gu, gv) == pytest.approx(M.inner(u, v), rel=1e-10)


# --- exp / log / distance -------------------------------------------------

def test_exp_examples():
    e = M.Euclidean(2)
    o = e.point([0, 0])
    np.testing.assert_allclose(M.exp_map(o, tv(o, [1, 2])).coords, [1, 2])

    s = M.Sphere(3)
    p = s.point([1, 0, 0])
    q = M.exp_map(p, tv(p, [0, math.pi / 2, 0]))
    np.testing.assert_allclose(q.coords, [0, 1, 0], atol=1e-15)
    # great-circle arc length oracle: angle subtended equals |v|
    assert math.acos(np.clip(np.dot(p.coords, q.coords), -1, 1)) == pytest.approx(math.pi / 2)

    P = M.SPD(2).point(np.eye(2))
    Q = M.exp_map(P, tv(P, np.diag([math.log(2.0), 0.0])))
    np.testing.assert_allclose(Q.coords, np.diag([2.0, 1.0]), atol=1e-14)


@pytest.mark.parametrize("manifold", MANIFOLDS, ids=str)
def test_exp_of_zero_is_identity(manifold, rng):
    p = M.random_point(manifold, rng)
    np.testing.assert_allclose(M.exp_map(p, M.zero_vector(p)).coords, p.coords, rtol=0, atol=1e-14)


def test_log_examples():
    e = M.Euclidean(2)
    np.testing.assert_allclose(M.log_map(e.point([0, 0]), e.point([1, 2])).vec, [1, 2])

    s = M.Sphere(3)
    v = M.log_map(s.point([1, 0, 0]), s.point([0, 1, 0]))
    np.testing.assert_allclose(v.vec, [0, math.pi / 2, 0], atol=1e-15)

    P = M.SPD(2).point(np.eye(2))
    V = M.log_map(P, M.SPD(2).point(np.diag([4.0, 1.0])))
    np.testing.assert_allclose(V.vec, np.diag([math.log(4.0), 0.0]), atol=1e-15)


def test_log_at_antipode_is_cut_locus():
    s = M.Sphere(3)
    with pytest.raises(CutLocus):
        M.log_map(s.point([1, 0, 0]), s.point([-1, 0, 0]))


def test_log_of_same_point_is_zero():
    s = M.Sphere(3)
    p = s.point([0.3, 0.4, 0.5])
    assert np.all(M.log_map(p, p).vec == 0)


def test_distance_examples():
    assert M.distance(M.Euclidean(1).point([1.0]), M.Euclidean(1).point([2.0])) == 1.0
    s = M.Sphere(3)
    assert M.distance(s.point([1, 0, 0]), s.point([0, 1, 0])) == pytest.approx(math.pi / 2)
    # |ln(e^2)|
    assert M.distance(M.SPD(1).point([[1.0]]), M.SPD(1).point([[math.e**2]])) == pytest.approx(2.0)


@pytest.mark.parametrize("manifold", MANIFOLDS, ids=str)
def test_distance_symmetric_and_zero_on_diagonal(manifold, rng):
    for _ in range(20):
        p, q = random_pair(manifold, rng, max_dist=2.0)
        assert M.distance(p, q) == pytest.approx(M.distance(q, p), rel=1e-10)
        assert M.distance(p, p) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=seeds, which=st.sampled_from(range(3)))
def test_exp_log_inversion(seed, which):
    rng = np.random.default_rng(seed)
    manifold = MANIFOLDS[which]
    p, q = M.random_point(manifold, rng), M.random_point(manifold, rng)
    if manifold.kind is M.Kind.SPHERE and M.distance(p, q) > math.pi - 1e-3:
        return
    v = M.log_map(p, q)
    assert M.distance(M.exp_map(p, v), q) <= 1e-9
    assert M.norm(v) == pytest.approx(M.distance(p, q), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, which=st.sampled_from(range(3)), t=st.floats(0.0, 1.0))
def test_geodesic_speed(seed, which, t):
    rng = np.random.default_rng(seed)
    manifold = MANIFOLDS[which]
    p = M.random_point(manifold, rng)
    v = M.random_tangent(p, rng, length=rng.uniform(0.0, 2.5))
    assert M.distance(p, M.exp_map(p, t * v)) == pytest.approx(t * M.norm(v), abs=1e-9)


# --- parallel transport ----------------------------------------------------

def test_euclidean_transport_is_identity(rng):
    e = M.Euclidean(3)
    p, q = M.random_point(e, rng), M.random_point(e, rng)
    v = M.random_tangent(p, rng)
    np.testing.assert_array_equal(M.parallel_transport(p, q, v).vec, v.vec)


@pytest.mark.parametrize("manifold", MANIFOLDS, ids=str)
def test_transport_maps_velocity_to_velocity(manifold, rng):
    # P_{a->b}(gamma'(a)) = gamma'(b); at q the velocity is -log_q(p)
    for _ in range(10):
        p, q = random_pair(manifold, rng)
        moved = M.parallel_transport(p, q, M.log_map(p, q))
        np.testing.assert_allclose(moved.vec, -M.log_map(q, p).vec, atol=1e-10)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, which=st.sampled_from(range(3)))
def test_transport_isometry_and_inverse(seed, which):
    rng = np.random.default_rng(seed)
    p, q = random_pair(MANIFOLDS[which], rng, max_dist=2.0)
    u, v = M.random_tangent(p, rng), M.random_tangent(p, rng)
    pu, pv = M.parallel_transport(p, q, u), M.parallel_transport(p, q, v)
    assert abs(M.inner(pu, pv) - M.inner(u, v)) <= 1e-9 * max(1.0, M.norm(u) * M.norm(v))
    back = M.parallel_transport(q, p, pu)
    assert M.norm(back - u) <= 1e-9 * max(1.0, M.norm(u))


@pytest.mark.parametrize("manifold", MANIFOLDS, ids=str)
def test_transport_composes_along_one_geodesic(manifold, rng):
    for _ in range(20):
        p, r = random_pair(manifold, rng, max_dist=2.0)
        q = M.exp_map(p, rng.uniform(0.05, 0.95) * M.log_map(p, r))
        v = M.random_tangent(p, rng)
        direct = M.parallel_transport(p, r, v)
        two_step = M.parallel_transport(q, r, M.parallel_transport(p, q, v))
        assert M.norm(direct - two_step) <= 1e-8


# --- orthonormal bases -------------------------------------------------------

def test_basis_examples():
    e = M.orthonormal_basis(M.Euclidean(2).point([5.0, -1.0]))
    np.testing.assert_array_equal([b.vec for b in e], np.eye(2))

    p = M.Sphere(3).point([0, 0, 1])
    vecs = np.array([b.vec for b in M.orthonormal_basis(p)])
    # Gram-Schmidt of the x and y axes, which are already tangent at the pole
    np.testing.assert_allclose(vecs, [[1, 0, 0], [0, 1, 0]])

    P = M.SPD(1).point([[4.0]])
    (b,) = M.orthonormal_basis(P)
    np.testing.assert_allclose(b.vec, [[4.0]])
    assert M.inner(b, b) == pytest.approx(1.0)


@pytest.mark.parametrize("manifold", MANIFOLDS + [M.SPD(3), M.Sphere(5)], ids=str)
def test_basis_is_orthonormal_and_deterministic(manifold, rng):
    for _ in range(10):
        p = M.random_point(manifold, rng)
        basis = M.orthonormal_basis(p)
        assert len(basis) == manifold.dim
        gram = np.array([[M.inner(a, b) for b in basis] for a in basis])
        np.testing.assert_allclose(gram, np.eye(manifold.dim), atol=1e-10)
        again = M.orthonormal_basis(p)
        for a, b in zip(basis, again):
            np.testing.assert_array_equal(a.vec, b.vec)


@pytest.mark.parametrize("manifold", MANIFOLDS, ids=str)
def test_coordinates_round_trip(manifold, rng):
    p = M.random_point(manifold, rng)
    basis = M.basis_array(p)
    v = M.random_tangent(p, rng)
    c = M.coordinates(v, basis)
    np.testing.assert_allclose(M.from_coordinates(p, basis, c).vec, v.vec, atol=1e-12)
    assert np.linalg.norm(c) == pytest.approx(M.norm(v), rel=1e-12)


def test_random_point_in_ball_stays_inside(rng):
    for manifold in MANIFOLDS:
        c = M.random_point(manifold, rng)
        for _ in range(20):
            assert M.distance(c, M.random_point_in_ball(c, 0.4, rng)) <= 0.4 + 1e-12
