import math

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.spatial import ConvexHull

from conftest import random_hpolytope
from revolve_john.bodies import ball_outer, cross_polytope, cube, simplex_john
from revolve_john.constructions import build_appendix_a, polar_vertices_appendix_a
from revolve_john.errors import DimensionError, PreconditionError, UnboundedError
from revolve_john.geometry import (
    ContactPair,
    FEllipsoid,
    HPolytope,
    Subspace,
    VPolytope,
    circumradius,
    diadic,
    enumerate_vertices,
    inradius_chebyshev,
    polar_vpolytope,
    project,
    section,
    support_ellipsoid,
    unit_ball_volume,
    volume,
)


# project / diadic


def test_project_examples():
    assert np.allclose(project(Subspace.coordinate(2, [0]), [3, 4]), [3, 0])
    assert np.allclose(project(Subspace.zero(3), [1, 2, 3]), 0)
    assert np.allclose(project(Subspace.line([1, 1]), [1, 0]), [0.5, 0.5], atol=1e-15)


def test_project_dimension_mismatch():
    with pytest.raises(DimensionError):
        project(Subspace.coordinate(2, [0]), [1, 2, 3])


def test_project_idempotent_selfadjoint(rng):
    for d in (2, 3, 5):
        for s in range(d + 1):
            F = Subspace.from_rows(rng.normal(size=(s, d)), ambient_dim=d)
            x, y = rng.normal(size=d), rng.normal(size=d)
            px = project(F, x)
            assert np.allclose(project(F, px), px, atol=1e-12)
            assert abs(px @ y - x @ project(F, y)) <= 1e-12


def test_subspace_orthonormal_and_complement(rng):
    F = Subspace.from_rows([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
    assert np.allclose(F.basis @ F.basis.T, np.eye(2), atol=1e-12)
    G = F.complement()
    assert G.dim == 1
    assert np.allclose(F.basis @ G.basis.T, 0, atol=1e-12)
    assert np.allclose(F.projector() + G.projector(), np.eye(3), atol=1e-12)
    # spanning rows are recorded as given
    assert np.array_equal(F.spanning_rows, [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])


def test_subspace_rejects_non_orthonormal_basis():
    with pytest.raises(PreconditionError):
        Subspace(2, np.array([[1.0, 1.0]]))


def test_diadic_examples():
    assert np.array_equal(diadic([1, 0], [0, 1]), [[0, 1], [0, 0]])
    assert np.array_equal(diadic([1, 0], [1, 0]), [[1, 0], [0, 0]])
    assert np.array_equal(diadic([1, 2], [3, 4]), [[3, 4], [6, 8]])
    with pytest.raises(DimensionError):
        diadic([1, 2], [1, 2, 3])


# support function


def test_support_ellipsoid_examples():
    assert support_ellipsoid(FEllipsoid.ball(2), [1, 0]) == pytest.approx(1.0)
    e1 = Subspace.coordinate(2, [0])
    assert support_ellipsoid(FEllipsoid(e1, [0, 0], [[2.0]], 1.0), [1, 0]) == pytest.approx(2.0)
    assert support_ellipsoid(FEllipsoid(e1, [1, 0], [[2.0]], 1.0), [1, 0]) == pytest.approx(3.0)


def test_support_dominates_samples(rng):
    F = Subspace.line([1.0, 2.0, -1.0])
    E = FEllipsoid(F, [0.3, -0.2, 1.0], [[2.5]], 0.7)
    A = E.operator()
    u = rng.normal(size=(1000, 3))
    u *= (rng.uniform(size=(1000, 1)) ** (1 / 3)) / np.linalg.norm(u, axis=1, keepdims=True)
    X = u @ A.T + E.center
    for _ in range(20):
        p = rng.normal(size=3)
        assert np.all(X @ p <= support_ellipsoid(E, p) + 1e-12)


def test_fellipsoid_invariants():
    F = Subspace.coordinate(2, [0])
    with pytest.raises(PreconditionError):
        FEllipsoid(F, [0, 0], [[-1.0]], 1.0)
    with pytest.raises(PreconditionError):
        FEllipsoid(F, [0, 0], [[1.0]], 0.0)
    E = FEllipsoid(Subspace.full(2), [0, 0], np.diag([2.0, 1.0]), 0.3)
    assert E.mu == 1.0  # no complement, mu is irrelevant


def test_contact_pair_check():
    ContactPair([1.0, 0.0], [1.0, 5.0]).check()
    with pytest.raises(PreconditionError):
        ContactPair([2.0, 0.0], [1.0, 0.0]).check()


# inradius / circumradius


def test_inradius_examples():
    r, c = inradius_chebyshev(cube(2))
    assert r == pytest.approx(1.0, abs=1e-12) and np.allclose(c, 0, atol=1e-12)
    r, c = inradius_chebyshev(simplex_john(2))
    assert r == pytest.approx(1.0, abs=1e-12) and np.allclose(c, 0, atol=1e-12)
    inst = build_appendix_a(2, 0.25, 0.8)
    r, _ = inradius_chebyshev(polar_vpolytope(VPolytope(inst.vectors)))
    assert r == pytest.approx(1.25, abs=1e-9)


def test_inradius_rejects_unbounded():
    with pytest.raises(UnboundedError):
        inradius_chebyshev(HPolytope(np.array([[1.0, 0.0], [0.0, 1.0]]), np.ones(2)))


def test_inradius_ball_inside(rng):
    P = random_hpolytope(rng, 3)
    r, c = inradius_chebyshev(P)
    assert np.all(P.normals @ c + r * np.linalg.norm(P.normals, axis=1) <= P.offsets + 1e-9)


def test_circumradius_examples():
    r, c = circumradius(VPolytope(np.array([[1, 0], [-1, 0], [0, 1], [0, -1.0]])))
    assert r == pytest.approx(1.0) and np.allclose(c, 0, atol=1e-12)
    r, c = circumradius(VPolytope(np.array([[0.3, 0.7]])))
    assert r == 0.0 and np.allclose(c, [0.3, 0.7])
    r, c = circumradius(VPolytope(np.array([[0, 0], [2, 0], [0, 2.0]])))
    assert r == pytest.approx(math.sqrt(2), abs=1e-9) and np.allclose(c, [1, 1], atol=1e-9)


def test_circumradius_matches_optimizer(rng):
    for d in (2, 3, 4):
        V = rng.normal(size=(15, d))
        r, c = circumradius(VPolytope(V))
        res = minimize(lambda x: np.max(np.linalg.norm(V - x, axis=1)), V.mean(axis=0), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-12, "maxiter": 20000})
        assert r <= res.fun + 1e-9
        assert np.max(np.linalg.norm(V - c, axis=1)) <= r + 1e-9


def test_inradius_below_circumradius(rng):
    for d in (2, 3):
        for _ in range(5):
            P = random_hpolytope(rng, d)
            r, _ = inradius_chebyshev(P)
            R, _ = circumradius(VPolytope(P.vertices()))
            assert r <= R + 1e-12


# polar


def test_polar_examples():
    P = polar_vpolytope(VPolytope(np.array([[1, 0], [-1, 0], [0, 1], [0, -1.0]])))
    assert len(P) == 4
    V = enumerate_vertices(P)
    assert {tuple(np.round(v, 12)) for v in V} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    Q = polar_vpolytope(VPolytope(np.array([[1, 1], [1, -1], [-1, 1], [-1, -1.0]])))
    assert {tuple(np.round(v, 12)) for v in enumerate_vertices(Q)} == {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_polar_appendix_simplex_vertices():
    inst = build_appendix_a(2, 0.25, 0.8)
    X, _ = polar_vertices_appendix_a(inst)
    V = enumerate_vertices(polar_vpolytope(VPolytope(inst.vectors)))
    assert len(V) == 3
    for x in X:
        assert np.min(np.linalg.norm(V - x, axis=1)) <= 1e-9


def test_polar_rejects_origin_outside():
    with pytest.raises(PreconditionError):
        polar_vpolytope(VPolytope(np.array([[1, 0], [2, 1], [2, -1.0]])))


def _hausdorff(A, B):
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return max(D.min(axis=1).max(), D.min(axis=0).max())


def test_double_polar_returns_hull(rng):
    for d in (2, 3):
        pts = rng.normal(size=(10, d))
        pts -= pts.mean(axis=0)
        hull = pts[ConvexHull(pts).vertices]
        P1 = polar_vpolytope(VPolytope(hull))
        V1 = enumerate_vertices(P1)
        back = enumerate_vertices(polar_vpolytope(VPolytope(V1)))
        assert _hausdorff(back, hull) <= 1e-8


# sections


def test_section_examples():
    seg = section(cube(3), Subspace.coordinate(3, [0]))
    assert seg.dim == 1
    lo, hi = sorted(enumerate_vertices(seg)[:, 0])
    assert (lo, hi) == pytest.approx((-1, 1))
    seg = section(cube(2), Subspace.line([1, 1]))
    lo, hi = sorted(enumerate_vertices(seg)[:, 0])
    assert (lo, hi) == pytest.approx((-math.sqrt(2), math.sqrt(2)))


def test_section_of_ball_approximation_is_polygon():
    P = ball_outer(3, 200)
    sec = section(P, Subspace.from_rows([[1, 0, 0], [0, 1, 1.0]]))
    V = enumerate_vertices(sec)
    r = np.linalg.norm(V, axis=1)
    assert len(V) >= 10
    assert np.all(r >= 1 - 1e-9) and np.all(r <= 1.2)


def test_section_empty_rejected():
    F = Subspace.coordinate(2, [0])
    with pytest.raises(Exception):
        section(cube(2), F, point=[0.0, 5.0])


# volume


def test_volume_examples():
    assert volume(cube(3)) == pytest.approx(8.0)
    assert volume(cross_polytope(3)) == pytest.approx(4.0 / 3.0)
    assert volume(simplex_john(2)) == pytest.approx(3 * math.sqrt(3))


def test_volume_monte_carlo_agrees(rng):
    for _ in range(3):
        P = random_hpolytope(rng, 3)
        exact = volume(P)
        lo, hi = P.vertices().min(axis=0), P.vertices().max(axis=0)
        n = 200_000
        X = rng.uniform(lo, hi, size=(n, 3))
        inside = np.all(X @ P.normals.T <= P.offsets, axis=1)
        box = np.prod(hi - lo)
        est = box * inside.mean()
        se = box * inside.std() / math.sqrt(n)
        assert abs(est - exact) <= 3 * se + 1e-12


def test_volume_higher_dimensions():
    v, se = volume(cube(4), return_stderr=True)
    assert abs(v - 16.0) <= 4 * se
    with pytest.raises(DimensionError):
        volume(cube(7))


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
