"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one PASS/FAIL line (with wall time) that is printed in
the pytest terminal summary.  Run ``pytest tests/test_acceptance.py -v``.
"""
import contextlib
import itertools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from revolve_john.bodies import cube, cube_vertices, random_polygon, regular_triangle, simplex_john, simplex_lowner
from revolve_john.bounds import (
    bad_ellipsoid_instance,
    check_ellipsoid_properties,
    check_inclusion,
    check_lowner_properties,
    check_right_cone_axis_containment,
    lowner_equality_axis,
)
from revolve_john.certificates import ellipsoid_certificate, lowner_normalize
from revolve_john.constructions import (
    build_appendix_a,
    inradius_closed_form,
    lifted_configuration,
    majorization_bound,
    majorization_brute_force,
    majorization_log_values,
    polar_vertices_appendix_a,
    random_majorization_points,
)
from revolve_john.geometry import (
    FEllipsoid,
    Subspace,
    VPolytope,
    enumerate_vertices,
    inradius_chebyshev,
    polar_vpolytope,
    regular_simplex_vertices,
    unit_ball_volume,
)
from revolve_john.solver import (
    SolveConfig,
    ellipse_fixed_axis_problem,
    local_perturbation_test,
    oracle_grid_search,
    solve_ellipsoid_fixed_axis,
    solve_general_fixed_axis,
    solve_lowner_fixed_axis,
)


@contextlib.contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        ACCEPTANCE[number] = f"criterion {number:2d} {status}  {title}  ({time.perf_counter() - t0:.2f} s)"
        print(ACCEPTANCE[number])


def reference_axes(d):
    return [Subspace.coordinate(d, [i]) for i in range(d)] + [Subspace.line(np.ones(d))]


def reference_instances():
    """(label, L, F, symmetric) for the cube and simplex instances of criteria 1, 2 and 7."""
    out = []
    for d in (2, 3):
        for F in reference_axes(d):
            out.append((f"cube d={d}", cube(d), F, True))
            out.append((f"simplex d={d}", simplex_john(d), F, False))
    return out


def random_instances():
    return [(f"polygon seed={k}", random_polygon(k), Subspace.coordinate(2, [0]), False) for k in range(10)]


def _reproduces_ball(L, F):
    d = L.dim
    t0 = time.perf_counter()
    E = solve_ellipsoid_fixed_axis(L, F)
    cert = ellipsoid_certificate(E, L)
    elapsed = time.perf_counter() - t0
    rel = abs(E.volume() / unit_ball_volume(d) - 1.0)
    assert rel <= 1e-6, f"relative volume error {rel:.2e}"
    assert np.allclose(E.operator(), np.eye(d), atol=1e-6) and np.allclose(E.center, 0, atol=1e-6)
    worst = max(cert.residuals().values())
    assert worst <= 1e-7, f"certificate residual {worst:.2e}"
    assert elapsed < 1.0, f"runtime {elapsed:.2f} s"


def test_criterion_01_cube_reproduction():
    with criterion(1, "cube: John F-ellipsoid is B^d, certificate <= 1e-7, < 1 s each"):
        for d in (2, 3):
            for F in reference_axes(d):
                _reproduces_ball(cube(d), F)


def test_criterion_02_simplex_reproduction():
    with criterion(2, "simplex: John F-ellipsoid is B^d; lambda* = d (vertex axis), sqrt(d) (cube diagonal)"):
        for d in (2, 3):
            for F in reference_axes(d):
                _reproduces_ball(simplex_john(d), F)
            vertex_axis = Subspace.line(regular_simplex_vertices(d)[0])
            E = solve_ellipsoid_fixed_axis(simplex_john(d), vertex_axis)
            assert abs(check_inclusion(simplex_john(d), E).lhs - d) <= 1e-6
            diag = Subspace.line(np.ones(d))
            E = solve_ellipsoid_fixed_axis(cube(d), diag)
            assert abs(check_inclusion(cube(d), E, symmetric=True).lhs - math.sqrt(d)) <= 1e-6


def test_criterion_03_appendix_closed_forms():
    with criterion(3, "dilated simplex: LP inradius = R(t) (1e-8), polar vertices (1e-9), < 5 s"):
        t0 = time.perf_counter()
        for n, c, t in itertools.product([2, 3, 4], [0.8, 0.9], [0.6, 0.8, 0.95]):
            inst = build_appendix_a(n, c / n, t, require_ball=False)
            P = polar_vpolytope(VPolytope(inst.vectors))
            r, _ = inradius_chebyshev(P)
            R = (1.0 / (n * inst.gamma)) / (1.0 + math.sqrt(1.0 - t * t))
            assert abs(inradius_closed_form(inst) - R) <= 1e-14
            assert abs(r - R) <= 1e-8, (n, c, t, r, R)
            X, _ = polar_vertices_appendix_a(inst)
            V = enumerate_vertices(P)
            assert len(V) == len(X)
            D = np.linalg.norm(V[:, None, :] - X[None, :, :], axis=2)
            assert max(D.min(axis=0).max(), D.min(axis=1).max()) <= 1e-9
        assert time.perf_counter() - t0 < 5.0


def test_criterion_04_lifted_configuration():
    with criterion(4, "lifted configuration: polar inradius >= (1 - eps) d/(d-s), moments 1e-10"):
        for d, s, m, eps in [(4, 2, 4, 0.05), (6, 3, 5, 0.1)]:
            cfg = lifted_configuration(d, s, m, eps)
            b, w = cfg.vectors, cfg.weights
            assert abs(w.sum() - 1.0) <= 1e-10
            assert np.linalg.norm(w @ b) <= 1e-10
            assert abs(w @ np.sum(b * b, axis=1) - (d - s) / d) <= 1e-10
            r, _ = inradius_chebyshev(polar_vpolytope(VPolytope(b)))
            assert r >= (1 - eps) * d / (d - s)


def test_criterion_05_majorization():
    """Stated bound on W over m = d + 2 points.

    Expected to fail: the bound is exceeded for every 1 <= s < d (see the
    decisions ledger for the counterexample and the independent LP check).
    """
    with criterion(5, "majorization: max W <= bound + 1e-10, attained at x~; 10^4 random samples"):
        rng = np.random.default_rng(2024)
        failures = []
        for d in range(2, 7):
            for s in range(1, d + 1):
                m = d + 2
                res = majorization_brute_force(d, s, m)
                if not res.bound_holds:
                    failures.append(f"(d={d}, s={s}) extreme points: {res.best:.6f} > {res.bound:.6f}")
                if not res.majorizer_attains:
                    failures.append(f"(d={d}, s={s}) majorizer value {res.majorizer_value:.12f} != {res.bound:.12f}")
                x, delta = random_majorization_points(d, s, m, 10_000, rng)
                top = math.exp(float(np.max(majorization_log_values(x, delta))))
                if top > majorization_bound(d, s) + 1e-10:
                    failures.append(f"(d={d}, s={s}) random sample: {top:.6f} > {majorization_bound(d, s):.6f}")
        assert not failures, "bound exceeded:\n" + "\n".join(failures)


def test_criterion_06_oracle_equivalence():
    with criterion(6, "10 random polygons, e1 axis: solver vs grid oracle <= 1e-3, < 30 s"):
        t0 = time.perf_counter()
        for k in range(10):
            L = random_polygon(k)
            F = Subspace.coordinate(2, [0])
            E = solve_ellipsoid_fixed_axis(L, F)
            o = oracle_grid_search(ellipse_fixed_axis_problem(L, F), resolution=12)
            vol_oracle = math.pi * math.exp(o.value)
            assert abs(E.volume() - vol_oracle) / vol_oracle <= 1e-3, k
        assert time.perf_counter() - t0 < 30.0


def test_criterion_07_property_suite():
    with criterion(7, "bound reports pass; random-init uniqueness 1e-6; no perturbation gain > 1e-9 in 10^3 trials"):
        for label, L, F, symmetric in reference_instances() + random_instances():
            E = solve_ellipsoid_fixed_axis(L, F)
            for rep in check_ellipsoid_properties(L, E, symmetric):
                assert rep.passed, (label, rep)
            Er = solve_ellipsoid_fixed_axis(L, F, SolveConfig(init="random", seed=17))
            assert np.abs(Er.shape_on_F - E.shape_on_F).max() <= 1e-6, label
            assert abs(Er.mu - E.mu) <= 1e-6, label
            probe = local_perturbation_test(None, L, F, E, n_trials=1000)
            assert probe.max_improvement <= 1e-9, (label, probe.max_improvement)


def test_criterion_08_lowner_suite():
    with criterion(8, "Löwner: cube gives radius sqrt(d) ball; all reports pass; simplex equality sqrt(s/d)"):
        for d in (2, 3):
            K = cube_vertices(d)
            for F in reference_axes(d):
                E = solve_lowner_fixed_axis(K, F)
                assert np.allclose(E.operator(), math.sqrt(d) * np.eye(d), atol=1e-6)
                assert np.allclose(E.center, 0, atol=1e-6)
                for rep in check_lowner_properties(lowner_normalize(K, E), F, symmetric=True):
                    assert rep.passed, rep
        for d, s in [(2, 2), (3, 1)]:
            K, F = simplex_lowner(d), lowner_equality_axis(d, s)
            E = solve_lowner_fixed_axis(K, F)
            assert np.allclose(E.operator(), np.eye(d), atol=1e-6)
            reps = {r.name: r for r in check_lowner_properties(lowner_normalize(K, E), F)}
            assert all(r.passed for r in reps.values())
            assert abs(reps["outer-volume"].lhs - math.sqrt(s / d)) <= 1e-6


@pytest.mark.slow
def test_criterion_09_bad_ellipsoid():
    with criterion(9, "ellipsoid with semi-axes 4, 16, 64 and s = 1: ratio <= 1/4, non-containment witness"):
        res = bad_ellipsoid_instance(3, 1, 4.0)
        assert res.volume_ratio.rhs == 0.25 and res.volume_ratio.passed
        assert res.witness_found and res.witness_length >= res.witness_bound


def test_criterion_10_isosceles_sharpness():
    with criterion(10, "square with diagonal axis: containment factor 2 within 1e-6"):
        f = np.array([1.0, 1.0]) / math.sqrt(2.0)
        T = regular_triangle(f)
        P = solve_general_fixed_axis(T, cube(2), Subspace.line(f))
        rep = check_right_cone_axis_containment(cube(2), f, P.image(T))
        assert abs(rep.lhs - 2.0) <= 1e-6
