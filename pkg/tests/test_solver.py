import math

import numpy as np
import pytest

from revolve_john.bodies import (
    ball_outer,
    box,
    cube,
    cube_vertices,
    ellipsoid_inner,
    random_polygon,
    regular_triangle,
    simplex_john,
    simplex_john_vertices,
    simplex_lowner,
)
from revolve_john.errors import (
    DimensionError,
    InfeasibleError,
    NonConvergenceError,
    PreconditionError,
    UnboundedError,
)
from revolve_john.geometry import HPolytope, Subspace, VPolytope, hull_to_hpolytope, regular_simplex_vertices
from revolve_john.solver import (
    SolveConfig,
    ellipse_fixed_axis_problem,
    general_fixed_axis_problem,
    local_perturbation_test,
    lowner_fixed_axis_problem,
    oracle_grid_search,
    solve_ellipsoid_any_axis,
    solve_ellipsoid_fixed_axis,
    solve_general_fixed_axis,
    solve_lowner_fixed_axis,
)

SQUARE = cube(2)


def axes(d):
    out = [Subspace.zero(d), Subspace.full(d)]
    out += [Subspace.coordinate(d, [i]) for i in range(d)]
    out.append(Subspace.line(np.ones(d)))
    if d == 3:
        out.append(Subspace.coordinate(3, [0, 1]))
    return out


def assert_feasible(E, L, tol=1e-9):
    h = L.normals @ E.center + np.linalg.norm(L.normals @ E.operator(), axis=1)
    assert np.all(h <= L.offsets + tol * (1 + np.abs(L.offsets)))


# SolveConfig


@pytest.mark.parametrize(
    "kw", [{"tol_opt": 0}, {"tol_feas": -1}, {"max_iter": 0}, {"barrier_mu": 1.0}, {"init": "nope"}]
)
def test_config_rejects_bad_values(kw):
    with pytest.raises(PreconditionError):
        SolveConfig(**kw)


# fixed-axis ellipsoid


@pytest.mark.parametrize("d", [2, 3])
def test_cube_gives_unit_ball(d):
    for F in axes(d):
        E = solve_ellipsoid_fixed_axis(cube(d), F)
        assert abs(E.logdet()) <= 1e-7
        assert np.allclose(E.operator(), np.eye(d), atol=1e-6)
        assert np.allclose(E.center, 0, atol=1e-7)
        assert_feasible(E, cube(d))


def test_polyhedral_ball_gives_ball():
    E = solve_ellipsoid_fixed_axis(ball_outer(2, 64), Subspace.line([1.0, 0.0]))
    assert abs(E.volume() / math.pi - 1.0) <= 0.02


def test_rectangle_against_oracle():
    L, F = box([2.0, 1.0]), Subspace.line([1.0, 0.0])
    E = solve_ellipsoid_fixed_axis(L, F)
    assert E.shape_on_F[0, 0] == pytest.approx(2.0, abs=1e-6)
    assert E.mu == pytest.approx(1.0, abs=1e-6)
    o = oracle_grid_search(ellipse_fixed_axis_problem(L, F), resolution=12)
    assert np.allclose(o.params, [2.0, 1.0, 0.0, 0.0], atol=1e-6)


def test_solver_diagnostics():
    E, diag = solve_ellipsoid_fixed_axis(SQUARE, Subspace.line([1.0, 0.0]), return_diagnostics=True)
    cfg = SolveConfig()
    assert diag.final_t >= 1.0 / cfg.tol_opt
    assert diag.min_slack >= -cfg.tol_feas
    assert set(diag.as_dict()) >= {"newton_steps", "wall_time", "gap_bound"}


def test_scale_covariance(rng):
    L = hull_to_hpolytope(rng.normal(size=(9, 2)) + [0.1, 0.0])
    F = Subspace.line([1.0, 0.3])
    E = solve_ellipsoid_fixed_axis(L, F)
    for c in (0.5, 3.0):
        Ec = solve_ellipsoid_fixed_axis(L.scale(c), F)
        assert np.allclose(Ec.shape_on_F, c * E.shape_on_F, rtol=1e-7, atol=1e-9)
        assert Ec.mu == pytest.approx(c * E.mu, rel=1e-7)
        assert np.allclose(Ec.center, c * E.center, rtol=1e-7, atol=1e-7)


def test_translation_covariance(rng):
    L = hull_to_hpolytope(rng.normal(size=(9, 3)))
    F = Subspace.line([0.2, 1.0, 0.5])
    w = np.array([3.0, -1.0, 0.5])
    E = solve_ellipsoid_fixed_axis(L, F)
    Ew = solve_ellipsoid_fixed_axis(L.translate(w), F)
    assert np.allclose(Ew.shape_on_F, E.shape_on_F, atol=1e-7)
    assert Ew.mu == pytest.approx(E.mu, abs=1e-7)
    assert np.allclose(Ew.center, E.center + w, atol=1e-7)


def test_monotone_under_enlarging(rng):
    L = hull_to_hpolytope(rng.normal(size=(10, 2)))
    F = Subspace.line([1.0, 0.0])
    base = solve_ellipsoid_fixed_axis(L, F).logdet()
    for _ in range(3):
        bigger = HPolytope(L.normals, L.offsets + rng.uniform(0, 0.3, len(L)))
        assert solve_ellipsoid_fixed_axis(bigger, F).logdet() >= base - 1e-9


def test_uniqueness_random_init(rng):
    L = hull_to_hpolytope(rng.normal(size=(10, 3)))
    F = Subspace.line([1.0, 1.0, 0.0])
    a = solve_ellipsoid_fixed_axis(L, F)
    for seed in (1, 2):
        b = solve_ellipsoid_fixed_axis(L, F, SolveConfig(init="random", seed=seed))
        assert np.allclose(a.shape_on_F, b.shape_on_F, atol=1e-6)
        assert abs(a.mu - b.mu) <= 1e-6


def test_errors_fixed_axis():
    with pytest.raises(DimensionError):
        solve_ellipsoid_fixed_axis(SQUARE, Subspace.line([1.0, 0.0, 0.0]))
    flat = HPolytope(np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]]), np.array([1.0, 1, 0, 0]))
    with pytest.raises(InfeasibleError):
        solve_ellipsoid_fixed_axis(flat, Subspace.line([1.0, 0.0]))
    with pytest.raises(UnboundedError):
        solve_ellipsoid_fixed_axis(HPolytope(np.eye(2), np.ones(2)), Subspace.line([1.0, 0.0]))


def test_nonconvergence_reports_best_iterate():
    cfg = SolveConfig(max_iter=1)
    L = hull_to_hpolytope(np.random.default_rng(3).normal(size=(12, 3)))
    with pytest.raises(NonConvergenceError) as info:
        solve_ellipsoid_fixed_axis(L, Subspace.line([1.0, 2.0, 0.0]), cfg)
    assert info.value.best is not None


# general position


def test_general_identity_when_K_equals_L():
    P = solve_general_fixed_axis(cube_vertices(2), SQUARE, Subspace.line([1.0, 0.0]))
    assert np.allclose(P.operator(), np.eye(2), atol=1e-6)
    assert np.allclose(P.translation, 0, atol=1e-7)
    assert P.search_space == "positive-definite F-operators"


def test_triangle_in_square_against_oracle():
    K, F = regular_triangle((0.0, 1.0)), Subspace.line([0.0, 1.0])
    P = solve_general_fixed_axis(K, SQUARE, F)
    o = oracle_grid_search(general_fixed_axis_problem(K, SQUARE, F), resolution=12)
    assert abs(math.exp(P.logdet() - o.value) - 1.0) <= 1e-3
    W = P.apply(K.vertices)
    assert np.all(np.abs(W) <= 1 + 1e-9)


def test_simplex_in_reflected_dilate():
    U = regular_simplex_vertices(2)
    K = simplex_john_vertices(2)
    L = HPolytope(-U, 2.0 * np.ones(3))
    P = solve_general_fixed_axis(K, L, Subspace.full(2))
    assert np.allclose(P.operator(), np.eye(2), atol=1e-6)


def test_general_errors():
    with pytest.raises(PreconditionError):
        solve_general_fixed_axis(VPolytope(np.array([[0.0, 0], [1, 0], [2, 0]])), SQUARE, Subspace.full(2))


def test_perturbation_probe():
    F = Subspace.line([1.0, 0.0])
    P = solve_general_fixed_axis(cube_vertices(2), SQUARE, F)
    rep = local_perturbation_test(cube_vertices(2), SQUARE, F, P, n_trials=300)
    assert rep.max_improvement <= 1e-9 and not rep.improved
    E = solve_ellipsoid_fixed_axis(SQUARE, F)
    shrunk = E.scaled(0.9)
    rep = local_perturbation_test(None, SQUARE, F, shrunk, n_trials=300)
    assert rep.improved


# any axis


def test_any_axis_ellipse_recovers_itself():
    E = solve_ellipsoid_any_axis(ellipsoid_inner([2.0, 1.0], 64), 1)
    assert abs(abs(E.axis.basis[0, 0]) - 1.0) <= 1e-6
    assert abs(E.volume() / (2 * math.pi) - 1.0) <= 0.02


def test_any_axis_cube_3d_coarse_grid():
    E = solve_ellipsoid_any_axis(cube(3), 1, SolveConfig(sweep_step_deg=15.0))
    assert abs(E.logdet()) <= 1e-6


def test_any_axis_trivial_dimensions():
    for s in (0, 2):
        E = solve_ellipsoid_any_axis(SQUARE, s)
        assert abs(E.logdet()) <= 1e-7


def test_any_axis_rejects_d4():
    with pytest.raises(DimensionError):
        solve_ellipsoid_any_axis(cube(4), 1)


# Löwner


@pytest.mark.parametrize("d", [2, 3])
def test_lowner_cube_circumball(d):
    for F in axes(d):
        E = solve_lowner_fixed_axis(cube_vertices(d), F)
        assert np.allclose(E.operator(), math.sqrt(d) * np.eye(d), atol=1e-6)


def test_lowner_rhombus_against_oracle():
    K = VPolytope(np.array([[1.0, 0], [-1, 0], [0, 2], [0, -2]]))
    F = Subspace.line([1.0, 0.0])
    E = solve_lowner_fixed_axis(K, F)
    assert np.allclose(sorted(E.semi_axes()), [1.0, 2.0], atol=1e-6)
    o = oracle_grid_search(lowner_fixed_axis_problem(K, F), resolution=12)
    assert np.allclose(o.params[:2], [1.0, 2.0], atol=1e-5)


def test_lowner_simplex_is_unit_ball():
    E = solve_lowner_fixed_axis(simplex_lowner(2), Subspace.full(2))
    assert np.allclose(E.operator(), np.eye(2), atol=1e-6)
    assert np.allclose(E.center, 0, atol=1e-7)


def test_lowner_degenerate_rejected():
    with pytest.raises((InfeasibleError, PreconditionError)):
        solve_lowner_fixed_axis(VPolytope(np.array([[0.0, 0], [1, 1], [2, 2]])), Subspace.full(2))


# oracle


def test_oracle_cube_gives_ball():
    o = oracle_grid_search(ellipse_fixed_axis_problem(SQUARE, Subspace.line([1.0, 0.0])), resolution=12)
    assert np.allclose(o.params, [1, 1, 0, 0], atol=1e-6)


def test_oracle_random_quadrilateral():
    L = random_polygon(11, k=4)
    F = Subspace.line([1.0, 0.0])
    E = solve_ellipsoid_fixed_axis(L, F)
    o = oracle_grid_search(ellipse_fixed_axis_problem(L, F), resolution=12)
    assert abs(math.exp(E.logdet() - o.value) - 1.0) <= 1e-3


def test_oracle_never_raises_on_infeasible_box():
    p = ellipse_fixed_axis_problem(SQUARE, Subspace.line([1.0, 0.0]))
    p.feasible = lambda X: np.zeros(len(X), dtype=bool)
    o = oracle_grid_search(p, resolution=4, rounds=2)
    assert np.isnan(o.params).all() and o.volume == 0.0
