"""Maximal-volume ellipsoids of revolution and axis-constrained positions.

Each problem is a convex program in the coefficients of a positive-definite
F-operator A (a symmetric s x s block M1 on F and a scalar mu on F-perp) and
a translation z.  They are solved by the log-barrier method of
:mod:`revolve_john._barrier`:

* ellipsoid in a polytope: ``max log det A`` s.t. ``<p_i, z> + ||A p_i|| <= b_i``;
* position of a polytope K in L: the same objective with the linear
  constraints ``<p_j, A v_k + z> <= b_j``;
* smallest ellipsoid containing K: ``max log det B`` over B = A^{-1} with
  ``||B v_k - c|| <= 1``.

Only positive-definite operators are searched.  For ellipsoids this loses
nothing (polar decomposition); for general K the result is the best
positive-definite position, labelled as such in :class:`GeneralPosition`.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._barrier import neg_logdet, path_following
from .errors import (
    DimensionError,
    InfeasibleError,
    NonConvergenceError,
    PreconditionError,
    UnboundedError,
)
from .geometry import (
    FEllipsoid,
    Subspace,
    VPolytope,
    bounding_box,
    circumradius,
    halfspaces_bounded,
    inradius_chebyshev,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolveConfig:
    """Solver tolerances.

    Parameters
    ----------
    tol_feas : float
        Allowed constraint violation of a returned solution.
    tol_opt : float
        Target bound on the log-volume gap; the barrier stops at
        ``t = theta / tol_opt``.
    max_iter : int
        Newton steps allowed per centering problem.
    barrier_mu : float
        Multiplier of the centering parameter between centering problems.
    init : {"chebyshev", "random"}
        Starting point.  ``"random"`` draws a strictly feasible start from
        ``seed`` and is used to test uniqueness of the optimum.
    seed : int
    sweep_step_deg : float or None
        Axis grid spacing for the any-axis sweep (default 1 deg in the plane,
        5 deg in space).
    refine_tol : float
        Angular tolerance (radians) of the golden-section axis refinement.
    sweep_tol_opt : float
        Looser ``tol_opt`` used while sweeping the axis grid.
    """

    tol_feas: float = 1e-9
    tol_opt: float = 1e-8
    max_iter: int = 200
    barrier_mu: float = 5.0
    init: str = "chebyshev"
    seed: int = 0
    sweep_step_deg: float | None = None
    refine_tol: float = 1e-6
    sweep_tol_opt: float = 1e-5

    def __post_init__(self):
        for name in ("tol_feas", "tol_opt", "barrier_mu", "refine_tol", "sweep_tol_opt"):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"{name} must be positive")
        if self.barrier_mu <= 1:
            raise PreconditionError("barrier_mu must exceed 1")
        if self.max_iter < 1:
            raise PreconditionError("max_iter must be at least 1")
        if self.init not in ("chebyshev", "random"):
            raise PreconditionError(f"unknown init {self.init!r}")


@dataclass
class SolveDiagnostics:
    problem: str
    newton_steps: int = 0
    centering_steps: int = 0
    final_t: float = 0.0
    gap_bound: float = 0.0
    min_slack: float = 0.0
    wall_time: float = 0.0
    axes_evaluated: int = 0

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True, eq=False)
class GeneralPosition:
    """Affine map x -> A x + z with A a positive-definite F-operator."""

    axis: Subspace
    shape_on_F: np.ndarray
    mu: float
    translation: np.ndarray
    search_space: str = field(default="positive-definite F-operators")

    def operator(self):
        U = self.axis.basis
        d = self.axis.ambient_dim
        return U.T @ self.shape_on_F @ U + self.mu * (np.eye(d) - U.T @ U)

    def logdet(self):
        return float(np.linalg.slogdet(self.operator())[1])

    def apply(self, points):
        return np.atleast_2d(points) @ self.operator().T + self.translation

    def image(self, K):
        return VPolytope(self.apply(K.vertices))


# ---------------------------------------------------------------------------
# parametrization of F-operators


class _FParam:
    """Linear coordinates y on the space of symmetric F-operators."""

    def __init__(self, F):
        self.F = F
        d, s = F.ambient_dim, F.dim
        U = F.basis
        mats = []
        for i in range(s):
            for j in range(i, s):
                E = np.zeros((s, s))
                E[i, j] = E[j, i] = 1.0
                mats.append(U.T @ E @ U)
        self.has_mu = s < d
        if self.has_mu:
            mats.append(np.eye(d) - U.T @ U)
        self.G = np.array(mats).reshape(len(mats), d, d)
        self.n = len(mats)
        self.d, self.s = d, s

    def operator(self, y):
        return np.einsum("k,kab->ab", y, self.G)

    def encode(self, M1, mu):
        y = [M1[i, j] for i in range(self.s) for j in range(i, self.s)]
        if self.has_mu:
            y.append(mu)
        return np.array(y, dtype=float)

    def decode(self, y):
        M1 = np.zeros((self.s, self.s))
        k = 0
        for i in range(self.s):
            for j in range(i, self.s):
                M1[i, j] = M1[j, i] = y[k]
                k += 1
        mu = float(y[k]) if self.has_mu else 1.0
        return M1, mu

    def jacobians(self, points):
        """J[i, :, k] = G_k points[i], so that A points[i] = J[i] @ y."""
        return np.einsum("kab,ib->iak", self.G, np.atleast_2d(points))


def _objective(param, nz):
    inner = neg_logdet(param.G)
    n = param.n

    def oracle(x, order=2):
        v, g, H = inner(x[:n], order)
        if order == 0 or g is None:
            return v, None, None
        gf = np.zeros(n + nz)
        gf[:n] = g
        Hf = np.zeros((n + nz, n + nz))
        Hf[:n, :n] = H
        return v, gf, Hf

    return oracle


def _random_rotation(rng, k):
    if k == 0:
        return np.zeros((0, 0))
    Q, R = np.linalg.qr(rng.normal(size=(k, k)))
    return Q * np.sign(np.diag(R))


def _check_body(L):
    if not halfspaces_bounded(L.normals):
        raise UnboundedError("the outer body is unbounded")
    r, c = inradius_chebyshev(L)
    if r <= 1e-12 * (1.0 + np.abs(L.offsets).max()):
        raise InfeasibleError("the outer body has empty interior")
    return r, c


# ---------------------------------------------------------------------------
# ellipsoid inside a polytope (fixed axis)


def _ellipsoid_barrier(param, P, b):
    n = param.n
    J = param.jacobians(P)

    def oracle(x, order=2):
        y, z = x[:n], x[n:]
        r = b - P @ z
        if np.any(r <= 0):
            return math.inf, None, None
        w = np.einsum("mdk,k->md", J, y)
        g = r * r - np.einsum("md,md->m", w, w)
        if np.any(g <= 0):
            return math.inf, None, None
        val = -np.sum(np.log(g))
        if order == 0:
            return val, None, None
        gy = -2.0 * np.einsum("mdk,md->mk", J, w)
        gz = -2.0 * r[:, None] * P
        Gg = np.hstack([gy, gz])
        grad = -np.sum(Gg / g[:, None], axis=0)
        H = (Gg / g[:, None]).T @ (Gg / g[:, None])
        JtJ = np.einsum("mdk,mdl,m->kl", J, J, 1.0 / g)
        H[:n, :n] += 2.0 * JtJ
        H[n:, n:] -= 2.0 * (P / g[:, None]).T @ P
        return val, grad, H

    return oracle


def _ellipsoid_start(param, L, r, c, cfg):
    d, s = param.d, param.s
    if cfg.init == "chebyshev":
        return param.encode(0.5 * r * np.eye(s), 0.5 * r), c.copy()
    rng = np.random.default_rng(cfg.seed)
    Q = _random_rotation(rng, s)
    M1 = Q @ np.diag(rng.uniform(0.1, 0.5, s) * r) @ Q.T
    mu = rng.uniform(0.1, 0.5) * r
    off = rng.normal(size=d)
    off *= rng.uniform(0.0, 0.3) * r / np.linalg.norm(off)
    return param.encode(M1, mu), c + off


def _facet_constraints(param, P, b):
    """c_i(y, z) = b_i - <p_i, z> - ||A(y) p_i|| with gradients and y-curvature."""
    n = param.n
    J = param.jacobians(P)

    def constraints(x):
        y, z = x[:n], x[n:]
        w = np.einsum("mdk,k->md", J, y)
        h = np.linalg.norm(w, axis=1)
        c = b - P @ z - h
        Jw = np.einsum("mdk,md->mk", J, w) / h[:, None]
        grad = np.hstack([-Jw, -P])
        curv = -(np.einsum("mdk,mdl->mkl", J, J) / h[:, None, None] - np.einsum("mk,ml->mkl", Jw, Jw) / h[:, None, None])
        return c, grad, curv

    return constraints


def _polish_ellipsoid(x, objective, constraints, b, thresholds=(1e-6, 1e-5, 1e-4), iters=30):
    """Equality-constrained Newton (SQP) on the nearly touching facets.

    The barrier leaves each contact with an O(gap) slack, which shows up as
    an O(gap) residual in the certificate equations.  Newton's method on the
    KKT system of the near-active facets removes it.  For each trial active
    set the point is kept only if it is feasible, its multipliers are
    nonnegative and its log det is no worse; the best such point wins.
    """
    n = len(x)
    scale = 1.0 + np.abs(b)
    c0 = constraints(x)[0]
    f_best = objective(x, order=0)[0]
    best = x
    tried = set()
    for tau in thresholds:
        act = np.flatnonzero(c0 <= tau * scale)
        key = tuple(act)
        if act.size == 0 or key in tried:
            continue
        tried.add(key)
        y = x.copy()
        lam = None
        ok = True
        for _ in range(iters):
            f, g, H = objective(y, order=2)
            if g is None:
                ok = False
                break
            c, G, C = constraints(y)
            Ga, ca = G[act], c[act]
            if lam is None:
                lam = np.linalg.lstsq(Ga.T, g, rcond=None)[0]
            W = H.copy()
            W[: C.shape[1], : C.shape[1]] -= np.einsum("m,mkl->kl", lam, C[act])
            K = np.block([[W, -Ga.T], [Ga, np.zeros((act.size, act.size))]])
            sol = np.linalg.lstsq(K, np.concatenate([-g, -ca]), rcond=None)[0]
            dy, lam = sol[:n], sol[n:]
            step = 1.0
            while not math.isfinite(objective(y + step * dy, order=0)[0]):
                step *= 0.5
                if step < 1e-12:
                    ok = False
                    break
            if not ok:
                break
            y = y + step * dy
            if step == 1.0 and np.linalg.norm(dy) <= 1e-14 * (1.0 + np.linalg.norm(y)):
                break
        if not ok or lam is None:
            continue
        c = constraints(y)[0]
        if np.any(c < -1e-12 * scale) or np.any(lam < -1e-8 * (1.0 + np.abs(lam).max())):
            continue
        f = objective(y, order=0)[0]
        if f <= f_best + 1e-12:
            best, f_best = y, f
    return best


def _snap_ellipsoid(E, L):
    """Homothetic expansion about the center until a facet is touched."""
    A = E.operator()
    h = np.linalg.norm(L.normals @ A, axis=1)
    kappa = np.min((L.offsets - L.normals @ E.center) / h)
    return FEllipsoid(E.axis, E.center, kappa * E.shape_on_F, kappa * E.mu)


def solve_ellipsoid_fixed_axis(L, F, cfg=None, *, return_diagnostics=False, _chebyshev=None, _polish=True):
    """Largest-volume ellipsoid of revolution with axis F inside L.

    Parameters
    ----------
    L : HPolytope
        Bounded outer body with nonempty interior.
    F : Subspace
        The axis; any dimension 0 <= s <= d.
    cfg : SolveConfig, optional

    Returns
    -------
    FEllipsoid, or (FEllipsoid, SolveDiagnostics) if ``return_diagnostics``.

    Raises
    ------
    InfeasibleError
        L has empty interior.
    NonConvergenceError
        Centering failed; ``exc.best`` holds the last iterate.
    """
    cfg = cfg or SolveConfig()
    if F.ambient_dim != L.dim:
        raise DimensionError("axis and body dimensions differ")
    t_start = time.perf_counter()
    r, c = _chebyshev if _chebyshev is not None else _check_body(L)
    param = _FParam(F)
    y0, z0 = _ellipsoid_start(param, L, r, c, cfg)
    d, n = param.d, param.n
    res = path_following(
        np.concatenate([y0, z0]),
        _objective(param, d),
        _ellipsoid_barrier(param, L.normals, L.offsets),
        theta=2.0 * len(L),
        cfg=cfg,
    )
    M1, mu = param.decode(res.x[:n])
    E = FEllipsoid(F, res.x[n:], M1, mu)
    if not res.converged:
        raise NonConvergenceError(res.message, best=E)
    E = _snap_ellipsoid(E, L)
    x = np.concatenate([param.encode(E.shape_on_F, E.mu), E.center])
    if _polish:
        x = _polish_ellipsoid(x, _objective(param, d), _facet_constraints(param, L.normals, L.offsets), L.offsets)
    M1, mu = param.decode(x[:n])
    E = _snap_ellipsoid(FEllipsoid(F, x[n:], M1, mu), L)
    diag = SolveDiagnostics(
        "ellipsoid-fixed",
        res.newton_steps,
        res.outer_steps,
        res.t,
        2.0 * len(L) / res.t,
        float(np.min(L.offsets - L.normals @ E.center - np.linalg.norm(L.normals @ E.operator(), axis=1))),
        time.perf_counter() - t_start,
    )
    return (E, diag) if return_diagnostics else E


# ---------------------------------------------------------------------------
# general positions of K inside L


def _position_rows(param, K, L):
    V = K.vertices
    P, b = L.normals, L.offsets
    # coefficient of y_l in <p_j, A v_k> is p_j^T G_l v_k
    Gv = np.einsum("lab,kb->kla", param.G, V)  # (k, l, d)
    cy = np.einsum("ja,kla->jkl", P, Gv).reshape(-1, param.n)
    cz = np.repeat(P, V.shape[0], axis=0)
    rows = np.hstack([cy, cz])
    rhs = np.repeat(b, V.shape[0])
    return rows, rhs


def _linear_barrier(rows, rhs):
    def oracle(x, order=2):
        g = rhs - rows @ x
        if np.any(g <= 0):
            return math.inf, None, None
        val = -np.sum(np.log(g))
        if order == 0:
            return val, None, None
        R = rows / g[:, None]
        return val, R.sum(axis=0), R.T @ R

    return oracle


def _polish_active(x, objective, rows, rhs, active_tol=1e-3, iters=30):
    """Equality-constrained Newton on the nearly active constraints.

    Optima of the position problem often sit where several contacts appear
    together, and there the central path reaches them only at the rate
    sqrt(gap).  Forcing the near-active rows to equality recovers the contact
    exactly.  The result is kept only if it is feasible and no worse.
    """
    slack = rhs - rows @ x
    act = slack <= active_tol * (1.0 + np.abs(rhs))
    if not act.any():
        return x
    A, b = rows[act], rhs[act]
    f_ref = objective(x, order=0)[0]
    y = x.copy()
    n = len(x)
    for _ in range(iters):
        f, g, H = objective(y, order=2)
        if g is None:
            return x
        K = np.block([[H, A.T], [A, np.zeros((len(b), len(b)))]])
        sol = np.linalg.lstsq(K, np.concatenate([-g, b - A @ y]), rcond=None)[0]
        dy = sol[:n]
        step = 1.0
        while not math.isfinite(objective(y + step * dy, order=0)[0]):
            step *= 0.5
            if step < 1e-12:
                return x
        y = y + step * dy
        if step == 1.0 and np.linalg.norm(dy) <= 1e-14 * (1.0 + np.linalg.norm(y)):
            break
    feasible = np.all(rhs - rows @ y >= -1e-12 * (1.0 + np.abs(rhs)))
    if feasible and objective(y, order=0)[0] <= f_ref + 1e-12:
        return y
    return x


def _max_homothety(K, L, A, z):
    """Largest kappa with the homothetic copy about the image centroid inside L."""
    cK = K.centroid()
    c = A @ cK + z
    D = (K.vertices - cK) @ A.T
    num = L.offsets - L.normals @ c
    den = L.normals @ D.T  # (j, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num[:, None] / den, np.inf)
    return float(np.min(ratio)), c


def solve_general_fixed_axis(K, L, F, cfg=None, *, return_diagnostics=False):
    """Largest-volume image A K + z inside L with A a positive-definite F-operator.

    The search is restricted to positive-definite F-operators; the returned
    :class:`GeneralPosition` records this in ``search_space``.
    """
    cfg = cfg or SolveConfig()
    if not (K.dim == L.dim == F.ambient_dim):
        raise DimensionError("K, L and F must share the ambient dimension")
    if not K.is_full_dimensional():
        raise PreconditionError("K must be full-dimensional")
    t_start = time.perf_counter()
    r, xc = _check_body(L)
    param = _FParam(F)
    d, n = param.d, param.n
    cK = K.centroid()
    if cfg.init == "chebyshev":
        A0 = np.eye(d)
    else:
        rng = np.random.default_rng(cfg.seed)
        Q = _random_rotation(rng, param.s)
        M1 = Q @ np.diag(rng.uniform(0.5, 2.0, param.s)) @ Q.T
        A0 = param.operator(param.encode(M1, rng.uniform(0.5, 2.0)))
    kappa, _ = _max_homothety(K, L, A0, xc - A0 @ cK)
    if not kappa > 0:
        raise InfeasibleError("no positive homothet of K fits in L")
    scale = 0.5 * kappa
    M1, mu = param.decode(param.encode(*_split(A0, F)))
    y0 = param.encode(scale * M1, scale * mu)
    z0 = xc - scale * (A0 @ cK)
    rows, rhs = _position_rows(param, K, L)
    res = path_following(
        np.concatenate([y0, z0]),
        _objective(param, d),
        _linear_barrier(rows, rhs),
        theta=float(len(rhs)),
        cfg=cfg,
    )
    x = _polish_active(res.x, _objective(param, d), rows, rhs) if res.converged else res.x
    M1, mu = param.decode(x[:n])
    pos = GeneralPosition(F, M1, mu, x[n:].copy())
    if not res.converged:
        raise NonConvergenceError(res.message, best=pos)
    A = pos.operator()
    kappa, c = _max_homothety(K, L, A, pos.translation)
    pos = GeneralPosition(F, kappa * M1, kappa * mu, c - kappa * (A @ cK))
    slack = rhs - rows @ np.concatenate([param.encode(pos.shape_on_F, pos.mu), pos.translation])
    diag = SolveDiagnostics(
        "general-fixed", res.newton_steps, res.outer_steps, res.t, len(rhs) / res.t,
        float(slack.min()), time.perf_counter() - t_start,
    )
    return (pos, diag) if return_diagnostics else pos


def _split(A, F):
    """Blocks (M1, mu) of an F-operator given as a full matrix."""
    U = F.basis
    M1 = U @ A @ U.T
    if F.dim < F.ambient_dim:
        W = F.complement().basis
        mu = float(np.trace(W @ A @ W.T) / W.shape[0])
    else:
        mu = 1.0
    return 0.5 * (M1 + M1.T), mu


# ---------------------------------------------------------------------------
# smallest ellipsoid containing K


def _lowner_barrier(param, V):
    n = param.n
    J = param.jacobians(V)

    def oracle(x, order=2):
        y, c = x[:n], x[n:]
        w = np.einsum("mdk,k->md", J, y) - c
        g = 1.0 - np.einsum("md,md->m", w, w)
        if np.any(g <= 0):
            return math.inf, None, None
        val = -np.sum(np.log(g))
        if order == 0:
            return val, None, None
        gy = -2.0 * np.einsum("mdk,md->mk", J, w)
        gc = 2.0 * w
        Gg = np.hstack([gy, gc]) / g[:, None]
        grad = -np.sum(Gg, axis=0)
        H = Gg.T @ Gg
        ig = 1.0 / g
        H[:n, :n] += 2.0 * np.einsum("mdk,mdl,m->kl", J, J, ig)
        cross = 2.0 * np.einsum("mdk,m->kd", J, ig)
        H[:n, n:] -= cross
        H[n:, :n] -= cross.T
        H[n:, n:] += 2.0 * ig.sum() * np.eye(param.d)
        return val, grad, H

    return oracle


def solve_lowner_fixed_axis(K, F, cfg=None, *, return_diagnostics=False):
    """Smallest-volume ellipsoid of revolution with axis F containing K.

    Solved as ``max log det B`` over F-operators B = A^{-1} and c = B z with
    ``||B v_k - c|| <= 1`` for every vertex v_k.
    """
    cfg = cfg or SolveConfig()
    if F.ambient_dim != K.dim:
        raise DimensionError("axis and body dimensions differ")
    if not K.is_full_dimensional():
        raise InfeasibleError("K is not full-dimensional; no bounded-volume ellipsoid")
    t_start = time.perf_counter()
    param = _FParam(F)
    d, s, n = param.d, param.s, param.n
    R, cen = circumradius(K)
    if cfg.init == "chebyshev":
        rad, z0 = 1.5 * R, cen
        B0 = np.eye(d) / rad
    else:
        rng = np.random.default_rng(cfg.seed)
        off = rng.normal(size=d)
        off *= rng.uniform(0, 0.5) * R / np.linalg.norm(off)
        rad = R * rng.uniform(2.0, 3.0)
        z0 = cen + off
        Q = _random_rotation(rng, s)
        B0 = param.operator(param.encode(Q @ np.diag(rng.uniform(1.0, 2.0, s)) @ Q.T, rng.uniform(1.0, 2.0))) / rad
    M1, mu = _split(B0, F)
    y0 = param.encode(M1, mu)
    res = path_following(
        np.concatenate([y0, B0 @ z0]),
        _objective(param, d),
        _lowner_barrier(param, K.vertices),
        theta=float(len(K)),
        cfg=cfg,
    )
    Mb, mub = param.decode(res.x[:n])
    B = param.operator(res.x[:n])
    z = np.linalg.solve(B, res.x[n:])
    E = FEllipsoid(F, z, np.linalg.inv(Mb) if s else Mb, 1.0 / mub if param.has_mu else 1.0)
    if not res.converged:
        raise NonConvergenceError(res.message, best=E)
    kappa = float(np.max(E.gauge(K.vertices)))
    E = FEllipsoid(F, E.center, kappa * E.shape_on_F, kappa * E.mu)
    diag = SolveDiagnostics(
        "lowner-fixed", res.newton_steps, res.outer_steps, res.t, len(K) / res.t,
        float(1.0 - np.max(E.gauge(K.vertices))), time.perf_counter() - t_start,
    )
    return (E, diag) if return_diagnostics else E


# ---------------------------------------------------------------------------
# any axis (d <= 3)


def _axis_from_direction(u, s, d):
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    if s == 1:
        return Subspace.from_rows([u])
    return Subspace.line(u).complement()  # s = d - 1 in the plane or space


def _canonical(u):
    nz = np.flatnonzero(np.abs(u) > 1e-12)
    return -u if nz.size and u[nz[0]] < 0 else u


def _axis_grid(d, step_deg):
    if d == 2:
        ang = np.deg2rad(np.arange(0.0, 180.0, step_deg))
        return np.column_stack([np.cos(ang), np.sin(ang)])
    dirs = [np.array([0.0, 0.0, 1.0])]
    for pol in np.arange(step_deg, 90.0 + 1e-9, step_deg):
        top = 180.0 if abs(pol - 90.0) < 1e-9 else 360.0
        for az in np.arange(0.0, top, step_deg):
            p, a = np.deg2rad(pol), np.deg2rad(az)
            dirs.append(np.array([np.sin(p) * np.cos(a), np.sin(p) * np.sin(a), np.cos(p)]))
    return np.array(dirs)


def _thread_count():
    try:
        return max(1, int(os.environ.get("REVOLVE_JOHN_THREADS", "1")))
    except ValueError:
        return 1


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    c, e = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + GOLDEN * (b - a)
            fe = f(e)
    return (c, fc) if fc >= fe else (e, fe)


def solve_ellipsoid_any_axis(L, s, cfg=None, *, return_diagnostics=False):
    """Largest ellipsoid of revolution in L over all s-dimensional axes (d <= 3).

    Sweeps a grid of axis directions (the axis itself for s = 1, its normal
    for s = d - 1) with a loose barrier tolerance, then refines the best one
    by golden-section search at full tolerance.  Among axes whose volumes
    agree within the sweep tolerance the lexicographically smallest
    sign-normalized direction wins.
    """
    cfg = cfg or SolveConfig()
    d = L.dim
    if d > 3:
        raise DimensionError("the axis sweep supports d <= 3")
    if not 0 <= s <= d:
        raise DimensionError("axis dimension must lie in [0, d]")
    t_start = time.perf_counter()
    if s == 0 or s == d or d == 1:
        F = Subspace.zero(d) if s == 0 else Subspace.full(d)
        E, diag = solve_ellipsoid_fixed_axis(L, F, cfg, return_diagnostics=True)
        diag.problem, diag.axes_evaluated = "ellipsoid-any", 1
        return (E, diag) if return_diagnostics else E

    step = cfg.sweep_step_deg or (1.0 if d == 2 else 5.0)
    grid = _axis_grid(d, step)
    loose = replace(cfg, tol_opt=max(cfg.tol_opt, cfg.sweep_tol_opt), init="chebyshev", barrier_mu=max(cfg.barrier_mu, 20.0))
    cheb = _check_body(L)

    def logvol(u, c=loose):
        # the polish only pays off at full tolerance
        return solve_ellipsoid_fixed_axis(L, _axis_from_direction(u, s, d), c, _chebyshev=cheb, _polish=c is not loose).logdet()

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = np.array(list(ex.map(logvol, grid)))
    else:
        vals = np.array([logvol(u) for u in grid])
    n_eval = len(grid)

    best = vals.max()
    # the grid is ordered by increasing (polar, azimuth) angles of the
    # sign-normalized direction, so the first tied entry is the smallest
    tied = np.flatnonzero(vals >= best - 10 * loose.tol_opt * max(1.0, abs(best)))
    u0 = grid[tied[0]]
    f0 = logvol(u0, cfg)

    h = np.deg2rad(step)
    if d == 2:
        th0 = math.atan2(u0[1], u0[0])
        f = lambda th: logvol(np.array([math.cos(th), math.sin(th)]), cfg)
        th, fb = _golden_max(f, th0 - h, th0 + h, cfg.refine_tol)
        u_ref = np.array([math.cos(th), math.sin(th)])
    else:
        basis = Subspace.line(u0).complement().basis
        coords = np.zeros(2)
        fb = f0
        width = math.tan(h)
        while width > cfg.refine_tol:
            moved = 0.0
            for j in range(2):
                def f(tj, j=j):
                    cc = coords.copy()
                    cc[j] = tj
                    return logvol(u0 + cc @ basis, cfg)
                tj, fj = _golden_max(f, coords[j] - width, coords[j] + width, cfg.refine_tol)
                if fj > fb:
                    moved = max(moved, abs(tj - coords[j]))
                    coords[j], fb = tj, fj
            width = max(min(width / 4.0, 4.0 * moved), cfg.refine_tol / 2) if moved > 0 else width / 8.0
        u_ref = u0 + coords @ basis
    n_eval += 1
    # keep the tie-broken grid axis unless refinement strictly improves it
    u_best = u_ref if fb > f0 + 1e-12 * max(1.0, abs(f0)) else u0
    F_best = _axis_from_direction(_canonical(u_best / np.linalg.norm(u_best)), s, d)
    E, diag = solve_ellipsoid_fixed_axis(L, F_best, cfg, return_diagnostics=True, _chebyshev=cheb)
    diag.problem = "ellipsoid-any"
    diag.axes_evaluated = n_eval
    diag.wall_time = time.perf_counter() - t_start
    return (E, diag) if return_diagnostics else E


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass
class GridProblem:
    """Box-constrained maximization handed to :func:`oracle_grid_search`.

    ``feasible`` and ``objective`` take an (N, k) array of parameter vectors.
    """

    names: tuple
    lower: np.ndarray
    upper: np.ndarray
    feasible: callable
    objective: callable


@dataclass
class OracleResult:
    params: np.ndarray
    value: float
    volume: float
    names: tuple


def oracle_grid_search(problem, resolution=20, rounds=40, shrink=0.5, volume_of=None):
    """Exhaustive grid search with zoom refinement.

    Every round evaluates a full ``resolution**k`` grid on the current box,
    keeps the best feasible point, and shrinks the box around it by
    ``shrink``.  Never raises: returns the best feasible point found (NaN
    parameters if none).
    """
    lo = np.asarray(problem.lower, dtype=float).copy()
    hi = np.asarray(problem.upper, dtype=float).copy()
    lo0, hi0 = lo.copy(), hi.copy()
    k = lo.shape[0]
    best_x, best_v = np.full(k, np.nan), -math.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], resolution) for i in range(k)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        if not np.isnan(best_x).any():
            X = np.vstack([X, best_x])
        mask = problem.feasible(X)
        if np.any(mask):
            vals = np.full(X.shape[0], -math.inf)
            vals[mask] = problem.objective(X[mask])
            i = int(np.argmax(vals))
            if vals[i] >= best_v:
                best_x, best_v = X[i].copy(), float(vals[i])
        if np.isnan(best_x).any():
            continue
        half = shrink * (hi - lo) / 2.0
        lo = np.maximum(best_x - half, lo0)
        hi = np.minimum(best_x + half, hi0)
    vol = volume_of(best_x) if volume_of is not None and not np.isnan(best_x).any() else math.exp(best_v) if best_v > -math.inf else 0.0
    return OracleResult(best_x, best_v, vol, tuple(problem.names))


def _frame_2d(F):
    f = F.basis[0]
    return f, np.array([-f[1], f[0]])


def ellipse_fixed_axis_problem(L, F):
    """Parameters (a, mu, z1, z2): ellipse with semi-axis a along the line F."""
    if L.dim != 2 or F.dim != 1:
        raise DimensionError("the grid oracle handles planar ellipses with a line axis")
    f, g = _frame_2d(F)
    P, b = L.normals, L.offsets
    pf, pg = P @ f, P @ g
    blo, bhi = bounding_box(L)
    R = 0.5 * np.linalg.norm(bhi - blo)

    def feasible(X):
        a, mu, z = X[:, 0:1], X[:, 1:2], X[:, 2:4]
        h = z @ P.T + np.sqrt((a * pf) ** 2 + (mu * pg) ** 2)
        return np.all(h <= b, axis=1) & (X[:, 0] > 0) & (X[:, 1] > 0)

    def objective(X):
        return np.log(X[:, 0]) + np.log(X[:, 1])

    return GridProblem(("a", "mu", "z1", "z2"), np.array([0, 0, blo[0], blo[1]]), np.array([R, R, bhi[0], bhi[1]]), feasible, objective)


def lowner_fixed_axis_problem(K, F):
    """Parameters (a, mu, z1, z2) of an enclosing ellipse; maximizes -log(a mu)."""
    if K.dim != 2 or F.dim != 1:
        raise DimensionError("the grid oracle handles planar ellipses with a line axis")
    f, g = _frame_2d(F)
    V = K.vertices
    R, _ = circumradius(K)
    lo, hi = V.min(axis=0), V.max(axis=0)

    def feasible(X):
        a, mu, z = X[:, 0:1], X[:, 1:2], X[:, 2:4]
        D = V[None, :, :] - z[:, None, :]
        q = (D @ f / a) ** 2 + (D @ g / mu) ** 2
        return np.all(q <= 1.0, axis=1) & (X[:, 0] > 0) & (X[:, 1] > 0)

    def objective(X):
        return -np.log(X[:, 0]) - np.log(X[:, 1])

    top = 2.0 * R
    return GridProblem(("a", "mu", "z1", "z2"), np.array([1e-9, 1e-9, lo[0], lo[1]]), np.array([top, top, hi[0], hi[1]]), feasible, objective)


def general_fixed_axis_problem(K, L, F):
    """Parameters (alpha, beta, z1, z2): A = alpha on F, beta on F-perp (planar K, L)."""
    if K.dim != 2 or L.dim != 2 or F.dim != 1:
        raise DimensionError("the grid oracle handles planar positions with a line axis")
    f, g = _frame_2d(F)
    V = K.vertices
    P, b = L.normals, L.offsets
    vf, vg = V @ f, V @ g
    blo, bhi = bounding_box(L)
    span = np.max(bhi - blo)
    ext = max(np.ptp(vf), np.ptp(vg), 1e-12)
    top = 2.0 * span / ext

    def feasible(X):
        al, be, z = X[:, 0:1], X[:, 1:2], X[:, 2:4]
        pts = al[:, :, None] * vf[None, :, None] * f + be[:, :, None] * vg[None, :, None] * g + z[:, None, :]
        return np.all(pts @ P.T <= b, axis=(1, 2)) & (X[:, 0] > 0) & (X[:, 1] > 0)

    def objective(X):
        return np.log(X[:, 0]) + np.log(X[:, 1])

    return GridProblem(("alpha", "beta", "z1", "z2"), np.array([0, 0, blo[0], blo[1]]), np.array([top, top, bhi[0], bhi[1]]), feasible, objective)


# ---------------------------------------------------------------------------
# local optimality probe


@dataclass
class PerturbationReport:
    n_trials: int
    max_improvement: float
    base_logdet: float
    step: float

    @property
    def improved(self):
        return self.max_improvement > 1e-10


def _support_image(K, A, c, P):
    """Support numbers h_{A(K - centroid) + c}(p_j); K None means the unit ball."""
    if K is None:
        return P @ c + np.linalg.norm(P @ A, axis=1)
    D = (K.vertices - K.centroid()) @ A.T
    return P @ c + np.max(P @ D.T, axis=1)


def local_perturbation_test(K, L, F, sol, n_trials=1000, step=1e-4, seed=0):
    """Probe local optimality of a position by random feasible perturbations.

    Each trial perturbs (M1, mu, z) by a random direction of length ``step``
    (relative to the size of the operator), shrinks the result about its
    center until it fits in L, and records the change in log det.  ``K=None``
    treats the inner body as the unit ball (ellipsoid problems).
    """
    rng = np.random.default_rng(seed)
    d, s = F.ambient_dim, F.dim
    if isinstance(sol, FEllipsoid):
        M1, mu, z = sol.shape_on_F, sol.mu, sol.center
    else:
        M1, mu, z = sol.shape_on_F, sol.mu, sol.translation
    U = F.basis
    Pp = np.eye(d) - U.T @ U

    def op(M, m):
        return U.T @ M @ U + (m * Pp if s < d else 0.0)

    A = op(M1, mu)
    base = float(np.linalg.slogdet(A)[1])
    cK = np.zeros(d) if K is None else K.centroid()
    scale = float(np.linalg.norm(A, 2))
    P, b = L.normals, L.offsets
    best = -math.inf
    for _ in range(n_trials):
        dM = rng.normal(size=(s, s))
        dM = 0.5 * (dM + dM.T)
        dmu = rng.normal() if s < d else 0.0
        dz = rng.normal(size=d)
        nrm = math.sqrt(np.sum(dM**2) + dmu**2 + dz @ dz)
        t = step * scale / nrm
        A2 = op(M1 + t * dM, mu + t * dmu)
        if np.linalg.eigvalsh(A2).min() <= 0:
            continue
        c2 = A2 @ cK + z + t * dz
        h = _support_image(K, A2, c2, P) - P @ c2
        kappa = min(1.0, float(np.min((b - P @ c2) / h)))
        if kappa <= 0:
            continue
        gain = d * math.log(kappa) + float(np.linalg.slogdet(A2)[1]) - base
        best = max(best, gain)
    return PerturbationReport(n_trials, best, base, step)


__all__ = [
    "SolveConfig",
    "SolveDiagnostics",
    "GeneralPosition",
    "solve_ellipsoid_fixed_axis",
    "solve_general_fixed_axis",
    "solve_ellipsoid_any_axis",
    "solve_lowner_fixed_axis",
    "GridProblem",
    "OracleResult",
    "oracle_grid_search",
    "ellipse_fixed_axis_problem",
    "lowner_fixed_axis_problem",
    "general_fixed_axis_problem",
    "PerturbationReport",
    "local_perturbation_test",
]
