"""Explicit extremal instances.

* A directionally dilated regular simplex with closed-form polar vertices
  and polar inradius, and its rescaling into a configuration whose polar
  inradius approaches d/(d-s) (the inradius bound is attained in the limit).
* The product functional W(x, delta) = prod x_i^(delta_i x_i / 2) behind the
  section volume constant, with a brute-force search over the extreme points
  where its maximum must occur.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PreconditionError
from .geometry import VPolytope, inradius_chebyshev, polar_vpolytope


@dataclass(frozen=True)
class AppendixAInstance:
    """Dilated simplex v_i = t q_i + sqrt(1 - t^2) a (i <= n) with barycentric weights (gamma, ..., 1 - n gamma)."""

    n: int
    gamma: float
    t: float
    vectors: np.ndarray
    weights: np.ndarray

    @property
    def a(self):
        return np.full(self.n, 1.0 / math.sqrt(self.n))

    @property
    def sigma(self):
        return sigma(self.n, self.gamma, self.t)

    @property
    def inradius(self):
        return inradius_closed_form(self)

    @property
    def weighted_sum_residual(self):
        return float(np.linalg.norm(self.weights @ self.vectors))


def sigma(n, gamma, t):
    """Weighted second moment sum gamma ||v_i||^2 + (1 - n gamma) ||v_{n+1}||^2."""
    ng = n * gamma
    return ng * (1.0 + ng / (1.0 - ng) * (1.0 - t * t))


def _q_vectors(n):
    P = np.eye(n) - 1.0 / n
    return P / math.sqrt((n - 1) / n)


def build_appendix_a(n, gamma, t, require_ball=True):
    """Construct the dilated simplex in R^n.

    ``require_ball`` enforces gamma n / (1 - gamma n) sqrt(1 - t^2) < 1, which
    keeps v_{n+1} inside the open unit ball.  The polar vertices and the
    inradius formula do not depend on it, so it can be switched off.
    """
    if int(n) != n or n < 2:
        raise PreconditionError("n must be an integer >= 2")
    if not gamma > 0 or n * gamma >= 1:
        raise PreconditionError("need gamma > 0 and n * gamma < 1")
    if not 0 < t < 1:
        raise PreconditionError("t must lie in (0, 1)")
    ng = n * gamma
    c = math.sqrt(1.0 - t * t)
    if require_ball and ng / (1.0 - ng) * c >= 1:
        raise PreconditionError("gamma n / (1 - gamma n) * sqrt(1 - t^2) must be < 1")
    a = np.full(n, 1.0 / math.sqrt(n))
    V = np.empty((n + 1, n))
    V[:n] = t * _q_vectors(n) + c * a
    V[n] = -ng / (1.0 - ng) * c * a
    w = np.concatenate([np.full(n, gamma), [1.0 - ng]])
    return AppendixAInstance(int(n), float(gamma), float(t), V, w)


def polar_vertices_appendix_a(inst):
    """Closed-form vertices (x_1, ..., x_{n+1}) of the polar simplex and the extra point y.

    x_i is the polar vertex opposite to v_i; y is the third vertex of the
    section of the polar by span{x_1, x_{n+1}}.
    """
    n, ng, t = inst.n, inst.n * inst.gamma, inst.t
    c = math.sqrt(1.0 - t * t)
    a = inst.a
    q = _q_vectors(n)
    X = np.empty((n + 1, n))
    X[:n] = -(n - 1) / (ng * t) * q - (1.0 - ng) / (ng * c) * a
    X[n] = a / c
    y = q[0] / (ng * t) - (1.0 - ng) / (ng * c) * a
    return X, y


def inradius_closed_form(inst):
    """Inradius of the polar simplex: 1 / (n gamma (1 + sqrt(1 - t^2)))."""
    return 1.0 / (inst.n * inst.gamma * (1.0 + math.sqrt(1.0 - inst.t**2)))


def polar_inradius(points):
    """Inradius of the polar of conv(points), computed by LP."""
    r, _ = inradius_chebyshev(polar_vpolytope(VPolytope(np.asarray(points, dtype=float))))
    return r


# ---------------------------------------------------------------------------
# configurations whose polar inradius approaches d/(d - s)


@dataclass(frozen=True)
class LiftedConfiguration:
    vectors: np.ndarray
    weights: np.ndarray
    t: float
    theta: float
    polar_inradius: float
    target: float

    def moment_residuals(self):
        b, w = self.vectors, self.weights
        return (
            abs(w.sum() - 1.0),
            float(np.linalg.norm(w @ b)),
            abs(float(w @ np.sum(b * b, axis=1)) - self.theta),
        )


def _lift(d, s, m, t):
    n = d - s
    inst = build_appendix_a(n, 1.0 / d, t)
    theta = n / d
    scale = math.sqrt(theta / inst.sigma)
    B = np.vstack([inst.vectors[:n], np.repeat(inst.vectors[n:], m - n, axis=0)]) * scale
    w = np.concatenate([np.full(n, 1.0 / d), np.full(m - n, (1.0 - n / d) / (m - n))])
    return B, w, theta


def lifted_configuration(d, s, m, eps, t_start=1.0 - 1e-3, iters=60):
    """m vectors in R^(d-s) with weights, moments (1, 0, (d-s)/d), polar inradius >= (1 - eps) d/(d-s).

    gamma is fixed to 1/d.  The inradius of the polar tends to d/(d-s) as
    t -> 1; t is found by moving ``t_start`` toward 1 until the target is
    met, then bisecting down to the smallest t (to within 2^-iters) that
    still meets it.
    """
    if not m > d - s >= 2:
        raise PreconditionError("need m > d - s >= 2")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    target = (1.0 - eps) * d / (d - s)

    def ok(t):
        try:
            B, _, _ = _lift(d, s, m, t)
        except PreconditionError:
            return False
        return polar_inradius(B) >= target

    hi = t_start
    while not ok(hi):
        hi = 1.0 - (1.0 - hi) / 10.0
        if 1.0 - hi < 1e-14:
            raise PreconditionError("no admissible t found")
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= 0 or mid >= hi:
            break
        if ok(mid):
            hi = mid
        else:
            lo = mid
    B, w, theta = _lift(d, s, m, hi)
    return LiftedConfiguration(B, w, hi, theta, polar_inradius(B), target)


# ---------------------------------------------------------------------------
# majorization functional


def majorization_bound(d, s):
    """(s+1)^((s+1)/(2(d+1))) / (d+1)^(1/2)."""
    return (s + 1) ** ((s + 1) / (2.0 * (d + 1))) / math.sqrt(d + 1)


def _check_point(x, delta, d, s, tol=1e-10):
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if x.shape != delta.shape:
        raise PreconditionError("x and delta must have the same length")
    lo = 1.0 / (d + 1)
    if np.any(x < lo - tol) or np.any(x > 1 + tol):
        raise PreconditionError("x must lie in [1/(d+1), 1]")
    if np.any(delta < -tol) or np.any(delta > 1 + tol):
        raise PreconditionError("delta must lie in [0, 1]")
    if abs(delta.sum() - (d + 1)) > tol:
        raise PreconditionError("sum of delta must equal d + 1")
    if abs(delta @ x - (s + 1)) > tol:
        raise PreconditionError("sum of delta_i x_i must equal s + 1")
    return x, delta


def majorization_value(x, delta, d, s):
    """W(x, delta) = prod x_i^(delta_i x_i / 2) at a feasible point."""
    x, delta = _check_point(x, delta, d, s)
    return math.exp(0.5 * float(np.sum(delta * x * np.log(x))))


def majorizer(d, s, m):
    """x~ = (1, ..., 1, Lambda, 1/(d+1), ...) with s ones, and its maximizing delta."""
    if m < d + 1:
        raise PreconditionError("need m >= d + 1")
    x = np.full(m, 1.0 / (d + 1))
    x[:s] = 1.0
    x[s] = (s + 1) / (d + 1)
    delta = np.zeros(m)
    delta[: d + 1] = 1.0
    return x, delta


def _log_w(x, delta):
    return 0.5 * np.sum(delta * x * np.log(x), axis=-1)


@dataclass(frozen=True)
class MajorizationSearch:
    """Best extreme point found, next to the claimed bound and the value at x~."""

    d: int
    s: int
    m: int
    best: float
    x: np.ndarray
    delta: np.ndarray
    bound: float
    majorizer_value: float

    @property
    def bound_holds(self):
        return self.best <= self.bound + 1e-10

    @property
    def majorizer_attains(self):
        return abs(self.majorizer_value - self.bound) <= 1e-10


def majorization_brute_force(d, s, m, n_lambda=10_000):
    """Maximize W over the extreme points of the feasible set.

    For fixed x the maximum over delta sits at a permutation of
    delta_lambda = (1^d, lambda, 1 - lambda, 0, ...), 1/2 <= lambda <= 1; for
    fixed delta_lambda the maximum over x sits at a vertex of the box slice
    B_lambda (every coordinate at a bound except one).  Coordinates with
    delta = 1 are exchangeable, so a vertex is described by how many of them
    are at the upper bound and which slot is free.  lambda runs over a grid
    of ``n_lambda`` points including both ends.

    The result is reported, not asserted: with m >= d + 2 fractional deltas
    can beat the value at x~ (see :class:`MajorizationSearch`).
    """
    if not 1 <= s <= d:
        raise PreconditionError("need 1 <= s <= d")
    if m < d + 1:
        raise PreconditionError("need m >= d + 1")
    best, (x, delta) = _extreme_point_search(d, s, m, n_lambda)
    xt, dt = majorizer(d, s, m)
    w_tilde = math.exp(float(_log_w(xt, dt)))
    w_best = math.exp(best)
    if w_tilde >= w_best:
        w_best, x, delta = w_tilde, xt, dt
    return MajorizationSearch(d, s, m, w_best, x, delta, majorization_bound(d, s), w_tilde)


def _patterns(d):
    """(k, free, bound of the lambda slot, bound of the 1 - lambda slot) up to permutation."""
    lo, hi = 1.0 / (d + 1), 1.0
    for free in ("one", "lam", "mu"):
        n_fixed = d - 1 if free == "one" else d
        for k in range(n_fixed + 1):
            for bl in ((lo, hi) if free != "lam" else (None,)):
                for bm in ((lo, hi) if free != "mu" else (None,)):
                    yield k, free, bl, bm


def _pattern_values(d, s, pattern, lams):
    """ln W along lambda for one vertex pattern of B_lambda; -inf where infeasible."""
    k, free, bl, bm = pattern
    lo, hi = 1.0 / (d + 1), 1.0
    n_fixed = d - 1 if free == "one" else d
    w_lam, w_mu = lams, 1.0 - lams
    fixed = k * hi + (n_fixed - k) * lo
    if bl is not None:
        fixed = fixed + bl * w_lam
    if bm is not None:
        fixed = fixed + bm * w_mu
    coef = {"one": np.ones_like(lams), "lam": w_lam, "mu": w_mu}[free]
    with np.errstate(divide="ignore", invalid="ignore"):
        xf = (s + 1.0 - fixed) / coef
    ok = (coef > 0) & (xf >= lo - 1e-12) & (xf <= hi + 1e-12)
    xf = np.clip(np.nan_to_num(xf, nan=lo), lo, hi)
    xl = xf if bl is None else np.full_like(lams, bl)
    xm = xf if bm is None else np.full_like(lams, bm)
    val = (n_fixed - k) * lo * math.log(lo) + w_lam * xl * np.log(xl) + w_mu * xm * np.log(xm)
    if free == "one":
        val = val + xf * np.log(xf)
    return np.where(ok, 0.5 * val, -np.inf), xf, xl, xm


def _extreme_point_search(d, s, m, n_lambda):
    lo, hi = 1.0 / (d + 1), 1.0
    lams = np.linspace(0.5, 1.0, n_lambda) if m >= d + 2 else np.array([1.0])
    best, best_pat, best_lam = -math.inf, None, None
    for pat in _patterns(d):
        val = _pattern_values(d, s, pat, lams)[0]
        i = int(np.argmax(val))
        if val[i] > best:
            best, best_pat = float(val[i]), pat
            # bracket for refinement between the grid neighbours
            best_lam = (lams[max(i - 1, 0)], lams[i], lams[min(i + 1, len(lams) - 1)])
    if best_lam[0] < best_lam[2]:
        res = minimize_scalar(
            lambda t: -max(_pattern_values(d, s, best_pat, np.array([t]))[0][0], -1e10),
            bounds=(best_lam[0], best_lam[2]),
            method="bounded",
            options={"xatol": 1e-13},
        )
        if -res.fun > best:
            best, lam = float(-res.fun), float(res.x)
        else:
            lam = best_lam[1]
    else:
        lam = best_lam[1]
    k, free, bl, bm = best_pat
    _, xf, xl, xm = _pattern_values(d, s, best_pat, np.array([lam]))
    n_fixed = d - 1 if free == "one" else d
    x = np.full(m, lo)
    x[:d] = [hi] * k + [lo] * (n_fixed - k) + ([xf[0]] if free == "one" else [])
    x[d] = xl[0]
    delta = np.zeros(m)
    delta[:d] = 1.0
    delta[d] = lam
    if m > d + 1:
        x[d + 1] = xm[0]
        delta[d + 1] = 1.0 - lam
    return best, (x, delta)


def random_majorization_points(d, s, m, n, rng):
    """n random feasible (x, delta) pairs, each pushed into the feasible set along a segment.

    delta is drawn uniformly from the cube and moved toward 0 or the all-ones
    vector until its sum is d + 1; x is drawn from the box and moved toward
    the lower or the upper corner until sum delta_i x_i = s + 1.
    """
    if m < d + 1:
        raise PreconditionError("need m >= d + 1")
    lo = 1.0 / (d + 1)
    u = rng.uniform(size=(n, m))
    su = u.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = 1.0 - (m - d - 1) / (m - su) * (1.0 - u)
        down = u * (d + 1) / su
    delta = np.where(su < d + 1, up, down)
    x = rng.uniform(lo, 1.0, size=(n, m))
    S = np.sum(delta * x, axis=1, keepdims=True)
    kd = (s + 1 - 1.0) / (S - 1.0)  # sum delta * lo = 1
    ku = (d - s) / (d + 1 - S)
    x = np.where(S > s + 1, lo + kd * (x - lo), 1.0 - ku * (1.0 - x))
    return np.clip(x, lo, 1.0), np.clip(delta, 0.0, 1.0)


def majorization_log_values(x, delta):
    """ln W for rows of (x, delta) without feasibility checks."""
    return _log_w(x, delta)
