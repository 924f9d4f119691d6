"""Log-barrier path following with damped Newton centering.

The caller supplies two oracles returning ``(value, gradient, hessian)``:
the objective to be minimized and the barrier of the feasible set.  The
barrier oracle returns ``value = inf`` outside its domain.  The centering
parameter t is multiplied by ``barrier_mu`` until ``theta / t <= tol_opt``;
the last step lands exactly on ``t = theta / tol_opt`` so that the returned
point is the same central-path point for every feasible starting point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ARMIJO = 0.25
BACKTRACK = 0.5
DECREMENT_TOL = 1e-14
FULL_STEP_DECREMENT = 0.2


@dataclass
class PathResult:
    x: np.ndarray
    t: float
    newton_steps: int
    outer_steps: int
    decrement: float
    converged: bool
    message: str = ""


def _newton_direction(H, g):
    # symmetric diagonal scaling keeps badly scaled barrier Hessians solvable
    dg = np.sqrt(np.abs(np.diag(H)))
    dg[dg == 0] = 1.0
    Hs = H / dg[:, None] / dg[None, :]
    try:
        L = np.linalg.cholesky(Hs)
        u = np.linalg.solve(L.T, np.linalg.solve(L, -g / dg))
    except np.linalg.LinAlgError:
        u = np.linalg.lstsq(Hs, -g / dg, rcond=None)[0]
    return u / dg


def _center(x, t, objective, barrier, max_iter):
    """Minimize t*objective + barrier starting from the strictly feasible x."""

    def value(xx):
        fb = barrier(xx, order=0)[0]
        if not math.isfinite(fb):
            return math.inf
        f0 = objective(xx, order=0)[0]
        if not math.isfinite(f0):
            return math.inf
        return t * f0 + fb

    lam2 = math.inf
    for it in range(1, max_iter + 1):
        f0, g0, H0 = objective(x, order=2)
        fb, gb, Hb = barrier(x, order=2)
        val = t * f0 + fb
        g = t * g0 + gb
        H = t * H0 + Hb
        dx = _newton_direction(H, g)
        lam2 = float(-g @ dx)
        if not math.isfinite(lam2):
            return x, it, lam2, False
        if lam2 <= DECREMENT_TOL:
            return x, it, lam2, True
        if lam2 < FULL_STEP_DECREMENT ** 2:
            # inside the quadratic convergence region: function values are
            # too close to compare reliably, so take the full step if feasible
            xn = x + dx
            if math.isfinite(value(xn)):
                x = xn
                if lam2 <= 1e-20 * max(1.0, abs(val)):
                    return x, it, lam2, True
                continue
        step = 1.0
        slope = float(g @ dx)
        while True:
            xn = x + step * dx
            vn = value(xn)
            if vn <= val + ARMIJO * step * slope:
                break
            step *= BACKTRACK
            if step < 1e-14:
                # no progress possible at this precision
                return x, it, lam2, lam2 < 1e-8
        x = xn
    return x, max_iter, lam2, lam2 < 1e-10


def path_following(x0, objective, barrier, theta, cfg, t0=1.0):
    """Run the barrier method; returns a :class:`PathResult`.

    ``cfg.max_iter`` bounds the Newton steps of each centering problem.
    """
    t_final = theta / cfg.tol_opt
    t = min(t0, t_final)
    x = np.array(x0, dtype=float)
    total, outer = 0, 0
    while True:
        x, it, lam2, ok = _center(x, t, objective, barrier, cfg.max_iter)
        total += it
        outer += 1
        if not ok:
            return PathResult(x, t, total, outer, lam2, False, f"centering failed at t={t:.3g}")
        if t >= t_final:
            return PathResult(x, t, total, outer, lam2, True)
        t = min(t * cfg.barrier_mu, t_final)


def neg_logdet(G):
    """Oracle for -log det(sum_k y_k G_k) over symmetric matrices G_k."""

    def oracle(y, order=2):
        A = np.einsum("k,kab->ab", y, G)
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            return math.inf, None, None
        val = -2.0 * np.sum(np.log(np.diag(L)))
        if order == 0:
            return val, None, None
        Ainv = np.linalg.inv(A)
        B = np.einsum("ab,kbc->kac", Ainv, G)
        grad = -np.einsum("kaa->k", B)
        hess = np.einsum("kab,lba->kl", B, B)
        return val, grad, hess

    return oracle
