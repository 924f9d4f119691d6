"""Numerical checks of the geometric consequences of optimality.

Every check returns :class:`BoundReport` objects.  Sections and
projections are computed in orthonormal coordinates of F (or F-perp), so
that lengths, areas and radii are intrinsic to the subspace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import gammaln

from .bodies import ellipsoid_inner, regular_simplex_vertices
from .certificates import extract_position_pairs, fit_john_weights, good_center
from .errors import DimensionError, PreconditionError
from .geometry import (
    FEllipsoid,
    HPolytope,
    Subspace,
    VPolytope,
    circumradius,
    enumerate_vertices,
    gauge_vpolytope,
    hull_to_hpolytope,
    inradius_chebyshev,
    polar_vpolytope,
    section,
    unit_ball_volume,
    volume,
)
from .solver import SolveConfig, solve_ellipsoid_any_axis

REPORT_TOL = 1e-8
MAX_SECTION_DIM = 3


@dataclass
class BoundReport:
    """Outcome of one inequality ``lhs <= rhs`` (or ``lhs >= rhs`` when ``sense`` is ">=")."""

    name: str
    lhs: float
    rhs: float
    sense: str = "<="
    detail: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.rhs - self.lhs if self.sense == "<=" else self.lhs - self.rhs

    @property
    def passed(self):
        return self.margin >= -REPORT_TOL * (1.0 + abs(self.rhs))

    def is_equality(self, tol=1e-6):
        return abs(self.margin) <= tol

    def as_dict(self):
        return {
            "name": self.name,
            "lhs": _json_number(self.lhs),
            "rhs": float(self.rhs),
            "sense": self.sense,
            "margin": _json_number(self.margin),
            "pass": bool(self.passed),
            "detail": {k: (_json_number(v) if isinstance(v, (int, float, np.floating)) else v) for k, v in self.detail.items()},
        }


def _json_number(x):
    # strict JSON has no inf/nan; those are written as strings
    x = float(x)
    return x if math.isfinite(x) else str(x)


# ---------------------------------------------------------------------------
# reference volumes


def simplex_john_volume(s):
    """Volume of the regular s-simplex circumscribed about B^s."""
    return math.exp(0.5 * s * math.log(s) + 0.5 * (s + 1) * math.log(s + 1) - gammaln(s + 1))


def simplex_lowner_volume(s):
    """Volume of the regular s-simplex inscribed in B^s."""
    return math.exp(0.5 * (s + 1) * math.log(s + 1) - gammaln(s + 1) - 0.5 * s * math.log(s))


def volume_bound_constant(d, s, symmetric=False):
    """Right-hand side of the section volume-ratio bound (already an s-th root)."""
    vb = unit_ball_volume(s)
    if symmetric:
        return math.sqrt(d / s) * (2.0**s / vb) ** (1.0 / s)
    return (
        (s + 1) ** (-(d - s) / (2.0 * s * (d + 1)))
        * math.sqrt(d * (d + 1) / (s * (s + 1)))
        * (simplex_john_volume(s) / vb) ** (1.0 / s)
    )


def _section_vertices(P):
    """Vertices of a bounded H-polytope, with a fast path in dimension one."""
    if P.dim == 1:
        n, b = P.normals[:, 0], P.offsets
        return np.array([[np.max(b[n < 0] / n[n < 0])], [np.min(b[n > 0] / n[n > 0])]])
    return enumerate_vertices(P)


def _hull_volume(points):
    pts = np.atleast_2d(points)
    if pts.shape[1] == 1:
        return float(np.ptp(pts))
    try:
        return float(ConvexHull(pts).volume)
    except Exception:
        return 0.0  # lower-dimensional point set


# ---------------------------------------------------------------------------
# ellipsoid properties


def check_inradius_bound(K, E, symmetric=False):
    """Inradius of (K - z) cap F-perp against d/(d-s) (or its square root) times mu."""
    F = E.axis
    d, s = F.ambient_dim, F.dim
    if s >= d:
        raise PreconditionError("the inradius bound needs s < d")
    sec = section(K, F.complement(), point=E.center)
    r, _ = inradius_chebyshev(sec)
    factor = d / (d - s)
    if symmetric:
        factor = math.sqrt(factor)
    name = "inradius-sym" if symmetric else "inradius"
    return BoundReport(name, r, factor * E.mu, detail={"ratio": r / E.mu, "factor": factor})


def check_volume_bound(K, E, symmetric=False):
    """(vol_s((K - z) cap F) / vol_s(E cap F))^(1/s) against the reference-body constant."""
    F = E.axis
    d, s = F.ambient_dim, F.dim
    if s == 0:
        raise PreconditionError("the volume bound needs s >= 1")
    if s > MAX_SECTION_DIM:
        raise DimensionError("exact section volumes are limited to s <= 3")
    sec = section(K, F, point=E.center)
    vk = volume(sec)
    ve = unit_ball_volume(s) * float(np.linalg.det(E.shape_on_F))
    lhs = (vk / ve) ** (1.0 / s)
    name = "volume-sym" if symmetric else "volume"
    return BoundReport(name, lhs, volume_bound_constant(d, s, symmetric), detail={"vol_section": vk, "vol_ellipsoid_section": ve})


def check_inclusion(K, E, symmetric=False):
    """E cap F inside K cap F inside lambda (E cap F), sections through the center.

    ``lhs`` is lambda* = max over section vertices y of ||M1^{-1} y||.  The
    first inclusion is checked facet-wise by support numbers and recorded in
    ``detail["inner_margin"]``; a violated inner inclusion fails the report.
    """
    F = E.axis
    d, s = F.ambient_dim, F.dim
    if s == 0:
        raise PreconditionError("the inclusion needs s >= 1")
    sec = section(K, F, point=E.center)
    M1 = E.shape_on_F
    inner = float(np.min(sec.offsets - np.linalg.norm(sec.normals @ M1, axis=1)))
    X = _section_vertices(sec)
    lam = float(np.max(np.linalg.norm(np.linalg.solve(M1, X.T), axis=0)))
    rhs = math.sqrt(d) if symmetric else float(d)
    rep = BoundReport("inclusion-sym" if symmetric else "inclusion", lam, rhs, detail={"inner_margin": inner})
    if inner < -REPORT_TOL * (1.0 + np.abs(sec.offsets).max()):
        rep.lhs = math.inf
    return rep


def check_ellipsoid_properties(K, E, symmetric=False):
    """All applicable ellipsoid reports (general, plus symmetric ones if requested)."""
    F = E.axis
    d, s = F.ambient_dim, F.dim
    out = []
    modes = [False, True] if symmetric else [False]
    for sym in modes:
        if s < d:
            out.append(check_inradius_bound(K, E, sym))
        if 1 <= s <= MAX_SECTION_DIM:
            out.append(check_volume_bound(K, E, sym))
        if s >= 1:
            out.append(check_inclusion(K, E, sym))
    return out


# ---------------------------------------------------------------------------
# Löwner properties


def lowner_equality_axis(d, s):
    """Axis for which the simplex inscribed in B^d attains the outer volume bound.

    F is spanned by the centroids of s + 1 disjoint faces, each with
    (d+1)/(s+1) vertices; requires (s+1) | (d+1).
    """
    if (d + 1) % (s + 1):
        raise PreconditionError("equality needs s + 1 to divide d + 1")
    k = (d + 1) // (s + 1)
    V = regular_simplex_vertices(d)
    cents = np.array([V[i * k:(i + 1) * k].mean(axis=0) for i in range(s + 1)])
    return Subspace.from_rows(cents[:s], ambient_dim=d)


def check_lowner_properties(K, F, symmetric=False):
    """Reports for a body in Löwner position with axis F (B^d is the solution)."""
    d, s = F.ambient_dim, F.dim
    V = K.vertices
    reports = []
    Y = F.coords(V) if s else np.zeros((len(V), 0))
    if s >= 1:
        if s > MAX_SECTION_DIM:
            raise DimensionError("exact projection volumes are limited to s <= 3")
        vol = _hull_volume(Y)
        ref = (2.0**s / math.factorial(s)) if symmetric else simplex_lowner_volume(s)
        reports.append(
            BoundReport(
                "outer-volume-sym" if symmetric else "outer-volume",
                (vol / ref) ** (1.0 / s),
                math.sqrt(s / d),
                ">=",
                {"vol_projection": vol, "vol_reference": ref},
            )
        )
        reports.append(BoundReport("projection-in-ball", float(np.max(np.linalg.norm(Y, axis=1))), 1.0))
        lam = _ball_dilation(Y)
        reports.append(BoundReport("ball-in-dilate-sym" if symmetric else "ball-in-dilate", lam, math.sqrt(d) if symmetric else float(d)))
    if s < d:
        R, _ = circumradius(V - F.embed(Y) if s else V)
        reports.append(BoundReport("circumradius", R, math.sqrt((d - s) / d), ">="))
    return reports


def _ball_dilation(Y):
    """Smallest lambda with the unit ball of R^s inside lambda conv(Y)."""
    if Y.shape[1] == 1:
        lo, hi = Y.min(), Y.max()
        if lo >= 0 or hi <= 0:
            return math.inf
        return 1.0 / min(hi, -lo)
    try:
        H = hull_to_hpolytope(Y)
    except PreconditionError:
        return math.inf
    dist = H.offsets / np.linalg.norm(H.normals, axis=1)
    return math.inf if np.min(dist) <= 0 else float(1.0 / np.min(dist))


# ---------------------------------------------------------------------------
# primitive moment bounds


def _check_moments(v, beta, theta, tol=1e-10):
    v = np.atleast_2d(np.asarray(v, dtype=float))
    b = np.asarray(beta, dtype=float)
    if np.any(b <= 0):
        raise PreconditionError("weights must be positive")
    if abs(b.sum() - 1.0) > tol:
        raise PreconditionError("weights must sum to one")
    if np.linalg.norm(b @ v) > tol:
        raise PreconditionError("weighted mean of the vectors must vanish")
    if np.any(np.linalg.norm(v, axis=1) > 1.0 + tol):
        raise PreconditionError("vectors must lie in the unit ball")
    th = float(b @ np.sum(v * v, axis=1))
    if theta is not None and abs(th - theta) > tol:
        raise PreconditionError(f"second moment {th} differs from theta {theta}")
    if not 0 < th <= 1 + tol:
        raise PreconditionError("second moment must lie in (0, 1]")
    return v, b, th


def lemma_inradius_primitive(v, beta, theta=None):
    """Inradius of (conv v)° is at most 1/theta."""
    v, b, th = _check_moments(v, beta, theta)
    r, _ = inradius_chebyshev(polar_vpolytope(VPolytope(v)))
    return BoundReport("polar-inradius", r, 1.0 / th, detail={"theta": th})


def lemma_circumradius_primitive(v, beta, theta=None):
    """Circumradius of conv v is at least sqrt(theta)."""
    v, b, th = _check_moments(v, beta, theta)
    R, _ = circumradius(VPolytope(v))
    return BoundReport("circumradius", R, math.sqrt(th), ">=", {"theta": th})


def random_moment_configuration(rng, n, m):
    """Random (v, beta) with sum beta = 1, sum beta v = 0 and max ||v|| = 1."""
    v = rng.normal(size=(m, n)) * rng.uniform(0.2, 1.0, size=(m, 1))
    beta = rng.dirichlet(np.ones(m))
    v -= beta @ v
    v /= np.max(np.linalg.norm(v, axis=1))
    return v, beta, float(beta @ np.sum(v * v, axis=1))


# ---------------------------------------------------------------------------
# containment along an axis


def _line_section(K, point, direction):
    """Parameter interval {t : point + t direction in K} for an H- or V-polytope."""
    H = K if isinstance(K, HPolytope) else hull_to_hpolytope(K.vertices)
    n = H.normals @ direction
    b = H.offsets - H.normals @ point
    pos, neg = n > 1e-15, n < -1e-15
    if np.any(b[~(pos | neg)] < 0):
        raise PreconditionError("line misses the body")
    hi = np.min(b[pos] / n[pos])
    lo = np.max(b[neg] / n[neg])
    return float(lo), float(hi)


def check_right_cone_axis_containment(K, axis_direction, cone, z=None):
    """Axis containment (K - z) cap l inside -2 (C0 - z) cap l for a planar cone C0.

    ``l`` is the symmetry axis of ``cone`` (a VPolytope or GeneralPosition
    image): the line through its centroid with direction ``axis_direction``.
    The factor lambda* = max(-a/e, b/(-c)) for (K - z) cap l = [a, b],
    (C0 - z) cap l = [c, e].  With ``z=None`` the best point of the axis
    section is used (closed form).  The report compares lambda* with d.
    """
    f = np.asarray(axis_direction, dtype=float)
    f = f / np.linalg.norm(f)
    C = cone if isinstance(cone, VPolytope) else VPolytope(cone)
    d = C.dim
    o = C.centroid()
    a1, b1 = _line_section(K, o, f)
    c1, e1 = _line_section(C, o, f)
    if z is None:
        t = (b1 * e1 - a1 * c1) / (b1 + e1 - a1 - c1)
    else:
        t = float((np.asarray(z, dtype=float) - o) @ f)
    if not c1 < t < e1:
        raise PreconditionError("z is not in the relative interior of the axis section")
    a, b, c, e = a1 - t, b1 - t, c1 - t, e1 - t
    lam = max(-a / e, b / (-c))
    return BoundReport("axis-containment", lam, float(d), detail={"z": (o + t * f).tolist(), "K_section": [a, b], "C_section": [c, e]})


def check_fixed_axis_containment(K, L, position, tol=1e-6):
    """P_F(K' - z) inside (L - z) cap F inside -lambda P_F(K' - z) at the good center.

    K' = A K + z0 is the optimal position.  The good center is computed from a
    certificate of the position; lambda* is compared with d.
    """
    F = position.axis
    d = F.ambient_dim
    pairs = extract_position_pairs(K, L, position)
    cert = fit_john_weights(pairs, F, d)
    gc = good_center(cert.pairs, cert.weights, F, d)
    W = position.apply(K.vertices)
    zc = W.mean(axis=0) + gc.z
    Y = F.coords(W - zc)
    sec = section(L, F, point=zc)
    outer = float(np.max(Y @ sec.normals.T - sec.offsets))
    X = _section_vertices(sec)
    lam = max(gauge_vpolytope(Y, -x) for x in X)
    rep = BoundReport("fixed-axis-containment", lam, float(d), detail={"projection_excess": outer, "z": zc.tolist()})
    if outer > tol:
        rep.lhs = math.inf
    return rep


# ---------------------------------------------------------------------------
# ellipsoids with geometric semi-axes


@dataclass
class BadEllipsoidResult:
    body: HPolytope
    semi_axes: np.ndarray
    solution: FEllipsoid
    volume_ratio: BoundReport
    exact_ratio: float
    witness_length: float
    witness_direction: np.ndarray
    witness_bound: float
    witness_found: bool


def bad_ellipsoid_instance(d, s, lam, n_facets=None, cfg=None):
    """Ellipsoid with semi-axes lam, lam^2, ..., lam^d and its best ellipsoid of revolution.

    The ellipsoid enters as an inner polyhedral approximation, so the volume
    ratio against the true ellipsoid can only decrease.  The non-containment
    witness is the major semi-axis a of E cap F-perp: no translate of the open
    ball lam * int P_Fperp E' (radius lam * mu) contains a segment of length
    2a >= 2 lam mu.
    """
    if not 0 <= s <= d - 2:
        raise PreconditionError("need 0 <= s <= d - 2")
    if lam < 1:
        raise PreconditionError("lambda must be at least 1")
    if d > 3:
        raise DimensionError("the axis sweep is limited to d <= 3")
    axes = lam ** np.arange(1, d + 1, dtype=float)
    n = n_facets or (64 if d == 2 else 200)
    L = ellipsoid_inner(axes, n)
    E = solve_ellipsoid_any_axis(L, s, cfg or SolveConfig())
    logvol_E = float(np.sum(np.log(axes)))
    ratio = math.exp(E.logdet() - logvol_E)
    exact = lam ** (-(d - s) * (d - s - 1) / 2.0)
    report = BoundReport("volume-ratio", ratio, 1.0 / lam, detail={"exact_optimum": exact})
    W = E.axis.complement().basis
    Q = W @ np.diag(axes**-2.0) @ W.T
    ev, evec = np.linalg.eigh(Q)
    a = 1.0 / math.sqrt(ev[0])
    direction = W.T @ evec[:, 0]
    bound = lam * E.mu
    return BadEllipsoidResult(L, axes, E, report, exact, a, direction, bound, a >= bound * (1 - 1e-12))
