"""Small-dimension linear algebra and convex polytope primitives.

Everything here works on dense numpy arrays and is meant for desk-scale
problems (ambient dimension at most 6, a few hundred facets).  Exact
vertex enumeration and exact volumes are supported up to dimension 3;
volumes in dimensions 4 to 6 are Monte Carlo estimates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from scipy.special import gammaln

from .errors import DimensionError, EmptySetError, PreconditionError, UnboundedError

TOL_FEAS = 1e-9
TOL_SYM = 1e-12
TOL_EQ = 1e-8

MAX_EXACT_DIM = 3
MAX_MC_DIM = 6


def _as_vector(x, d=None):
    x = np.asarray(x, dtype=float).reshape(-1)
    if d is not None and x.shape[0] != d:
        raise DimensionError(f"expected a vector of length {d}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise PreconditionError("vector has non-finite entries")
    return x


def unit_ball_volume(d):
    """Volume of the Euclidean unit ball in R^d."""
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


# ---------------------------------------------------------------------------
# subspaces


def gram_schmidt(rows, tol=TOL_SYM):
    """Orthonormalize ``rows`` in order, dropping dependent ones."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    basis = []
    for r in rows:
        scale = np.linalg.norm(r)
        if scale == 0.0:
            continue
        w = r.copy()
        # two passes keep the result orthonormal to ~1e-16
        for _ in range(2):
            for b in basis:
                w -= (w @ b) * b
        n = np.linalg.norm(w)
        if n > tol * max(scale, 1.0):
            basis.append(w / n)
    d = rows.shape[1]
    return np.array(basis).reshape(len(basis), d)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace F of R^d stored by an orthonormal basis (rows).

    ``spanning_rows`` keeps whatever the caller passed in, so that files can
    be written back exactly as they were read.
    """

    ambient_dim: int
    basis: np.ndarray
    spanning_rows: np.ndarray | None = None

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(-1, self.ambient_dim)
        gram = b @ b.T
        if b.shape[0] > self.ambient_dim or not np.allclose(gram, np.eye(b.shape[0]), atol=1e-12, rtol=0):
            raise PreconditionError("subspace basis is not orthonormal")
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_rows(cls, rows, ambient_dim=None, tol=TOL_SYM):
        rows = np.asarray(rows, dtype=float)
        if rows.size == 0:
            if ambient_dim is None:
                raise DimensionError("ambient dimension needed for the zero subspace")
            return cls(ambient_dim, np.zeros((0, ambient_dim)), np.zeros((0, ambient_dim)))
        rows = np.atleast_2d(rows)
        if ambient_dim is not None and rows.shape[1] != ambient_dim:
            raise DimensionError("spanning rows do not match the ambient dimension")
        return cls(rows.shape[1], gram_schmidt(rows, tol), rows.copy())

    @classmethod
    def full(cls, d):
        return cls(d, np.eye(d), np.eye(d))

    @classmethod
    def zero(cls, d):
        return cls(d, np.zeros((0, d)), np.zeros((0, d)))

    @classmethod
    def line(cls, direction):
        return cls.from_rows([direction])

    @classmethod
    def coordinate(cls, d, indices):
        return cls.from_rows(np.eye(d)[list(indices)], ambient_dim=d)

    @property
    def dim(self):
        return self.basis.shape[0]

    def projector(self):
        return self.basis.T @ self.basis

    def complement(self):
        d = self.ambient_dim
        if self.dim == 0:
            return Subspace.full(d)
        if self.dim == d:
            return Subspace.zero(d)
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        comp = gram_schmidt(vt[self.dim:])
        return Subspace(d, comp, comp.copy())

    def coords(self, x):
        """Coordinates of x (or rows of x) in the basis of F, after projecting."""
        return np.asarray(x, dtype=float) @ self.basis.T

    def embed(self, y):
        return np.asarray(y, dtype=float) @ self.basis

    def representative(self):
        """Canonical sign-normalized basis (or normal) used for tie-breaking."""
        if self.dim == 1:
            v = self.basis[0]
        elif self.dim == self.ambient_dim - 1:
            v = self.complement().basis[0]
        else:
            return self.projector().ravel()
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size and v[nz[0]] < 0:
            v = -v
        return v


def project(F, x):
    """Orthogonal projection P_F x."""
    x = _as_vector(x, F.ambient_dim)
    return F.basis.T @ (F.basis @ x)


def diadic(p, v):
    """Matrix of the operator x -> <v, x> p."""
    p = _as_vector(p)
    v = _as_vector(v)
    if p.shape != v.shape:
        raise DimensionError("diadic product needs vectors of equal length")
    return np.outer(p, v)


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Intersection of half-spaces <normals[i], x> <= offsets[i]."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        n = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if n.shape[0] != b.shape[0]:
            raise DimensionError("need one offset per normal")
        if not (np.all(np.isfinite(n)) and np.all(np.isfinite(b))):
            raise PreconditionError("polytope data must be finite")
        if n.shape[0] and np.any(np.linalg.norm(n, axis=1) == 0):
            raise PreconditionError("half-space normals must be nonzero")
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", b)

    @property
    def dim(self):
        return self.normals.shape[1]

    def __len__(self):
        return self.normals.shape[0]

    def slack(self, x):
        return self.offsets - self.normals @ np.asarray(x, dtype=float).T

    def contains(self, x, tol=TOL_FEAS):
        s = self.slack(x)
        scale = (1.0 + np.abs(self.offsets))
        if s.ndim == 2:
            scale = scale[:, None]
        return np.all(s >= -tol * scale, axis=0)

    def translate(self, w):
        w = _as_vector(w, self.dim)
        return HPolytope(self.normals, self.offsets + self.normals @ w)

    def scale(self, c):
        if c <= 0:
            raise PreconditionError("scale factor must be positive")
        return HPolytope(self.normals, self.offsets * c)

    def linear_image(self, M):
        """Image {M x : x in P} for invertible M."""
        Minv = np.linalg.inv(np.asarray(M, dtype=float))
        return HPolytope(self.normals @ Minv, self.offsets)

    def normalized(self):
        """Same polytope with unit normals."""
        nrm = np.linalg.norm(self.normals, axis=1)
        return HPolytope(self.normals / nrm[:, None], self.offsets / nrm)

    def is_bounded(self):
        return halfspaces_bounded(self.normals)

    def vertices(self, tol=TOL_FEAS):
        return enumerate_vertices(self, tol)


@dataclass(frozen=True, eq=False)
class VPolytope:
    """Convex hull of a finite point set (rows of ``vertices``)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.shape[0] == 0:
            raise EmptySetError("a V-polytope needs at least one point")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("vertex coordinates must be finite")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def __len__(self):
        return self.vertices.shape[0]

    def centroid(self):
        """Mean of the listed points (not the volume centroid)."""
        return self.vertices.mean(axis=0)

    def translate(self, w):
        return VPolytope(self.vertices + _as_vector(w, self.dim))

    def linear_image(self, M):
        return VPolytope(self.vertices @ np.asarray(M, dtype=float).T)

    def is_full_dimensional(self, tol=1e-10):
        v = self.vertices - self.vertices[0]
        return self.vertices.shape[0] > self.dim and np.linalg.matrix_rank(v, tol=tol) == self.dim

    def to_hpolytope(self):
        return hull_to_hpolytope(self.vertices)


def halfspaces_bounded(normals):
    """True iff {x : N x <= b} is bounded (for any b making it nonempty).

    Boundedness is equivalent to the recession cone {y : N y <= 0} being {0},
    which by Stiemke's lemma holds iff N has full column rank and some strictly
    positive lambda has N^T lambda = 0.
    """
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    m, d = N.shape
    if m <= d or np.linalg.matrix_rank(N) < d:
        return False
    res = linprog(np.zeros(m), A_eq=N.T, b_eq=np.zeros(d), bounds=[(1.0, None)] * m, method="highs")
    return res.status == 0


def hull_to_hpolytope(points):
    """H-description of conv(points) for a full-dimensional point set."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    if d == 1:
        lo, hi = pts.min(), pts.max()
        if hi - lo <= 0:
            raise PreconditionError("degenerate 1-dimensional hull")
        return HPolytope(np.array([[1.0], [-1.0]]), np.array([hi, -lo]))
    try:
        hull = ConvexHull(pts)
    except Exception as exc:  # qhull raises its own error type
        raise PreconditionError(f"convex hull failed: {exc}") from exc
    eq = hull.equations
    normals, offsets = eq[:, :d], -eq[:, d]
    keep = []
    for i in range(len(normals)):
        if not any(np.allclose(normals[i], normals[j], atol=1e-10) and abs(offsets[i] - offsets[j]) < 1e-10 for j in keep):
            keep.append(i)
    return HPolytope(normals[keep], offsets[keep])


def enumerate_vertices(P, tol=TOL_FEAS, max_combinations=5_000_000):
    """Vertices of a bounded H-polytope by brute-force d-subsets of facets.

    Every d-subset with a nonsingular system is solved; solutions satisfying
    all inequalities within ``tol * (1 + |b_i|)`` are kept and deduplicated.
    """
    N, b = P.normals, P.offsets
    m, d = N.shape
    if d == 0:
        return np.zeros((1, 0))
    if m < d:
        raise UnboundedError("fewer facets than dimensions")
    total = math.comb(m, d)
    if total > max_combinations:
        raise DimensionError(f"{total} facet combinations is too many for brute-force enumeration")
    scale = 1.0 + np.abs(b)
    found = []
    combos = itertools.combinations(range(m), d)
    while True:
        chunk = np.array(list(itertools.islice(combos, 20000)), dtype=int)
        if chunk.size == 0:
            break
        A = N[chunk]
        rhs = b[chunk]
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-12 * np.prod(np.linalg.norm(A, axis=2), axis=1)
        if not np.any(ok):
            continue
        x = np.linalg.solve(A[ok], rhs[ok][..., None])[..., 0]
        slack = b[None, :] - x @ N.T
        feas = np.all(slack >= -tol * scale[None, :], axis=1)
        found.append(x[feas])
    if not found:
        raise EmptySetError("polytope has no vertices")
    pts = np.concatenate(found)
    if pts.shape[0] == 0:
        raise EmptySetError("polytope has no vertices")
    return _dedupe(pts, 1e-7)


def _dedupe(pts, tol):
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    kept = []
    for p in pts:
        if not kept or np.min(np.linalg.norm(np.array(kept) - p, axis=1)) > tol * (1.0 + np.linalg.norm(p)):
            kept.append(p)
    return np.array(kept)


# ---------------------------------------------------------------------------
# ellipsoids of revolution


@dataclass(frozen=True, eq=False)
class FEllipsoid:
    """Ellipsoid E = A B^d + z whose operator A is M1 on F and mu*Id on F-perp."""

    axis: Subspace
    center: np.ndarray
    shape_on_F: np.ndarray
    mu: float = 1.0

    def __post_init__(self):
        d, s = self.axis.ambient_dim, self.axis.dim
        z = _as_vector(self.center, d)
        M1 = np.asarray(self.shape_on_F, dtype=float).reshape(s, s)
        if not np.allclose(M1, M1.T, atol=TOL_SYM * max(1.0, np.abs(M1).max(initial=0.0)), rtol=0):
            raise PreconditionError("shape on F must be symmetric")
        M1 = 0.5 * (M1 + M1.T)
        if s and np.linalg.eigvalsh(M1).min() <= 0:
            raise PreconditionError("shape on F must be positive definite")
        if s < d and not self.mu > 0:
            raise PreconditionError("mu must be positive")
        object.__setattr__(self, "center", z)
        if s == d:
            object.__setattr__(self, "mu", 1.0)  # unused when F is the whole space
        object.__setattr__(self, "shape_on_F", M1)
        if s < d:
            object.__setattr__(self, "mu", float(self.mu))

    @classmethod
    def ball(cls, d, radius=1.0, center=None, axis=None):
        axis = axis if axis is not None else Subspace.full(d)
        center = np.zeros(d) if center is None else center
        return cls(axis, center, radius * np.eye(axis.dim), radius)

    @property
    def dim(self):
        return self.axis.ambient_dim

    def operator(self):
        U = self.axis.basis
        d = self.dim
        return U.T @ self.shape_on_F @ U + self.mu * (np.eye(d) - U.T @ U)

    def logdet(self):
        s = self.axis.dim
        ld = np.linalg.slogdet(self.shape_on_F)[1] if s else 0.0
        return ld + (self.dim - s) * math.log(self.mu) if s < self.dim else ld

    def volume(self):
        return unit_ball_volume(self.dim) * math.exp(self.logdet())

    def support(self, p):
        return support_ellipsoid(self, p)

    def gauge(self, x):
        """||A^{-1}(x - z)||, vectorized over rows of x."""
        A = self.operator()
        y = np.linalg.solve(A, (np.atleast_2d(x) - self.center).T)
        return np.linalg.norm(y, axis=0)

    def contains(self, x, tol=TOL_FEAS):
        return self.gauge(x) <= 1.0 + tol

    def translate(self, w):
        return FEllipsoid(self.axis, self.center + _as_vector(w, self.dim), self.shape_on_F, self.mu)

    def scaled(self, c):
        """Homothetic copy about the center."""
        return FEllipsoid(self.axis, self.center, c * self.shape_on_F, c * self.mu)

    def semi_axes(self):
        return np.sort(np.linalg.eigvalsh(self.operator()))


def support_ellipsoid(E, p):
    """h_E(p) = <p, z> + ||A p||."""
    p = _as_vector(p, E.dim)
    return float(p @ E.center + np.linalg.norm(E.operator() @ p))


@dataclass(frozen=True)
class ContactPair:
    """Contact point v and normal p normalized so that <p, v> = 1."""

    v: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _as_vector(self.v)
        p = _as_vector(self.p, v.shape[0])
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "p", p)

    def pairing(self):
        return float(self.p @ self.v)

    def check(self, tol=1e-10):
        if abs(self.pairing() - 1.0) > tol:
            raise PreconditionError(f"contact pair has <p, v> = {self.pairing()!r}, expected 1")
        return self


# ---------------------------------------------------------------------------
# radii


def inradius_chebyshev(P, *, polish=True):
    """Largest inscribed ball of an H-polytope: returns (radius, center).

    Solves max r s.t. <p_i, c> + r ||p_i|| <= b_i with HiGHS, then (by
    default) re-solves the square system of active constraints so the radius
    is accurate to roughly machine precision instead of the LP tolerance.
    """
    N, b = P.normals, P.offsets
    m, d = N.shape
    nrm = np.linalg.norm(N, axis=1)
    A = np.hstack([N, nrm[:, None]])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status == 2:
        raise EmptySetError("polytope is empty")
    if res.status == 3:
        raise UnboundedError("polytope contains arbitrarily large balls")
    if res.status != 0:
        raise EmptySetError(f"Chebyshev LP failed: {res.message}")
    x = res.x
    if polish:
        x = _polish_active(A, b, x)
    return float(x[-1]), x[:-1].copy()


def _polish_active(A, b, x):
    slack = b - A @ x
    scale = 1.0 + np.abs(b)
    for thresh in (1e-9, 1e-7):
        act = slack <= thresh * scale
        if np.count_nonzero(act) < A.shape[1]:
            continue
        if np.linalg.matrix_rank(A[act], tol=1e-10) < A.shape[1]:
            continue
        y, *_ = np.linalg.lstsq(A[act], b[act], rcond=None)
        if np.all(b - A @ y >= -1e-12 * scale) and np.allclose(A[act] @ y, b[act], atol=1e-11 * scale[act].max()):
            if y[-1] >= x[-1] - 1e-7 * (1.0 + abs(x[-1])):
                return y
    return x


def _circumsphere(S):
    """Smallest sphere through the affinely independent rows of S."""
    p0 = S[0]
    if S.shape[0] == 1:
        return p0.copy(), 0.0
    U = S[1:] - p0
    G = U @ U.T
    rhs = 0.5 * np.sum(U * U, axis=1)
    lam, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    c = p0 + lam @ U
    r = max(np.linalg.norm(S - c, axis=1))
    return c, float(r)


def minimal_enclosing_ball(points, tol=1e-12):
    """Move-to-front minimal enclosing ball with a deterministic point order."""
    pts = [np.asarray(p, dtype=float) for p in np.atleast_2d(points)]
    if not pts:
        raise EmptySetError("no points")
    d = pts[0].shape[0]

    def mtf(order, end, boundary):
        if boundary:
            c, r = _circumsphere(np.array(boundary))
        else:
            c, r = pts[order[0]].copy(), 0.0
            if end == 0:
                return c, -1.0
        if len(boundary) == d + 1:
            return c, r
        i = 0
        while i < end:
            k = order[i]
            if r < 0 or np.linalg.norm(pts[k] - c) > r + tol * (1.0 + r):
                c, r = mtf(order, i, boundary + [pts[k]])
                order.insert(0, order.pop(i))
            i += 1
        return c, r

    order = list(range(len(pts)))
    c, r = mtf(order, len(pts), [])
    return max(r, 0.0), c


def circumradius(P):
    """Radius and center of the smallest ball containing a V-polytope."""
    V = P.vertices if isinstance(P, VPolytope) else np.atleast_2d(P)
    r, c = minimal_enclosing_ball(V)
    return float(r), c


# ---------------------------------------------------------------------------
# polarity, sections, volume


def polar_vpolytope(P):
    """Polar {x : <v_i, x> <= 1} of conv(vertices); requires 0 in the interior."""
    V = P.vertices if isinstance(P, VPolytope) else np.atleast_2d(P)
    if not halfspaces_bounded(V):
        raise PreconditionError("origin is not an interior point of the hull; polar is unbounded")
    return HPolytope(V.copy(), np.ones(V.shape[0]))


def section(P, F, point=None, tol=TOL_FEAS):
    """(P - point) intersected with F, in orthonormal coordinates of F.

    The result lives in R^s with s = dim F: half-spaces <U p_i, y> <= b_i - <p_i, point>.
    """
    if F.ambient_dim != P.dim:
        raise DimensionError("subspace and polytope live in different spaces")
    if F.dim == 0:
        raise DimensionError("section by the zero subspace is a point")
    b = P.offsets.copy()
    if point is not None:
        b = b - P.normals @ _as_vector(point, P.dim)
    N = F.coords(P.normals)
    nrm_full = np.linalg.norm(P.normals, axis=1)
    nrm = np.linalg.norm(N, axis=1)
    flat = nrm <= 1e-13 * nrm_full
    if np.any(b[flat] < -tol * (1.0 + np.abs(b[flat]))):
        raise EmptySetError("subspace misses the polytope")
    Q = HPolytope(N[~flat], b[~flat])
    try:
        r, _ = inradius_chebyshev(Q, polish=False)
    except EmptySetError as exc:
        raise EmptySetError("subspace misses the polytope") from exc
    return Q


def volume(P, *, n_samples=400_000, seed=0, return_stderr=False):
    """Volume of a bounded H-polytope.

    Exact (vertex enumeration and hull triangulation) for dimension <= 3;
    Monte Carlo over the bounding box for dimensions 4 to 6, in which case
    ``return_stderr=True`` also returns the standard error.  Lower-dimensional
    sets have volume 0.
    """
    d = P.dim
    if d > MAX_MC_DIM:
        raise DimensionError(f"volume is supported up to dimension {MAX_MC_DIM}")
    if not P.is_bounded():
        raise UnboundedError("volume of an unbounded polytope")
    if d <= MAX_EXACT_DIM:
        r, _ = inradius_chebyshev(P, polish=False)
        if r <= 1e-12:
            val = 0.0
        else:
            V = enumerate_vertices(P)
            if d == 1:
                val = float(V.max() - V.min())
            else:
                val = float(ConvexHull(V).volume)
        return (val, 0.0) if return_stderr else val
    lo, hi = bounding_box(P)
    rng = np.random.default_rng(seed)
    box = float(np.prod(hi - lo))
    hits = 0
    done = 0
    while done < n_samples:
        k = min(100_000, n_samples - done)
        x = lo + (hi - lo) * rng.random((k, d))
        hits += int(np.count_nonzero(np.all(x @ P.normals.T <= P.offsets, axis=1)))
        done += k
    frac = hits / n_samples
    val = box * frac
    err = box * math.sqrt(max(frac * (1 - frac), 0.0) / n_samples)
    return (val, err) if return_stderr else val


def bounding_box(P):
    d = P.dim
    lo, hi = np.empty(d), np.empty(d)
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        for sign, out in ((1.0, lo), (-1.0, hi)):
            res = linprog(sign * e, A_ub=P.normals, b_ub=P.offsets, bounds=[(None, None)] * d, method="highs")
            if res.status == 3:
                raise UnboundedError("polytope is unbounded")
            if res.status != 0:
                raise EmptySetError("polytope is empty")
            out[j] = res.x[j]
    return lo, hi


def gauge_vpolytope(points, y):
    """Minkowski gauge of y with respect to conv(points) (0 must be interior)."""
    V = np.atleast_2d(points)
    y = _as_vector(y, V.shape[1])
    res = linprog(np.ones(V.shape[0]), A_eq=V.T, b_eq=y, bounds=[(0, None)] * V.shape[0], method="highs")
    if res.status != 0:
        return math.inf
    return float(res.fun)


def regular_simplex_vertices(d):
    """d+1 unit vectors summing to zero: the vertices of the simplex inscribed in B^d."""
    E = np.eye(d + 1) - 1.0 / (d + 1)
    Q = gram_schmidt(E[:d])
    pts = E @ Q.T
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return pts
