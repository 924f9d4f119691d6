"""Contact pairs and first-order optimality certificates.

A certificate is a set of contact pairs (v_i, p_i), normalized so that
<p_i, v_i> = 1, together with positive weights alpha_i satisfying

* P_F (sum alpha_i p_i (x) v_i) P_F = P_F        (decomposition)
* sum alpha_i p_i = 0                          (zero sum)
* sum alpha_i = d                              (trace)
* sum alpha_i (p_i (x) v_i - v_i (x) p_i) = 0     (symmetry, rotated axis only)

where (p (x) v) x = <v, x> p.  All pairs are expressed in a frame whose
origin is an interior point of the inner body (the ellipsoid center, the
centroid of a positioned polytope).  Failure to find weights means "no
certificate at tolerance", which is not a proof of non-optimality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import CertificateNotFound, NoContactError, PreconditionError
from .geometry import (
    ContactPair,
    HPolytope,
    VPolytope,
    enumerate_vertices,
    gauge_vpolytope,
    section,
)

CONTACT_TOL = 1e-7
CERT_TOL = 1e-6
MERGE_ANGLE = 1e-3


@dataclass
class JohnCertificate:
    pairs: list
    weights: np.ndarray
    residual_decomposition: float
    residual_zerosum: float
    residual_trace: float
    residual_symmetry: float | None = None
    residual_zerosum_v: float | None = None
    tol: float = CERT_TOL

    @property
    def valid(self):
        return all(r <= self.tol for r in self.residuals().values())

    def residuals(self):
        out = {
            "decomposition": self.residual_decomposition,
            "zerosum": self.residual_zerosum,
            "trace": self.residual_trace,
        }
        if self.residual_symmetry is not None:
            out["symmetry"] = self.residual_symmetry
        if self.residual_zerosum_v is not None:
            out["zerosum_v"] = self.residual_zerosum_v
        return out

    def __len__(self):
        return len(self.pairs)


# ---------------------------------------------------------------------------
# contact extraction


def _is_contact(slack, b, tol):
    return slack <= tol * (1.0 + np.abs(b))


def extract_contact_pairs(E, L, tol=CONTACT_TOL):
    """Contact pairs of an ellipsoid E inside L, in the frame centered at E's center.

    For a touching facet <p, x> <= b the pair is v = A u, p' = A^{-1} u with
    u = A p / ||A p||, i.e. v = A^2 p / ||A p|| and p' = p / ||A p||.
    """
    A = E.operator()
    P, b = L.normals, L.offsets
    Ap = P @ A  # rows are A p_i (A symmetric)
    h = np.linalg.norm(Ap, axis=1)
    rel = b - P @ E.center
    slack = rel - h
    if np.any(slack < -tol * (1.0 + np.abs(b))):
        raise PreconditionError("ellipsoid is not contained in the polytope")
    idx = np.flatnonzero(_is_contact(slack, b, tol))
    if idx.size == 0:
        raise NoContactError("the ellipsoid touches no facet")
    pairs = []
    for i in idx:
        u = Ap[i] / h[i]
        pairs.append(ContactPair(A @ u, P[i] / h[i]))
    return pairs


def extract_position_pairs(K, L, position, tol=CONTACT_TOL):
    """Contact pairs of the image A K + z inside L, centered at the image centroid."""
    W = position.apply(K.vertices)
    c = W.mean(axis=0)
    P, b = L.normals, L.offsets
    slack = b[:, None] - P @ W.T
    if np.any(slack < -tol * (1.0 + np.abs(b))[:, None]):
        raise PreconditionError("positioned body is not contained in L")
    pairs = []
    for j, k in zip(*np.nonzero(slack <= tol * (1.0 + np.abs(b))[:, None])):
        v = W[k] - c
        pairs.append(ContactPair(v, P[j] / (P[j] @ v)))
    if not pairs:
        raise NoContactError("the positioned body touches no facet")
    return pairs


def lowner_contact_pairs(K, tol=CONTACT_TOL):
    """Pairs (u, u) for the vertices of K on the unit sphere."""
    V = K.vertices
    r = np.linalg.norm(V, axis=1)
    if np.any(r > 1.0 + 1e-9):
        raise PreconditionError("K is not inside the unit ball")
    idx = np.flatnonzero(r >= 1.0 - tol)
    if idx.size == 0:
        raise NoContactError("no vertex lies on the unit sphere")
    return [ContactPair(V[i] / r[i], V[i] / r[i]) for i in idx]


# ---------------------------------------------------------------------------
# weight fitting


def _equations(pairs, F, d, symmetry, zerosum_v):
    U = F.basis
    blocks = []
    targets = []
    Vs = np.array([q.v for q in pairs])
    Ps = np.array([q.p for q in pairs])
    s = F.dim
    if s:
        # U (p v^T) U^T for each pair, flattened
        blk = np.einsum("ia,ma,mb,jb->ijm", U, Ps, Vs, U).reshape(s * s, -1)
        blocks.append(blk)
        targets.append(np.eye(s).ravel())
    blocks.append(Ps.T)
    targets.append(np.zeros(d))
    blocks.append(np.ones((1, len(pairs))))
    targets.append(np.array([float(d)]))
    if symmetry:
        iu = np.triu_indices(d, 1)
        skew = np.einsum("ma,mb->mab", Ps, Vs)
        skew = skew - skew.transpose(0, 2, 1)
        blocks.append(skew[:, iu[0], iu[1]].T)
        targets.append(np.zeros(len(iu[0])))
    if zerosum_v and s:
        blocks.append(U @ Vs.T)
        targets.append(np.zeros(s))
    return np.vstack(blocks), np.concatenate(targets)


def certificate_residuals(pairs, weights, F, d):
    """Residuals of the certificate equations recomputed from full d x d matrices."""
    a = np.asarray(weights, dtype=float)
    Vs = np.array([q.v for q in pairs])
    Ps = np.array([q.p for q in pairs])
    PF = F.projector()
    S = np.einsum("m,ma,mb->ab", a, Ps, Vs)
    dec = float(np.linalg.norm(PF @ S @ PF - PF, 2))
    zs = float(np.linalg.norm(a @ Ps))
    tr = float(abs(a.sum() - d))
    sym = float(np.linalg.norm(S - S.T, 2))
    zv = float(np.linalg.norm(PF @ (a @ Vs)))
    return {"decomposition": dec, "zerosum": zs, "trace": tr, "symmetry": sym, "zerosum_v": zv}


def _build(pairs, weights, F, d, symmetry, zerosum_v, tol):
    r = certificate_residuals(pairs, weights, F, d)
    return JohnCertificate(
        list(pairs),
        np.asarray(weights, dtype=float),
        r["decomposition"],
        r["zerosum"],
        r["trace"],
        r["symmetry"] if symmetry else None,
        r["zerosum_v"] if zerosum_v else None,
        tol,
    )


def _fit(pairs, F, d, symmetry, zerosum_v):
    """Nonnegative solution of the stacked equations.

    The minimum-norm solution is preferred when it is nonnegative (it keeps
    the symmetry of symmetric configurations); otherwise a Tikhonov-damped
    NNLS picks a support, the minimum-norm solution on that support is tried,
    and plain NNLS is the fallback.
    """
    M, t = _equations(pairs, F, d, symmetry, zerosum_v)
    scale = 1.0 + np.linalg.norm(t)

    def ok(w):
        return np.all(w >= 0) and np.linalg.norm(M @ w - t) <= 1e-10 * scale

    w = np.linalg.lstsq(M, t, rcond=None)[0]
    w[np.abs(w) < 1e-14] = 0.0
    if ok(w):
        return w
    m = M.shape[1]
    eps = 1e-6
    wr, _ = nnls(np.vstack([M, eps * np.eye(m)]), np.concatenate([t, np.zeros(m)]), maxiter=50 * m + 100)
    sup = wr > 1e-9
    if np.any(sup):
        w = np.zeros(m)
        w[sup] = np.linalg.lstsq(M[:, sup], t, rcond=None)[0]
        if ok(w):
            return w
    w, _ = nnls(M, t, maxiter=50 * m + 100)
    return w


def _merge_close(pairs, weights, angle):
    """Sum the weights of pairs whose v and p directions are within ``angle``."""
    order = np.argsort(-weights)
    kept, kw = [], []
    for i in order:
        q = pairs[i]
        for j, r in enumerate(kept):
            cv = q.v @ r.v / (np.linalg.norm(q.v) * np.linalg.norm(r.v))
            cp = q.p @ r.p / (np.linalg.norm(q.p) * np.linalg.norm(r.p))
            if math.acos(np.clip(cv, -1.0, 1.0)) < angle and math.acos(np.clip(cp, -1.0, 1.0)) < angle:
                kw[j] += weights[i]
                break
        else:
            kept.append(q)
            kw.append(weights[i])
    return kept, np.array(kw)


def fit_john_weights(
    pairs,
    F,
    d=None,
    require_symmetry=False,
    *,
    require_zerosum_v=False,
    prune=None,
    merge_angle=MERGE_ANGLE,
    tol=CERT_TOL,
    raise_on_failure=True,
):
    """Nonnegative weights for the certificate equations.

    Parameters
    ----------
    pairs : list of ContactPair
    F : Subspace
    d : int, optional
        Ambient dimension; taken from F by default.
    require_symmetry : bool
        Add the symmetry equation (rotated-axis optimality).
    require_zerosum_v : bool
        Add sum alpha_i P_F v_i = 0 (needed for the contact-polytope inclusion).
    prune : bool or None
        Drop the smallest weight repeatedly while the certificate stays valid.
        ``None`` prunes only when more than 2d^2 + d + 1 pairs carry weight.

    Raises
    ------
    CertificateNotFound
        The least-squares residual exceeds ``tol``; ``exc.certificate`` holds
        the best attempt.
    """
    if not pairs:
        raise PreconditionError("no contact pairs")
    d = F.ambient_dim if d is None else d
    w = _fit(pairs, F, d, require_symmetry, require_zerosum_v)
    cert = _build(pairs, w, F, d, require_symmetry, require_zerosum_v, tol)
    if not cert.valid:
        if raise_on_failure:
            raise CertificateNotFound("no certificate at tolerance", certificate=cert)
        return cert
    live = [q for q, a in zip(pairs, w) if a > 0]
    w = w[w > 0]
    if merge_angle:
        mp, mw = _merge_close(live, w, merge_angle)
        if len(mp) < len(live):
            trial = _build(mp, mw, F, d, require_symmetry, require_zerosum_v, tol)
            if trial.valid:
                live, w = mp, mw
    cert = _build(live, w, F, d, require_symmetry, require_zerosum_v, tol)
    if prune is None:
        prune = len(live) > 2 * d * d + d + 1
    while prune and len(live) > 1:
        k = int(np.argmin(w))
        rest = live[:k] + live[k + 1:]
        w2 = _fit(rest, F, d, require_symmetry, require_zerosum_v)
        trial = _build(rest, w2, F, d, require_symmetry, require_zerosum_v, tol)
        if not trial.valid:
            break
        keep = w2 > 0
        live = [q for q, a in zip(rest, keep) if a]
        w = w2[keep]
        cert = _build(live, w, F, d, require_symmetry, require_zerosum_v, tol)
    return cert


@dataclass
class EquationCheck:
    name: str
    residual: float
    passed: bool


@dataclass
class CertificateReport:
    checks: list
    n_pairs: int
    caratheodory_bound: int

    @property
    def passed(self):
        return all(c.passed for c in self.checks) and self.n_pairs <= self.caratheodory_bound


def verify_certificate(cert, F, d=None, tol=CERT_TOL):
    """Recompute every residual of ``cert`` and compare with ``tol``."""
    d = F.ambient_dim if d is None else d
    r = certificate_residuals(cert.pairs, cert.weights, F, d)
    checks = []
    for q in cert.pairs:
        if abs(q.pairing() - 1.0) > 1e-10:
            checks.append(EquationCheck("pair-normalization", abs(q.pairing() - 1.0), False))
            break
    neg = float(np.min(cert.weights)) if len(cert.weights) else -1.0
    checks.append(EquationCheck("positive-weights", max(0.0, -neg), neg > 0))
    names = ["decomposition", "zerosum", "trace"]
    if cert.residual_symmetry is not None:
        names.append("symmetry")
    if cert.residual_zerosum_v is not None:
        names.append("zerosum_v")
    checks += [EquationCheck(n, r[n], r[n] <= tol) for n in names]
    return CertificateReport(checks, len(cert.pairs), 2 * d * d + d + 1)


def unit_vector_identities(E, cert):
    """Residuals of the unit-vector form of an ellipsoid certificate.

    With u_i = A^{-1} v_i the identities are sum alpha P_F u (x) P_F u = Id_F,
    sum alpha P_F u = 0, sum alpha ||P_F u||^2 = s, sum alpha ||P_Fperp u||^2 = d - s.
    """
    F = E.axis
    d, s = F.ambient_dim, F.dim
    A = E.operator()
    Uu = np.linalg.solve(A, np.array([q.v for q in cert.pairs]).T).T
    a = cert.weights
    Y = F.coords(Uu)
    Pperp = Uu - F.embed(Y)
    out = {
        "unit_norm": float(np.max(np.abs(np.linalg.norm(Uu, axis=1) - 1.0))),
        "decomposition_F": float(np.linalg.norm(np.einsum("m,ma,mb->ab", a, Y, Y) - np.eye(s), 2)) if s else 0.0,
        "zerosum_F": float(np.linalg.norm(a @ Y)) if s else 0.0,
        "mass_F": float(abs(a @ np.sum(Y * Y, axis=1) - s)),
        "mass_Fperp": float(abs(a @ np.sum(Pperp * Pperp, axis=1) - (d - s))),
    }
    return out


# ---------------------------------------------------------------------------
# good center and contact polytopes


@dataclass
class GoodCenter:
    z: np.ndarray
    v: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    residual_zerosum_p: float = 0.0
    residual_zerosum_v: float = 0.0


def good_center(pairs, weights, F, d=None):
    """Translation making the projected weighted contact sum vanish.

    Returns z = P_F(sum alpha_i v_i)/(d+1) with the transformed pairs
    v'_i = v_i - z, p'_i = p_i/(1 - <z, p_i>) and weights
    c_i = alpha_i (1 - <z, p_i>), so that sum c_i p'_i = 0 and
    sum c_i P_F v'_i = 0.

    Raises
    ------
    PreconditionError
        Some 1 - <z, p_i> is not positive.
    """
    d = F.ambient_dim if d is None else d
    a = np.asarray(weights, dtype=float)
    V = np.array([q.v for q in pairs])
    P = np.array([q.p for q in pairs])
    PF = F.projector()
    z = PF @ (a @ V) / (d + 1)
    den = 1.0 - P @ z
    if np.any(den <= 0):
        raise PreconditionError("good center outside the contact half-spaces: some 1 - <z, p_i> <= 0")
    c = a * den
    Pn = P / den[:, None]
    Vn = V - z
    r1 = float(np.linalg.norm(c @ Pn))
    r2 = float(np.linalg.norm(PF @ (c @ Vn)))
    return GoodCenter(z, Vn, Pn, c, r1, r2)


@dataclass
class ContactPolytopes:
    K_in: VPolytope
    L_out: HPolytope
    inclusion_factor: float | None = None
    inclusion_margin: float | None = None
    weights: np.ndarray | None = None


def inclusion_factor(K_in, L_out, F):
    """Smallest lambda with L_out cap F inside -lambda P_F K_in (F-coordinates)."""
    sec = section(L_out, F)
    X = enumerate_vertices(sec) if F.dim > 1 else _interval_vertices(sec)
    W = F.coords(K_in.vertices)
    return max(gauge_vpolytope(W, -x) for x in X)


def _interval_vertices(P):
    """Endpoints of a 1-dimensional H-polytope."""
    n, b = P.normals[:, 0], P.offsets
    hi = np.min(b[n > 0] / n[n > 0]) if np.any(n > 0) else math.inf
    lo = np.max(b[n < 0] / n[n < 0]) if np.any(n < 0) else -math.inf
    return np.array([[lo], [hi]])


def contact_polytopes(pairs, F=None, d=None):
    """K_in = conv{v_i} and L_out = {x : <p_i, x> <= 1}.

    If F is given and weights satisfying the certificate equations together
    with sum alpha_i P_F v_i = 0 exist, the inclusion L_out cap F inside
    -d P_F K_in is checked and its margin d - lambda* reported.
    """
    V = np.array([q.v for q in pairs])
    P = np.array([q.p for q in pairs])
    out = ContactPolytopes(VPolytope(V), HPolytope(P, np.ones(len(pairs))))
    if F is None or F.dim == 0:
        return out
    d = F.ambient_dim if d is None else d
    cert = fit_john_weights(pairs, F, d, require_zerosum_v=True, prune=False, raise_on_failure=False)
    if not cert.valid:
        return out
    lam = inclusion_factor(out.K_in, out.L_out, F)
    out.inclusion_factor = lam
    out.inclusion_margin = d - lam
    out.weights = cert.weights
    return out


def lowner_certificate(K, F, d=None, tol=CONTACT_TOL, **kw):
    """Certificate for K in Löwner position with axis F (pairs (u, u))."""
    pairs = lowner_contact_pairs(K, tol)
    return fit_john_weights(pairs, F, d, **kw)


def lowner_normalize(K, E):
    """The position A^{-1}(K - z) of K, for E = A B + z the enclosing ellipsoid."""
    A = E.operator()
    return VPolytope(np.linalg.solve(A, (K.vertices - E.center).T).T)


def ellipsoid_certificate(E, L, require_symmetry=False, **kw):
    """Extract contact pairs of E in L and fit certificate weights."""
    return fit_john_weights(extract_contact_pairs(E, L), E.axis, E.dim, require_symmetry, **kw)


def position_certificate(K, L, position, **kw):
    return fit_john_weights(extract_position_pairs(K, L, position), position.axis, K.dim, **kw)
