"""Static SVG figures for planar results."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import DimensionError  # noqa: E402
from .geometry import FEllipsoid, enumerate_vertices  # noqa: E402

CONTACT_TOL = 1e-7


def _ordered(points):
    c = points.mean(axis=0)
    ang = np.arctan2(points[:, 1] - c[1], points[:, 0] - c[0])
    return points[np.argsort(ang)]


def _closed(points):
    P = _ordered(points)
    return np.vstack([P, P[:1]])


def contact_points(result):
    """Boundary points shared by the inner and outer body of a planar result."""
    inst, sol = result.instance, result.solution
    if inst.problem == "lowner-fixed":
        V = inst.body_K.vertices
        g = sol.gauge(V)
        return V[np.abs(g - 1.0) <= 1e-6]
    L = inst.body_L
    scale = 1.0 + np.abs(L.offsets)
    if isinstance(sol, FEllipsoid):
        A = sol.operator()
        h = L.normals @ sol.center + np.linalg.norm(L.normals @ A, axis=1)
        act = L.offsets - h <= CONTACT_TOL * scale
        P = L.normals[act]
        AP = P @ A  # rows (A p)^T, A symmetric
        return sol.center + (AP @ A) / np.linalg.norm(AP, axis=1)[:, None]
    W = sol.apply(inst.body_K.vertices)
    slack = L.offsets[None, :] - W @ L.normals.T
    return W[np.any(slack <= CONTACT_TOL * scale[None, :], axis=1)]


def render_svg(result, path):
    """Draw body, ellipse or triangle, contact points and axis line to an SVG file."""
    inst, sol = result.instance, result.solution
    if inst.dimension != 2:
        raise DimensionError("figures are drawn for planar (d = 2) results only")
    plt.rcParams["svg.hashsalt"] = "revolve-john"
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = []
    if inst.body_L is not None:
        VL = enumerate_vertices(inst.body_L)
        C = _closed(VL)
        ax.fill(C[:, 0], C[:, 1], facecolor="#dde6f0", edgecolor="#34495e", lw=1.2, label="L")
        pts.append(VL)
    if inst.body_K is not None:
        VK = sol.apply(inst.body_K.vertices) if inst.problem == "general-fixed" else inst.body_K.vertices
        C = _closed(VK)
        ax.plot(C[:, 0], C[:, 1], color="#c0392b", lw=1.5, label="K" if inst.problem == "lowner-fixed" else "A K + z")
        pts.append(VK)
    if isinstance(sol, FEllipsoid):
        th = np.linspace(0.0, 2 * np.pi, 361)
        E = np.column_stack([np.cos(th), np.sin(th)]) @ sol.operator().T + sol.center
        ax.plot(E[:, 0], E[:, 1], color="#27ae60", lw=1.5, label="ellipse")
        pts.append(E)
        center = sol.center
    else:
        center = sol.apply(inst.body_K.vertices).mean(axis=0)
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    pad = 0.08 * np.max(hi - lo)
    if sol.axis.dim == 1:
        f = sol.axis.basis[0]
        r = np.linalg.norm(hi - lo)
        seg = np.array([center - r * f, center + r * f])
        ax.plot(seg[:, 0], seg[:, 1], ls="--", color="#7f8c8d", lw=1.0, label="axis")
    cp = contact_points(result)
    if len(cp):
        ax.plot(cp[:, 0], cp[:, 1], "o", color="#2c3e50", ms=5, label="contacts")
    ax.set_xlim(lo[0] - pad, hi[0] + pad)
    ax.set_ylim(lo[1] - pad, hi[1] + pad)
    ax.set_aspect("equal")
    ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.06), ncol=4, fontsize=8, frameon=False)
    ax.set_title(inst.problem, fontsize=10)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return len(cp)
