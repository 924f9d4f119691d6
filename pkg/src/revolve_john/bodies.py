"""Reference bodies and polyhedral approximations of smooth bodies."""
from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionError, PreconditionError
from .geometry import HPolytope, VPolytope, regular_simplex_vertices


def cube(d, half_width=1.0):
    """[-h, h]^d as an H-polytope (2d facets)."""
    I = np.eye(d)
    return HPolytope(np.vstack([I, -I]), np.full(2 * d, float(half_width)))


def cube_vertices(d, half_width=1.0):
    pts = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
    return VPolytope(half_width * pts)


def cross_polytope(d, radius=1.0):
    """conv{+-r e_i} as an H-polytope: <eps, x> <= r for every sign vector."""
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
    return HPolytope(signs, np.full(len(signs), float(radius)))


def cross_polytope_vertices(d, radius=1.0):
    I = np.eye(d)
    return VPolytope(radius * np.vstack([I, -I]))


def simplex_lowner(d):
    """Regular simplex inscribed in the unit ball (vertices are unit vectors)."""
    return VPolytope(regular_simplex_vertices(d))


def simplex_john(d):
    """Regular simplex circumscribed about the unit ball.

    Facets are <u_i, x> <= 1 with u_i the vertices of the inscribed simplex;
    its vertices are -d u_i.
    """
    return HPolytope(regular_simplex_vertices(d), np.ones(d + 1))


def simplex_john_vertices(d):
    return VPolytope(-d * regular_simplex_vertices(d))


def box(half_widths):
    h = np.asarray(half_widths, dtype=float)
    if np.any(h <= 0):
        raise PreconditionError("box half-widths must be positive")
    d = h.shape[0]
    I = np.eye(d)
    return HPolytope(np.vstack([I, -I]), np.concatenate([h, h]))


def sphere_directions(d, n):
    """Roughly uniform unit vectors: equally spaced angles (d=2) or a Fibonacci lattice (d=3)."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5 ** 0.5) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise DimensionError("sphere directions implemented for d <= 3")


def ball_outer(d, n=64):
    """Polytope with n tangent facets circumscribed about the unit ball."""
    U = sphere_directions(d, n)
    return HPolytope(U, np.ones(len(U)))


def ball_inner(d, n=64):
    """The tangent polytope of ``ball_outer`` shrunk so it fits inside the unit ball."""
    P = ball_outer(d, n)
    R = np.max(np.linalg.norm(P.vertices(), axis=1))
    return P.scale(1.0 / R)


def ellipsoid_outer(semi_axes, n=64):
    """Axis-parallel ellipsoid approximated from outside by n facets."""
    a = np.asarray(semi_axes, dtype=float)
    return ball_outer(a.shape[0], n).linear_image(np.diag(a))


def ellipsoid_inner(semi_axes, n=64):
    """Axis-parallel ellipsoid approximated from inside (the polytope lies in the ellipsoid)."""
    a = np.asarray(semi_axes, dtype=float)
    return ball_inner(a.shape[0], n).linear_image(np.diag(a))


def regular_polygon(k, radius=1.0, phase=0.0):
    ang = phase + 2 * np.pi * np.arange(k) / k
    return VPolytope(radius * np.column_stack([np.cos(ang), np.sin(ang)]))


def regular_triangle(apex_direction=(0.0, 1.0), circumradius=1.0):
    """Equilateral triangle centered at 0 with one vertex along ``apex_direction``."""
    u = np.asarray(apex_direction, dtype=float)
    u = u / np.linalg.norm(u)
    phase = np.arctan2(u[1], u[0])
    return regular_polygon(3, circumradius, phase)


def random_polygon(seed, k=8):
    """Seeded random convex polygon: hull of k angularly sorted points at random radii.

    Every listed point is a vertex: radii are jittered in [0.8, 1.2] and the
    angles are stratified, then non-extreme points are discarded.
    """
    rng = np.random.default_rng(seed)
    ang = np.sort((np.arange(k) + rng.uniform(0.1, 0.9, k)) * 2 * np.pi / k)
    rad = rng.uniform(0.8, 1.2, k)
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    pts *= rng.uniform(0.5, 2.0, 2)  # anisotropic stretch
    pts += rng.normal(scale=0.3, size=2)
    return VPolytope(pts).to_hpolytope()
