"""Convex polytopes given by heights over unit normals, star bodies, ellipsoids.

A :class:`HeightBody` is the Wulff shape ``{x : <x, u_j> <= h_j for all j}``.
Vertices are derived on demand; redundant constraints stay in storage and
are reported through :attr:`HeightBody.active`.
"""
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import (
    BadHeight, DegenerateInput, DimensionUnsupported, InputError, InternalUnbounded,
    NoConvergence, QNotInvariant, UnboundedBody,
)
from .group import DEDUP_TOL, TolerantIndex, orbit, points_hemisphere_witness

DENOM_TOL = 1e-12
FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HeightBody:
    normals: np.ndarray
    heights: np.ndarray

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def size(self):
        return self.normals.shape[0]

    def with_heights(self, heights):
        """Same normals, new positive heights (boundedness is inherited)."""
        h = np.array(heights, dtype=float).reshape(-1)
        if h.shape != self.heights.shape:
            raise InputError("expected %d heights" % self.size)
        if np.any(~(h > 0)):
            raise BadHeight("heights must be positive")
        h.setflags(write=False)
        return HeightBody(self.normals, h)

    def scaled(self, s):
        return self.with_heights(self.heights * float(s))

    @cached_property
    def _vertex_data(self):
        if self.dim == 2:
            return _vertices_2d(self.normals, self.heights)
        if self.dim == 3:
            return _vertices_3d(self.normals, self.heights)
        raise DimensionUnsupported("vertex enumeration supports n = 2, 3 only")

    @property
    def vertices(self):
        return self._vertex_data[0]

    @property
    def active(self):
        """Boolean mask of constraints that support a facet of positive size."""
        return self._vertex_data[1]

    @property
    def facet_order(self):
        """2-D only: active facet indices in counter-clockwise order.

        Vertex ``k`` is shared by facets ``facet_order[k]`` and
        ``facet_order[k + 1]`` (cyclically).
        """
        if self.dim != 2:
            raise DimensionUnsupported("facet_order is only defined in the plane")
        return self._vertex_data[2]


def make_height_body(normals, heights, tol=DEDUP_TOL):
    """Validate and build a height body."""
    N = np.atleast_2d(np.array(normals, dtype=float))
    h = np.array(heights, dtype=float).reshape(-1)
    if N.shape[0] != h.shape[0]:
        raise InputError("got %d normals but %d heights" % (N.shape[0], h.shape[0]))
    if np.any(~(h > 0)) or np.any(~np.isfinite(h)):
        raise BadHeight("heights must be positive and finite")
    if np.any(np.abs(np.linalg.norm(N, axis=1) - 1.0) > tol):
        raise InputError("normals must be unit vectors")
    index = TolerantIndex(tol)
    for u in N:
        if not index.add(u)[1]:
            raise InputError("normals must be distinct")
    w = points_hemisphere_witness(N)
    if w is not None:
        raise UnboundedBody("normals lie in the closed hemisphere <., u> >= 0 for u = %s" % np.round(w, 6))
    N.setflags(write=False)
    h.setflags(write=False)
    return HeightBody(N, h)


def radial(K, u):
    """Radial function and the facet that attains it (lowest index on ties).

    Accepts one direction or a stack of directions; returns ``(rho, facet)``
    as scalars or arrays accordingly.
    """
    U = np.asarray(u, dtype=float)
    single = U.ndim == 1
    U = np.atleast_2d(U)
    dots = U @ K.normals.T
    with np.errstate(divide="ignore"):
        ratio = np.where(dots > DENOM_TOL, K.heights / np.where(dots > DENOM_TOL, dots, 1.0), np.inf)
    facet = np.argmin(ratio, axis=1)
    rho = ratio[np.arange(U.shape[0]), facet]
    if np.any(~np.isfinite(rho)):
        raise InternalUnbounded("direction with no positive facet denominator")
    if single:
        return float(rho[0]), int(facet[0])
    return rho, facet


def vertices(K):
    return K.vertices


def support(K, u):
    U = np.asarray(u, dtype=float)
    vals = np.atleast_2d(U) @ K.vertices.T
    out = vals.max(axis=1)
    return float(out[0]) if U.ndim == 1 else out


def polar(K):
    """Vertices ``u_j / h_j`` of the polar body (one per active facet)."""
    return K.normals[K.active] / K.heights[K.active, None]


def polar_body(points):
    """The polytope ``{x : <x, p> <= 1}`` over the rows ``p`` of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(P, axis=1)
    return make_height_body(P / r[:, None], 1.0 / r)


def circumradius(K):
    return float(np.max(np.linalg.norm(K.vertices, axis=1)))


def volume(K):
    """Volume from the vertex description (shoelace in 2-D, facet cones in 3-D)."""
    V = K.vertices
    if K.dim == 2:
        x, y = V[:, 0], V[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    total = 0.0
    scale = float(np.max(K.heights))
    for j in np.flatnonzero(K.active):
        on = V[np.abs(V @ K.normals[j] - K.heights[j]) <= FEAS_TOL * scale]
        total += K.heights[j] * _planar_polygon_area(on, K.normals[j]) / 3.0
    return total


def _planar_polygon_area(P, normal):
    c = P.mean(axis=0)
    a = np.cross(normal, [1.0, 0.0, 0.0])
    if np.linalg.norm(a) < 0.5:
        a = np.cross(normal, [0.0, 1.0, 0.0])
    a /= np.linalg.norm(a)
    b = np.cross(normal, a)
    xy = np.column_stack([(P - c) @ a, (P - c) @ b])
    order = np.argsort(np.arctan2(xy[:, 1], xy[:, 0]))
    x, y = xy[order, 0], xy[order, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def _vertices_2d(N, h):
    P = N / h[:, None]
    ang = np.arctan2(N[:, 1], N[:, 0])
    order = list(np.argsort(ang, kind="stable"))
    r = np.linalg.norm(P, axis=1)
    start = int(np.argmax(r))
    k = order.index(start)
    order = order[k:] + order[:k]
    scale = float(np.max(r)) ** 2

    def cross(o, a, b):
        return (P[a, 0] - P[o, 0]) * (P[b, 1] - P[o, 1]) - (P[a, 1] - P[o, 1]) * (P[b, 0] - P[o, 0])

    hull = []
    for idx in order + [start]:
        while len(hull) >= 2 and cross(hull[-2], hull[-1], idx) <= FEAS_TOL * scale:
            hull.pop()
        hull.append(idx)
    hull = hull[:-1]

    active = np.zeros(len(h), dtype=bool)
    active[hull] = True
    verts = []
    for a, b in zip(hull, hull[1:] + hull[:1]):
        verts.append(np.linalg.solve(N[[a, b]], h[[a, b]]))
    V = np.array(verts)
    V.setflags(write=False)
    active.setflags(write=False)
    return V, active, tuple(int(i) for i in hull)


def _vertices_3d(N, h, chunk=200000):
    m = N.shape[0]
    scale = float(np.max(h))
    index = TolerantIndex(tol=FEAS_TOL * scale, cell=1e-5 * scale)
    verts = []
    triples = combinations(range(m), 3)
    while True:
        block = np.array([t for _, t in zip(range(chunk), triples)], dtype=int)
        if block.size == 0:
            break
        A = N[block]
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-10
        A, rhs = A[ok], h[block[ok]]
        if A.shape[0] == 0:
            continue
        X = np.linalg.solve(A, rhs[..., None])[..., 0]
        feasible = np.all(X @ N.T <= h + FEAS_TOL * scale, axis=1)
        for x in X[feasible]:
            if index.add(x)[1]:
                verts.append(x)
    V = np.array(verts)
    active = np.zeros(m, dtype=bool)
    for j in range(m):
        on = V[np.abs(V @ N[j] - h[j]) <= FEAS_TOL * scale]
        if on.shape[0] >= 3 and np.linalg.matrix_rank(on - on.mean(axis=0), tol=1e-9 * scale) >= 2:
            active[j] = True
    V.setflags(write=False)
    active.setflags(write=False)
    return V, active, None


def orbit_body(G, v, a):
    """Polytope ``K(v) = {x : <x, u> <= a for u in Gv}``."""
    if not a > 0:
        raise BadHeight("a must be positive")
    pts = orbit(G, v).points
    return make_height_body(pts, np.full(pts.shape[0], float(a)))


def conv_witness_support(G, v, r, u):
    """Support function of ``conv(B(r) | Gv)`` at ``u``."""
    u = np.asarray(u, dtype=float)
    return max(float(r), float(np.max(orbit(G, v).points @ u)))


# ---------------------------------------------------------------------------
# star bodies


def _angles(U):
    return np.arctan2(U[:, 1], U[:, 0])


@dataclass(frozen=True)
class Ball:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("ball radius must be positive")

    dim = None

    def radial(self, U):
        return np.full(np.atleast_2d(U).shape[0], float(self.radius))

    def breakpoints_2d(self):
        return np.empty(0)


@dataclass(frozen=True, eq=False)
class PolyStar:
    body: HeightBody

    @property
    def dim(self):
        return self.body.dim

    def radial(self, U):
        return radial(self.body, np.atleast_2d(U))[0]

    def breakpoints_2d(self):
        return _angles(self.body.vertices)


@dataclass(frozen=True, eq=False)
class SampledStar:
    """Radial function known at sample directions.

    ``interp="nearest"`` takes the radius of the closest sample (any n);
    ``interp="linear-arc"`` interpolates linearly in angle (n = 2 only).
    """

    directions: np.ndarray
    radii: np.ndarray
    interp: str = "nearest"

    def __post_init__(self):
        U = np.atleast_2d(np.array(self.directions, dtype=float))
        r = np.array(self.radii, dtype=float).reshape(-1)
        if U.shape[0] != r.shape[0] or U.shape[0] == 0:
            raise InputError("sampled star body needs matching directions and radii")
        if np.any(~(r > 0)):
            raise InputError("sampled radii must be positive")
        U = U / np.linalg.norm(U, axis=1, keepdims=True)
        if self.interp not in ("nearest", "linear-arc"):
            raise InputError("interp must be 'nearest' or 'linear-arc'")
        if self.interp == "linear-arc" and U.shape[1] != 2:
            raise InputError("linear-arc interpolation is only available in the plane")
        if self.interp == "linear-arc":
            order = np.argsort(_angles(U))
            U, r = U[order], r[order]
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "radii", r)

    @property
    def dim(self):
        return self.directions.shape[1]

    def radial(self, U):
        U = np.atleast_2d(U)
        if self.interp == "nearest":
            return self.radii[np.argmax(U @ self.directions.T, axis=1)]
        a = _angles(self.directions)
        a_ext = np.concatenate([a, [a[0] + 2 * math.pi]])
        r_ext = np.concatenate([self.radii, [self.radii[0]]])
        t = np.mod(_angles(U) - a[0], 2 * math.pi) + a[0]
        return np.interp(t, a_ext, r_ext)

    def breakpoints_2d(self):
        a = np.sort(_angles(self.directions))
        if self.interp == "linear-arc":
            return a
        nxt = np.concatenate([a[1:], [a[0] + 2 * math.pi]])
        return (a + nxt) / 2.0


def check_star_invariant(Q, G, rng, samples=200, tol=1e-8):
    """Raise :class:`QNotInvariant` unless ``rho_Q(g u) = rho_Q(u)`` on random ``u``."""
    if isinstance(Q, Ball):
        return
    if Q.dim != G.dim:
        raise InputError("star body dimension %d does not match group dimension %d" % (Q.dim, G.dim))
    U = rng.standard_normal((samples, G.dim))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    base = Q.radial(U)
    for g in G.elements:
        moved = Q.radial(U @ g.T)
        err = np.max(np.abs(moved - base) / base)
        if err > tol:
            raise QNotInvariant("reference body is not invariant (relative deviation %.2e)" % err)


# ---------------------------------------------------------------------------
# ellipsoids


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{x : (x - c)^T A (x - c) <= 1}``."""

    center: np.ndarray
    shape: np.ndarray

    @property
    def semi_axes(self):
        return 1.0 / np.sqrt(np.linalg.eigvalsh(self.shape))

    @property
    def condition(self):
        ev = np.linalg.eigvalsh(self.shape)
        return float(ev[-1] / ev[0])

    @property
    def volume(self):
        n = self.shape.shape[0]
        unit = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
        return unit / math.sqrt(np.linalg.det(self.shape))

    def level(self, X):
        D = np.atleast_2d(X) - self.center
        return np.einsum("ij,jk,ik->i", D, self.shape, D)


def mvee(points, tol=1e-9, max_iter=100000):
    """Minimum-volume enclosing ellipsoid by Khachiyan's algorithm with away steps.

    Stops once ``max_i M_i <= (1 + tol) (n + 1)``, which bounds the volume
    ratio to the optimum by ``(1 + tol)^{(n+1)/2}``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = P.shape
    if m < n + 1 or np.linalg.matrix_rank(P - P.mean(axis=0), tol=1e-10 * max(1.0, np.abs(P).max())) < n:
        raise DegenerateInput("points do not affinely span R^%d" % n)
    Qm = np.hstack([P, np.ones((m, 1))])
    u = np.full(m, 1.0 / m)
    d = n + 1
    for it in range(int(max_iter)):
        X = Qm.T @ (u[:, None] * Qm)
        M = np.einsum("ij,ji->i", Qm, np.linalg.solve(X, Qm.T))
        j = int(np.argmax(M))
        gap_up = M[j] - d
        support = np.flatnonzero(u > 0)
        k = support[np.argmin(M[support])]
        gap_down = d - M[k]
        if gap_up <= tol * d:
            break
        if gap_up >= gap_down:
            step = gap_up / (d * (M[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            drop = u[k] / (1.0 - u[k])
            # M_k <= 1 makes the line-search step unbounded: remove the point
            step = drop if M[k] <= 1.0 else min(gap_down / (d * (M[k] - 1.0)), drop)
            u *= 1.0 + step
            u[k] -= step
            u[u < 0] = 0.0
    else:
        raise NoConvergence("MVEE did not reach tolerance in %d iterations" % max_iter)
    c = P.T @ u
    S = (P.T * u) @ P - np.outer(c, c)
    A = np.linalg.inv(S) / n
    A = (A + A.T) / 2.0
    return Ellipsoid(center=c, shape=A)
