"""Quadrature on S^1 (composite Gauss-Legendre) and S^2 (icosahedral triangles)."""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_LEVEL = 6


@lru_cache(maxsize=8)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def integrate_intervals(f, a, b, order=20, rtol=1e-13, max_panels=512):
    """Integrate ``f`` over each interval ``[a_i, b_i]``.

    ``f(t, i)`` receives an array of abscissae of shape ``(k, p)`` and the
    interval indices ``i`` of shape ``(k,)``; it must broadcast over the
    second axis. Panels are doubled until every interval changes by less
    than ``rtol`` relative to its own value.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = gauss_legendre(order)
    idx = np.arange(a.size)

    def rule(panels):
        width = (b - a) / panels
        j = np.arange(panels)
        # nodes: (k, panels, order) flattened to (k, panels * order)
        t = a[:, None, None] + width[:, None, None] * (j[None, :, None] + (x[None, None, :] + 1.0) / 2.0)
        vals = f(t.reshape(a.size, -1), idx).reshape(a.size, panels, order)
        return np.sum(vals * w, axis=(1, 2)) * width / 2.0

    panels = 1
    prev = rule(panels)
    while panels < max_panels:
        panels *= 2
        cur = rule(panels)
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(np.abs(cur), 1e-300)):
            return cur
        prev = cur
    return prev


@dataclass(frozen=True, eq=False)
class SphericalQuadrature:
    """Centroid rule on the spherical triangles of a subdivided icosahedron.

    ``nodes`` are the normalized triangle centroids and ``weights`` the exact
    spherical triangle areas, so the weights sum to ``4 pi`` to rounding.
    Each triangle also carries its four children (edge midpoints pushed to
    the sphere) for one level of local refinement.
    """

    level: int
    vertices: np.ndarray
    triangles: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    child_nodes: np.ndarray
    child_weights: np.ndarray

    @property
    def dim(self):
        return 3

    @property
    def size(self):
        return self.nodes.shape[0]


def _icosahedron():
    t = (1.0 + math.sqrt(5.0)) / 2.0
    V = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    F = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return V / np.linalg.norm(V, axis=1, keepdims=True), F


def _subdivide(V, F):
    edges = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, inv = np.unique(edges, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mids = V[uniq[:, 0]] + V[uniq[:, 1]]
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    nf = F.shape[0]
    m01 = V.shape[0] + inv[:nf]
    m12 = V.shape[0] + inv[nf:2 * nf]
    m20 = V.shape[0] + inv[2 * nf:]
    F2 = np.concatenate([
        np.column_stack([F[:, 0], m01, m20]),
        np.column_stack([F[:, 1], m12, m01]),
        np.column_stack([F[:, 2], m20, m12]),
        np.column_stack([m01, m12, m20]),
    ])
    return np.vstack([V, mids]), F2


def spherical_triangle_area(A, B, C):
    num = np.abs(np.einsum("ij,ij->i", A, np.cross(B, C)))
    den = 1.0 + np.einsum("ij,ij->i", A, B) + np.einsum("ij,ij->i", B, C) + np.einsum("ij,ij->i", C, A)
    return 2.0 * np.arctan2(num, den)


def _centroids(A, B, C):
    c = A + B + C
    return c / np.linalg.norm(c, axis=1, keepdims=True)


@lru_cache(maxsize=4)
def sphere_quadrature(level=DEFAULT_LEVEL):
    """Quadrature with ``20 * 4**level`` nodes."""
    V, F = _icosahedron()
    for _ in range(int(level)):
        V, F = _subdivide(V, F)
    A, B, C = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    nodes = _centroids(A, B, C)
    weights = spherical_triangle_area(A, B, C)

    def unit(x):
        return x / np.linalg.norm(x, axis=1, keepdims=True)

    ab, bc, ca = unit(A + B), unit(B + C), unit(C + A)
    kids = [(A, ab, ca), (B, bc, ab), (C, ca, bc), (ab, bc, ca)]
    child_nodes = np.stack([_centroids(*k) for k in kids], axis=1)
    child_weights = np.stack([spherical_triangle_area(*k) for k in kids], axis=1)
    for arr in (V, F, nodes, weights, child_nodes, child_weights):
        arr.setflags(write=False)
    return SphericalQuadrature(int(level), V, F, nodes, weights, child_nodes, child_weights)
