"""Dual mixed volumes and (p, q)-dual curvature measures of height bodies.

For a polytope the reverse radial Gauss image of the normal ``u_j`` is the
set of directions whose ray leaves the body through facet ``j``. In the
plane these cells are arcs between consecutive vertex angles and are
integrated exactly up to Gauss-Legendre error; on S^2 every quadrature node
is assigned to the facet that attains the radial function.
"""
import math
from dataclasses import dataclass

import numpy as np

from .bodies import Ball, radial
from .errors import DimensionUnsupported
from .quadrature import DEFAULT_LEVEL, integrate_intervals, sphere_quadrature

ARC_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class RadialCells:
    """Reverse radial Gauss image cells.

    2-D: ``facets[k]`` owns the arc ``[starts[k], ends[k]]``.
    3-D: ``nodes``/``weights`` are the (possibly refined) quadrature points and
    ``facets[i]`` the facet owning node ``i``.
    """

    dim: int
    facets: np.ndarray
    starts: np.ndarray = None
    ends: np.ndarray = None
    nodes: np.ndarray = None
    weights: np.ndarray = None

    def arc_lengths(self):
        return self.ends - self.starts


def radial_cells(K, quad=None, refine=True):
    if K.dim == 2:
        return _cells_2d(K)
    if K.dim == 3:
        return _cells_3d(K, quad if quad is not None else sphere_quadrature(DEFAULT_LEVEL), refine)
    raise DimensionUnsupported("radial cells are implemented for n = 2, 3")


def _cells_2d(K):
    order = np.array(K.facet_order)
    V = K.vertices
    ang = np.arctan2(V[:, 1], V[:, 0])
    # facet order[k] lies between vertex k-1 and vertex k
    starts = np.roll(ang, 1)
    ends = starts + np.mod(ang - starts, 2.0 * math.pi)
    return RadialCells(dim=2, facets=order, starts=starts, ends=ends)


def _cells_3d(K, quad, refine):
    _, corner = radial(K, quad.vertices)
    _, center = radial(K, quad.nodes)
    if not refine:
        return RadialCells(dim=3, facets=center, nodes=quad.nodes, weights=quad.weights)
    tri = corner[quad.triangles]
    split = np.any(tri != center[:, None], axis=1)
    kids = quad.child_nodes[split].reshape(-1, 3)
    _, kid_facets = radial(K, kids)
    keep = ~split
    nodes = np.concatenate([quad.nodes[keep], kids])
    weights = np.concatenate([quad.weights[keep], quad.child_weights[split].reshape(-1)])
    facets = np.concatenate([center[keep], kid_facets])
    return RadialCells(dim=3, facets=facets, nodes=nodes, weights=weights)


def _split_at(starts, ends, cuts):
    """Split each arc at the angles ``cuts`` (taken mod 2 pi) lying strictly inside it."""
    if cuts.size == 0:
        return starts, ends, np.arange(starts.size)
    a_out, b_out, owner = [], [], []
    for k, (a, b) in enumerate(zip(starts, ends)):
        inside = np.mod(cuts - a, 2.0 * math.pi)
        inside = np.sort(inside[(inside > 1e-14) & (inside < b - a - 1e-14)]) + a
        pts = np.concatenate([[a], inside, [b]])
        a_out.extend(pts[:-1])
        b_out.extend(pts[1:])
        owner.extend([k] * (pts.size - 1))
    return np.array(a_out), np.array(b_out), np.array(owner)


def dual_curvature(K, Q, q, quad=None, refine=True, cells=None):
    """Per-facet weights of the q-th dual curvature measure (zero on inactive facets)."""
    n = K.dim
    q = float(q)
    out = np.zeros(K.size)
    cells = cells if cells is not None else radial_cells(K, quad, refine)
    if n == 2:
        phi = np.arctan2(K.normals[:, 1], K.normals[:, 0])
        cuts = np.empty(0) if isinstance(Q, Ball) else np.asarray(Q.breakpoints_2d(), dtype=float)
        a, b, owner = _split_at(cells.starts, cells.ends, cuts)
        fac = cells.facets[owner]
        hj, pj = K.heights[fac], phi[fac]

        def integrand(t, i):
            rho = hj[i, None] / np.cos(t - pj[i, None])
            vals = rho ** q
            if isinstance(Q, Ball):
                vals = vals * Q.radius ** (n - q)
            else:
                U = np.stack([np.cos(t), np.sin(t)], axis=-1).reshape(-1, 2)
                vals = vals * Q.radial(U).reshape(t.shape) ** (n - q)
            return vals / n

        pieces = integrate_intervals(integrand, a, b, rtol=ARC_RTOL)
        np.add.at(out, fac, pieces)
        return out

    rho = K.heights[cells.facets] / np.einsum("ij,ij->i", cells.nodes, K.normals[cells.facets])
    if isinstance(Q, Ball):
        rq = Q.radius ** (n - q)
    else:
        rq = Q.radial(cells.nodes) ** (n - q)
    vals = cells.weights * rho ** q * rq / n
    np.add.at(out, cells.facets, vals)
    return out


def dual_mixed_volume(K, Q, q, quad=None, refine=True):
    return float(np.sum(dual_curvature(K, Q, q, quad, refine)))


def dual_curvature_pq(K, Q, p, q, quad=None, refine=True, cq=None):
    """Weights ``h_j^{-p} * C_q[j]``; ``cq`` may pass precomputed ``C_q`` weights."""
    if cq is None:
        cq = dual_curvature(K, Q, q, quad, refine)
    if p == 0:
        return np.array(cq, dtype=float)
    return K.heights ** (-float(p)) * cq
