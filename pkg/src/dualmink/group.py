"""Finite subgroups of O(n): construction, orbits and irreducibility tests.

Groups are stored as their generators together with the fully enumerated
element list. All comparisons between matrices or vectors are made in the
max norm at tolerance ``DEDUP_TOL``.
"""
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.spatial import ConvexHull

from .errors import GroupTooLarge, InputError, MeasureNotInvariant, NotOrthogonal, UnsupportedDimension
from .lp import simplex_max
from .measure import DiscreteMeasure

ORTHO_TOL = 1e-10
DEDUP_TOL = 1e-9
ORDER_CAP = 10000
RANK_TOL = 1e-8
HEMI_TOL = 1e-9


class TolerantIndex:
    """Lookup of vectors up to max-norm distance ``tol``.

    Vectors are bucketed on a shifted grid of width ``cell``. A candidate
    lying within ``tol`` of a bucket wall is compared against every stored
    vector, so no match closer than ``tol`` is ever missed.
    """

    _SHIFT = 0.2371

    def __init__(self, tol=DEDUP_TOL, cell=1e-6):
        self.tol = tol
        self.cell = cell
        self._buckets = {}
        self._items = []

    def __len__(self):
        return len(self._items)

    def _scaled(self, x):
        return np.asarray(x, dtype=float).reshape(-1) / self.cell + self._SHIFT

    def find(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        s = self._scaled(x)
        key = tuple(np.floor(s).astype(np.int64))
        for idx in self._buckets.get(key, ()):
            if np.max(np.abs(self._items[idx] - x)) <= self.tol:
                return idx
        frac = s - np.floor(s)
        margin = self.tol / self.cell
        if np.any((frac < margin) | (frac > 1.0 - margin)) and self._items:
            dist = np.max(np.abs(np.array(self._items) - x), axis=1)
            hit = np.flatnonzero(dist <= self.tol)
            if hit.size:
                return int(hit[0])
        return None

    def add(self, x):
        """Insert ``x`` unless already present; return ``(index, inserted)``."""
        found = self.find(x)
        if found is not None:
            return found, False
        x = np.asarray(x, dtype=float).reshape(-1).copy()
        key = tuple(np.floor(self._scaled(x)).astype(np.int64))
        self._buckets.setdefault(key, []).append(len(self._items))
        self._items.append(x)
        return len(self._items) - 1, True


def check_orthogonal(M, tol=ORTHO_TOL):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotOrthogonal("generator is not a square matrix: shape %s" % (M.shape,))
    err = np.max(np.abs(M.T @ M - np.eye(M.shape[0])))
    if err > tol:
        raise NotOrthogonal("max |M^T M - I| = %.3e exceeds %.1e" % (err, tol))
    if abs(abs(np.linalg.det(M)) - 1.0) > tol:
        raise NotOrthogonal("|det M| differs from 1")
    return M


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    dim: int
    generators: tuple
    elements: np.ndarray

    @property
    def order(self):
        return self.elements.shape[0]

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return "FiniteGroup(dim=%d, order=%d, generators=%d)" % (self.dim, self.order, len(self.generators))


@dataclass(frozen=True, eq=False)
class Orbit:
    base: np.ndarray
    points: np.ndarray

    def __len__(self):
        return self.points.shape[0]


def close_group(generators, cap=ORDER_CAP, dim=None, tol=DEDUP_TOL):
    """Enumerate the group generated by ``generators`` breadth first.

    Raises :class:`GroupTooLarge` as soon as more than ``cap`` distinct
    elements appear, which is what an irrational rotation produces.
    """
    if cap < 1:
        raise InputError("order cap must be at least 1")
    gens = [check_orthogonal(g) for g in generators]
    if dim is None:
        if not gens:
            raise InputError("dimension needed for an empty generator list")
        dim = gens[0].shape[0]
    if any(g.shape != (dim, dim) for g in gens):
        raise InputError("generators must all be %dx%d" % (dim, dim))

    identity = np.eye(dim)
    index = TolerantIndex(tol)
    index.add(identity)
    elements = [identity]
    frontier = [identity]
    while frontier:
        fresh = []
        for x in frontier:
            for g in gens:
                y = g @ x
                _, inserted = index.add(y)
                if inserted:
                    elements.append(y)
                    fresh.append(y)
                    if len(elements) > cap:
                        raise GroupTooLarge(
                            "closure exceeds %d elements; the group is infinite or too large" % cap)
        frontier = fresh

    elems = np.array(elements)
    elems.setflags(write=False)
    gens_t = tuple(g.copy() for g in gens)
    for g in gens_t:
        g.setflags(write=False)
    return FiniteGroup(dim=int(dim), generators=gens_t, elements=elems)


def rotation2d(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _embed(M, dim):
    out = np.eye(dim)
    k = M.shape[0]
    out[:k, :k] = M
    return out


def _helmert_basis(n):
    """Orthonormal basis (columns) of the sum-zero hyperplane in R^{n+1}."""
    B = np.zeros((n + 1, n))
    for k in range(1, n + 1):
        B[:k, k - 1] = 1.0
        B[k, k - 1] = -float(k)
        B[:, k - 1] /= math.sqrt(k * (k + 1))
    return B


def _perm_matrix(perm):
    P = np.zeros((len(perm), len(perm)))
    for i, j in enumerate(perm):
        P[j, i] = 1.0
    return P


def _simplex_generators(n, rotations_only):
    B = _helmert_basis(n)
    m = n + 1
    gens = []
    if rotations_only:
        # 3-cycles (0 1 k) generate the alternating group
        for k in range(2, m):
            perm = list(range(m))
            perm[0], perm[1], perm[k] = 1, k, 0
            gens.append(perm)
    else:
        for k in range(m - 1):
            perm = list(range(m))
            perm[k], perm[k + 1] = k + 1, k
            gens.append(perm)
    return [B.T @ _perm_matrix(p) @ B for p in gens]


def _greedy_generators(elements, dim):
    """Pick a small generating subset of an enumerated group."""
    target = len(elements)
    gens = []
    current = 1
    for g in elements:
        if current == target:
            break
        trial = close_group(gens + [g], cap=target, dim=dim)
        if trial.order > current:
            gens.append(g)
            current = trial.order
    return gens


BUILTINS = (
    "cyclic", "dihedral", "simplex_symmetry", "simplex_rotation",
    "hyperoctahedral", "cube_rotation", "plus_minus_identity", "trivial",
)


def builtin_group(name, param=None, dim=None):
    """Return one of the named groups.

    ``cyclic`` and ``dihedral`` take the polygon size as ``param`` and act on
    the first two coordinates of ``R^dim`` (default ``dim = 2``). Every other
    group takes its dimension from ``dim`` (or from ``param`` when ``dim`` is
    omitted).
    """
    name = name.lower().replace("-", "_")
    if name in ("cyclic", "dihedral"):
        if param is None or int(param) < 1:
            raise InputError("%s needs a polygon size m >= 1" % name)
        m = int(param)
        dim = 2 if dim is None else int(dim)
        if dim < 2:
            raise UnsupportedDimension("%s acts on the plane; dim must be >= 2" % name)
        gens = [] if m == 1 else [_embed(rotation2d(2.0 * math.pi / m), dim)]
        if name == "dihedral":
            gens.append(_embed(np.diag([1.0, -1.0]), dim))
        return close_group(gens, dim=dim)

    if dim is None:
        dim = param
    if dim is None or int(dim) < 1:
        raise UnsupportedDimension("%s needs a dimension n >= 1" % name)
    n = int(dim)

    if name == "trivial":
        return close_group([], dim=n)
    if name == "plus_minus_identity":
        return close_group([-np.eye(n)], dim=n)
    if name == "simplex_symmetry":
        return close_group(_simplex_generators(n, rotations_only=False), dim=n)
    if name == "simplex_rotation":
        return close_group(_simplex_generators(n, rotations_only=True), dim=n)
    if name in ("hyperoctahedral", "cube_rotation"):
        gens = [_embed(np.diag([-1.0]), n)]
        for k in range(n - 1):
            perm = list(range(n))
            perm[k], perm[k + 1] = k + 1, k
            gens.append(_perm_matrix(perm))
        full = close_group(gens, dim=n)
        if name == "hyperoctahedral":
            return full
        rot = [g for g in full.elements if np.linalg.det(g) > 0]
        return close_group(_greedy_generators(rot, n), dim=n)
    raise InputError("unknown builtin group %r; choose from %s" % (name, ", ".join(BUILTINS)))


def orbit(G, v, tol=DEDUP_TOL):
    v = np.asarray(v, dtype=float).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise InputError("orbit base point must be a unit vector")
    index = TolerantIndex(tol)
    pts = []
    for y in G.elements @ v:
        if index.add(y)[1]:
            pts.append(y)
    points = np.array(pts)
    points.setflags(write=False)
    return Orbit(base=v.copy(), points=points)


def _generator_stack(G):
    gens = list(G.generators)
    if not gens:
        gens = [np.eye(G.dim)]
    return gens


def _nullity(M, tol=RANK_TOL):
    if M.size == 0:
        return M.shape[1], np.eye(M.shape[1])
    _, s, vt = np.linalg.svd(M)
    # stacks built from orthogonal matrices have unit scale; an all-roundoff
    # stack (a generator equal to -I up to 1e-16) must read as rank zero
    smax = max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > tol * smax))
    return M.shape[1] - rank, vt[rank:].T


def _symmetric_basis(n):
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
    return basis


def commutant_dimension(G, symmetric=True, tol=RANK_TOL):
    """Dimension of ``{A : gA = Ag for all g}``, optionally restricted to symmetric A.

    The full commutant of an irreducible real representation has dimension
    1, 2 or 4; only the symmetric one enters :func:`is_irreducible`.
    """
    n = G.dim
    if symmetric:
        basis = _symmetric_basis(n)
    else:
        basis = []
        for i in range(n):
            for j in range(n):
                E = np.zeros((n, n))
                E[i, j] = 1.0
                basis.append(E)
    rows = []
    for g in _generator_stack(G):
        rows.append(np.column_stack([(g @ E - E @ g).reshape(-1) for E in basis]))
    d, _ = _nullity(np.vstack(rows), tol)
    return d


def is_irreducible(G, tol=RANK_TOL):
    return commutant_dimension(G, symmetric=True, tol=tol) == 1


def fixed_point_space(G, tol=RANK_TOL):
    """Orthonormal basis (as columns) of the common fixed space; shape ``(n, d)``."""
    stack = np.vstack([g - np.eye(G.dim) for g in _generator_stack(G)])
    _, basis = _nullity(stack, tol)
    return basis


def contains_minus_identity(G, tol=DEDUP_TOL):
    minus = -np.eye(G.dim)
    dist = np.max(np.abs(G.elements - minus), axis=(1, 2))
    return bool(np.any(dist <= tol))


def _box_lp(X, i, s):
    """max t over u with u_i = s, |u_j| <= 1 and <x_k, u> >= t for every row x_k."""
    k, n = X.shape
    others = [j for j in range(n) if j != i]
    shift = float(n)  # t >= -sqrt(n) on the box, so t = tau - n keeps tau >= 0
    nv = 1 + 2 * len(others)
    rows, rhs = [], []
    for x in X:
        row = np.zeros(nv)
        row[0] = 1.0
        for c, j in enumerate(others):
            row[1 + 2 * c] = -x[j]
            row[2 + 2 * c] = x[j]
        rows.append(row)
        rhs.append(s * x[i] + shift)
    for c in range(2 * len(others)):
        row = np.zeros(nv)
        row[1 + c] = 1.0
        rows.append(row)
        rhs.append(1.0)
    obj = np.zeros(nv)
    obj[0] = 1.0
    res = simplex_max(obj, np.array(rows), np.array(rhs))
    u = np.zeros(n)
    u[i] = s
    for c, j in enumerate(others):
        u[j] = res.x[1 + 2 * c] - res.x[2 + 2 * c]
    return res.x[0] - shift, u


def points_hemisphere_witness(X, tol=HEMI_TOL):
    """Unit ``u`` with ``<x, u> >= -tol`` for all rows of ``X``, or ``None``.

    Solves ``max { min_k <x_k, u> : ||u||_inf = 1 }`` as ``2n`` box LPs (one
    per fixed coordinate ``u_i = +-1``). ``None`` certifies that the origin
    lies in the interior of ``conv(X)``. Among valid witnesses the one with
    the largest normalized margin is returned, with the direction of the
    centroid of ``X`` tried first.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    candidates = []
    c = X.mean(axis=0)
    if np.linalg.norm(c) > 1e-12:
        candidates.append(c / np.max(np.abs(c)))
    best_t = -np.inf
    for i in range(n):
        for s in (1.0, -1.0):
            t, u = _box_lp(X, i, s)
            best_t = max(best_t, t)
            if t >= -tol:
                candidates.append(u)
    if best_t < -tol:
        return None
    best, best_score = None, -np.inf
    for u in candidates:
        margin = np.min(X @ u)
        if margin < -tol * np.max(np.abs(u)):
            continue
        score = margin / np.linalg.norm(u)
        if score > best_score + 1e-14:
            best, best_score = u, score
    if best is None:
        return None
    return best / np.linalg.norm(best)


def hemisphere_witness(G, v, tol=HEMI_TOL):
    return points_hemisphere_witness(orbit(G, v).points, tol)


def points_inradius(X, tol=HEMI_TOL):
    """Radius of the largest origin-centred ball inside ``conv(X)``.

    ``X`` holds unit vectors. Zero when the origin is not interior.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if points_hemisphere_witness(X, tol) is not None:
        return 0.0
    n = X.shape[1]
    if n == 1:
        return float(min(X[:, 0].max(), (-X[:, 0]).max()))
    if n == 2:
        ang = np.sort(np.arctan2(X[:, 1], X[:, 0]))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2.0 * math.pi]]))
        return float(math.cos(gaps.max() / 2.0))
    hull = ConvexHull(X)
    return float(np.min(-hull.equations[:, -1]))


def orbit_inradius(G, v, tol=HEMI_TOL):
    return points_inradius(orbit(G, v).points, tol)


def random_unit_vectors(rng, count, dim):
    x = rng.standard_normal((count, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def symmetrize_measure(G, mu, tol=DEDUP_TOL):
    """Average of the pushforwards ``g_* mu`` over the group."""
    index = TolerantIndex(tol)
    dirs, weights = [], []
    share = 1.0 / G.order
    for u, a in zip(mu.directions, mu.weights):
        for y in G.elements @ u:
            idx, inserted = index.add(y)
            if inserted:
                dirs.append(y / np.linalg.norm(y))
                weights.append(a * share)
            else:
                weights[idx] += a * share
    out = DiscreteMeasure(np.array(dirs), np.array(weights))
    return out.with_orbits(measure_orbits(G, out, tol))


def measure_orbits(G, mu, tol=DEDUP_TOL, rtol=1e-9):
    """Partition the atoms of ``mu`` into G-orbits.

    Raises :class:`~dualmink.errors.MeasureNotInvariant` when an orbit is
    not fully supported or carries unequal weights.
    """
    index = TolerantIndex(tol)
    for u in mu.directions:
        _, inserted = index.add(u)
        if not inserted:
            raise InputError("measure has repeated atom directions")
    seen = np.zeros(mu.size, dtype=bool)
    orbits = []
    for i in range(mu.size):
        if seen[i]:
            continue
        members = []
        for y in orbit(G, mu.directions[i]).points:
            j = index.find(y)
            if j is None:
                raise MeasureNotInvariant("orbit of atom %d is not contained in the support" % i)
            members.append(j)
        w = mu.weights[members]
        if np.max(np.abs(w - w[0])) > rtol * abs(w[0]):
            raise MeasureNotInvariant("weights differ along the orbit of atom %d" % i)
        seen[members] = True
        orbits.append(tuple(sorted(members)))
    return orbits


def conjugate(G, R):
    """The group ``R G R^T`` for orthogonal ``R``."""
    R = check_orthogonal(R)
    return close_group([R @ g @ R.T for g in _generator_stack(G)], dim=G.dim)


def permutation_group_elements(n):
    """All ``n x n`` permutation matrices (used as an independent oracle)."""
    return [_perm_matrix(p) for p in permutations(range(n))]
