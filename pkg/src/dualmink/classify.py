"""Containment of the G-invariant convex bodies in the classical classes.

For a finite group G acting on R^n the class K_G of G-invariant convex
bodies is compared with the balls, the origin-symmetric bodies, the bodies
containing the origin in their interior, and all convex bodies. The answers
are purely group-theoretic: they depend only on the order of G, on whether
``-I`` belongs to G, and on the common fixed space.
"""
from dataclasses import dataclass

import numpy as np

from .bodies import conv_witness_support
from .errors import InputError, SearchExhausted
from .group import DEDUP_TOL, contains_minus_identity, fixed_point_space, orbit, random_unit_vectors

CLASSES = ("ball", "symmetric", "origin_interior", "convex")
LABELS = {
    "ball": "B^n",
    "symmetric": "K^n_e",
    "origin_interior": "K^n_o",
    "convex": "K^n",
}
RELATIONS = ("equals", "subset", "superset")

FINITE_BALL_NOTE = "false (finite group, n >= 2): finite orbits are never dense"


@dataclass(frozen=True)
class ClassificationReport:
    dim: int
    order: int
    has_minus_identity: bool
    fixed_basis: tuple
    ball_equals: bool
    ball_subset: bool
    ball_superset: bool
    symmetric_equals: bool
    symmetric_subset: bool
    symmetric_superset: bool
    origin_interior_equals: bool
    origin_interior_subset: bool
    origin_interior_superset: bool
    convex_equals: bool
    convex_subset: bool
    convex_superset: bool
    notes: tuple = ()

    def relation(self, cls, rel):
        return getattr(self, "%s_%s" % (cls, rel))

    def as_dict(self):
        table = {
            cls: {rel: self.relation(cls, rel) for rel in RELATIONS} for cls in CLASSES
        }
        return {
            "dim": self.dim,
            "order": self.order,
            "contains_minus_identity": self.has_minus_identity,
            "fixed_point_basis": [list(col) for col in self.fixed_basis],
            "relations": table,
            "notes": list(self.notes),
        }


def classify(G):
    n = G.dim
    order = G.order
    minus = contains_minus_identity(G)
    fixed = fixed_point_space(G)
    trivial = order == 1
    plus_minus = order == 2 and minus

    # in dimension one {+-1} is transitive on S^0, so K_G is the set of balls
    ball_eq = n == 1 and plus_minus
    notes = () if n == 1 else (FINITE_BALL_NOTE,)
    return ClassificationReport(
        dim=n,
        order=order,
        has_minus_identity=minus,
        fixed_basis=tuple(tuple(float(x) for x in col) for col in fixed.T),
        ball_equals=ball_eq,
        ball_subset=ball_eq,
        ball_superset=True,
        symmetric_equals=plus_minus,
        symmetric_subset=minus,
        symmetric_superset=trivial or plus_minus,
        origin_interior_equals=False,
        origin_interior_subset=fixed.shape[1] == 0,
        origin_interior_superset=trivial,
        convex_equals=trivial,
        convex_subset=True,
        convex_superset=trivial,
        notes=notes,
    )


def render_table(report):
    """Aligned text table: one row per class, one column per relation."""
    head = ["K_G vs", "=", "subset", "superset"]
    rows = [head]
    for cls in CLASSES:
        rows.append([LABELS[cls]] + [
            "yes" if report.relation(cls, rel) else "no" for rel in RELATIONS
        ])
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append("order %d, -I %s G, fixed space dim %d" % (
        report.order, "in" if report.has_minus_identity else "not in", len(report.fixed_basis)))
    lines.extend(report.notes)
    return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class NonsymmetricWitness:
    v: np.ndarray
    orbit: np.ndarray
    r: float
    h_v: float
    h_minus_v: float

    @property
    def certificate(self):
        return (self.h_v, self.h_minus_v)


def certify(G, v, r=0.3):
    """Support values of ``conv(B(r) | Gv)`` at ``v`` and ``-v``."""
    v = np.asarray(v, dtype=float)
    return conv_witness_support(G, v, r, v), conv_witness_support(G, v, r, -v)


def witness_nonsymmetric(G, r=0.3, rng=None, max_samples=1_000_000, tol=DEDUP_TOL, batch=1000):
    """Find ``v`` with ``-v`` outside ``Gv``; ``conv(B(r) | Gv)`` is then not symmetric."""
    if contains_minus_identity(G):
        raise InputError("-I belongs to G, so every G-invariant body is origin-symmetric")
    if not 0 < r < 1:
        raise InputError("r must lie in (0, 1)")
    rng = np.random.default_rng(0) if rng is None else rng
    drawn = 0
    while drawn < max_samples:
        count = min(batch, max_samples - drawn)
        V = random_unit_vectors(rng, count, G.dim)
        drawn += count
        # max over g of <g v, -v> equals 1 exactly when -v is in the orbit
        images = np.einsum("gij,kj->kgi", G.elements, V)
        dist = np.min(np.max(np.abs(images + V[:, None, :]), axis=2), axis=1)
        hits = np.flatnonzero(dist > tol)
        if hits.size:
            v = V[hits[0]]
            hv, hmv = certify(G, v, r)
            return NonsymmetricWitness(v=v, orbit=orbit(G, v).points, r=float(r), h_v=hv, h_minus_v=hmv)
    raise SearchExhausted("no v with -v outside Gv among %d samples" % drawn)
