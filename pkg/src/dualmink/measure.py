"""Discrete measures on the unit sphere."""
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many atoms ``(u_i, alpha_i)`` with unit ``u_i`` and ``alpha_i > 0``."""

    directions: np.ndarray
    weights: np.ndarray
    orbits: tuple = field(default=(), compare=False)

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if u.shape[0] != w.shape[0]:
            raise InputError("got %d directions but %d weights" % (u.shape[0], w.shape[0]))
        if u.shape[0] == 0:
            raise InputError("measure needs at least one atom")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise InputError("atom weights must be positive")
        norms = np.linalg.norm(u, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InputError("atom directions must be unit vectors")
        u.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", u)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms, normalize=False):
        """Build from ``[(u, alpha), ...]``; ``normalize`` rescales each ``u``."""
        u = np.array([np.asarray(a[0], dtype=float) for a in atoms])
        if normalize:
            u = u / np.linalg.norm(u, axis=1, keepdims=True)
        return cls(u, np.array([float(a[1]) for a in atoms]))

    @property
    def dim(self):
        return self.directions.shape[1]

    @property
    def size(self):
        return self.directions.shape[0]

    @property
    def mass(self):
        return float(np.sum(self.weights))

    def with_orbits(self, orbits):
        return DiscreteMeasure(self.directions, self.weights, tuple(tuple(int(i) for i in o) for o in orbits))
