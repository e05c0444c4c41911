"""Dense tableau simplex for the tiny LPs used by the hemisphere test.

Only the form ``maximize c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0`` is
supported, so the slack basis is feasible and no phase one is needed.
Pivoting follows Bland's rule, which rules out cycling on the heavily
degenerate (``b = 0``) programs built by :mod:`dualmink.group`.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    pivots: int


class Unbounded(NumericalError):
    pass


def simplex_max(c, A, b, tol=1e-12, max_pivots=10000):
    """Maximize ``c @ x`` over ``{x >= 0 : A @ x <= b}`` for ``b >= 0``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if np.any(b < -tol):
        raise ValueError("simplex_max needs a nonnegative right-hand side")

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = np.maximum(b, 0.0)
    T[m, :n] = -c
    basis = np.arange(n, n + m)

    pivots = 0
    while True:
        reduced = T[m, :-1]
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            break
        j = candidates[0]
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            raise Unbounded("objective unbounded along column %d" % j)
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        i = tied[np.argmin(basis[tied])]

        T[i] /= T[i, j]
        factors = T[:, j].copy()
        factors[i] = 0.0
        T -= np.outer(factors, T[i])
        basis[i] = j
        pivots += 1
        if pivots > max_pivots:
            raise NumericalError("simplex exceeded %d pivots" % max_pivots)

    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    return LPResult(x=x[:n], value=float(T[m, -1]), pivots=pivots)
