"""Variational solver for the group-invariant L_p dual Minkowski problem.

The unknown polytope has one facet per atom of ``mu``; its heights are
constant on every G-orbit of atoms, so the search space has one
log-height per orbit. We minimize

    Phi(h) = (1/p) log sum_i alpha_i h_i^p - (1/q) log V_q([h], Q)

(with the ``p = 0`` branch ``(1/|mu|) sum_i alpha_i log h_i``) on the
slice ``V_q([h], Q) = 1`` and rescale the minimizer so that
``C_{p,q}(K, Q, .) = mu``.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import Ball, HeightBody, check_star_invariant, make_height_body, support
from .dualmeasure import dual_curvature, dual_curvature_pq
from .errors import (
    Diverged, InputError, InvalidProblem, MaxIterations, NonPositiveHeight, NoSolution,
    ReducibleGroup, SupportMismatch,
)
from .group import DEDUP_TOL, FiniteGroup, TolerantIndex, is_irreducible, measure_orbits, symmetrize_measure
from .measure import DiscreteMeasure
from .quadrature import DEFAULT_LEVEL, sphere_quadrature

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    gtol: float = 1e-9
    # 3-D curvatures carry quadrature error ~1e-6, below which the gradient is noise
    gtol_3d: float = 1e-5
    max_iter: int = 5000
    armijo_c: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    max_height: float = 1e12
    quad_level: int = DEFAULT_LEVEL
    refine: bool = True
    symmetrize: bool = False
    seed: int = 0
    raise_on_failure: bool = False


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    p: float
    q: float
    group: FiniteGroup
    measure: DiscreteMeasure
    Q: object = field(default_factory=Ball)
    options: SolverOptions = field(default_factory=SolverOptions)

    @property
    def dim(self):
        return self.group.dim


@dataclass(frozen=True, eq=False)
class Solution:
    body: HeightBody
    lam: float
    residuals: np.ndarray
    orbits: tuple
    phi: float
    iterations: int
    converged: bool
    grad_norm: float
    min_height: float
    normalized_heights: np.ndarray
    phi_history: tuple = ()
    message: str = ""

    @property
    def heights(self):
        return self.body.heights

    @property
    def normals(self):
        return self.body.normals

    @property
    def max_residual(self):
        return float(np.max(self.residuals))


class Objective:
    """``Phi`` and its gradient on a fixed set of normals."""

    def __init__(self, p, q, mu, Q, body=None, quad=None, refine=True):
        self.p = float(p)
        self.q = float(q)
        if self.q == 0:
            raise InvalidProblem("q = 0 is not supported")
        self.mu = mu
        self.Q = Q
        self.body = body if body is not None else make_height_body(mu.directions, np.ones(mu.size))
        if self.body.dim == 3 and quad is None:
            quad = sphere_quadrature(DEFAULT_LEVEL)
        self.quad = quad
        self.refine = refine

    def _check(self, h):
        h = np.asarray(h, dtype=float).reshape(-1)
        if h.shape[0] != self.mu.size:
            raise InputError("expected %d heights" % self.mu.size)
        if np.any(~(h > 0)) or np.any(~np.isfinite(h)):
            raise NonPositiveHeight("heights must be positive and finite")
        return h

    def first_term(self, h):
        a = self.mu.weights
        if self.p == 0:
            return float(np.sum(a * np.log(h)) / np.sum(a))
        # log-sum-exp keeps extreme heights or exponents finite
        z = np.log(a) + self.p * np.log(h)
        zmax = z.max()
        return float((zmax + math.log(np.sum(np.exp(z - zmax)))) / self.p)

    def curvature(self, h):
        K = self.body.with_heights(h)
        return K, dual_curvature(K, self.Q, self.q, self.quad, self.refine)

    def value(self, h):
        h = self._check(h)
        _, cq = self.curvature(h)
        return self.first_term(h) - math.log(np.sum(cq)) / self.q

    def evaluate(self, h):
        """Return ``(phi, grad, V_q, C_q)`` at heights ``h``."""
        h = self._check(h)
        _, cq = self.curvature(h)
        V = float(np.sum(cq))
        a = self.mu.weights
        if self.p == 0:
            g1 = a / (np.sum(a) * h)
        else:
            z = np.log(a) + self.p * np.log(h)
            w = np.exp(z - z.max())
            g1 = w / (np.sum(w) * h)
        grad = g1 - cq / (h * V)
        return self.first_term(h) - math.log(V) / self.q, grad, V, cq


def phi(p, q, h, mu, Q, quad=None, refine=True):
    return Objective(p, q, mu, Q, quad=quad, refine=refine).value(h)


def grad_phi(p, q, h, mu, Q, quad=None, refine=True):
    return Objective(p, q, mu, Q, quad=quad, refine=refine).evaluate(h)[1]


def wulff_heights(K):
    """Support values of ``[h]`` at its own normals (``<= h``, equality on active facets)."""
    return support(K, K.normals)


def rescale(heights, p, q, lam):
    """Turn a ``V_q = 1`` stationary point into a solution.

    Returns ``(heights, reported_lambda)``: for ``p != q`` the heights are
    multiplied by ``lam^(1/(q-p))`` and the reported lambda is 1; for
    ``p == q`` the heights are left alone and ``lam`` is reported.
    """
    if not lam > 0:
        raise InputError("lambda must be positive")
    h = np.asarray(heights, dtype=float)
    if p == q:
        return h.copy(), float(lam)
    return h * lam ** (1.0 / (q - p)), 1.0


def _validate(spec):
    G = spec.group
    if not spec.q > 0:
        raise InvalidProblem("q must be positive (got %r)" % spec.q)
    if G.dim not in (2, 3):
        raise InvalidProblem("the variational solver handles n = 2, 3; use solve_1d for n = 1")
    if spec.measure.dim != G.dim:
        raise InvalidProblem("measure lives in R^%d but the group acts on R^%d" % (spec.measure.dim, G.dim))
    if not is_irreducible(G):
        raise ReducibleGroup("group of order %d is reducible" % G.order)
    rng = np.random.default_rng(spec.options.seed)
    check_star_invariant(spec.Q, G, rng)
    mu = spec.measure
    if spec.options.symmetrize:
        mu = symmetrize_measure(G, mu)
    return mu, measure_orbits(G, mu)


def minimize(spec):
    """Minimize ``Phi`` over G-invariant heights on ``V_q = 1`` and rescale.

    Gradient descent in log-height space (one coordinate per orbit) with a
    Barzilai-Borwein trial step and Armijo backtracking; heights are
    renormalized to ``V_q = 1`` after every step.
    """
    opts = spec.options
    p, q = float(spec.p), float(spec.q)
    mu, orbits = _validate(spec)
    mu = mu.with_orbits(orbits)
    quad = sphere_quadrature(opts.quad_level) if spec.dim == 3 else None
    obj = Objective(p, q, mu, spec.Q, quad=quad, refine=opts.refine)

    owner = np.empty(mu.size, dtype=int)
    for k, o in enumerate(orbits):
        owner[list(o)] = k
    sizes = np.bincount(owner).astype(float)

    def normalize(x):
        h = np.exp(x[owner])
        _, cq = obj.curvature(h)
        return x - math.log(np.sum(cq)) / q

    def state(x):
        h = np.exp(x[owner])
        f, g, _, _ = obj.evaluate(h)
        # orbit-averaged derivative with respect to the common orbit height
        g_orbit = np.bincount(owner, weights=g) / sizes
        return h, f, g_orbit

    x = normalize(np.zeros(len(orbits)))
    h, f, g = state(x)
    history = [f]
    min_height = float(h.min())
    x_prev = g_prev = None
    step = None
    converged = False
    message = "max_iter reached"
    it = 0
    gtol = opts.gtol if spec.dim == 2 else opts.gtol_3d
    for it in range(1, opts.max_iter + 1):
        gnorm = float(np.max(np.abs(g)))
        if gnorm < gtol:
            converged = True
            message = "gradient tolerance reached"
            it -= 1
            break
        # chain rule to log-height per orbit: d Phi / d x_k = |orbit| h_k g_k
        glog = sizes * np.exp(x) * g
        d = -glog
        if x_prev is not None:
            s, y = x - x_prev, glog - g_prev
            sy = float(s @ y)
            step = float(s @ s) / sy if sy > 0 else 2.0 * step
        else:
            step = 0.1 / max(float(np.max(np.abs(glog))), 1e-300)
        slope = float(glog @ d)
        slack = 8.0 * np.finfo(float).eps * max(1.0, abs(f))
        for _ in range(opts.max_backtracks):
            x_try = normalize(x + step * d)
            if np.max(x_try) > math.log(opts.max_height):
                raise Diverged("heights exceeded %.1e" % opts.max_height)
            h_try, f_try, g_try = state(x_try)
            if f_try <= f + opts.armijo_c * step * slope + slack:
                break
            step *= opts.shrink
        else:
            message = "line search stalled"
            it -= 1
            break
        x_prev, g_prev = x, glog
        x, h, f, g = x_try, h_try, f_try, g_try
        history.append(f)
        min_height = min(min_height, float(h.min()))
    gnorm = float(np.max(np.abs(g)))
    lam = float(np.sum(mu.weights * h ** p))
    heights, lam_out = rescale(h, p, q, lam)
    body = obj.body.with_heights(heights)
    report = verify(body, spec.Q, p, q, mu, spec.group, lam_out, quad, opts.refine)
    log.info("minimize: %s after %d iterations, |grad| = %.3e", message, it, gnorm)
    sol = Solution(
        body=body, lam=lam_out, residuals=report.residuals, orbits=report.orbits, phi=f,
        iterations=it, converged=converged, grad_norm=gnorm, min_height=min_height,
        normalized_heights=h, phi_history=tuple(history), message=message,
    )
    if not converged and opts.raise_on_failure:
        raise MaxIterations("%s (|grad| = %.3e)" % (message, gnorm))
    return sol


@dataclass(frozen=True, eq=False)
class VerifyReport:
    residuals: np.ndarray
    orbits: tuple
    extra_weight: float
    atol: float
    orbit_spread: np.ndarray

    @property
    def max_residual(self):
        return float(np.max(self.residuals))

    def ok(self, rtol):
        return self.max_residual <= rtol and self.extra_weight < self.atol


def verify(K, Q, p, q, mu, group=None, lam=1.0, quad=None, refine=True, atol=None, tol=DEDUP_TOL):
    """Per-orbit relative residuals of ``mu = lam * C_{p,q}(K, Q, .)``.

    The support of ``mu`` must be a subset of the normals of ``K``; facets
    outside it must carry (absolute) weight below ``atol`` (default
    ``1e-9 |mu|``). Without ``group`` every atom is its own orbit.
    """
    index = TolerantIndex(tol)
    for u in K.normals:
        index.add(u)
    match = []
    for i, u in enumerate(mu.directions):
        j = index.find(u)
        if j is None:
            raise SupportMismatch("atom %d (direction %s) is not a normal of K" % (i, np.round(u, 9)))
        match.append(j)
    match = np.array(match)
    if K.dim == 3 and quad is None:
        quad = sphere_quadrature(DEFAULT_LEVEL)
    w = lam * dual_curvature_pq(K, Q, p, q, quad, refine)
    extra = np.ones(K.size, dtype=bool)
    extra[match] = False
    extra_weight = float(np.max(w[extra])) if np.any(extra) else 0.0
    atol = 1e-9 * mu.mass if atol is None else atol
    orbits = measure_orbits(group, mu) if group is not None else [(i,) for i in range(mu.size)]
    residuals, spread = [], []
    for o in orbits:
        o = list(o)
        vals = w[match[o]]
        alpha = mu.weights[o[0]]
        residuals.append(abs(float(np.mean(vals)) - alpha) / alpha)
        spread.append(float((vals.max() - vals.min()) / alpha))
    return VerifyReport(np.array(residuals), tuple(tuple(o) for o in orbits), extra_weight, atol, np.array(spread))


@dataclass(frozen=True)
class Interval1D:
    """``K = [-c, d]``; ``lam`` is 1 unless ``p == q``."""

    c: float
    d: float
    lam: float = 1.0


def solve_1d(p, q, mu_plus, mu_minus, a_Q, b_Q, symmetric, tol=1e-12):
    """Closed-form solution on the line, with ``Q = [-a_Q, b_Q]``.

    On ``S^0 = {+1, -1}`` the measure equation reads
    ``mu(+1) = d^(q-p) b_Q^(1-q)`` and ``mu(-1) = c^(q-p) a_Q^(1-q)``.
    """
    if not (mu_plus > 0 and mu_minus > 0):
        raise InputError("weights must be positive")
    if not q > 0:
        raise InvalidProblem("q must be positive")
    if not (a_Q > 0 and b_Q > 0):
        raise InputError("Q must contain the origin in its interior")
    if symmetric:
        if abs(mu_plus - mu_minus) > tol * max(mu_plus, mu_minus) or abs(a_Q - b_Q) > tol * max(a_Q, b_Q):
            raise InputError("symmetric problem needs mu(1) = mu(-1) and a_Q = b_Q")
        ratio = mu_plus / b_Q ** (1.0 - q)
        if p == q:
            return Interval1D(1.0, 1.0, ratio)
        a = ratio ** (1.0 / (q - p))
        return Interval1D(a, a, 1.0)
    r_plus = mu_plus / b_Q ** (1.0 - q)
    r_minus = mu_minus / a_Q ** (1.0 - q)
    if p == q:
        if abs(r_plus - r_minus) > tol * max(r_plus, r_minus):
            raise NoSolution("p = q: mu(1)/b^(1-q) = %.17g differs from mu(-1)/a^(1-q) = %.17g" % (r_plus, r_minus))
        return Interval1D(1.0, 1.0, r_plus)
    e = 1.0 / (q - p)
    return Interval1D(r_minus ** e, r_plus ** e, 1.0)
