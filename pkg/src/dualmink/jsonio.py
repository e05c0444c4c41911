"""JSON (de)serialization of groups, bodies, star bodies, problems and solutions.

Schemas::

    group    {"dim": n, "builtin": name, "param": m}
             {"dim": n, "generators": [matrix, ...]}   nested rows or flat row-major
    body     {"dim": n, "normals": [[...], ...], "heights": [...]}
    Q        {"ball": r} | {"poly": body} | {"sampled": [[u, rho], ...], "interp": "nearest"}
    problem  {"dim", "p", "q", "group", "Q", "measure": {"atoms": [[u, alpha], ...],
              "symmetrize": bool}, "opts": {...}}
    solution {"normals", "heights", "lambda", "residuals", "phi", "iterations",
              "converged", ...}  plus the echoed "problem"
"""
import json
import math

import numpy as np

from .bodies import Ball, PolyStar, SampledStar, make_height_body
from .errors import InputError
from .group import builtin_group, check_orthogonal, close_group
from .measure import DiscreteMeasure
from .solver import ProblemSpec, SolverOptions

OPTION_KEYS = {
    "gtol": float, "gtol_3d": float, "max_iter": int, "armijo_c": float, "shrink": float,
    "max_backtracks": int, "max_height": float, "quad_level": int, "refine": bool, "seed": int,
}


def _require(obj, key, what):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError("%s needs a %r field" % (what, key))
    return obj[key]


def _matrix(m, n):
    a = np.asarray(m, dtype=float)
    if a.size != n * n:
        raise InputError("generator has %d entries, expected %d" % (a.size, n * n))
    return a.reshape(n, n)


def group_from_json(obj):
    n = int(_require(obj, "dim", "group"))
    if "builtin" in obj:
        return builtin_group(obj["builtin"], obj.get("param"), n)
    gens = [check_orthogonal(_matrix(m, n)) for m in _require(obj, "generators", "group")]
    return close_group(gens, dim=n)


def body_from_json(obj):
    return make_height_body(_require(obj, "normals", "body"), _require(obj, "heights", "body"))


def body_to_json(K):
    return {"dim": K.dim, "normals": K.normals.tolist(), "heights": K.heights.tolist()}


def star_from_json(obj):
    if obj is None:
        return Ball()
    if "ball" in obj:
        return Ball(float(obj["ball"]))
    if "poly" in obj:
        return PolyStar(body_from_json(obj["poly"]))
    if "sampled" in obj:
        samples = obj["sampled"]
        return SampledStar(
            np.array([s[0] for s in samples], dtype=float),
            np.array([s[1] for s in samples], dtype=float),
            obj.get("interp", "nearest"),
        )
    raise InputError("Q must be one of {'ball'}, {'poly'}, {'sampled'}")


def star_to_json(Q):
    if isinstance(Q, Ball):
        return {"ball": Q.radius}
    if isinstance(Q, PolyStar):
        return {"poly": body_to_json(Q.body)}
    return {
        "sampled": [[u.tolist(), float(r)] for u, r in zip(Q.directions, Q.radii)],
        "interp": Q.interp,
    }


def measure_from_json(obj):
    atoms = _require(obj, "atoms", "measure")
    # rounded input directions are normalized rather than rejected
    return DiscreteMeasure.from_atoms(atoms, normalize=True)


def options_from_json(obj, **overrides):
    obj = dict(obj or {})
    if "quad3d" in obj:
        obj.setdefault("quad_level", obj.pop("quad3d").get("level"))
    kw = {}
    for key, value in obj.items():
        if key in OPTION_KEYS:
            kw[key] = OPTION_KEYS[key](value)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SolverOptions(**kw)


def problem_from_json(obj, **overrides):
    """Return ``(ProblemSpec, rtol)``."""
    n = int(_require(obj, "dim", "problem"))
    G = group_from_json(_require(obj, "group", "problem"))
    if G.dim != n:
        raise InputError("group acts on R^%d but problem dim is %d" % (G.dim, n))
    m = _require(obj, "measure", "problem")
    mu = measure_from_json(m)
    if mu.dim != n:
        raise InputError("measure atoms live in R^%d but problem dim is %d" % (mu.dim, n))
    rtol = overrides.pop("rtol", None)
    opts = options_from_json(obj.get("opts"), symmetrize=bool(m.get("symmetrize", False)), **overrides)
    if rtol is None:
        rtol = float((obj.get("opts") or {}).get("rtol", 1e-6))
    spec = ProblemSpec(
        p=float(_require(obj, "p", "problem")),
        q=float(_require(obj, "q", "problem")),
        group=G, measure=mu, Q=star_from_json(obj.get("Q")), options=opts,
    )
    return spec, rtol


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def solution_to_json(sol, problem=None):
    out = {
        "normals": sol.normals.tolist(),
        "heights": sol.heights.tolist(),
        "lambda": float(sol.lam),
        "residuals": [float(r) for r in sol.residuals],
        "max_residual": sol.max_residual,
        "phi": _finite(sol.phi),
        "iterations": int(sol.iterations),
        "converged": bool(sol.converged),
        "grad_norm": float(sol.grad_norm),
        "min_height": float(sol.min_height),
        "message": sol.message,
    }
    if problem is not None:
        out["problem"] = problem
    return out


def dumps(obj):
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError("invalid JSON in %s: %s" % (path, exc)) from exc
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc)) from exc
