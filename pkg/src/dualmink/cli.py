"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure or non-convergence.
"""
import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import jsonio
from .bodies import radial, vertices
from .classify import classify, render_table
from .dualmeasure import radial_cells
from .errors import DualMinkError, InputError, NumericalError
from .group import (
    builtin_group, commutant_dimension, contains_minus_identity, fixed_point_space,
    hemisphere_witness, is_irreducible, orbit, orbit_inradius, symmetrize_measure,
)
from .quadrature import DEFAULT_LEVEL, sphere_quadrature
from .solver import minimize, verify

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
PLOT_SAMPLES = 360


@dataclass
class RunConfig:
    command: str
    input: str = None
    output: str = None
    seed: int = 0
    threads: int = 1
    quad_level: int = None
    gtol: float = None
    rtol: float = None
    group: str = None
    param: int = None
    dim: int = None
    vector: list = None
    format: str = "json"


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _group_input(cfg):
    if cfg.group is not None:
        return builtin_group(cfg.group, cfg.param, cfg.dim), None
    if cfg.input is None:
        raise InputError("give --input or --group")
    obj = jsonio.load(cfg.input)
    gobj = obj.get("group", obj)
    return jsonio.group_from_json(gobj), obj


def _solution_problem(cfg):
    if cfg.input is None:
        raise InputError("--input is required")
    obj = jsonio.load(cfg.input)
    problem = obj.get("problem")
    if problem is None:
        raise InputError("solution JSON must carry the originating 'problem'")
    spec, rtol = jsonio.problem_from_json(problem, quad_level=cfg.quad_level, rtol=cfg.rtol)
    K = jsonio.body_from_json({"normals": obj.get("normals"), "heights": obj.get("heights")})
    lam = float(obj.get("lambda", 1.0))
    return obj, spec, rtol, K, lam


def cmd_solve(cfg):
    if cfg.input is None:
        raise InputError("--input is required")
    problem = jsonio.load(cfg.input)
    spec, rtol = jsonio.problem_from_json(
        problem, quad_level=cfg.quad_level, gtol=cfg.gtol, rtol=cfg.rtol, seed=cfg.seed)
    sol = minimize(spec)
    out = jsonio.solution_to_json(sol, problem)
    out["rtol"] = rtol
    _emit(jsonio.dumps(out), cfg.output)
    return EXIT_OK if sol.converged and sol.max_residual < rtol else EXIT_NUMERIC


def cmd_verify(cfg):
    _, spec, rtol, K, lam = _solution_problem(cfg)
    quad = sphere_quadrature(spec.options.quad_level) if K.dim == 3 else None
    mu = spec.measure
    if spec.options.symmetrize:
        mu = symmetrize_measure(spec.group, mu)
    report = verify(K, spec.Q, spec.p, spec.q, mu, spec.group, lam, quad, spec.options.refine)
    ok = report.ok(rtol)
    out = {
        "residuals": [float(r) for r in report.residuals],
        "max_residual": report.max_residual,
        "extra_weight": report.extra_weight,
        "orbit_spread": [float(s) for s in report.orbit_spread],
        "rtol": rtol,
        "ok": bool(ok),
    }
    _emit(jsonio.dumps(out), cfg.output)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_classify(cfg):
    G, _ = _group_input(cfg)
    report = classify(G)
    if cfg.format == "text":
        _emit(render_table(report) + "\n", cfg.output)
    else:
        out = report.as_dict()
        out["table"] = render_table(report).splitlines()
        _emit(jsonio.dumps(out), cfg.output)
    return EXIT_OK


def cmd_orbit(cfg):
    G, obj = _group_input(cfg)
    v = cfg.vector if cfg.vector is not None else (obj or {}).get("v")
    if v is None:
        raise InputError("give a base vector with --vector or a 'v' field")
    v = np.asarray(v, dtype=float)
    if v.shape != (G.dim,) or not np.linalg.norm(v) > 0:
        raise InputError("base vector must be a nonzero vector in R^%d" % G.dim)
    v = v / np.linalg.norm(v)
    pts = orbit(G, v).points
    u = hemisphere_witness(G, v)
    out = {
        "v": v.tolist(),
        "size": int(pts.shape[0]),
        "points": pts.tolist(),
        "hemisphere": None if u is None else u.tolist(),
        "inradius": orbit_inradius(G, v),
    }
    _emit(jsonio.dumps(out), cfg.output)
    return EXIT_OK


def cmd_group_info(cfg):
    G, _ = _group_input(cfg)
    out = {
        "dim": G.dim,
        "order": G.order,
        "irreducible": is_irreducible(G),
        "commutant_dimension": commutant_dimension(G, symmetric=False),
        "symmetric_commutant_dimension": commutant_dimension(G, symmetric=True),
        "contains_minus_identity": contains_minus_identity(G),
        "fixed_point_basis": fixed_point_space(G).T.tolist(),
        "generators": [np.asarray(g).tolist() for g in G.generators],
    }
    _emit(jsonio.dumps(out), cfg.output)
    return EXIT_OK


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def cmd_plot(cfg):
    _, spec, _, K, _ = _solution_problem(cfg)
    if K.dim == 2:
        theta = 2.0 * math.pi * np.arange(PLOT_SAMPLES) / PLOT_SAMPLES
        U = np.column_stack([np.cos(theta), np.sin(theta)])
        rho, facet = radial(K, U)
        main = _csv(["theta", "rho", "facet"], zip(theta, rho, (int(f) for f in facet)))
        cells = radial_cells(K)
        V = vertices(K)
        cell_rows = zip((int(f) for f in cells.facets), cells.starts, cells.ends, V[:, 0], V[:, 1])
        extra = _csv(["facet", "theta_start", "theta_end", "end_vertex_x", "end_vertex_y"], cell_rows)
    else:
        level = cfg.quad_level if cfg.quad_level is not None else spec.options.quad_level
        quad = sphere_quadrature(level if level is not None else DEFAULT_LEVEL)
        rho, facet = radial(K, quad.nodes)
        rows = ((x, y, z, r, int(f), w) for (x, y, z), r, f, w in zip(quad.nodes, rho, facet, quad.weights))
        main = _csv(["x", "y", "z", "rho", "facet", "weight"], rows)
        extra = None
    if cfg.output is None:
        sys.stdout.write(main)
        if extra is not None:
            sys.stdout.write("\n" + extra)
    else:
        _emit(main, cfg.output)
        if extra is not None:
            stem = cfg.output[:-4] if cfg.output.endswith(".csv") else cfg.output
            _emit(extra, stem + ".cells.csv")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "orbit": cmd_orbit,
    "plot": cmd_plot,
    "group-info": cmd_group_info,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="dualmink", description="Group-invariant L_p dual Minkowski problems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", help="input JSON file")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1, help="BLAS threads (default 1, deterministic)")
        p.add_argument("--quad-level", type=int, dest="quad_level", help="icosahedral subdivision level (3-D)")
        p.add_argument("--gtol", type=float)
        p.add_argument("--rtol", type=float)
        if name in ("classify", "orbit", "group-info"):
            p.add_argument("--group", help="builtin group name instead of --input")
            p.add_argument("--param", type=int)
            p.add_argument("--dim", type=int)
        if name == "orbit":
            p.add_argument("--vector", type=float, nargs="+")
        if name == "classify":
            p.add_argument("--format", choices=("json", "text"), default="json")
    return parser


def run(cfg):
    try:
        with threadpool_limits(limits=max(1, cfg.threads)):
            return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        sys.stderr.write("error: %s: %s\n" % (type(exc).__name__, exc))
        return EXIT_INPUT
    except NumericalError as exc:
        sys.stderr.write("error: %s: %s\n" % (type(exc).__name__, exc))
        return EXIT_NUMERIC
    except DualMinkError as exc:
        sys.stderr.write("error: %s: %s\n" % (type(exc).__name__, exc))
        return EXIT_NUMERIC


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
