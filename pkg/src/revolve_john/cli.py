"""Command-line interface: ``revolve-john <subcommand>``.

Exit codes
----------
0  success (for ``certify`` / ``check-bounds``: everything passed)
1  a certificate or bound check failed
2  the solver did not converge
3  infeasible, unbounded or empty input body
4  malformed input file or invalid parameters
5  dimension outside the supported range
"""
from __future__ import annotations

import argparse
import ast
import math
import sys

import numpy as np

from . import bodies, constructions
from .bounds import (
    BoundReport,
    check_ellipsoid_properties,
    check_fixed_axis_containment,
    check_lowner_properties,
)
from .certificates import (
    certificate_residuals,
    ellipsoid_certificate,
    lowner_certificate,
    lowner_normalize,
    position_certificate,
)
from .errors import (
    CertificateNotFound,
    DimensionError,
    EmptySetError,
    InfeasibleError,
    NoContactError,
    NonConvergenceError,
    PreconditionError,
    UnboundedError,
)
from .geometry import HPolytope, VPolytope, polar_vpolytope, regular_simplex_vertices
from .io import FileFormatError, Instance, ResultFile, load_instance, load_result, write_instance, write_result
from .solver import (
    SolveConfig,
    ellipse_fixed_axis_problem,
    general_fixed_axis_problem,
    lowner_fixed_axis_problem,
    oracle_grid_search,
    solve_ellipsoid_any_axis,
    solve_ellipsoid_fixed_axis,
    solve_general_fixed_axis,
    solve_lowner_fixed_axis,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NONCONVERGENCE = 2
EXIT_INFEASIBLE = 3
EXIT_INPUT = 4
EXIT_DIMENSION = 5

BOUND_GROUPS = ("inradius", "volume", "inclusion", "lowner", "containment")


# ---------------------------------------------------------------------------
# pipeline shared by the subcommands


def solve_instance(inst, cfg=None):
    """Run the solver matching ``inst.problem``; returns (solution, diagnostics dict)."""
    cfg = cfg or SolveConfig()
    if inst.problem == "ellipsoid-fixed":
        sol, diag = solve_ellipsoid_fixed_axis(inst.body_L, inst.axis(), cfg, return_diagnostics=True)
    elif inst.problem == "ellipsoid-any":
        sol, diag = solve_ellipsoid_any_axis(inst.body_L, inst.axis_dim, cfg, return_diagnostics=True)
    elif inst.problem == "general-fixed":
        sol, diag = solve_general_fixed_axis(inst.body_K, inst.body_L, inst.axis(), cfg, return_diagnostics=True)
    else:
        sol, diag = solve_lowner_fixed_axis(inst.body_K, inst.axis(), cfg, return_diagnostics=True)
    return sol, diag.as_dict()


def certify(inst, sol):
    """Certificate for a solution: (certificate or None, message or None)."""
    try:
        if inst.problem == "lowner-fixed":
            return lowner_certificate(lowner_normalize(inst.body_K, sol), sol.axis), None
        if inst.problem == "general-fixed":
            return position_certificate(inst.body_K, inst.body_L, sol), None
        if inst.problem == "ellipsoid-any" and 0 < sol.axis.dim < sol.dim:
            try:
                return ellipsoid_certificate(sol, inst.body_L, require_symmetry=True), None
            except CertificateNotFound:
                cert = ellipsoid_certificate(sol, inst.body_L)
                return cert, "symmetry equation not met at tolerance; fixed-axis certificate reported"
        return ellipsoid_certificate(sol, inst.body_L), None
    except CertificateNotFound as exc:
        return None, str(exc)
    except NoContactError as exc:
        return None, f"no certificate at tolerance ({exc})"
    except PreconditionError as exc:
        return None, f"no certificate at tolerance ({exc})"


def bound_reports(inst, sol, which=None):
    """All applicable bound reports, optionally restricted to groups in ``which``."""
    groups = set(which or BOUND_GROUPS)
    out = []
    if inst.problem in ("ellipsoid-fixed", "ellipsoid-any"):
        try:
            reps = check_ellipsoid_properties(inst.body_L, sol, inst.symmetric)
        except DimensionError:
            reps = []
        out = [r for r in reps if r.name.split("-")[0] in groups]
    elif inst.problem == "lowner-fixed" and "lowner" in groups:
        Kn = lowner_normalize(inst.body_K, sol)
        out = check_lowner_properties(Kn, sol.axis, inst.symmetric)
    elif inst.problem == "general-fixed" and "containment" in groups:
        try:
            out = [check_fixed_axis_containment(inst.body_K, inst.body_L, sol)]
        except (CertificateNotFound, NoContactError, PreconditionError):
            out = []
    return out


def oracle_check(inst, sol):
    """Grid-search oracle for planar problems with a line axis: compares the determinant of the operator."""
    if inst.dimension != 2 or inst.problem == "ellipsoid-any":
        raise DimensionError("the oracle check covers planar fixed-axis problems only")
    F = inst.axis()
    if inst.problem == "ellipsoid-fixed":
        res = oracle_grid_search(ellipse_fixed_axis_problem(inst.body_L, F))
        det_oracle = math.exp(res.value)
    elif inst.problem == "lowner-fixed":
        res = oracle_grid_search(lowner_fixed_axis_problem(inst.body_K, F))
        det_oracle = math.exp(-res.value)
    else:
        res = oracle_grid_search(general_fixed_axis_problem(inst.body_K, inst.body_L, F))
        det_oracle = math.exp(res.value)
    det_solver = math.exp(sol.logdet())
    return {
        "oracle_det": det_oracle,
        "solver_det": det_solver,
        "relative_gap": abs(det_solver - det_oracle) / det_oracle,
        "oracle_params": dict(zip(res.names, map(float, res.params))),
    }


# ---------------------------------------------------------------------------
# instance families


def _axis_rows(d, axis, s=1):
    if axis in ("coordinate", "e1"):
        return np.eye(d)[:s]
    if axis == "diagonal":
        return np.ones((1, d))
    if axis == "vertex":
        return regular_simplex_vertices(d)[:1]
    if axis == "full":
        return np.eye(d)
    if axis == "none":
        return np.zeros((0, d))
    raise PreconditionError(f"unknown axis {axis!r}")


def generate_instance(family, params, seed=0):
    """Build an :class:`Instance` for a named family."""
    p = dict(params)
    d = int(p.get("d", 2))
    symmetric = family in ("cube", "cross-polytope")
    if family in ("cube", "cross-polytope", "simplex-john", "simplex-lowner"):
        kind = p.get("problem", "lowner-fixed" if family == "simplex-lowner" else "ellipsoid-fixed")
        axis = p.get("axis", "coordinate")
        s = int(p.get("s", 1))
        if family == "cube":
            H, V = bodies.cube(d), bodies.cube_vertices(d)
        elif family == "cross-polytope":
            H, V = bodies.cross_polytope(d), bodies.cross_polytope_vertices(d)
        elif family == "simplex-john":
            H, V = bodies.simplex_john(d), bodies.simplex_john_vertices(d)
        else:
            V = bodies.simplex_lowner(d)
            H = V.to_hpolytope()
        meta = {"family": family, "d": d, "axis": axis}
        if kind == "ellipsoid-any":
            return Instance(kind, d, body_L=H, axis_dim=s, symmetric=symmetric, meta=meta)
        rows = _axis_rows(d, axis, s)
        if kind == "lowner-fixed":
            return Instance(kind, d, body_L=None, body_K=V, axis_rows=rows, symmetric=symmetric, meta=meta)
        if kind == "ellipsoid-fixed":
            return Instance(kind, d, body_L=H, axis_rows=rows, symmetric=symmetric, meta=meta)
        raise PreconditionError(f"problem {kind!r} not available for {family}")
    if family == "random-2d":
        k = int(p.get("k", 8))
        seed = int(p.get("seed", seed))
        L = bodies.random_polygon(seed, k)
        return Instance("ellipsoid-fixed", 2, body_L=L, axis_rows=np.eye(2)[:1], meta={"family": family, "seed": seed, "k": k})
    if family == "isosceles":
        K = bodies.regular_triangle((1.0, 1.0))
        return Instance("general-fixed", 2, body_L=bodies.cube(2), body_K=K, axis_rows=np.ones((1, 2)), meta={"family": family})
    if family == "appendix-a":
        n, gamma, t = int(p.get("n", 2)), float(p.get("gamma", 0.25)), float(p.get("t", 0.8))
        inst = constructions.build_appendix_a(n, gamma, t, require_ball=bool(p.get("require_ball", True)))
        L = polar_vpolytope(VPolytope(inst.vectors))
        meta = {
            "family": family, "n": n, "gamma": gamma, "t": t,
            "sigma": inst.sigma, "inradius_closed_form": inst.inradius,
            "vectors": inst.vectors.tolist(), "weights": inst.weights.tolist(),
        }
        return Instance("ellipsoid-fixed", n, body_L=L, axis_rows=np.zeros((0, n)), meta=meta)
    if family == "lifted":
        d, s, m, eps = int(p.get("d", 4)), int(p.get("s", 2)), int(p.get("m", 4)), float(p.get("eps", 0.05))
        conf = constructions.lifted_configuration(d, s, m, eps)
        L = HPolytope(conf.vectors, np.ones(len(conf.vectors)))
        meta = {
            "family": family, "d": d, "s": s, "m": m, "eps": eps, "t": conf.t,
            "polar_inradius": conf.polar_inradius, "target": conf.target,
            "vectors": conf.vectors.tolist(), "weights": conf.weights.tolist(),
        }
        return Instance("ellipsoid-fixed", d - s, body_L=L, axis_rows=np.zeros((0, d - s)), meta=meta)
    if family == "bad-ellipsoid":
        d, s, lam = int(p.get("d", 3)), int(p.get("s", 1)), float(p.get("lambda", 4.0))
        if not 0 <= s <= d - 2 or lam < 1:
            raise PreconditionError("need 0 <= s <= d - 2 and lambda >= 1")
        n = int(p.get("n", 64 if d == 2 else 200))
        axes = lam ** np.arange(1, d + 1, dtype=float)
        L = bodies.ellipsoid_inner(axes, n)
        meta = {"family": family, "d": d, "s": s, "lambda": lam, "n": n, "semi_axes": axes.tolist()}
        return Instance("ellipsoid-any", d, body_L=L, axis_dim=s, meta=meta)
    raise PreconditionError(f"unknown family {family!r}")


def _parse_params(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise PreconditionError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        try:
            out[k] = ast.literal_eval(v)
        except (ValueError, SyntaxError):
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# text output


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return " ".join(_fmt(v) for v in np.ravel(x))
    return str(x)


def _bound_table(reports):
    lines = ["bound\tlhs\tsense\trhs\tmargin\tpass"]
    for r in reports:
        d = r.as_dict() if isinstance(r, BoundReport) else r
        lines.append("\t".join([d["name"], _fmt(d["lhs"]), d["sense"], _fmt(d["rhs"]), _fmt(d["margin"]), "PASS" if d["pass"] else "FAIL"]))
    return lines


def text_report(res):
    """Tab-separated report of a result file."""
    inst, sol = res.instance, res.solution
    lines = ["key\tvalue", f"problem\t{inst.problem}", f"dimension\t{inst.dimension}", f"axis_dim\t{sol.axis.dim}"]
    lines.append(f"axis_basis\t{_fmt(sol.axis.basis)}")
    lines.append(f"logdet\t{_fmt(sol.logdet())}")
    if hasattr(sol, "center"):
        lines.append(f"volume\t{_fmt(sol.volume())}")
        lines.append(f"center\t{_fmt(sol.center)}")
    else:
        lines.append(f"translation\t{_fmt(sol.translation)}")
        lines.append(f"search_space\t{sol.search_space}")
    lines.append(f"shape_on_F\t{_fmt(sol.shape_on_F)}")
    lines.append(f"mu\t{_fmt(sol.mu)}")
    for k, v in sorted(res.diagnostics.items()):
        lines.append(f"diag.{k}\t{_fmt(v)}")
    if res.certificate is not None:
        lines.append(f"certificate.pairs\t{len(res.certificate.pairs)}")
        for k, v in res.certificate.residuals().items():
            lines.append(f"certificate.residual.{k}\t{_fmt(v)}")
        lines.append(f"certificate.valid\t{res.certificate.valid}")
    if res.certificate_message:
        lines.append(f"certificate.message\t{res.certificate_message}")
    if res.oracle:
        lines.append(f"oracle.relative_gap\t{_fmt(res.oracle['relative_gap'])}")
    lines.append("")
    lines.extend(_bound_table(res.bounds))
    return "\n".join(lines) + "\n"


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args):
    inst = load_instance(args.instance)
    cfg = SolveConfig(seed=args.seed, init=args.init)
    if args.tol is not None:
        cfg = SolveConfig(tol_opt=args.tol, seed=args.seed, init=args.init)
    sol, diag = solve_instance(inst, cfg)
    cert, msg = certify(inst, sol)
    reports = [r.as_dict() for r in bound_reports(inst, sol)]
    oracle = oracle_check(inst, sol) if args.oracle_check else None
    res = ResultFile(inst, sol, cert, msg, reports, diag, oracle)
    _emit(write_result(res), args.out)
    return EXIT_OK


def cmd_certify(args):
    res = load_result(args.result)
    cert, msg = certify(res.instance, res.solution)
    if cert is None:
        print(msg or "no certificate at tolerance", file=sys.stderr)
        return EXIT_CHECK_FAILED
    F = res.solution.axis
    full = certificate_residuals(cert.pairs, cert.weights, F, F.ambient_dim)
    lines = ["equation\tresidual\ttol\tpass"]
    for k, v in cert.residuals().items():
        lines.append(f"{k}\t{_fmt(v)}\t{_fmt(cert.tol)}\t{'PASS' if v <= cert.tol else 'FAIL'}")
    lines.append("")
    lines.append("pair\tweight\tv\tp")
    for i, (pr, w) in enumerate(zip(cert.pairs, cert.weights)):
        lines.append(f"{i}\t{_fmt(w)}\t{_fmt(pr.v)}\t{_fmt(pr.p)}")
    lines.append("")
    lines.append(f"max_residual\t{_fmt(max(full.values()))}")
    if msg:
        lines.append(f"message\t{msg}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if cert.valid else EXIT_CHECK_FAILED


def cmd_check_bounds(args):
    res = load_result(args.result)
    which = None if args.which in (None, "all") else args.which.split(",")
    if which:
        bad = [w for w in which if w not in BOUND_GROUPS]
        if bad:
            raise PreconditionError(f"unknown bound group(s): {', '.join(bad)}")
    reports = bound_reports(res.instance, res.solution, which)
    lines = _bound_table(reports)
    for r in reports:
        if r.is_equality():
            lines.append(f"equality\t{r.name}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


def cmd_gen_instance(args):
    inst = generate_instance(args.family, _parse_params(args.params), seed=args.seed)
    _emit(write_instance(inst), args.out)
    return EXIT_OK


def cmd_report(args):
    res = load_result(args.result)
    if args.svg and res.instance.dimension != 2:
        raise DimensionError("SVG output is available for planar (d = 2) results only")
    _emit(text_report(res), args.out)
    if args.svg:
        from .plotting import render_svg

        render_svg(res, args.svg)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="revolve-john", description="Largest inscribed and smallest enclosing ellipsoids of revolution.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance file and write a result file")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=None, help="duality-gap tolerance of the barrier method")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=("chebyshev", "random"), default="chebyshev")
    p.add_argument("--oracle-check", action="store_true", help="compare with a grid-search oracle (planar, fixed axis)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="recompute contact pairs and certificate weights")
    p.add_argument("result")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("check-bounds", help="evaluate the geometric bounds for a result")
    p.add_argument("result")
    p.add_argument("--which", default="all", help="comma-separated groups: " + ",".join(BOUND_GROUPS))
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("gen-instance", help="write an instance of a named family")
    p.add_argument("family")
    p.add_argument("params", nargs="*", help="key=value parameters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("report", help="tab-separated report, optionally with an SVG figure")
    p.add_argument("result")
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except NonConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (InfeasibleError, UnboundedError, EmptySetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
