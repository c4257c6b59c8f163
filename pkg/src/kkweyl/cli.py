"""Command line front end.

Exit codes: 0 every check passed, 1 a check failed, 2 input error (unreadable
file, parse error, wrong dimension, bad flag), 3 no evaluable sample points.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import conventions as cv
from .conformal import POINT_ERRORS, conformal_residual, cotton_divergence, cotton_divergence_fd
from .curvature import GeometryError, build_frame, identity_residuals
from .dsl import ParseError, evaluate_field, load_metric_file, parse_metric_file
from .einstein_weyl import WeylStructure, ew_residual, from_reduction, gauduchon_check
from .kaluza_klein import (KKData, _radial_index, dual_field_2d, dual_field_3d, lift_metric,
                           potential_from_dual, reduced_cotton_3to2, reduced_weyl_4to3, validate_reduction)
from .report import document, grid_points, random_points, run_check, write_json
from . import solutions as sol

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NO_POINTS = 0, 1, 2, 3
DEFAULT_TOLERANCE = 1e-8
SOLUTION_NAMES = ("a", "b", "b-euclidean", "kink", "flat-kink", "2d-static")


class InputError(Exception):
    pass


# -- shared helpers ----------------------------------------------------------------

def _parse_params(items) -> dict:
    out = {}
    for item in items or ():
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise InputError(f"bad --params entry {part!r}; expected NAME=VALUE")
            k, v = part.split("=", 1)
            try:
                out[k.strip()] = float(v)
            except ValueError:
                raise InputError(f"bad --params value {v!r} for {k.strip()}") from None
    return out


def _load(path: str, params: dict):
    try:
        if path == "-":
            mf = parse_metric_file(sys.stdin.read())
        else:
            mf = load_metric_file(path)
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if params:
        try:
            mf = mf.with_params(**params)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    return mf


def _points(args, bounds) -> list[tuple]:
    dim = len(bounds)
    if args.point:
        pts = []
        for s in args.point:
            try:
                p = tuple(float(x) for x in s.replace(",", " ").split())
            except ValueError:
                raise InputError(f"bad --point {s!r}") from None
            if len(p) != dim:
                raise InputError(f"--point {s!r} needs {dim} coordinates")
            pts.append(p)
        return pts
    n = args.grid
    if n < 1:
        raise InputError("--grid must be positive")
    if args.seed is not None:
        return random_points(bounds, n**dim, args.seed)
    return grid_points(bounds, n)


def _emit(args, command: str, source, reports, notes=()) -> int:
    if any(r.evaluated == 0 for r in reports):
        code = EXIT_NO_POINTS
    elif all(r.passed for r in reports):
        code = EXIT_OK
    else:
        code = EXIT_FAIL
    for note in notes:
        print(f"note: {note}")
    for r in reports:
        print(r.text(verbose=args.verbose))
    print(f"conventions {cv.conventions_hash()}; exit {code}")
    if args.json:
        write_json(document(command, source, reports, code, notes), args.json)
    return code


# -- commands ----------------------------------------------------------------------

def cmd_curvature(args) -> int:
    mf = _load(args.file, _parse_params(args.params))
    spec = mf.metric
    pts = _points(args, mf.domain_bounds())
    order = args.order

    def identities(p):
        frame = build_frame(spec, p, order)
        res = identity_residuals(frame)
        vals = {"ricci_scalar": float(frame.ricci[1].values), **res}
        if args.verbose:
            vals["ricci"] = frame.ricci[0].values
        return max(res.values()) / frame.riemann_scale, vals

    reports = [run_check("curvature-identities", pts, identities, args.tolerance,
                         {"dim": spec.dim, "order": order})]
    if spec.dim == 3:
        if order >= 4:
            def conservation(p):
                return float(np.max(np.abs(cotton_divergence(build_frame(spec, p, 4)))))
            reports.append(run_check("cotton-conservation (order-4 jets)", pts, conservation,
                                     max(args.tolerance, 1e-9)))
        else:
            def conservation(p):
                return float(np.max(np.abs(cotton_divergence_fd(spec, p))))
            reports.append(run_check("cotton-conservation (finite differences)", pts,
                                     conservation, max(args.tolerance, 1e-6)))
    return _emit(args, "curvature", args.file, reports)


def cmd_conformal_check(args) -> int:
    mf = _load(args.file, _parse_params(args.params))
    spec = mf.metric
    if spec.dim == 2:
        raise InputError("all 2-dimensional spaces are locally conformally flat; "
                         "there is no conformal tensor to check")
    pts = _points(args, mf.domain_bounds())
    tensor = "weyl" if spec.dim == 4 else "cotton"
    order = 2 if spec.dim == 4 else 3

    def check(p):
        return conformal_residual(build_frame(spec, p, order))

    rep = run_check(f"conformal-flatness ({tensor})", pts, check, args.tolerance,
                    {"tensor": tensor, "normalisation": cv.NORMALISATION})
    rep.details["verdict"] = "conformally flat at samples" if rep.passed else "not conformally flat"
    return _emit(args, "conformal-check", args.file, [rep])


def _kk_reports(kk: KKData, pts, tolerance: float, validate: bool):
    reports = []
    if kk.n == 4:
        def values(p):
            red = reduced_weyl_4to3(kk, p)
            return None, {"f": red.f, "max_c": float(np.max(np.abs(red.c))),
                          "max_minus": float(np.max(np.abs(red.minus))),
                          "max_weyl": float(np.max(np.abs(red.full)))}
        name = "reduce 4->3"
    else:
        def values(p):
            red = reduced_cotton_3to2(kk, p)
            return None, {"f": red.f, "r": red.r, "C_lower": red.C_lower,
                          "minus": red.minus, "max_cotton": float(np.max(np.abs(red.full)))}
        name = "reduce 3->2"
    reports.append(run_check(name, pts, values, tolerance))
    if validate:
        def agree(p):
            parts = validate_reduction(kk, p)
            return max(parts.values()), parts
        reports.append(run_check(f"{name} vs direct lift", pts, agree, tolerance,
                                 {"lifted_dim": kk.n, "fibre": kk.fibre}))
    return reports


def cmd_kk_reduce(args) -> int:
    mf = _load(args.file, _parse_params(args.params))
    if mf.metric.dim not in (2, 3):
        raise InputError("kk-reduce needs a 2- or 3-dimensional base metric")
    kk = KKData.from_file(mf)
    pts = _points(args, mf.domain_bounds())
    return _emit(args, "kk-reduce", args.file, _kk_reports(kk, pts, args.tolerance, args.validate))


def _ew_structure(mf, mode):
    if mf.weyl is not None or mf.killing is None:
        return WeylStructure.from_file(mf), cv.EW_SIGN[mode], "weyl block"
    ws, sign = from_reduction(mf.metric, mf.killing, mode)
    return ws, sign, "killing block lowered (W_m = f_m)"


def cmd_ew(args) -> int:
    mf = _load(args.file, _parse_params(args.params))
    if mf.metric.dim != 3:
        raise InputError("the Einstein-Weyl check needs a 3-dimensional metric")
    mode = args.mode or ("positive" if mf.metric.minus_count == 0 else "indefinite")
    ws, sign, source = _ew_structure(mf, mode)
    pts = _points(args, mf.domain_bounds())
    details = {"mode": mode, "sign": sign, "potential": source}

    def fixed(p):
        frame = ws.frame(p, 3)
        r = ew_residual(ws, p, sign, frame=frame)
        return r.max_abs("gauge_fixed") / frame.riemann_scale, {
            "full": r.max_abs("full") / frame.riemann_scale, "divergence": r.divergence,
            "max_sym_dw": float(np.max(np.abs(r.sym_dw)))}

    rep = run_check("einstein-weyl (gauge fixed)", pts, fixed, args.tolerance, details)
    g = gauduchon_check(ws, pts, args.tolerance)
    rep.details["gauduchon"] = {
        "gauge_fixed": g.gauge_fixed,
        "max_divergence": max((v for _, v in g.divergence), default=None),
        "max_sym_dw": max((v for _, v in g.symmetric), default=None)}
    return _emit(args, "ew", args.file, [rep])


def _solution_3d(name, mf, pts, tol, notes):
    metric, f_vec = mf.metric, mf.killing
    target = (0.0, 0.0, 1.0) if name == "a" else (1.0, 0.0, 0.0)
    scale = lambda p: build_frame(metric, p, 2, check_signature=False).riemann_scale  # noqa: E731
    reports = [
        run_check("traceless embedding equation", pts,
                  lambda p: float(np.max(np.abs(sol.residual_traceless(metric, f_vec, p)))) / scale(p), tol),
        run_check("killing equation", pts,
                  lambda p: float(np.max(np.abs(sol.residual_killing(metric, f_vec, p)))), tol),
    ]
    cons = sol.constraint_r_5f2(metric, f_vec, pts)
    values, skipped = dict(cons.values), dict(cons.skipped)

    def constancy(p):
        if p in skipped:
            raise GeometryError(skipped[p])
        return abs(values[p] - cons.mean), {"r_plus_5f2": values[p]}

    reports.append(run_check("r + 5 f^2 constant", pts, constancy, tol, {"c": cons.mean}))

    def dual(p):
        F = sol.dual_killing(metric, f_vec, p).values
        ratio, off = sol.proportionality(F, target)
        return off, {"F": F, "ratio": ratio}

    rep = run_check("dual killing direction", pts, dual, tol, {"expected_direction": target})
    ratios = [r.values["ratio"] for r in rep.records if not r.skipped]
    if ratios:
        rep.details["normalisation"] = float(np.mean(ratios))
        rep.details["normalisation_spread"] = float(np.ptp(ratios))
    reports.append(rep)
    reports.append(run_check("dual killing is killing", pts,
                             lambda p: float(np.max(np.abs(sol.dual_killing_residual(metric, f_vec, p)))), tol))
    if mf.potential is not None:
        kk = KKData.from_file(mf)
        if not _evaluates(mf.potential, pts):
            # the fixture's closed form is real only for some parameters
            bounds = mf.domain_bounds()
            r = _radial_index(metric)
            kk = kk.with_potential(potential_from_dual(
                metric, evaluate_field(f_vec, pts[0], 0)[:, 0], lower=bounds[r][0], domain=bounds[r]).exprs)
            notes.append("fixture potential is not real for these parameters; "
                         "using a potential rebuilt from the dual of f")
        lifted = lift_metric(kk)

        def dual_match(p):
            frame = build_frame(metric, p, 3, check_signature=False)
            return float(np.max(np.abs(dual_field_3d(kk, p, frame=frame).values
                                       - evaluate_field(f_vec, p, 0)[:, 0])))

        reports.append(run_check("potential dual equals f", pts, dual_match, tol))
        if not _signature_matches(metric, pts):
            # the flipped determinant sign of the chart flips the sign of the fibre
            kk = kk.with_fibre_sign(1)
            lifted = lift_metric(kk)
            notes.append("lift built with fibre sign +1 for the flipped chart")
        reports.append(run_check(
            "lifted 4D weyl vanishes", pts,
            lambda p: conformal_residual(build_frame(lifted, p + (0.0,), 2, check_signature=False)), tol))
    ws, sign = from_reduction(metric, f_vec, "indefinite")

    def correspondence(p):
        frame = ws.frame(p, 3, check_signature=False)
        return ew_residual(ws, p, sign, frame=frame).max_abs() / frame.riemann_scale

    reports.append(run_check("einstein-weyl correspondence (indefinite)", pts, correspondence,
                             tol, {"sign": sign}))
    return reports


def _evaluates(field, pts) -> bool:
    try:
        evaluate_field(field, pts[0], 0)
    except POINT_ERRORS:
        return False
    return True


def _signature_matches(metric, pts) -> bool:
    for p in pts:
        try:
            return build_frame(metric, p, 0, check_signature=False).signature_ok
        except POINT_ERRORS:
            continue
    return True


def _kink_limits(krep) -> float:
    c = krep.c
    lo, hi, r_inf = krep.limits
    return max(abs(krep.f_at_zero), abs(lo + c**0.5), abs(hi - c**0.5), abs(r_inf - 2 * c),
               abs(krep.vacuum["minus3f2_plus_5c"] - krep.vacuum["r_vacuum"]))


def cmd_solutions(args) -> int:
    name = args.name
    params = _parse_params(args.params)
    tol = args.tolerance
    notes = []
    if name in ("kink", "flat-kink"):
        c = args.c
        if c <= 0:
            raise InputError("the kink solutions need c > 0")
        xs = [p[0] for p in _points(args, [(-3.0, 3.0)])]
        if name == "kink":
            krep = sol.kink_relation_check(c, xs)

            def profile(p):
                f, r = sol.kink_profile(c, p[0])
                return None, {"f": f, "r": r}

            def relation(p):
                f, r = sol.kink_profile(c, p[0])
                return abs(r + 3 * f * f - 5 * c), {"r_plus_3f2": r + 3 * f * f}

            reports = [run_check("kink profile", [(x,) for x in xs], profile, tol),
                       run_check("r = -3 f^2 + 5c", [(x,) for x in xs], relation, 1e-10,
                                 {"constant": krep.constant, "constant_over_c": krep.ratio}),
                       run_check("kink limits and vacuum", [(0.0,)], lambda p: _kink_limits(krep),
                                 1e-10, {"f(0)": krep.f_at_zero, "f(-inf)": krep.limits[0],
                                  "f(+inf)": krep.limits[1], "r(+inf)": krep.limits[2], **krep.vacuum})]
            notes.append(krep.note)
        else:
            frep = sol.flat_kink_check(c, xs)
            reports = [run_check("flat kink equation", [(x,) for x in xs],
                                 lambda p: abs(sol.flat_kink_check(c, [p[0]]).residuals[0][1]), 1e-12,
                                 {"curved_scale": frep.curved_scale, "flat_scale": frep.flat_scale})]
            notes.append(frep.note)
        return _emit(args, f"solutions {name}", None, reports, notes)
    fixture = {"a": "solution_a", "b": "solution_b", "b-euclidean": "solution_b_euclidean",
               "2d-static": "static2d"}[name]
    try:
        mf = sol.load_fixture(fixture, **params)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    pts = _points(args, mf.domain_bounds())
    if name in ("a", "b"):
        reports = _solution_3d(name, mf, pts, tol, notes)
        if not _signature_matches(mf.metric, pts):
            notes.append("with these parameters the chart's determinant sign differs from the "
                         "declared signature; solution checks ignore the declared signature")
    elif name == "b-euclidean":
        ws = WeylStructure.from_file(mf)
        scale = lambda p: ws.frame(p, 2).riemann_scale  # noqa: E731
        reports = [run_check("einstein-weyl (positive, no sign change)", pts,
                             lambda p: ew_residual(ws, p, cv.EW_SIGN["positive"]).max_abs() / scale(p), tol),
                   run_check("killing equation", pts,
                             lambda p: float(np.max(np.abs(sol.residual_killing(mf.metric, mf.killing, p)))), tol)]
    else:
        metric, f = mf.metric, mf.field
        emb = sol.embedding_2d_report(metric, f, pts)
        c = emb.c

        def eqs(p):
            e = sol.residual_embedding_2d(metric, f, p)
            vals = {"traceless": float(np.max(np.abs(e.traceless))), "trace": abs(e.trace),
                    "constraint": e.constraint, "combined": abs(e.combined_with(c))}
            return max(vals["traceless"], vals["trace"], abs(e.constraint - c),
                       vals["combined"]), vals

        reports = [run_check("2d embedding equations", pts, eqs, tol, {"c": c})]
        if mf.potential is not None:
            kk = KKData.from_file(mf)
            lifted = lift_metric(kk)
            reports.append(run_check(
                "potential dual equals f", pts,
                lambda p: abs(float(dual_field_2d(kk, p).values) - float(evaluate_field(f, p, 0)[0, 0])), tol))
            reports.append(run_check("lifted 3D cotton vanishes", pts,
                                     lambda p: conformal_residual(build_frame(lifted, p + (0.0,), 3)), tol))
    return _emit(args, f"solutions {name}", fixture, reports, notes)


# -- entry point ---------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=5, help="points per coordinate (default 5)")
    p.add_argument("--point", action="append", help="sample point 'x0,x1,...' (repeatable)")
    p.add_argument("--seed", type=int, help="random points instead of a grid")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--params", action="append", help="parameter overrides NAME=VALUE[,...]")
    p.add_argument("--json", metavar="PATH", help="write a machine-readable report")
    p.add_argument("-v", "--verbose", action="store_true", help="print per-point values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kkweyl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="Riemann/Ricci and identity residuals")
    p.add_argument("file")
    p.add_argument("--order", type=int, choices=(3, 4), default=3)
    _common(p)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("conformal-check", help="Weyl (4D) or Cotton (3D) flatness")
    p.add_argument("file")
    _common(p)
    p.set_defaults(func=cmd_conformal_check)

    p = sub.add_parser("kk-reduce", help="reduced Weyl/Cotton formulas")
    p.add_argument("file")
    p.add_argument("--validate", action="store_true", help="compare with the direct lift")
    _common(p)
    p.set_defaults(func=cmd_kk_reduce)

    p = sub.add_parser("ew", help="Einstein-Weyl residuals")
    p.add_argument("file")
    p.add_argument("--mode", choices=sorted(cv.EW_SIGN))
    _common(p)
    p.set_defaults(func=cmd_ew)

    p = sub.add_parser("solutions", help="verify a built-in solution family")
    p.add_argument("name", choices=SOLUTION_NAMES)
    p.add_argument("--c", type=float, default=1.0, help="kink constant (default 1)")
    _common(p)
    p.set_defaults(func=cmd_solutions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
