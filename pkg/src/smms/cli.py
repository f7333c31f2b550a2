"""Command-line driver: build families, verify residuals, emit reports.

Subcommands: ``verify``, ``classify``, ``obata``, ``oracle-compare``,
``list``.  JSON output is byte-deterministic: fixed field order and floats
rendered with 17 significant digits.  Exit codes: 0 verification pass, 2
verification fail (residuals above tolerance), 1 usage or construction
error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import classify as cl
from . import tensor_core as tc
from . import warped_closed as wc
from . import weighted as wt
from .catalog import (
    FAMILY_FLAGS,
    FamilyId,
    FamilyParams,
    build_family,
    default_samples,
    family_expected,
)
from .errors import SMMSError
from .warped_closed import WarpedSMMS

DEFAULT_TOL = 1e-6
DEFAULT_SAMPLES = 17


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------


def _fmt_float(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return repr(x)


def render_json(obj, indent=0):
    """JSON text with fixed key order and 17-significant-digit floats."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f'{pad}  "{k}": {render_json(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not len(obj):
            return "[]"
        inner = ",\n".join(f"{pad}  {render_json(v, indent + 1)}" for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)}")


def _emit(report, output, out_path, stream=sys.stdout):
    if output == "json":
        text = render_json(report) + "\n"
    elif output == "text":
        lines = []

        def walk(prefix, node):
            if isinstance(node, dict):
                for k, v in node.items():
                    walk(f"{prefix}{k}.", v) if isinstance(v, (dict, list)) else lines.append(
                        f"{prefix}{k} = {_fmt_float(v) if isinstance(v, float) else v}"
                    )
            elif isinstance(node, list):
                for i, v in enumerate(node):
                    walk(f"{prefix}{i}.", v) if isinstance(v, (dict, list)) else lines.append(
                        f"{prefix}{i} = {v}"
                    )

        walk("", report)
        text = "\n".join(lines) + "\n"
    else:  # csv: golden checks and residuals as rows
        rows = ["key,value"]
        res = report.get("residuals", {})
        for k, v in res.items():
            rows.append(f"residuals.{k},{_fmt_float(v) if isinstance(v, float) else v}")
        for gc in report.get("golden_checks", []):
            rows.append(f"golden.{gc['name']},{_fmt_float(gc['actual'])}")
        text = "\n".join(rows) + "\n"
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stream.write(text)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

_PARAM_FLAGS = (
    ("--n", "n", int),
    ("--m", "m", float),
    ("--lambda", "lambda_", float),
    ("--mu", "mu", float),
    ("--A", "A", float),
    ("--B", "B", float),
    ("--C", "C", float),
    ("--c1", "c1", float),
    ("--c2", "c2", float),
    ("--c3", "c3", float),
    ("--c4", "c4", float),
    ("--xi", "xi", float),
)


def _add_family_args(sub):
    sub.add_argument("--family", required=True, help="family id (see 'smms list')")
    for flag, dest, typ in _PARAM_FLAGS:
        sub.add_argument(flag, dest=dest, type=typ, default=None)
    sub.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--output", choices=("json", "csv", "text"), default="json")
    sub.add_argument("--out", dest="out_path", default=None)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="smms",
        description="verification and exploration of weighted Einstein structures",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="residual and golden-value verification of a family")
    _add_family_args(v)

    c = sub.add_parser("classify", help="branch dichotomy and global matching")
    _add_family_args(c)

    o = sub.add_parser("obata", help="integrate the generalized Obata initial value problem")
    o.add_argument("--lambda", dest="lambda_", type=float, required=True)
    o.add_argument("--kappa", type=float, required=True)
    o.add_argument("--xi", type=float, required=True)
    o.add_argument("--n", type=int, default=3)
    o.add_argument("--t-max", dest="t_max", type=float, default=None)
    o.add_argument("--emit-csv", dest="emit_csv", default=None)
    o.add_argument("--output", choices=("json", "csv", "text"), default="json")
    o.add_argument("--out", dest="out_path", default=None)

    oc = sub.add_parser("oracle-compare",
                        help="closed-form warped curvature against the chart oracle")
    _add_family_args(oc)

    sub.add_parser("list", help="list family ids and their parameter flags")
    return ap


def _tol_from(args):
    if args.tol is not None:
        return args.tol
    env = os.environ.get("SMMS_TOL")
    if env:
        return float(env)
    return DEFAULT_TOL


def _params_from(args):
    fields = {}
    for _, dest, _typ in _PARAM_FLAGS:
        val = getattr(args, dest, None)
        if val is not None:
            fields[dest] = val
    return FamilyParams(**fields)


def _params_dict(params):
    out = {}
    for name in ("n", "m", "lambda_", "A", "B", "C", "c1", "c2", "c3", "c4", "xi", "mu"):
        val = getattr(params, name)
        if val is not None:
            key = "lambda" if name == "lambda_" else name
            out[key] = float(val) if name != "n" else int(val)
    return out


# ---------------------------------------------------------------------------
# Golden-check evaluation
# ---------------------------------------------------------------------------


def _eval_golden(gc, s, tol):
    pt = np.asarray(gc.point, dtype=float)
    if gc.kind == "weyl_w":
        actual = float(wt.weighted_weyl(s, pt)[gc.indices])
    elif gc.kind == "dfw":
        actual = float(wt.weighted_weyl_divergence(s, pt)[gc.indices])
    elif gc.kind == "tau":
        actual = tc.curvature_bundle(s.chart, pt).scalar
    elif gc.kind == "weyl":
        actual = float(tc.weyl(s.chart, pt)[gc.indices])
    else:
        raise SMMSError(f"unknown golden kind {gc.kind}")
    ok = abs(actual - gc.value) <= max(100.0 * tol, 1e-4 * abs(gc.value), 1e-4 * tol / 1e-6)
    return {"name": gc.name, "expected": float(gc.value), "actual": actual, "pass": bool(ok)}


def _family_objects(args):
    fid = FamilyId(args.family)
    params = _params_from(args)
    obj = build_family(fid, params)
    s = wc.warped_chart(obj) if isinstance(obj, WarpedSMMS) else obj
    return fid, params, obj, s


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args):
    tol = _tol_from(args)
    fid, params, obj, s = _family_objects(args)
    samples = default_samples(obj, max(3, args.samples))
    rep = wt.condition_report(s, samples)
    expected = family_expected(fid, params)

    golden = []
    for gc in expected.golden_components:
        golden.append(_eval_golden(gc, s, tol))
    if expected.kappa is not None:
        golden.append({
            "name": "kappa", "expected": float(expected.kappa),
            "actual": rep.kappa,
            "pass": bool(abs(rep.kappa - expected.kappa) <= max(1e-5, 1e-5 * abs(expected.kappa))),
        })
    if expected.mu_forced is not None and isinstance(obj, WarpedSMMS):
        golden.append({
            "name": "mu-forced", "expected": float(expected.mu_forced),
            "actual": float(obj.mu), "pass": bool(obj.mu == expected.mu_forced),
        })

    obata = None
    if rep.branch is wt.Branch.EINSTEIN:
        obata = cl.obata_residual(s, rep.lambda_fit, rep.kappa, samples)

    residuals = {
        "einstein": rep.einstein_residual,
        "harmonic": rep.harmonic_residual,
        "cotton": rep.cotton_residual,
        "obata": obata,
    }
    verified = (
        rep.max_residual() <= tol
        and all(g["pass"] for g in golden)
        and (obata is None or obata <= max(tol, 1e-5))
    )
    report = {
        "family": fid.value,
        "params": _params_dict(params),
        "lambda_fit": rep.lambda_fit,
        "kappa": rep.kappa,
        "kappa_spread": rep.kappa_spread,
        "residuals": residuals,
        "branch": rep.branch.value,
        "global_case": None,
        "golden_checks": golden,
        "verified": bool(verified),
        "tol": tol,
    }
    _emit(report, args.output, args.out_path)
    return 0 if verified else 2


def cmd_classify(args):
    tol = _tol_from(args)
    fid, params, obj, s = _family_objects(args)
    samples = default_samples(obj, max(3, args.samples))
    rep = wt.condition_report(s, samples)

    branch_info = {}
    ode_ok = None
    if isinstance(obj, WarpedSMMS):
        verdict = cl.classify_branch(obj, tol=max(1e-8, tol * 1e-2))
        branch = verdict.branch
        ode_ok = verdict.ode_residual <= max(1e-8, tol * 1e-2)
        branch_info = {
            "ode_residual": verdict.ode_residual,
            "einstein_defect": verdict.defects.einstein_defect,
            "branch2_defect": verdict.defects.branch2_defect,
            "fitted": {k: float(v) for k, v in verdict.fitted.items()},
            "forced": {k: float(v) for k, v in verdict.forced.items()},
        }
        gv = cl.match_global(obj, rep, tol=max(1e-4, tol))
    else:
        branch = rep.branch
        gv = cl.match_global(obj, rep, tol=max(1e-4, tol))

    case = gv.case.value
    if gv.case is cl.GlobalCase.INCOMPLETE:
        case = f"incomplete: {gv.reason}"

    report = {
        "family": fid.value,
        "params": _params_dict(params),
        "lambda_fit": rep.lambda_fit,
        "kappa": rep.kappa,
        "kappa_spread": rep.kappa_spread,
        "residuals": {
            "einstein": rep.einstein_residual,
            "harmonic": rep.harmonic_residual,
            "cotton": rep.cotton_residual,
            "obata": None,
        },
        "branch": branch.value,
        "global_case": case,
        "quasi_einstein": bool(gv.quasi_einstein),
        "fit_residual": gv.fit_residual if math.isfinite(gv.fit_residual) else None,
        "fitted_params": _params_dict(gv.fitted_params),
        "branch_evidence": branch_info,
        "golden_checks": [],
    }
    _emit(report, args.output, args.out_path)
    ok = branch is not wt.Branch.INDETERMINATE and (ode_ok is None or ode_ok)
    return 0 if ok else 2


def cmd_obata(args):
    prob = cl.ObataProblem(lambda_=args.lambda_, kappa=args.kappa, xi=args.xi)
    sol = cl.solve_obata_ivp(prob, n=args.n, t_max=args.t_max)
    forcing = prob.forcing_at_start()
    if args.emit_csv:
        with open(args.emit_csv, "w", newline="\n") as fh:
            fh.write("t,u,uprime,warp\n")
            for t, u, up in zip(sol.t, sol.u, sol.uprime):
                fh.write(f"{t:.17g},{u:.17g},{up:.17g},{up / forcing:.17g}\n")
    report = {
        "lambda": args.lambda_,
        "kappa": args.kappa,
        "xi": args.xi,
        "n": args.n,
        "T": sol.T if math.isfinite(sol.T) else None,
        "closed_up": bool(math.isfinite(sol.T)),
        "samples": int(sol.t.size),
        "csv": args.emit_csv,
    }
    _emit(report, args.output, args.out_path)
    return 0


def cmd_oracle_compare(args):
    tol = max(_tol_from(args), 1e-5)
    fid, params, obj, s = _family_objects(args)
    if not isinstance(obj, WarpedSMMS):
        print("oracle-compare requires a warped-product family", file=sys.stderr)
        return 1
    k = max(3, min(args.samples, 9))
    ts = obj.sample_grid(k)
    rows = []
    worst = 0.0
    for t in ts:
        cv = wc.warped_curvature_closed(obj, float(t))
        pt = np.zeros(obj.n)
        pt[0] = t
        cb = tc.curvature_bundle(s.chart, pt)
        F = tc.orthonormal_frame(s.chart(pt))
        ric = tc.to_orthonormal(cb.ricci.components, F)
        sc = tc.scalar_calculus(s.chart, s.f, pt)
        hes = tc.to_orthonormal(sc.hess.components, F)
        st = wt.weighted_state(s, pt[None, :])
        charted = {
            "ricci_tt": float(ric[0, 0]),
            "ricci_fiber": float(ric[1, 1]),
            "hess_tt": float(hes[0, 0]),
            "hess_fiber": float(hes[1, 1]),
            "J": float(st["schouten_scalar"][0]),
        }
        closed = {
            "ricci_tt": cv.ricci_tt,
            "ricci_fiber": cv.ricci_fiber_coeff,
            "hess_tt": cv.hess_tt,
            "hess_fiber": cv.hess_fiber_coeff,
            "J": cv.J_closed,
        }
        dev = max(
            abs(charted[key] - closed[key]) / max(1.0, abs(closed[key]))
            for key in charted
        )
        worst = max(worst, dev)
        rows.append({"t": float(t), "closed": closed, "oracle": charted,
                     "max_rel_dev": dev})
    report = {
        "family": fid.value,
        "params": _params_dict(params),
        "tol": tol,
        "max_rel_dev": worst,
        "points": rows,
        "pass": bool(worst <= tol),
    }
    _emit(report, args.output, args.out_path)
    return 0 if worst <= tol else 2


def cmd_list(_args):
    for fid in FamilyId:
        flags = FAMILY_FLAGS[fid]
        shown = " ".join(
            "--lambda" if f == "lambda_" else f"--{f}" for f in flags
        )
        print(f"{fid.value:24s} {shown}")
    return 0


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "classify":
            return cmd_classify(args)
        if args.command == "obata":
            return cmd_obata(args)
        if args.command == "oracle-compare":
            return cmd_oracle_compare(args)
        if args.command == "list":
            return cmd_list(args)
    except SMMSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
