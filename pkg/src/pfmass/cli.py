"""Batch command-line front end.

Nine subcommands cover the computations: a1, bterm, a2, sweep, scaling,
bounds, crosscheck, meff, flow.  Exit status 0 means every integral
converged, 2 means results were emitted but at least one did not converge,
1 means a usage error (reported as a one-line diagnostic naming the
offending parameter).

A config file given with --config holds one `key = value` pair per line
(`#` starts a comment); keys are the long option names and command-line
flags override file values.  The PFMASS_WORKERS environment variable sets
the default worker count.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from ._backend import get_backend
from .asymptotics import (
    PowerLawFit,
    SweepRow,
    SweepTable,
    VALUE_COLUMNS,
    db2_dlambda,
    effective_mass,
    extrapolate_ratio,
    fit_power_law,
    flow_schedule,
    log_square_ratio,
    sweep,
)
from .integrands import B_TERMS, arctan_bracket, lower_bound_functions, tr_positive_check
from .kernels import CutoffWindow, a1_closed
from .quadrature import (
    DEFAULT_SPEC_1D,
    DEFAULT_SPEC_3D,
    QuadratureSpec,
    a1_radial,
    a2_cartesian_qmc,
    a2_polar,
    combine_a2,
    integrate_b_term,
)

CSV_COLUMNS = (
    "lambda", "kappa", "b1", "b2", "b3", "b4", "b5", "b6",
    "a2", "a2_sqrt_scaled", "s1", "s2", "s3", "s4", "appB_residual",
    "err_flags",
)

_CROSSCHECK_WINDOWS = "5:1,10:1,20:2,40:4"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parse_grid(s: str) -> list:
    parts = s.split(":")
    if len(parts) != 4 or parts[2] != "geometric":
        raise ValueError(f"grid must be min:max:geometric:count, got {s!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[3])
    if count < 1:
        raise ValueError(f"grid count must be at least 1, got {count}")
    if not 0.0 < lo <= hi:
        raise ValueError(f"grid range must satisfy 0 < min <= max, got {s!r}")
    if count == 1:
        return [lo]
    return [float(v) for v in np.geomspace(lo, hi, count)]


def _parse_windows(s: str) -> list:
    out = []
    for chunk in s.split(","):
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ValueError(f"windows must be lambda:kappa pairs, got {chunk!r}")
        out.append((float(parts[0]), float(parts[1])))
    return out


def _default_threads() -> int:
    raw = os.environ.get("PFMASS_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"environment variable PFMASS_WORKERS: invalid value {raw!r}")
    if n < 1:
        raise UsageError(f"environment variable PFMASS_WORKERS: must be >= 1, got {n}")
    return n


def _add_spec_options(p: _Parser, qmc: bool = False):
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None,
                   help="relative tolerance")
    p.add_argument("--abs-tol", dest="abs_tol", type=float, default=None,
                   help="absolute tolerance floor")
    p.add_argument("--max-subdivisions", dest="max_subdivisions", type=int,
                   default=None, help="panel bisection budget per axis")
    p.add_argument("--split-boundary-layer", dest="split_boundary_layer",
                   type=_parse_bool, default=None, metavar="BOOL",
                   help="pre-split the X boundary layer edge (default true)")
    if qmc:
        p.add_argument("--qmc-samples", dest="qmc_samples", type=int, default=None,
                       help="low-discrepancy samples per replicate (default 2^16)")
        p.add_argument("--qmc-seed", dest="qmc_seed", type=int, default=None,
                       help="scramble seed")


def _add_common(p: _Parser, out_choices, out_default):
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--out", choices=out_choices, default=out_default,
                   help=f"output format (default {out_default})")
    p.add_argument("--out-file", default=None, help="write output here instead of stdout")


def build_parser():
    parser = _Parser(prog="pfmass", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")
    subs = {}

    def add(name, help_text, out_choices=("text", "json"), out_default="text"):
        p = sub.add_parser(name, help=help_text,
                           description=help_text,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        _add_common(p, out_choices, out_default)
        subs[name] = p
        return p

    p = add("a1", "first-order coefficient (8/3pi) log((lambda+2)/(kappa+2))")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--method", choices=("closed", "quad"), default="closed",
                   help="closed form or independent 1-D quadrature "
                        "(default rel-tol 1e-8 for quad)")
    _add_spec_options(p)

    p = add("bterm", "one polar second-order term b_j by 3-D adaptive quadrature "
                     "(default rel-tol 1e-6)")
    p.add_argument("--j", type=int, default=None, help="term index 1..6")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    _add_spec_options(p)

    p = add("a2", "second-order coefficient: prefactored sum of the six polar terms "
                  "(default rel-tol 1e-6)")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    _add_spec_options(p)

    p = add("sweep", "cutoff sweep over a geometric lambda grid",
            out_choices=("csv", "json"), out_default="csv")
    p.add_argument("--lambda-grid", dest="lambda_grid", default=None,
                   help="min:max:geometric:count")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (default from PFMASS_WORKERS, else 1)")
    _add_spec_options(p)

    p = add("scaling", "power-law fits, extrapolation, and the squared-log "
                       "comparison on a sweep table")
    p.add_argument("--in", dest="in_file", default=None,
                   help="read a sweep CSV instead of computing one")
    p.add_argument("--lambda-grid", dest="lambda_grid", default=None,
                   help="min:max:geometric:count (used when --in is absent)")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--column", default="b2", help="column for the power-law fit")
    p.add_argument("--fit-window", dest="fit_window", default=None,
                   help="min:max fit window (default: top two decades)")
    p.add_argument("--threads", type=int, default=None)
    _add_spec_options(p)

    p = add("bounds", "lower-bound machinery: concavity, K positivity, "
                      "nonnegativity of the derivative integrand, and the "
                      "scaled cutoff derivative")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--y-samples", dest="y_samples", type=int, default=None,
                   help="grid resolution in y (default 101)")
    _add_spec_options(p)

    p = add("crosscheck", "polar vs Cartesian quasi-Monte-Carlo cross-check "
                          "(the QMC convergence test defaults to rel-tol 2e-3)")
    p.add_argument("--windows", default=None,
                   help=f"lambda:kappa pairs (default {_CROSSCHECK_WINDOWS})")
    _add_spec_options(p, qmc=True)

    p = add("meff", "effective-mass expansion at a coupling strength "
                    "(default rel-tol 1e-6)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    _add_spec_options(p)

    p = add("flow", "renormalization-flow bookkeeping from a fitted power law")
    p.add_argument("--gamma", type=float, default=None, help="fitted exponent")
    p.add_argument("--b0", type=float, default=None, help="fitted amplitude")
    p.add_argument("--m-star", dest="m_star", type=float, default=None,
                   help="target effective mass")
    p.add_argument("--lambda", dest="lam", type=float, default=None)

    return parser, subs


# ---------------------------------------------------------------------------
# Config file.

def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}")
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{lineno}: expected key = value, got {raw!r}")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def _apply_config(sub: _Parser, cfg: dict):
    defaults = {}
    for key, sval in cfg.items():
        opt = "--" + key.lower().replace("_", "-")
        action = sub._option_string_actions.get(opt)
        if action is None or key.lower() in ("config",):
            raise UsageError(f"unknown config key: {key}")
        try:
            defaults[action.dest] = action.type(sval) if action.type else sval
        except ValueError as exc:
            raise UsageError(f"config key {key}: {exc}")
    sub.set_defaults(**defaults)


def _build_spec(args, base: QuadratureSpec) -> QuadratureSpec:
    kw = {}
    for name in ("rel_tol", "abs_tol", "max_subdivisions", "split_boundary_layer",
                 "qmc_samples", "qmc_seed"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    try:
        return dataclasses.replace(base, **kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def _require(args, name: str, flag: str):
    v = getattr(args, name, None)
    if v is None:
        raise UsageError(f"missing required parameter: {flag}")
    return v


def _window(args) -> CutoffWindow:
    lam = _require(args, "lam", "--lambda")
    kappa = args.kappa if args.kappa is not None else 0.0
    try:
        return CutoffWindow(lam, kappa)
    except ValueError as exc:
        raise UsageError(str(exc))


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            raise UsageError(f"--threads: must be >= 1, got {args.threads}")
        return args.threads
    return _default_threads()


# ---------------------------------------------------------------------------
# Serialization.

def _json_dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _spec_dict(spec: QuadratureSpec) -> dict:
    return dataclasses.asdict(spec)


def table_to_csv(table: SweepTable) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in table.rows:
        fields = [_fmt(r.lam), _fmt(r.kappa)]
        fields += [_fmt(r.values[c]) for c in VALUE_COLUMNS]
        fields.append(";".join(r.err_flags))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def csv_to_table(text: str) -> SweepTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise UsageError("--in: first line is not the sweep CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise UsageError(f"--in: row has {len(parts)} fields, expected {len(CSV_COLUMNS)}")
        values = {c: float(parts[i + 2]) for i, c in enumerate(VALUE_COLUMNS)}
        errors = {c: 0.0 for c in VALUE_COLUMNS}
        flags = tuple(parts[-1].split(";")) if parts[-1] else ()
        rows.append(SweepRow(float(parts[0]), float(parts[1]), values, errors, flags))
    return SweepTable(tuple(rows))


def table_to_json(table: SweepTable, spec) -> str:
    payload = {
        "command": "sweep",
        "backend": get_backend(),
        "spec": _spec_dict(spec) if spec is not None else None,
        "rows": [
            {
                "lambda": r.lam,
                "kappa": r.kappa,
                "values": {c: r.values[c] for c in VALUE_COLUMNS},
                "errors": {c: r.errors[c] for c in VALUE_COLUMNS},
                "err_flags": list(r.err_flags),
            }
            for r in table.rows
        ],
    }
    return _json_dump(payload)


def _result_dict(res) -> dict:
    return {
        "value": res.value,
        "error_estimate": res.error_estimate,
        "evaluations": res.evaluations,
        "converged": res.converged,
    }


# ---------------------------------------------------------------------------
# Commands.  Each returns (exit_code, output_text).

def cmd_a1(args):
    w = _window(args)
    if args.method == "quad":
        spec = _build_spec(args, DEFAULT_SPEC_1D)
        res = a1_radial(w, spec)
        value, conv = res.value, res.converged
        extra = _result_dict(res)
    else:
        value, conv = a1_closed(w), True
        extra = {"value": value}
    if args.out == "json":
        out = _json_dump({"command": "a1", "lambda": w.lam, "kappa": w.kappa,
                          "method": args.method, **extra})
    else:
        out = f"{value:.11e}\n"
    return (0 if conv else 2), out


def cmd_bterm(args):
    j = _require(args, "j", "--j")
    if not 1 <= j <= 6:
        raise UsageError(f"--j: term index must be in 1..6, got {j}")
    w = _window(args)
    spec = _build_spec(args, DEFAULT_SPEC_3D)
    res = integrate_b_term(B_TERMS[j - 1], w, spec)
    if args.out == "json":
        out = _json_dump({"command": "bterm", "j": j, "lambda": w.lam,
                          "kappa": w.kappa, "backend": get_backend(),
                          "spec": _spec_dict(spec), **_result_dict(res)})
    else:
        out = (f"b{j}(lambda={w.lam:g}, kappa={w.kappa:g}) = {res.value:.12e} "
               f"+/- {res.error_estimate:.3e}  evaluations={res.evaluations} "
               f"converged={res.converged}\n")
    return (0 if res.converged else 2), out


def cmd_a2(args):
    w = _window(args)
    spec = _build_spec(args, DEFAULT_SPEC_3D)
    terms = [integrate_b_term(t, w, spec) for t in B_TERMS]
    total = combine_a2(terms)
    if args.out == "json":
        out = _json_dump({
            "command": "a2", "lambda": w.lam, "kappa": w.kappa,
            "backend": get_backend(), "spec": _spec_dict(spec),
            "terms": {f"b{i + 1}": _result_dict(r) for i, r in enumerate(terms)},
            "a2": _result_dict(total),
            "a2_sqrt_scaled": total.value / math.sqrt(w.lam) if w.lam > 0 else math.nan,
        })
    else:
        lines = [
            f"b{i + 1} = {r.value:.12e} +/- {r.error_estimate:.3e} "
            f"converged={r.converged}"
            for i, r in enumerate(terms)
        ]
        lines.append(f"a2 = {total.value:.12e} +/- {total.error_estimate:.3e} "
                     f"converged={total.converged}")
        out = "\n".join(lines) + "\n"
    return (0 if total.converged else 2), out


def _computed_table(args):
    grid = _require(args, "lambda_grid", "--lambda-grid")
    try:
        lams = _parse_grid(grid)
    except ValueError as exc:
        raise UsageError(f"--lambda-grid: {exc}")
    kappa = args.kappa if args.kappa is not None else 0.0
    try:
        windows = [CutoffWindow(lam, kappa) for lam in lams]
    except ValueError as exc:
        raise UsageError(str(exc))
    spec = _build_spec(args, DEFAULT_SPEC_3D)
    return sweep(windows, spec, threads=_threads(args)), spec


def cmd_sweep(args):
    table, spec = _computed_table(args)
    out = table_to_csv(table) if args.out == "csv" else table_to_json(table, spec)
    rc = 0 if all(not r.err_flags for r in table.rows) else 2
    return rc, out


def cmd_scaling(args):
    if args.in_file is not None:
        try:
            with open(args.in_file, "r", encoding="utf-8") as fh:
                table = csv_to_table(fh.read())
        except OSError as exc:
            raise UsageError(f"--in: cannot read {args.in_file}: {exc.strerror}")
        spec = None
    else:
        table, spec = _computed_table(args)
    lams = table.column("lambda")
    if args.fit_window is not None:
        parts = args.fit_window.split(":")
        if len(parts) != 2:
            raise UsageError(f"--fit-window: expected min:max, got {args.fit_window!r}")
        window = (float(parts[0]), float(parts[1]))
    else:
        window = (float(lams[-1]) / 100.0, float(lams[-1]))
    try:
        fit = fit_power_law(table, args.column, window)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"--column/--fit-window: {exc}")
    ratio = extrapolate_ratio(table)
    logsq = log_square_ratio(table)
    growth = {}
    decade = [r for r in table.rows if r.lam >= float(lams[-1]) / 10.0 - 1e-9]
    for name, power in (("b1", 2), ("b4", 2), ("b3", 1), ("b5", 1), ("b6", 1)):
        scaled = [abs(r.values[name]) / math.log(r.lam) ** power for r in decade]
        growth[name] = {"log_power": power, "max_over_min": max(scaled) / min(scaled)}
    payload = {
        "command": "scaling",
        "fit": {"column": args.column, "exponent": fit.exponent,
                "amplitude": fit.amplitude, "r_squared": fit.r_squared,
                "window": list(fit.window), "sign": fit.sign},
        "extrapolation": {"c_estimate": ratio.c_estimate, "spread": ratio.spread,
                          "accelerated": ratio.accelerated},
        "log_square_ratio": {"first": logsq[0][1], "last": logsq[-1][1],
                             "growth": (logsq[-1][1] / logsq[0][1])
                             if logsq[0][1] != 0 else math.nan},
        "last_decade_growth": growth,
    }
    if args.out == "json":
        out = _json_dump(payload)
    else:
        lines = [
            f"fit: |{args.column}| ~ {fit.amplitude:.6e} * lambda^{fit.exponent:.6f} "
            f"(r^2={fit.r_squared:.8f}, window=[{window[0]:g}, {window[1]:g}], "
            f"sign={fit.sign:+d})",
            f"a2/sqrt(lambda) extrapolation: c = {ratio.c_estimate:.6e} "
            f"spread {ratio.spread:.3e} accelerated={ratio.accelerated}",
            f"a2 / (a1^2/2): {logsq[0][1]:.6e} at lambda={logsq[0][0]:g} -> "
            f"{logsq[-1][1]:.6e} at lambda={logsq[-1][0]:g}",
        ]
        for name, info in growth.items():
            lines.append(f"|{name}|/log^{info['log_power']}: max/min = "
                         f"{info['max_over_min']:.4f} over the last decade")
        out = "\n".join(lines) + "\n"
    rc = 0 if all(not r.err_flags for r in table.rows) else 2
    return rc, out


def cmd_bounds(args):
    w = _window(args)
    if not w.lam > w.kappa:
        raise UsageError(f"--lambda: must exceed kappa, got {w.lam} <= {w.kappa}")
    spec = _build_spec(args, DEFAULT_SPEC_3D)
    n = args.y_samples if args.y_samples is not None else 101
    if n < 3:
        raise UsageError(f"--y-samples: must be >= 3, got {n}")
    lam = w.lam
    ys_b = np.linspace(0.0, 1.0 - 1.0 / lam, n)
    bl = np.array([lower_bound_functions(float(y), w).bL for y in ys_b])
    second = np.diff(bl, 2)
    ys_k = np.linspace(0.0, 1.0, n)
    kmin = min(lower_bound_functions(float(y), w).Kpoly for y in ys_k)
    delta_est = min(arctan_bracket(float(y), w) for y in ys_k)
    tr_ok = tr_positive_check(w)
    bl_edge = lower_bound_functions(1.0 - 1.0 / lam, w).bL
    der = db2_dlambda(w.lam, w.kappa, spec)
    scaled_der = math.sqrt(lam) * der.value
    payload = {
        "command": "bounds", "lambda": w.lam, "kappa": w.kappa,
        "bL_at_1_minus_1_over_lambda": bl_edge,
        "bL_concave": bool(np.all(second < 0.0)),
        "bL_max_second_difference": float(second.max()),
        "K_min_on_y_grid": float(kmin),
        "arctan_bracket_min": float(delta_est),
        "derivative_integrand_nonnegative": bool(tr_ok),
        "sqrt_lambda_db2": scaled_der,
        "db2": _result_dict(der),
    }
    if args.out == "json":
        out = _json_dump(payload)
    else:
        out = (
            f"b_L(1 - 1/lambda) = {bl_edge:.8f} (tends to -3/2)\n"
            f"b_L concave on [0, 1-1/lambda]: {payload['bL_concave']} "
            f"(max second difference {payload['bL_max_second_difference']:.3e})\n"
            f"K minimum over y in [0,1]: {kmin:.6e}\n"
            f"arctan bracket minimum over y in [0,1]: {delta_est:.6f}\n"
            f"derivative integrand nonnegative on grid: {tr_ok}\n"
            f"sqrt(lambda) * db2/dlambda = {scaled_der:.8f} "
            f"(+/- {math.sqrt(lam) * der.error_estimate:.2e}, "
            f"converged={der.converged})\n"
        )
    return (0 if der.converged else 2), out


def cmd_crosscheck(args):
    try:
        pairs = _parse_windows(args.windows or _CROSSCHECK_WINDOWS)
        windows = [CutoffWindow(lam, kappa) for lam, kappa in pairs]
    except ValueError as exc:
        raise UsageError(f"--windows: {exc}")
    qmc_spec = _build_spec(args, QuadratureSpec(rel_tol=2e-3))
    polar_spec = DEFAULT_SPEC_3D
    rows = []
    conv = True
    for w in windows:
        p = a2_polar(w, polar_spec)
        q = a2_cartesian_qmc(w, qmc_spec)
        ratio = q.value / p.value if p.value != 0 else math.nan
        sigma = abs(q.error_estimate / p.value) if p.value != 0 else math.nan
        conv = conv and p.converged and q.converged
        rows.append({"lambda": w.lam, "kappa": w.kappa,
                     "a2_polar": _result_dict(p), "a2_cartesian_qmc": _result_dict(q),
                     "ratio": ratio, "ratio_sigma": sigma})
    ratios = [r["ratio"] for r in rows]
    mean = float(np.mean(ratios))
    spread = (max(ratios) - min(ratios)) / abs(mean) if mean != 0 else math.nan
    payload = {
        "command": "crosscheck", "backend": get_backend(),
        "windows": rows,
        "ratio_mean": mean, "ratio_relative_spread": spread,
        "ratio_over_2pi": mean / (2.0 * math.pi),
    }
    if args.out == "json":
        out = _json_dump(payload)
    else:
        lines = [
            f"lambda={r['lambda']:g} kappa={r['kappa']:g}: polar "
            f"{r['a2_polar']['value']:.8e}  qmc {r['a2_cartesian_qmc']['value']:.8e} "
            f"(+/- {r['a2_cartesian_qmc']['error_estimate']:.2e})  "
            f"ratio {r['ratio']:.6f}"
            for r in rows
        ]
        lines.append(f"constant = {mean:.6f} (relative spread {spread:.2e}), "
                     f"constant/(2 pi) = {mean / (2 * math.pi):.6f}")
        out = "\n".join(lines) + "\n"
    return (0 if conv else 2), out


def cmd_meff(args):
    alpha = _require(args, "alpha", "--alpha")
    if alpha < 0:
        raise UsageError(f"--alpha: must be nonnegative, got {alpha}")
    w = _window(args)
    spec = _build_spec(args, DEFAULT_SPEC_3D)
    res = a2_polar(w, spec)
    m = effective_mass(alpha, w, spec, a2_result=res)
    payload = {
        "command": "meff", "lambda": w.lam, "kappa": w.kappa,
        "alpha": m.alpha, "a1": m.a1, "a2": m.a2,
        "a2_error": res.error_estimate,
        "m_over_meff": m.m_over_meff, "meff_over_m": m.meff_over_m,
        "converged": res.converged,
    }
    if args.out == "json":
        out = _json_dump(payload)
    else:
        out = (f"a1 = {m.a1:.12e}\n"
               f"a2 = {m.a2:.12e} +/- {res.error_estimate:.3e}\n"
               f"m/m_eff = {m.m_over_meff:.12e}\n"
               f"m_eff/m = {m.meff_over_m:.12e}\n")
    return (0 if res.converged else 2), out


def cmd_flow(args):
    gamma = _require(args, "gamma", "--gamma")
    b0 = _require(args, "b0", "--b0")
    m_star = _require(args, "m_star", "--m-star")
    lam = _require(args, "lam", "--lambda")
    fit = PowerLawFit(exponent=gamma, amplitude=b0, r_squared=1.0,
                      window=(lam, lam))
    try:
        sched = flow_schedule(fit, m_star, lam)
    except ValueError as exc:
        raise UsageError(str(exc))
    composition = b0 * (lam / sched.bare_mass) ** gamma * sched.bare_mass
    payload = {
        "command": "flow", "gamma": gamma, "b0": b0, "m_star": m_star,
        "lambda": lam, "bare_mass": sched.bare_mass, "b1": sched.b1,
        "composition_check": composition,
    }
    if args.out == "json":
        out = _json_dump(payload)
    else:
        out = (f"b1 = {sched.b1:.12e}\n"
               f"bare_mass = {sched.bare_mass:.12e}\n"
               f"b0 (lambda/m)^gamma m = {composition:.12e} (target {m_star:g})\n")
    return 0, out


_COMMANDS = {
    "a1": cmd_a1,
    "bterm": cmd_bterm,
    "a2": cmd_a2,
    "sweep": cmd_sweep,
    "scaling": cmd_scaling,
    "bounds": cmd_bounds,
    "crosscheck": cmd_crosscheck,
    "meff": cmd_meff,
    "flow": cmd_flow,
}


def _prescan_config(argv):
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config: missing path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        command = argv[0] if argv and not argv[0].startswith("-") else None
        config_path = _prescan_config(argv)
        if config_path is not None:
            if command not in subs:
                raise UsageError("--config requires a command")
            _apply_config(subs[command], _load_config(config_path))
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing command (one of: " + ", ".join(_COMMANDS) + ")")
        rc, out = _COMMANDS[args.command](args)
        if args.out_file is not None:
            try:
                with open(args.out_file, "w", encoding="utf-8") as fh:
                    fh.write(out)
            except OSError as exc:
                raise UsageError(f"--out-file: cannot write {args.out_file}: {exc.strerror}")
        else:
            sys.stdout.write(out)
        return rc
    except UsageError as exc:
        print(f"pfmass: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"pfmass: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
