"""bi-waves command line.

    bi-waves <subcommand> [--config run.json] [--out PATH] [--format csv|json] [--KEY VALUE ...]

Every subcommand reads its parameters from the JSON config (flat keys, plus an
optional "output" block {"path", "format"}); flags override config keys and
unknown keys are rejected.  Exit codes: 0 success, 2 config error, 3 numerical
failure (error name and message as JSON on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import background_field, crosscheck, example_bc, lindstedt, minimal_surface
from .errors import BIWavesError, ConfigError, NegativeOmegaSquared
from .residual_check import bi_residual, fd_derivatives


def _pos_int(v):
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


def _nonneg_int(v):
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _positive(v):
    return _number(v) and v > 0


def _number_list(v):
    return isinstance(v, list) and all(_number(x) for x in v)


def _int_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_nonneg_int(x) for x in v)


def _bool(v):
    return isinstance(v, bool)


def _quad(v):
    if not isinstance(v, dict):
        return False
    allowed = {"panels": _pos_int, "nodes": _pos_int, "tol": _positive, "maxPanels": _pos_int}
    return all(k in allowed and allowed[k](x) for k, x in v.items())


# key -> (validator, default, description)
SCHEMAS = {
    "dispersion": {
        "N": (_nonneg_int, 3, "Lindstedt order"),
        "epsMax": (lambda v: _number(v) and 0 <= v < 1, 0.5, "largest eps (< 1)"),
        "steps": (_pos_int, 10, "number of eps intervals"),
    },
    "fig1": {
        "N": (_int_list, [3, 6, 11], "orders to sweep"),
        "eps": (lambda v: _number_list(v) and len(v) > 0 and all(0 < x < 1 for x in v),
                [0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2, 0.25, 0.3], "eps grid"),
        "grid": (lambda v: _pos_int(v) and v >= 8, 64, "phase-grid points per axis"),
        "allowAboveEleven": (_bool, False, "permit N > 11"),
        "slopeRange": (lambda v: _number_list(v) and len(v) == 2 and 0 < v[0] < v[1],
                       [0.02, 0.1], "eps range for slope fits"),
    },
    "compare": {
        "N": (_nonneg_int, 3, "Lindstedt order"),
        "A": (lambda v: _number(v) and v >= 0, 0.1, "amplitude"),
        "k": (_positive, 1.0, "wave number"),
        "b": (_positive, 1.0, "Born-Infeld parameter"),
        "grid": (_pos_int, 16, "grid points per axis"),
    },
    "lindstedt-table": {
        "N": (_nonneg_int, 3, "Lindstedt order"),
        "dumpSeries": (_bool, False, "emit the graded trig series instead of alpha"),
    },
    "parametric": {
        "L": (_positive, math.pi, "half period length"),
        "a": (_number_list, [0.1], "sine coefficients of a~"),
        "v0": (_number_list, [], "sine coefficients of v0"),
        "B": (_number, 0.0, "background slope"),
        "quad": (_quad, {}, "quadrature settings"),
        "nx": (_pos_int, 16, "x samples on [0, L]"),
        "nt": (_pos_int, 16, "t samples on one period"),
        "h": (_positive, 1e-4, "finite-difference step"),
    },
    "example": {
        "A": (_positive, 0.1, "amplitude of the Hamiltonian density"),
        "nx": (_pos_int, 16, "x samples on [0, 2 pi]"),
        "nt": (_pos_int, 16, "t samples on one period 4 pi (1 + A)"),
    },
    "background": {
        "B": (_number, 0.5, "background field"),
        "A": (_positive, 0.1, "amplitude"),
        "k": (_positive, 1.0, "wave number"),
        "b": (_positive, 1.0, "Born-Infeld parameter"),
        "adjudicate": (_bool, False, "also minimize the residual over omega"),
    },
}


# --- configuration -------------------------------------------------------------

def _parse_flag_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(command, path=None, overrides=None):
    """Merged, validated parameters for ``command`` plus the output block."""
    schema = SCHEMAS[command]
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
    raw = dict(raw)
    output = raw.pop("output", {})
    raw.pop("deterministic", None)
    if not isinstance(output, dict) or set(output) - {"path", "format"}:
        raise ConfigError("field 'output': expected object with keys path, format")
    raw.update(overrides or {})
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) for {command}: {', '.join(unknown)}")
    params = {}
    for key, (check, default, _) in schema.items():
        value = raw.get(key, default)
        if isinstance(value, int) and not isinstance(value, bool) and isinstance(default, float):
            value = float(value)
        if not check(value):
            raise ConfigError(f"field '{key}': invalid value {value!r}")
        params[key] = value
    return params, output


def _threads():
    raw = os.environ.get("BI_WAVES_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"BI_WAVES_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("BI_WAVES_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


# --- output --------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else format(float(v), ".17g")
    return "" if v is None else str(v)


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, Fraction):
        return [v.numerator, v.denominator]
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def to_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


class Result:
    """Table (header, rows) and/or JSON metadata produced by a command."""

    def __init__(self, meta, header=None, rows=None):
        self.meta = meta
        self.header = header
        self.rows = rows

    def render(self, fmt):
        if self.header is None or fmt == "json":
            doc = dict(self.meta)
            if self.header is not None:
                doc["columns"] = list(self.header)
                doc["rows"] = [list(r) for r in self.rows]
            return to_json(doc), None
        return to_csv(self.header, self.rows), to_json(self.meta)


# --- commands ------------------------------------------------------------------

def cmd_dispersion(p):
    sol = lindstedt.solve_order(p["N"])
    rows = []
    for i in range(p["steps"] + 1):
        eps = p["epsMax"] * i / p["steps"]
        rows.append((eps, sol.omega_squared_over_k_squared(eps)))
    meta = {"command": "dispersion", "N": p["N"], "xi": list(sol.xi)}
    return Result(meta, ("eps", "omega2_over_k2"), rows)


def _fig1_column(args):
    N, eps_list, grid = args
    sol = lindstedt.solve_order(N)
    out = []
    for eps in eps_list:
        try:
            out.append((eps, N, lindstedt.residual_max(sol, eps, grid, grid), None))
        except NegativeOmegaSquared as exc:
            out.append((eps, N, None, exc.to_dict()))
    return out


def cmd_fig1(p):
    if max(p["N"]) > 11 and not p["allowAboveEleven"]:
        raise ConfigError("field 'N': orders above 11 need allowAboveEleven=true")
    jobs = [(N, p["eps"], p["grid"]) for N in p["N"]]
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            columns = list(pool.map(_fig1_column, jobs))
    else:
        columns = [_fig1_column(j) for j in jobs]

    rows, failures = [], []
    by_n = {}
    for col in columns:
        for eps, N, F, err in col:
            rows.append((eps, N, F))
            if err is not None:
                failures.append({"eps": eps, "N": N, **err})
            else:
                by_n.setdefault(N, {})[eps] = F

    lo, hi = p["slopeRange"]
    slopes = {}
    for N, table in by_n.items():
        pts = [(e, F) for e, F in table.items() if lo <= e <= hi and F > 0]
        if len(pts) >= 2:
            slopes[str(N)] = lindstedt.slope_fit(*zip(*pts))
    ordered = sorted(by_n)
    ordering = {}
    for eps in p["eps"]:
        vals = [by_n[N].get(eps) for N in ordered]
        if None not in vals:
            ordering[repr(eps)] = all(a > b for a, b in zip(vals, vals[1:]))
    meta = {"command": "fig1", "N": p["N"], "grid": p["grid"],
            "slopes": slopes, "slopeRange": [lo, hi],
            "decreasingInN": ordering, "failedRows": failures}
    return Result(meta, ("eps", "N", "F"), rows)


def cmd_compare(p):
    report = crosscheck.compare(p["N"], p["A"], p["k"], p["b"], p["grid"])
    report["command"] = "compare"
    return Result(report)


def cmd_lindstedt_table(p):
    sol = lindstedt.solve_order(p["N"])
    if p["dumpSeries"]:
        return Result({"command": "lindstedt-table", "N": p["N"],
                       "series": sol.series().to_records()})
    d = sol.to_dict()
    rows = [(r["M"], r["nu"], r["mu"], r["num"], r["den"]) for r in d["alpha"]]
    meta = {"command": "lindstedt-table", "N": d["N"], "xi": d["xi"]}
    return Result(meta, ("M", "nu", "mu", "num", "den"), rows)


def cmd_parametric(p):
    q = p["quad"]
    quad = minimal_surface.Quadrature(
        q.get("panels", 16), q.get("nodes", 8), q.get("tol", 1e-12), q.get("maxPanels", 4096))
    ic = minimal_surface.InitialCondition.from_sine_series(p["a"], p["v0"], p["L"], p["B"])
    ic.check_symmetries()
    ps = minimal_surface.build(ic, quad)
    xs = (np.arange(p["nx"]) + 0.5) * (ic.L / p["nx"])
    ts = (np.arange(p["nt"]) + 0.5) * (ps.period / p["nt"])
    X, T = np.meshgrid(xs, ts, indexing="ij")
    s = minimal_surface.field_at(ps, X, T)
    fd = fd_derivatives(lambda x, t: minimal_surface.field_value(ps, x, t), X, T, p["h"], p["h"])
    res = bi_residual(fd)
    rows = zip(X.ravel(), T.ravel(), s.u.ravel(), s.ux.ravel(), s.ut.ravel(),
               s.margin.ravel(), res.ravel())
    meta = {"command": "parametric", "K": ps.K, "L": ic.L,
            "quadratureError": ps.error_estimate, "minMargin": ps.min_margin,
            "maxAbsResidual": float(np.max(np.abs(res)))}
    return Result(meta, ("x", "t", "u", "ux", "ut", "margin", "residual"), list(rows))


def cmd_example(p):
    cfg = example_bc.ExampleConfig(p["A"])
    eps_c, x_c = example_bc.critical_epsilon()
    period = 2 * cfg.half_period
    xs = np.arange(p["nx"] + 1) * (2 * cfg.L / p["nx"])
    ts = np.arange(p["nt"]) * (period / p["nt"])
    X, T = np.meshgrid(xs, ts, indexing="ij")
    U = example_bc.field(X, T, cfg)
    meta = {"command": "example", "A": cfg.A, "B": cfg.B, "period": period,
            "epsCritical": eps_c, "xCritical": x_c}
    return Result(meta, ("x", "t", "u"), list(zip(X.ravel(), T.ravel(), U.ravel())))


def cmd_background(p):
    cfg = background_field.BackgroundConfig(p["B"], p["A"], p["k"], p["b"])
    ic = background_field.background_ic(cfg.B, b=cfg.b)
    doc = {
        "command": "background",
        "eps": cfg.eps,
        "dispersion": background_field.magnetic_first_order(cfg).omega_sq_over_k_sq,
        "KoverL": background_field.period_ratio(ic),
        "v": background_field.effective_metric_velocity(cfg.B, cfg.b),
    }
    if p["adjudicate"]:
        doc["adjudication"] = background_field.adjudicate_dispersion(cfg).to_dict()
    return Result(doc)


COMMANDS = {
    "dispersion": cmd_dispersion,
    "fig1": cmd_fig1,
    "compare": cmd_compare,
    "lindstedt-table": cmd_lindstedt_table,
    "parametric": cmd_parametric,
    "example": cmd_example,
    "background": cmd_background,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="bi-waves", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        for key, (_, default, desc) in schema.items():
            if key == "dumpSeries":
                sp.add_argument("--dump-series", dest="dumpSeries", action="store_const",
                                const=True, default=argparse.SUPPRESS, help=desc)
            else:
                sp.add_argument(f"--{key}", dest=key, type=_parse_flag_value,
                                default=argparse.SUPPRESS,
                                help=f"{desc} (default {json.dumps(default)})")
    return parser


def _fail(code, payload):
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k in SCHEMAS[args.command]}
    try:
        params, output = load_config(args.command, args.config, overrides)
        fmt = args.format or output.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"field 'output.format': invalid value {fmt!r}")
        out = args.out or output.get("path")
        result = COMMANDS[args.command](params)
    except ConfigError as exc:
        return _fail(2, exc.to_dict())
    except BIWavesError as exc:
        return _fail(3, exc.to_dict())

    body, sidecar = result.render(fmt)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(body)
        if sidecar is not None:
            with open(out + ".meta.json", "w") as fh:
                fh.write(sidecar)
    else:
        sys.stdout.write(body)
        if sidecar is not None:
            sys.stderr.write(sidecar)
    return 0


if __name__ == "__main__":
    sys.exit(main())
