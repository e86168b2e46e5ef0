"""Command-line front end.

Every subcommand resolves its parameters from three layers, later ones
winning: built-in defaults, an optional ``--config`` file of ``key = value``
lines, and explicit flags.  The resolved parameters are echoed in the output.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error, 3 domain or
numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import hardy, kedlaya, properties
from .errors import DomainError, EvaluationError, HardyLabError, InfiniteConstant, ParseError, UnaryCase
from .grammar import format_expr, parse_expr
from .means import Circ, EvalOptions, Power, Square, WeightedSample, eval_mean
from .rho import LOG_INTEGRAL_EXACT, log_integral_selftest, rho, rho_closed, rho_finiteness

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parameter declarations
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError("empty number list")
    return vals


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _int(text) -> int:
    try:
        return int(str(text))
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _float(text) -> float:
    try:
        return float(str(text))
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


@dataclass(frozen=True)
class Param:
    name: str
    convert: Callable[[Any], Any]
    default: Any = None
    help: str = ""
    required: bool = False
    flag: str | None = None       # overrides the --name spelling
    switch: str | None = None     # store_true/store_false for booleans


@dataclass
class Command:
    path: tuple[str, ...]
    run: Callable[[dict], "Outcome"]
    params: list[Param]
    help: str = ""


@dataclass
class Outcome:
    result: dict
    rows: list[dict] = field(default_factory=list)
    plain: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


COMMON = [
    Param("format", str, "json", "output format: json, csv or plain"),
]


def _echo(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items())}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def run_mean_eval(cfg: dict) -> Outcome:
    e = parse_expr(cfg["expr"])
    x = cfg["x"]
    s = WeightedSample.of(x, cfg["weights"])
    v = eval_mean(e, s, EvalOptions(merge_tolerance=cfg["merge_tolerance"]))
    res = {"expr": format_expr(e), "x": list(x), "weights": cfg["weights"], "value": v}
    return Outcome(res, [{"expr": format_expr(e), "value": v}], [repr(v)])


def run_hardy_bracket(cfg: dict) -> Outcome:
    e = parse_expr(cfg["expr"])
    oc = hardy.OptimizerConfig(restarts=cfg["restarts"], iterations=cfg["iterations"],
                               seed=cfg["seed"], dimension_cap=cfg["dimension_cap"])
    br = hardy.hardy_bracket(e, cfg["nmax"], oc, cfg["n_harmonic"], cfg["extrapolate"])
    res = br.to_json()
    plain = [f"expr: {res['expr']}",
             f"gamma_reference: {res['gamma_reference']}",
             f"rho_reference: {res['rho_reference']}",
             f"C_estimate: {res['C_estimate']['estimate']} (raw {res['C_estimate']['raw']})"]
    for h, u in zip(res["Hn"], res["upper"]):
        plain.append(f"n={h['n']}: lower {h['lower']!r}  upper {u['bound']}")
    plain += [f"flag: {f}" for f in res["flags"]]
    return Outcome(res, br.csv_rows(), plain)


def _rho_result(p, q, tol, max_cells, closed_only) -> dict:
    fin = rho_finiteness(p, q)
    closed = rho_closed(p, q)
    out = {"p": p, "q": q, "finiteness": fin.value, "closed_form": closed}
    if closed_only:
        if closed is None:
            raise DomainError(f"no closed form catalogued for p={p:g}, q={q:g}")
        out.update(value=closed, abs_error_estimate=0.0, cells=0, converged=True)
        return out
    try:
        out.update(rho(p, q, tol, max_cells).as_dict())
    except InfiniteConstant:
        out.update(value=math.inf, abs_error_estimate=0.0, cells=0, converged=True)
    return out


def run_rho(cfg: dict) -> Outcome:
    res = _rho_result(cfg["p"], cfg["q"], cfg["tol"], cfg["max_cells"], cfg["closed_only"])
    fails = [] if res["converged"] else [f"quadrature did not reach tol={cfg['tol']:g} within {cfg['max_cells']} cells"]
    row = {k: res[k] for k in ("p", "q", "value", "abs_error_estimate", "cells", "converged")}
    return Outcome(res, [row], [repr(res["value"])], fails)


def run_kedlaya_build(cfg: dict) -> Outcome:
    K = kedlaya.build(cfg["n"], cfg["max_n"])
    kedlaya.write_csv(K, cfg["out"])
    res = {"n": K.n, "size": int(K.entries.shape[0]), "out": cfg["out"], "valid": not kedlaya.verify(K)}
    return Outcome(res, [res], [f"wrote {res['size']}x{res['size']} matrix to {cfg['out']}"])


def run_kedlaya_verify(cfg: dict) -> Outcome:
    try:
        K = kedlaya.read_csv(cfg["in"], cfg["n"])
    except OSError as exc:
        raise UsageError(str(exc)) from None
    viol = kedlaya.verify(K)
    shown = [v.__dict__ for v in viol[:50]]
    res = {"n": K.n, "valid": not viol, "violation_count": len(viol), "violations": shown}
    fails = [f"{v.axis} {v.index}: value {v.value} appears {v.actual} times, expected {v.expected}"
             for v in viol[:10]]
    rows = shown or [{"n": K.n, "valid": True}]
    plain = ["valid" if not viol else f"invalid: {len(viol)} violations"] + fails
    return Outcome(res, rows, plain, fails)


def run_kedlaya_check(cfg: dict) -> Outcome:
    e = parse_expr(cfg["expr"])
    c = kedlaya.check_mixing_inequality(e, cfg["x"], cfg["max_n"])
    res = {"expr": format_expr(e), "x": list(cfg["x"]), "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds,
           "harmonic_rhs": c.harmonic_rhs, "harmonic_holds": c.harmonic_holds}
    fails = [] if c.holds else [f"lhs {c.lhs!r} exceeds rhs {c.rhs!r}"]
    row = {k: res[k] for k in ("expr", "lhs", "rhs", "holds", "harmonic_rhs", "harmonic_holds")}
    return Outcome(res, [row], [f"lhs {c.lhs!r} <= rhs {c.rhs!r}: {c.holds}"], fails)


def run_props(cfg: dict) -> Outcome:
    e = parse_expr(cfg["expr"])
    try:
        reports = properties.run_audits(e, cfg["props"], cfg["trials"], cfg["seed"])
    except ValueError as exc:
        if isinstance(exc, HardyLabError):
            raise
        raise UsageError(str(exc)) from None
    audits = [r.to_json() for r in reports]
    rows = [{"property": a["property"], "verdict": a["verdict"], "trials": a["trials"],
             "seed": a["seed"], "worst": a["worst"]} for a in audits]
    fails = [f"{a['property']}: counterexample at trial {a['witness'].get('trial')}" for a in audits
             if a["verdict"] == "counterexample"]
    plain = [f"{a['property']}: {a['verdict']} ({a['trials']} trials, seed {a['seed']})" for a in audits]
    return Outcome({"expr": format_expr(e), "audits": audits}, rows, plain, fails)


# reproduction table -------------------------------------------------------

SQRT_E = 2.0 * math.sqrt(math.e)
E32 = math.exp(1.5) / 2.0


def _margin_row(name, e, C, cfg):
    worst = math.inf
    for x in hardy.l1_samples(cfg["samples"], cfg["seed"]):
        chk = hardy.truncated_hardy_check(e, x, C)
        worst = min(worst, float(chk.margin / (C * chk.value_partial_sums[-1])))
    return {"name": name, "quantity": f"min relative margin of {format_expr(e)} at C={C!r}",
            "computed": worst, "reference": 0.0, "abs_error": max(0.0, -worst), "tolerance": 0.0,
            "converged": True}


def _reproduce_rows(cfg):
    tol, cells, chk = cfg["tol"], cfg["max_cells"], cfg["check_tol"]
    cache = {}

    def r(p, q):
        if (p, q) not in cache:
            cache[(p, q)] = rho(p, q, tol, cells)
        return cache[(p, q)]

    def quad_row(name, what, res, ref, t):
        return {"name": name, "quantity": what, "computed": res.value, "reference": ref,
                "abs_error": abs(res.value - ref), "tolerance": t, "converged": res.converged}

    def exact_row(name, what, v, ref, t):
        return {"name": name, "quantity": what, "computed": v, "reference": ref,
                "abs_error": abs(v - ref), "tolerance": t, "converged": True}

    def product():
        a, b = r(0.0, 1.0), r(0.0, -1.0)
        v = a.value * b.value
        return {"name": "product", "quantity": "rho(0,1) * rho(0,-1) vs e^2", "computed": v,
                "reference": math.e**2, "abs_error": abs(v - math.e**2), "tolerance": chk,
                "converged": a.converged and b.converged}

    return {
        "rho01": lambda: quad_row("rho01", "rho(0,1) vs 2 sqrt(e)", r(0.0, 1.0), SQRT_E, chk),
        "rho0m1": lambda: quad_row("rho0m1", "rho(0,-1) vs e^(3/2)/2", r(0.0, -1.0), E32, chk),
        "rho00": lambda: quad_row("rho00", "rho(0,0) vs e", r(0.0, 0.0), math.e, 0.0),
        "logint": lambda: quad_row("logint", "double integral of ln((x+y)/2) vs ln2 - 3/2",
                                   log_integral_selftest(min(tol, 1e-10), cells), LOG_INTEGRAL_EXACT, 1e-8),
        "product": product,
        "gamma_m1": lambda: exact_row("gamma_m1", "gamma(-1) vs 2", hardy.gamma(-1.0), 2.0, 1e-12),
        "gamma_half": lambda: exact_row("gamma_half", "gamma(1/2) vs 4", hardy.gamma(0.5), 4.0, 1e-12),
        "gamma0": lambda: exact_row("gamma0", "gamma(0) vs e", hardy.gamma(0.0), math.e, 0.0),
        "margin_sq01": lambda: _margin_row("margin_sq01", Square(Power(0), Power(1)), SQRT_E, cfg),
        "margin_circ0m1": lambda: _margin_row("margin_circ0m1", Circ(Power(0), Power(-1)), E32, cfg),
        "margin_sq0m1": lambda: _margin_row("margin_sq0m1", Square(Power(0), Power(-1)), E32, cfg),
    }


REPRODUCE_NAMES = list(_reproduce_rows({"tol": 0, "max_cells": 0, "check_tol": 0}).keys())


def run_reproduce(cfg: dict) -> Outcome:
    table = _reproduce_rows(cfg)
    names = cfg["only"] or list(table)
    unknown = [n for n in names if n not in table]
    if unknown:
        raise UsageError(f"unknown reproduce rows: {', '.join(unknown)} (known: {', '.join(table)})")
    rows = [table[n]() for n in names]
    fails = []
    for row in rows:
        row["pass"] = bool(row["converged"] and row["abs_error"] <= row["tolerance"])
        if not row["pass"]:
            why = "not converged" if not row["converged"] else f"error {row['abs_error']:.3g} > {row['tolerance']:.3g}"
            fails.append(f"{row['name']}: {why}")
    plain = [f"{r['name']:<15} {r['computed']!r:>22} {r['reference']!r:>22} {'ok' if r['pass'] else 'FAIL'}"
             for r in rows]
    return Outcome({"rows": rows}, rows, plain, fails)


COMMANDS = [
    Command(("mean", "eval"), run_mean_eval, [
        Param("expr", str, required=True, help="mean expression, e.g. sq(P[0],P[1])"),
        Param("x", _float_list, required=True, help="comma-separated positive values"),
        Param("weights", _float_list, help="comma-separated positive weights"),
        Param("merge_tolerance", _float, 0.0, "merge values closer than this (relative)"),
    ], "evaluate a mean"),
    Command(("hardy", "bracket"), run_hardy_bracket, [
        Param("expr", str, required=True, help="mean expression"),
        Param("nmax", _int, 6, "largest n for the finite Hardy numbers"),
        Param("restarts", _int, 32, "random optimizer restarts per n"),
        Param("iterations", _int, 500, "simplex iterations per restart"),
        Param("seed", _int, 0, "optimizer seed"),
        Param("dimension_cap", _int, 12, "largest n the optimizer accepts"),
        Param("n_harmonic", _int, 10_000, "length of the harmonic sequence"),
        Param("extrapolate", _bool, True, "Aitken-accelerate the harmonic estimate",
              flag="--no-extrapolate", switch="store_false"),
    ], "lower and upper estimates of a Hardy constant"),
    Command(("rho",), run_rho, [
        Param("p", _float, required=True, help="outer exponent"),
        Param("q", _float, required=True, help="inner exponent"),
        Param("tol", _float, 1e-7, "absolute tolerance on rho"),
        Param("max_cells", _int, 10**6, "quadrature cell budget"),
        Param("closed_only", _bool, False, "report only a catalogued closed form", switch="store_true"),
    ], "the constant rho(p, q)"),
    Command(("kedlaya", "build"), run_kedlaya_build, [
        Param("n", _int, required=True, help="order; the matrix is n! x n!"),
        Param("out", str, required=True, help="CSV output path"),
        Param("max_n", _int, 5, "order cap (6 is allowed, 720x720)"),
    ], "build and verify a Kedlaya matrix"),
    Command(("kedlaya", "verify"), run_kedlaya_verify, [
        Param("in", str, required=True, help="CSV matrix path"),
        Param("n", _int, required=True, help="order the matrix should have"),
    ], "check a Kedlaya matrix from a CSV file"),
    Command(("kedlaya", "check"), run_kedlaya_check, [
        Param("expr", str, required=True, help="symmetric concave mean expression"),
        Param("x", _float_list, required=True, help="comma-separated positive values"),
        Param("max_n", _int, 5, "length cap"),
    ], "evaluate both sides of the prefix-mixing inequality"),
    Command(("props", "run"), run_props, [
        Param("expr", str, required=True, help="mean expression"),
        Param("props", _str_list, ["symmetry", "concavity", "monotonicity"],
              "comma-separated audits: " + ",".join(properties.AUDITS)),
        Param("trials", _int, 1000, "random trials per audit"),
        Param("seed", _int, 0, "audit seed"),
    ], "randomized property audits"),
    Command(("reproduce",), run_reproduce, [
        Param("only", _str_list, [], "comma-separated row names: " + ",".join(REPRODUCE_NAMES)),
        Param("tol", _float, 1e-7, "quadrature tolerance"),
        Param("max_cells", _int, 10**6, "quadrature cell budget"),
        Param("check_tol", _float, 1e-6, "allowed error of the rho rows"),
        Param("samples", _int, 50, "seeded l1 samples per truncated inequality"),
        Param("seed", _int, 0, "sample seed"),
    ], "recompute the headline constants"),
]


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment.  Keys use ``_`` or ``-``."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardylab", description="Power means, mixed means and Hardy constants.")
    top = ap.add_subparsers(dest="cmd0", required=True)
    groups: dict[str, argparse._SubParsersAction] = {}
    for cmd in COMMANDS:
        if len(cmd.path) == 1:
            sp = top.add_parser(cmd.path[0], help=cmd.help)
        else:
            if cmd.path[0] not in groups:
                gp = top.add_parser(cmd.path[0])
                groups[cmd.path[0]] = gp.add_subparsers(dest="cmd1", required=True)
            sp = groups[cmd.path[0]].add_parser(cmd.path[1], help=cmd.help)
        sp.set_defaults(_command=cmd)
        sp.add_argument("--config", help="key = value file merged under the flags")
        sp.add_argument("--json", dest="format", action="store_const", const="json", default=None,
                        help="shorthand for --format json")
        sp.add_argument("--format", dest="format", choices=("json", "csv", "plain"), default=None)
        for prm in cmd.params:
            flag = prm.flag or "--" + prm.name.replace("_", "-")
            if prm.switch:
                sp.add_argument(flag, dest=prm.name, action=prm.switch, default=None, help=prm.help)
            else:
                sp.add_argument(flag, dest=prm.name, default=None, help=prm.help)
    return ap


def resolve(cmd: Command, flags: dict, config: dict[str, str]) -> dict:
    known = {p.name for p in cmd.params + COMMON}
    unknown = sorted(set(config) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for prm in cmd.params + COMMON:
        raw = flags.get(prm.name)
        if raw is None:
            raw = config.get(prm.name)
        if raw is None:
            if prm.required:
                raise UsageError(f"missing required parameter --{prm.name.replace('_', '-')}")
            out[prm.name] = prm.default
        elif isinstance(raw, bool) and prm.convert is not _bool:
            out[prm.name] = raw
        else:
            out[prm.name] = prm.convert(raw)
    if out["format"] not in ("json", "csv", "plain"):
        raise UsageError(f"unknown format {out['format']!r}")
    return out


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in _clean(r).items()})
    return buf.getvalue()


def _config_line(cfg) -> str:
    return " ".join(f"{k}={json.dumps(_clean(v))}" for k, v in _echo(cfg).items())


def _error_envelope(command, cfg, kind, message, position=None):
    err = {"kind": kind, "message": message}
    if position is not None:
        err["position"] = position
    return {"command": command, "config": _echo(cfg or {}), "status": "error", "error": err}


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = _build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    cmd: Command = ns._command
    name = " ".join(cmd.path)
    flags = {k: v for k, v in vars(ns).items() if not k.startswith("_")}
    cfg = None
    fmt = flags.get("format") or "json"

    def fail(code, kind, message, position=None):
        print(f"hardylab {name}: {message}", file=stderr)
        if fmt == "json":
            print(dumps(_error_envelope(name, cfg, kind, message, position)), file=stdout)
        return code

    try:
        config = read_config(flags["config"]) if flags.get("config") else {}
        cfg = resolve(cmd, flags, config)
        fmt = cfg["format"]
        out = cmd.run(cfg)
    except UsageError as exc:
        return fail(EXIT_USAGE, "usage", str(exc))
    except ParseError as exc:
        return fail(EXIT_USAGE, "parse", str(exc), exc.position)
    except (DomainError, EvaluationError, UnaryCase, InfiniteConstant, kedlaya.ConstructionError) as exc:
        return fail(EXIT_DOMAIN, "domain", str(exc))

    status = "check_failed" if out.failures else "ok"
    if fmt == "json":
        doc = {"command": name, "config": _echo(cfg), "status": status, "result": out.result}
        print(dumps(doc), file=stdout)
    elif fmt == "csv":
        # keep the table machine-readable; the resolved config goes to stderr
        print("# config: " + _config_line(cfg), file=stderr)
        stdout.write(_csv_text(out.rows))
    else:
        print("# config: " + _config_line(cfg), file=stdout)
        for line in out.plain:
            print(line, file=stdout)
    if out.failures:
        for f in out.failures:
            print(f"FAILED {f}", file=stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
