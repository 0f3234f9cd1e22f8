"""Command-line front end.

Every command prints one JSON document (or CSV with ``#`` comment header)
that starts with the resolved configuration.  Exit status: 0 when all
requested checks pass, 1 when a check fails, 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import __version__
from .errors import ConfigError, QKMirrorError
from .toric import (MomentData, RankTwoModel, euler_pairing, integrate, load_model_file,
                    normalize_rank2_detailed, parse_family, validate)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# --- value parsing and formatting --------------------------------------------

def parse_number(text: str):
    """``"5/2"`` or an integer literal gives an exact ``Fraction``; anything else a float."""
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        return Fraction(text)
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_float(text: str) -> float:
    return float(parse_number(text))


def _fmt(x) -> object:
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return x
    if isinstance(x, complex):
        return x.real if x.imag == 0 else [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if hasattr(x, "item"):
        return _fmt(x.item())
    return str(x)


def _csv_cell(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, (tuple, list)):
        return " ".join(_csv_cell(v) for v in x)
    return str(_fmt(x))


def parse_class(text: str, rank: int) -> dict[tuple[int, ...], Fraction]:
    """Polynomial in ``p1, p2`` (or ``p``) such as ``"p1^2*p2 - 3/2 p2^3"``."""
    names = {"p": 0} if rank == 1 else {"p1": 0, "p2": 1}
    if rank == 1:
        names["p1"] = 0
    poly: dict[tuple[int, ...], Fraction] = {}
    cleaned = text.replace(" ", "").replace("**", "^")
    if not cleaned:
        raise ConfigError("empty class")
    for sign, body in re.findall(r"([+-]?)([^+-]+)", cleaned):
        coef = Fraction(-1 if sign == "-" else 1)
        exps = [0] * rank
        for factor in filter(None, body.split("*")):
            m = re.fullmatch(r"(p\d?)(?:\^(\d+))?", factor)
            if m:
                if m.group(1) not in names:
                    raise ConfigError(f"unknown generator {m.group(1)!r}")
                exps[names[m.group(1)]] += int(m.group(2) or 1)
                continue
            m = re.fullmatch(r"(\d+(?:/\d+)?)(p\d?(?:\^\d+)?)?", factor)
            if not m:
                raise ConfigError(f"cannot parse factor {factor!r} in class {text!r}")
            coef *= Fraction(m.group(1))
            if m.group(2):
                g = re.fullmatch(r"(p\d?)(?:\^(\d+))?", m.group(2))
                if g.group(1) not in names:
                    raise ConfigError(f"unknown generator {g.group(1)!r}")
                exps[names[g.group(1)]] += int(g.group(2) or 1)
        key = tuple(exps)
        poly[key] = poly.get(key, Fraction(0)) + coef
    return poly


def parse_word(text: str, rank: int) -> tuple[int, ...]:
    try:
        word = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"K-word must be comma-separated integers, got {text!r}") from exc
    if len(word) != rank:
        raise ConfigError(f"K-word needs {rank} exponents")
    return word


def default_tol(given: float | None, fallback: float) -> float:
    if given is not None:
        return given
    env = os.environ.get("QKMIRROR_TOL")
    if env:
        try:
            return float(env)
        except ValueError as exc:
            raise ConfigError(f"QKMIRROR_TOL is not a number: {env!r}") from exc
    return fallback


# --- model resolution ----------------------------------------------------------

def resolve_model(args) -> tuple[RankTwoModel, MomentData, str]:
    path = getattr(args, "path", None) or args.model
    if path and args.family:
        raise ConfigError("give either a model file or --family, not both")
    if path:
        model, data = load_model_file(path)
        return model, data, path
    if args.family:
        model = parse_family(args.family)
        return model, model.moment_data(), args.family
    raise ConfigError("a model is required (file path, --model or --family)")


def _config(args, model: RankTwoModel | None, source: str | None, **extra) -> dict:
    cfg = {"command": args.command, "version": __version__}
    if model is not None:
        cfg["model"] = {"source": source, "N": model.N, "a": list(model.a), "rank": model.rank}
    for key in ("q", "z", "b1", "b2", "Q1", "Q2", "degree", "tol", "seed", "parallel", "mode", "steps"):
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    cfg.update(extra)
    tol_env = os.environ.get("QKMIRROR_TOL")
    if tol_env:
        cfg["QKMIRROR_TOL"] = tol_env
    return _fmt(cfg)


def _emit(doc: dict, out) -> None:
    out.write(json.dumps(_fmt(doc), indent=2, sort_keys=False) + "\n")


def _write_csv(path: str, config: dict, header: Sequence[str], rows: Iterable[Sequence], out=None) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(config, sort_keys=False) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(x) for x in r])
    if path == "-":
        (out or sys.stdout).write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())


def _pmap(fn: Callable, items: list, workers: int) -> list:
    """Ordered map, optionally over worker processes."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --- commands -----------------------------------------------------------------

def cmd_validate(args, out) -> int:
    model, data, src = _resolve_data_only(args)
    report = validate(data)
    _emit({"config": _config(args, None, None, model_source=src), **report.to_json()}, out)
    return EXIT_OK if report.compact and report.smooth else EXIT_FAIL


def _resolve_data_only(args):
    path = args.path or args.model
    if path and args.family:
        raise ConfigError("give either a model file or --family, not both")
    if path:
        from .toric import load_data_file

        return None, load_data_file(path), path
    if args.family:
        model = parse_family(args.family)
        return model, model.moment_data(), args.family
    raise ConfigError("a model is required (file path, --model or --family)")


def cmd_normalize(args, out) -> int:
    _, data, src = _resolve_data_only(args)
    if data.r == 1:
        from .toric import normalize

        model = normalize(data)
        doc = {"N": model.N, "a": [], "rank": 1}
    else:
        norm = normalize_rank2_detailed(data)
        model = norm.model
        doc = {"N": model.N, "a": list(model.a), "rank": 2, "row_transform": norm.row_transform,
               "column_order": norm.column_order}
    doc.update(c1=list(model.c1), fano=model.fano, dim=model.dim)
    _emit({"config": _config(args, model, src), **doc}, out)
    return EXIT_OK


def cmd_intersect(args, out) -> int:
    model, _, src = resolve_model(args)
    poly = parse_class(args.cls, model.rank)
    value = integrate(model, poly)
    _emit({"config": _config(args, model, src, **{"class": args.cls}), "value": value}, out)
    return EXIT_OK


def cmd_euler(args, out) -> int:
    model, _, src = resolve_model(args)
    E, F = parse_word(args.E, model.rank), parse_word(args.F, model.rank)
    value = euler_pairing(model, E, F)
    _emit({"config": _config(args, model, src, E=list(E), F=list(F)), "value": value}, out)
    return EXIT_OK


def cmd_ifunction(args, out) -> int:
    from .series import i_coh, i_kth

    model, _, src = resolve_model(args)
    if args.kind == "coh":
        param = parse_number(args.z or "1")
        s = i_coh(model, args.degree, param)
    else:
        param = parse_number(args.q or "2")
        s = i_kth(model, args.degree, param)
    doc = {"config": _config(args, model, src), "model": model.label, "kind": args.kind,
           "D": args.degree, ("z" if args.kind == "coh" else "q"): param, "coefficients": s.to_json()}
    _emit(doc, out)
    return EXIT_OK


def _residual_job(job) -> dict:
    from .series import i_coh, i_kth, ode_residual_coh, qde_residual

    kind, N, a, rank, D, value = job
    model = RankTwoModel(N, tuple(a), rank)
    if kind == "qde":
        s = i_kth(model, D, value)
        res = [qde_residual(s, i) for i in range(1, rank + 1)]
    else:
        s = i_coh(model, D, value)
        res = [ode_residual_coh(s, i) for i in range(1, rank + 1)]
    nonzero = [[i + 1, list(d)] for i, r in enumerate(res) for d, c in r.coeffs.items() if not c.is_zero()]
    return {"value": value, "zero": not nonzero, "nonzero_at": nonzero[:10]}


def _residual_command(args, out, kind: str) -> int:
    model, _, src = resolve_model(args)
    values = [parse_number(x) for x in (args.q if kind == "qde" else args.z).split(",")]
    if any(not isinstance(v, Fraction) for v in values):
        raise ConfigError("exact checks need rational parameters such as 2 or 5/2")
    jobs = [(kind, model.N, list(model.a), model.rank, args.degree, v) for v in values]
    results = _pmap(_residual_job, jobs, args.parallel)
    ok = all(r["zero"] for r in results)
    _emit({"config": _config(args, model, src), "passed": ok, "results": results}, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_qde_check(args, out) -> int:
    return _residual_command(args, out, "qde")


def cmd_ode_check(args, out) -> int:
    return _residual_command(args, out, "ode")


def _stable(report) -> dict:
    """Report JSON without wall-clock fields, so repeated runs print identical bytes."""
    doc = report.to_json()
    doc["metadata"] = {k: v for k, v in doc["metadata"].items() if k != "elapsed"}
    return doc


def _report_output(args, out, model, src, report, tol: float, params: dict) -> int:
    ok = report.passed(tol)
    cfg = _config(args, model, src, tol=tol)
    _emit({"config": cfg, "passed": ok, "report": _stable(report)}, out)
    if args.emit_csv:
        _write_csv(args.emit_csv, cfg, list(params) + ["lhs", "rhs", "relerr"],
                   [list(params.values()) + [report.lhs, report.rhs, report.rel_err]])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_compare_kth(args, out) -> int:
    from .oscillatory import compare_kth

    model, _, src = resolve_model(args)
    q = parse_float(args.q)
    b = (args.b1,) if model.rank == 1 else (args.b1, args.b2)
    tol = default_tol(args.tol, 1e-8)
    # the truncated tail only has to stay well inside the requested tolerance
    report = compare_kth(model, q, b, args.degree, series_tol=tol / 100)
    return _report_output(args, out, model, src, report, tol,
                          {"q": q, "b1": args.b1, "b2": args.b2 if model.rank == 2 else ""})


def cmd_compare_coh(args, out) -> int:
    from .oscillatory import compare_coh

    model, _, src = resolve_model(args)
    z = parse_float(args.z)
    Q = (args.Q1,) if model.rank == 1 else (args.Q1, args.Q2)
    report = compare_coh(model, z, Q, args.degree)
    return _report_output(args, out, model, src, report, default_tol(args.tol, 1e-6),
                          {"z": z, "Q1": args.Q1, "Q2": args.Q2 if model.rank == 2 else ""})


def cmd_qmellin_check(args, out) -> int:
    from .oscillatory import q_mellin_factor_check

    model, _, src = resolve_model(args)
    q = parse_float(args.q)
    tol = default_tol(args.tol, 1e-10)
    points = []
    if args.random:
        rng = random.Random(args.seed)
        while len(points) < args.random:
            p = [rng.uniform(0.05, 3.0) for _ in range(model.rank)]
            if all(sum(c * x for c, x in zip(col, p)) > 0.05 for col in model.columns):
                points.append(p)
    else:
        p = [args.p1] if model.rank == 1 else [args.p1, args.p2]
        if any(x is None for x in p):
            raise ConfigError("give --p1/--p2 or --random N")
        points.append(p)
    reports = [q_mellin_factor_check(model, q, p) for p in points]
    ok = all(r.passed(tol) for r in reports)
    cfg = _config(args, model, src, tol=tol, random=args.random)
    _emit({"config": cfg, "passed": ok, "worst_relerr": max(r.rel_err for r in reports),
           "reports": [_stable(r) for r in reports]}, out)
    if args.emit_csv:
        _write_csv(args.emit_csv, cfg, ["p", "lhs", "rhs", "relerr"],
                   [[r.metadata["p"], r.lhs, r.rhs, r.rel_err] for r in reports])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_confluence(args, out) -> int:
    from . import confluence as cf

    model, _, src = resolve_model(args)
    Q0 = (args.Q1,) if model.rank == 1 else (args.Q1, args.Q2)
    if args.mode == "series":
        qs = [1 + Fraction(1, 10 ** s) for s in range(1, args.steps + 1)]
        table = cf.stripped_limit_table(model, args.degree, qs)
        rows = [(q, d, b, v, t, e) for q, d, b, v, t, e in table.rows()]
        errs = table.max_errors()
    else:
        ks = [10 * i for i in range(1, args.steps + 1)]
        res = cf.spiral_confluence_jfun(model, Q0, ks, D=max(args.degree, 16))
        rows = []
        for r in res:
            for u, (v, t) in zip(r.value.algebra.basis, zip(r.value.coeffs, r.target.coeffs)):
                rows.append((r.q, r.exponents, u, complex(v).real, complex(t).real, abs(complex(v - t))))
        errs = [r.error for r in res]
    tail = errs[-3:]
    ok = all(y <= x for x, y in zip(tail, tail[1:]))
    cfg = _config(args, model, src)
    header = ["q", "d" if args.mode == "series" else "exponents", "basis", "value", "target", "error"]
    target = args.emit_csv or "-"
    _write_csv(target, cfg, header, rows, out)
    if target != "-":
        _emit({"config": cfg, "passed": ok, "max_errors": errs}, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_qfun(args, out) -> int:
    from . import qfun

    q = parse_float(args.q)
    x = parse_float(args.x) if args.x is not None else None
    fn = args.fn
    if fn == "pochhammer":
        value, tail = qfun.pochhammer_inf(x, q, args.tol)
        extra = {"tail_bound": tail.achieved, "terms": tail.terms}
    else:
        table = {"theta": qfun.theta, "qlog": qfun.q_log, "gamma_q": qfun.gamma_q, "gamma_qinv": qfun.gamma_qinv,
                 "gamma_q_c": qfun.gamma_q_c, "E": qfun.q_exp_E, "e_q": qfun.e_q, "E_q": qfun.E_q}
        value, extra = table[fn](x, q, tol=args.tol), {}
    _emit({"config": _config(args, None, None, fn=fn, x=x), "value": value, **extra}, out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkmirror", description="Mirror-symmetry verification for rank <= 2 toric Fano models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str, model: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--parallel", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--seed", type=int, default=0)
        if model:
            p.add_argument("path", nargs="?", help="TOML model file")
            p.add_argument("--model", help="TOML model file")
            p.add_argument("--family", help='inline model, e.g. "N=2,a=1" or "N=3,rank=1"')
        return p

    add("validate", cmd_validate, "compactness, smoothness and Fano checks")
    add("normalize", cmd_normalize, "rank-2 normal form")
    p = add("intersect", cmd_intersect, "integrate a polynomial class")
    p.add_argument("--class", dest="cls", required=True)
    p = add("euler", cmd_euler, "Euler pairing of two line-bundle words")
    p.add_argument("--E", required=True, help="exponents, e.g. 1,0")
    p.add_argument("--F", required=True)
    p = add("ifunction", cmd_ifunction, "stripped I-function coefficients")
    p.add_argument("--kind", choices=("coh", "kth"), default="kth")
    p.add_argument("--q")
    p.add_argument("--z")
    p.add_argument("--degree", type=int, default=4)
    p = add("qde-check", cmd_qde_check, "exact q-difference residuals")
    p.add_argument("--q", default="2,3,5/2")
    p.add_argument("--degree", type=int, default=8)
    p = add("ode-check", cmd_ode_check, "exact differential residuals")
    p.add_argument("--z", default="1,2")
    p.add_argument("--degree", type=int, default=8)
    p = add("compare-kth", cmd_compare_kth, "Jackson sum against the q-gamma pairing")
    p.add_argument("--q", required=True)
    p.add_argument("--b1", type=int, default=0)
    p.add_argument("--b2", type=int, default=0)
    p.add_argument("--degree", type=int, default=12)
    p.add_argument("--tol", type=float)
    p.add_argument("--emit-csv")
    p = add("compare-coh", cmd_compare_coh, "oscillatory integral against the Gamma pairing")
    p.add_argument("--z", default="1")
    p.add_argument("--Q1", type=float, default=1.0)
    p.add_argument("--Q2", type=float, default=1.0)
    p.add_argument("--degree", type=int, default=24)
    p.add_argument("--tol", type=float)
    p.add_argument("--emit-csv")
    p = add("qmellin-check", cmd_qmellin_check, "columnwise Jackson integrals against gamma_q")
    p.add_argument("--q", default="2")
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--random", type=int, default=0, help="number of random strip points")
    p.add_argument("--tol", type=float)
    p.add_argument("--emit-csv")
    p = add("confluence", cmd_confluence, "q -> 1 limit tables (CSV)")
    p.add_argument("--mode", choices=("series", "spiral"), default="series")
    p.add_argument("--Q1", type=float, default=1.0)
    p.add_argument("--Q2", type=float, default=1.0)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--emit-csv")
    p = add("qfun", cmd_qfun, "evaluate a q-special function", model=False)
    p.add_argument("action", choices=("eval",))
    p.add_argument("fn", choices=("pochhammer", "theta", "qlog", "gamma_q", "gamma_qinv", "gamma_q_c", "E", "e_q", "E_q"))
    p.add_argument("--x", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--tol", type=float, default=1e-15)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QKMirrorError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
