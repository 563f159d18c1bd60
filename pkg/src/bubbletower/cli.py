"""Command-line entry point: ``python -m bubbletower <command> ...``.

Every command writes its CSV/JSON artifacts into ``--out`` and prints a
one-line summary. Options may also come from a JSON ``--config`` file;
explicit flags win over the file, which wins over the built-in defaults.
Exit status: 0 on success, 2 on argument errors, 1 on numerical failure
(with ``{"error": code, "detail": text}`` on stdout).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .bifurcation import build_singular_solution, count_lambda_crossings, trace_diagram
from .bubble_analysis import analysis_report, report_json
from .errors import BubbleTowerError, DomainError
from .nonlinearity import NonlinearitySpec
from .profiles import UBeta, VL, profile_table, regular0, singular, tilde0
from .radial_solver import SolverOptions, integrate_radial, pohozaev_check, shoot_first_zero, to_unit_disc
from .recurrence import compute_hat_recurrence, compute_recurrence

GLOBAL_DEFAULTS = {"jobs": 1, "out": "out", "format": "csv"}
SOLVER_FLAGS = ("rel_tol", "abs_tol", "max_steps", "s_start_offset")
COMMAND_DEFAULTS = {
    "recurrence": {"p": None, "k": 64, "tol": 1e-12},
    "hat-recurrence": {"k": 64, "tol": 1e-12},
    "profile": {"kind": None, "a": None, "b": None, "dump": None, "h": 0.05, "n": 200},
    "shoot": {"spec": None, "mu": None, "lam": None},
    "analyze": {"spec": None, "mu": None, "curves": "", "min_phi": 0.05},
    "singular": {"spec": None},
    "diagram": {"spec": None, "mu_min": None, "mu_max": None, "points": 17, "refine_dx": 0.05},
    "verify": {"strict": False},
}


class UsageError(Exception):
    pass


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverOptions()
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=argparse.SUPPRESS, help=f"relative tolerance (default: {d.rel_tol:g})")
    p.add_argument("--abs-tol", dest="abs_tol", type=float, default=argparse.SUPPRESS, help=f"absolute tolerance (default: {d.abs_tol:g})")
    p.add_argument("--max-steps", dest="max_steps", type=int, default=argparse.SUPPRESS, help=f"step budget (default: {d.max_steps})")
    p.add_argument(
        "--s-start-offset", dest="s_start_offset", type=float, default=argparse.SUPPRESS,
        help=f"start this far inside the inner scale, in log-radius (default: {d.s_start_offset:g})",
    )


def _spec_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", default=argparse.SUPPRESS, help='nonlinearity as inline JSON or a path, e.g. \'{"p": 3, "variant": "H4", "tau0": 1}\'')


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="bubbletower", description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=S, help="worker processes for diagram/verify (default: 1)")
    parser.add_argument("--out", default=S, help="output directory (default: out)")
    parser.add_argument("--format", choices=("csv", "json"), default=S, help="format of tabular artifacts (default: csv)")
    parser.add_argument("--config", default=None, help="JSON file of option values (flags take precedence)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recurrence", help="table of (delta_k, a_k) and derived quantities")
    p.add_argument("--p", type=float, default=S, help="exponent p > 2 (required)")
    p.add_argument("--k", type=int, default=S, help="last index K (default: 64)")
    p.add_argument("--tol", type=float, default=S, help="root residual tolerance (default: 1e-12)")

    p = sub.add_parser("hat-recurrence", help="the p -> infinity limit sequences")
    p.add_argument("--k", type=int, default=S, help="last index K (default: 64)")
    p.add_argument("--tol", type=float, default=S, help="root residual tolerance (default: 1e-12)")

    p = sub.add_parser("profile", help="dump a Liouville profile on a log-radius grid")
    p.add_argument("--kind", choices=("z0", "tilde0", "singular"), default=S, help="profile family (required)")
    p.add_argument("--a", type=float, default=S, help="exponent a in (0, 2) for singular (required there)")
    p.add_argument("--b", type=float, default=S, help="scale b for singular (default: (sqrt 2/a)^a)")
    p.add_argument("--dump", default=S, help="output path, '-' for stdout (default: <out>/profile_<kind>.csv)")
    p.add_argument("--h", type=float, default=S, help="grid spacing in s (default: 0.05)")
    p.add_argument("--n", type=int, default=S, help="grid is s = h * (-n..n) (default: 200)")

    p = sub.add_parser("shoot", help="lambda(mu) by shooting, or a fixed-lambda solve on the unit disc")
    _spec_flag(p)
    p.add_argument("--mu", type=float, default=S, help="u(0) (required)")
    p.add_argument("--lambda", dest="lam", type=float, default=S, help="solve at this lambda up to r = 1 instead of shooting")
    _add_solver_flags(p)

    p = sub.add_parser("analyze", help="bubbles, oscillation and intersections of one solution")
    _spec_flag(p)
    p.add_argument("--mu", type=float, default=S, help="u(0) (required)")
    p.add_argument("--curves", default=S, help="comma list such as 'U:1.5,V:0' (U_beta and V_L curves; default: none)")
    p.add_argument("--min-phi", dest="min_phi", type=float, default=S, help="bubble threshold on phi (default: 0.05)")
    _add_solver_flags(p)

    p = sub.add_parser("singular", help="singular solution and lambda* for an H4 spec")
    _spec_flag(p)
    _add_solver_flags(p)

    p = sub.add_parser("diagram", help="bifurcation diagram lambda(mu)")
    _spec_flag(p)
    p.add_argument("--mu-min", dest="mu_min", type=float, default=S, help="(required)")
    p.add_argument("--mu-max", dest="mu_max", type=float, default=S, help="(required)")
    p.add_argument("--points", type=int, default=S, help="initial grid size (default: 17)")
    p.add_argument("--refine-dx", dest="refine_dx", type=float, default=S, help="refinement spacing near lambda* crossings (default: 0.05)")
    _add_solver_flags(p)

    p = sub.add_parser("verify", help="run the acceptance suite and print a pass/fail table")
    p.add_argument("--strict", action="store_true", default=S, help="exit 1 if any criterion fails (default: off)")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags, rejecting unknown config keys."""
    cmd = args.command
    merged = dict(GLOBAL_DEFAULTS)
    merged.update(COMMAND_DEFAULTS[cmd])
    solver: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        allowed = set(GLOBAL_DEFAULTS) | set(COMMAND_DEFAULTS[cmd]) | {"solver"}
        unknown = set(cfg) - allowed
        if unknown:
            raise UsageError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        solver.update(cfg.pop("solver", {}))
        merged.update(cfg)
    given = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    for k in SOLVER_FLAGS:
        if k in given:
            solver[k] = given.pop(k)
    merged.update(given)
    try:
        merged["solver"] = SolverOptions.from_dict(solver)
    except (DomainError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    return merged


def parse_spec(text) -> NonlinearitySpec:
    if text is None:
        raise UsageError("--spec is required")
    if isinstance(text, dict):
        data = text
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            try:
                data = json.loads(Path(text).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"--spec is neither JSON nor a readable JSON file: {exc}") from None
    try:
        return NonlinearitySpec.from_dict(data)
    except (DomainError, TypeError) as exc:
        raise UsageError(f"invalid spec: {exc}") from None


def _need(opts: dict, *names) -> None:
    missing = [n for n in names if opts.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _table(path: Path, header: str, rows, fmt: str) -> Path:
    cols = header.split(",")
    if fmt == "json":
        path = path.with_suffix(".json")
        data = [{c: (None if isinstance(v, float) and not math.isfinite(v) else v) for c, v in zip(cols, r)} for r in rows]
        path.write_text(json.dumps(data, indent=2) + "\n")
    else:
        path.write_text(header + "\n" + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows))
    return path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(v)
    return f"{float(v):.17g}"


def _rows_from_csv(text: str):
    lines = text.strip().splitlines()
    return lines[0], [[float(x) if x else None for x in ln.split(",")] for ln in lines[1:]]


def _write_csv_text(path: Path, text: str, fmt: str) -> Path:
    if fmt == "csv":
        path.write_text(text)
        return path
    header, rows = _rows_from_csv(text)
    return _table(path, header, rows, fmt)


def _parse_curves(text: str, p: float, m: float):
    curves = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        kind, _, val = item.partition(":")
        try:
            x = float(val)
        except ValueError:
            raise UsageError(f"bad curve {item!r}; use U:<beta> or V:<L>") from None
        if kind == "U":
            curves.append(UBeta(x, p))
        elif kind == "V":
            curves.append(VL(x, p, m))
        else:
            raise UsageError(f"bad curve {item!r}; use U:<beta> or V:<L>")
    return curves


def _run(cmd: str, o: dict) -> str:
    out = Path(o["out"])
    fmt = o["format"]
    opts: SolverOptions = o["solver"]
    if cmd == "verify":
        out.mkdir(parents=True, exist_ok=True)
        results = acceptance.run_all(out, jobs=o["jobs"], echo=print)
        n_pass = sum(r.passed for r in results)
        o["_status"] = 1 if (o["strict"] and n_pass < len(results)) else 0
        return f"verify: {n_pass}/{len(results)} criteria passed; artifacts in {out}"

    if cmd == "profile":
        _need(o, "kind")
        if o["kind"] == "z0":
            prof = regular0()
        elif o["kind"] == "tilde0":
            prof = tilde0()
        else:
            _need(o, "a")
            prof = singular(o["a"], o["b"])
        grid = np.arange(-o["n"], o["n"] + 1) * o["h"]
        text = profile_table(prof, grid)
        dump = o["dump"]
        if dump == "-":
            sys.stdout.write(text)
            o["_quiet"] = True
            return f"profile {o['kind']}: {grid.size} rows to stdout"
        out.mkdir(parents=True, exist_ok=True)
        path = Path(dump) if dump else out / f"profile_{o['kind']}.csv"
        path = _write_csv_text(path, text, fmt)
        return f"profile {o['kind']}: {grid.size} rows -> {path}"

    out.mkdir(parents=True, exist_ok=True)
    if cmd == "recurrence":
        _need(o, "p")
        table = compute_recurrence(o["p"], o["k"], o["tol"])
        path = _write_csv_text(out / f"recurrence_p{o['p']:g}.csv", table.to_csv(), fmt)
        r1 = table[1]
        return f"recurrence p={o['p']:g} K={table.K}: delta_1={r1.delta:.10g} a_1={r1.a:.10g} -> {path}"

    if cmd == "hat-recurrence":
        rows = compute_hat_recurrence(o["k"], o["tol"])
        path = _table(out / "hat_recurrence.csv", "k,c_hat,a_hat,beta_hat_star", [(h.k, h.c_hat, h.a_hat, h.beta_hat_star) for h in rows], fmt)
        return f"hat-recurrence K={len(rows) - 1}: c_hat_1={rows[1].c_hat:.10g} a_hat_1={rows[1].a_hat:.10g} -> {path}"

    spec = parse_spec(o["spec"])
    tag = f"p{spec.p:g}_{type(spec.variant).__name__}"
    if cmd == "shoot":
        _need(o, "mu")
        if o["lam"] is not None:
            sol = integrate_radial(spec, o["lam"], o["mu"], "radius_one", opts)
            summary = {"mu": sol.mu, "lambda": sol.lam, "u_at_1": float(sol.u[-1])}
        else:
            shot = shoot_first_zero(spec, o["mu"], opts)
            sol = to_unit_disc(shot)
            summary = {"mu": shot.mu, "lambda": shot.lambda_of_mu, "s_bar": shot.s_bar}
        summary["A_at_1"] = float(sol.A[-1])
        summary["pohozaev"] = pohozaev_check(sol)
        summary["spec"] = spec.to_dict()
        path = _write_csv_text(out / f"solution_{tag}_mu{o['mu']:g}.csv", sol.to_csv(), fmt)
        (out / f"solution_{tag}_mu{o['mu']:g}.summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        return f"shoot mu={o['mu']:g}: lambda={summary['lambda']:.12g} -> {path}"

    if cmd == "analyze":
        _need(o, "mu")
        shot = shoot_first_zero(spec, o["mu"], opts)
        table = compute_recurrence(spec.p) if spec.p > 2 else None
        curves = _parse_curves(o["curves"], spec.p, spec.m_exponent)
        report = analysis_report(shot, table, curves, o["min_phi"])
        path = out / f"analysis_{tag}_mu{o['mu']:g}.json"
        path.write_text(report_json(report) + "\n")
        return f"analyze mu={o['mu']:g}: lambda={shot.lambda_of_mu:.12g}, {len(report['bubbles'])} bubble(s) -> {path}"

    if cmd == "singular":
        sing = build_singular_solution(spec, opts)
        path = _write_csv_text(out / f"singular_{tag}.csv", sing.to_csv(), fmt)
        (out / f"singular_{tag}.summary.json").write_text(
            json.dumps({"lambda_star": sing.lambda_star, "R_bar_star": sing.R_bar_star, "R0": sing.R0, "spec": spec.to_dict()}, indent=2, sort_keys=True) + "\n"
        )
        return f"singular: lambda*={sing.lambda_star:.12g} R*={sing.R_bar_star:.12g} -> {path}"

    if cmd == "diagram":
        _need(o, "mu_min", "mu_max")
        if not (0 < o["mu_min"] < o["mu_max"]) or o["points"] < 2:
            raise UsageError("need 0 < mu-min < mu-max and points >= 2")
        grid = np.linspace(o["mu_min"], o["mu_max"], o["points"])
        diagram = trace_diagram(spec, grid, opts, refine_dx=o["refine_dx"], jobs=o["jobs"])
        crossings = count_lambda_crossings(diagram, opts=opts) if diagram.lambda_star is not None else None
        path = _write_csv_text(out / f"diagram_{tag}.csv", diagram.to_csv(), fmt)
        (out / f"diagram_{tag}.summary.json").write_text(diagram.summary_json(crossings) + "\n")
        lam = diagram.column("lam")
        extra = "" if crossings is None else f", {crossings.count} crossing(s) of lambda*={diagram.lambda_star:.10g}"
        return f"diagram: {len(diagram.rows)} points, max lambda={np.max(lam):.10g}{extra} -> {path}"

    raise UsageError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        o = resolve(args)
        line = _run(args.command, o)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except BubbleTowerError as exc:
        print(json.dumps({"error": exc.code, "detail": str(exc)}))
        return 1
    print(line, file=sys.stderr if o.get("_quiet") else sys.stdout)
    return int(o.get("_status", 0))


if __name__ == "__main__":
    raise SystemExit(main())
