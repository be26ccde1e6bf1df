"""Command line front end: table reproduction, bound evaluation and property suites.

Exit codes: 0 when everything passes, 1 when a bound is invalid or a suite
check fails, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .bounds import (
    BoundReport,
    mixed_poisson_hazard_bound,
    pmf_hazard_bound,
    poisson_process_bounds,
    polya_bounds,
    translated_bound,
)
from .markov import BirthDeathSpec, bd_extinction_bound, birth_death_chain, hitting_time_pmf
from .metrics import Interval
from .pmf import DiscretePMF, conditional_shift, geometric_pmf, mixed_poisson_gamma_pmf, polya_pmf
from .queueing import (
    MG1System,
    ServiceTimeModel,
    busy_period_bound,
    busy_period_chain,
    corollary_q1_bound,
    deterministic,
    erlang,
    exponential,
    gamma_service,
)
from .suites import SUITES, exact_interval
from .tables import ERLANG_GRID, POLYA_ROWS, erlang_table, polya_table

SCHEMA_VERSION = 1

EXIT_OK, EXIT_INVALID, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    """Malformed model, rows or grid file."""


# parsing ---------------------------------------------------------------------


def _num(value, name: str) -> float:
    if isinstance(value, bool):
        raise InputError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Decimal(value.strip()))
        except InvalidOperation:
            raise InputError(f"{name}: {value!r} is not a decimal number") from None
    raise InputError(f"{name}: expected a decimal string, got {type(value).__name__}")


def _int(value, name: str) -> int:
    x = _num(value, name)
    if x != int(x):
        raise InputError(f"{name}: expected an integer, got {value!r}")
    return int(x)


def _field(obj: dict, key: str, ctx: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{ctx}: missing field {key!r}")
    return obj[key]


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None


def parse_pmf(obj: dict, ctx: str = "w") -> tuple[DiscretePMF, str | None]:
    """A pmf and any rate structure its family guarantees."""
    if "probs" in obj:
        probs = [_num(v, f"{ctx}.probs[{i}]") for i, v in enumerate(_field(obj, "probs", ctx))]
        tail = _num(obj.get("tail_mass", 0), f"{ctx}.tail_mass")
        return DiscretePMF(probs, tail), obj.get("structure")
    family = _field(obj, "family", ctx)
    if family == "geometric":
        # constant rates count as IFR
        return geometric_pmf(_num(_field(obj, "p", ctx), f"{ctx}.p")), "IFR"
    if family == "polya":
        return polya_pmf(_int(_field(obj, "m", ctx), f"{ctx}.m"), _int(_field(obj, "d", ctx), f"{ctx}.d")), "IFR"
    if family == "mixed_poisson_gamma":
        alpha = _num(_field(obj, "alpha", ctx), f"{ctx}.alpha")
        beta = _num(_field(obj, "beta", ctx), f"{ctx}.beta")
        lam = _num(_field(obj, "lambda", ctx), f"{ctx}.lambda")
        return mixed_poisson_gamma_pmf(alpha, beta, lam), "IFR" if alpha >= 1 else "DFR"
    raise InputError(f"{ctx}: unknown family {family!r}")


def parse_service(obj: dict, ctx: str = "service") -> ServiceTimeModel:
    kind = _field(obj, "kind", ctx)
    if kind == "exponential":
        return exponential(_num(_field(obj, "rate", ctx), f"{ctx}.rate"))
    if kind == "erlang":
        return erlang(_int(_field(obj, "k", ctx), f"{ctx}.k"), _num(_field(obj, "rate", ctx), f"{ctx}.rate"))
    if kind == "gamma":
        return gamma_service(_num(_field(obj, "shape", ctx), f"{ctx}.shape"), _num(_field(obj, "rate", ctx), f"{ctx}.rate"))
    if kind == "deterministic":
        return deterministic(_num(_field(obj, "s", ctx), f"{ctx}.s"))
    raise InputError(f"{ctx}: unknown service kind {kind!r}")


def _system(model: dict) -> MG1System:
    return MG1System(_num(_field(model, "lambda", "model"), "lambda"), parse_service(_field(model, "service", "model")))


def _x(model: dict) -> DiscretePMF | None:
    if "x" not in model:
        return None
    x, _ = parse_pmf(model["x"], "x")
    return x


# evaluation ------------------------------------------------------------------


def _entry(report: BoundReport, exact: Interval | None) -> dict:
    out = report.to_dict()
    out["exact"] = None if exact is None else {"lo": exact.lo, "hi": exact.hi}
    return out


def evaluate_model(model: dict) -> list[dict]:
    """Every report for a model, each with the exact metric interval when available."""
    kind = _field(model, "kind", "model")
    if kind in ("pmf", "translated"):
        w, structure = parse_pmf(_field(model, "w", "model"))
        m = _int(model.get("m", 0), "m")
        delta = _num(model["delta"], "delta") if "delta" in model else None
        report = translated_bound(w, m, x=_x(model), delta=delta, structure=structure)
        return [_entry(report, exact_interval(report, conditional_shift(w, m)))]
    if kind == "polya":
        m, d = _int(_field(model, "m", "model"), "m"), _int(_field(model, "d", "model"), "d")
        w = polya_pmf(m, d)
        b = polya_bounds(m, d)
        return [_entry(r, exact_interval(r, w)) for r in (b["upper_tv"], b["upper_k_obretenov"])]
    if kind == "mg1":
        sys_ = _system(model)
        report = corollary_q1_bound(sys_)
        exact = None
        if sys_.service.kind == "exponential":
            # the equilibrium law is itself geometric here
            exact = Interval(0.0, 0.0)
        return [_entry(report, exact)]
    if kind == "busy-period":
        sys_ = _system(model)
        x = _x(model)
        report = busy_period_bound(sys_, x if x is not None else "auto")
        level = _int(model.get("state_level", 400), "state_level")
        w = hitting_time_pmf(busy_period_chain(sys_, level), 100_000)
        return [_entry(report, exact_interval(report, w))]
    if kind == "birth-death":
        spec = BirthDeathSpec(
            tuple(_num(v, "up") for v in _field(model, "up", "model")),
            tuple(_num(v, "down") for v in _field(model, "down", "model")),
        )
        x = _x(model)
        report = bd_extinction_bound(spec, x if x is not None else "auto", bd3=bool(model.get("bd3", False)))
        w = hitting_time_pmf(birth_death_chain(spec, report.ingredients["state_level"]), 200_000)
        return [_entry(report, exact_interval(report, w))]
    if kind == "hazard-order":
        if "w" in model:
            w, _ = parse_pmf(model["w"])
            p = _num(model["p"], "p") if "p" in model else float(w.probs[0])
            report = pmf_hazard_bound(w, p)
            return [_entry(report, exact_interval(report, w))]
        lam = _num(_field(model, "lambda", "model"), "lambda")
        t = parse_service(_field(model, "T", "model"), "T")
        p = _num(model["p"], "p") if "p" in model else t.laplace(lam)
        report = mixed_poisson_hazard_bound(lam, p, t)
        exact = None
        if t.kind in ("exponential", "erlang", "gamma"):
            w = mixed_poisson_gamma_pmf(t.params["shape"], t.params["rate"], lam)
            exact = exact_interval(report, w)
        return [_entry(report, exact)]
    if kind == "poisson-process":
        lam = _num(_field(model, "lambda", "model"), "lambda")
        t = parse_service(_field(model, "T", "model"), "T")
        b = poisson_process_bounds(lam, t)
        w = None
        if t.kind in ("exponential", "erlang", "gamma"):
            w = mixed_poisson_gamma_pmf(t.params["shape"], t.params["rate"], lam)
        return [_entry(r, None if w is None else exact_interval(r, w)) for r in (b["tv"], b["kolmogorov"])]
    raise InputError(f"unknown model kind {kind!r}")


# rendering -------------------------------------------------------------------


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True)


POLYA_COLUMNS = ["m", "d", "p", "d_tv", "upper_tv", "upper_k_obretenov", "lower_tv"]


def render_polya(rows, as_json: bool) -> str:
    table = [r.rendered() for r in polya_table(rows)]
    if as_json:
        return _json({"table": "polya", "rows": table})
    return _csv(POLYA_COLUMNS, [[r[c] for c in POLYA_COLUMNS] for r in table])


def render_erlang(grid, as_json: bool) -> str:
    cells = erlang_table(grid)
    rows = [{"k": str(c.k), "lambda": format(c.lam, "g"), "beta": format(c.beta, "g"), "U": c.rendered} for c in cells]
    if as_json:
        return _json({"table": "erlang", "rows": rows})
    return _csv(["k", "lambda", "beta", "U"], [[r["k"], r["lambda"], r["beta"], r["U"]] for r in rows])


BOUND_COLUMNS = ["provenance", "metric", "value", "valid", "reason", "exact_lo", "exact_hi", "approximant", "ingredients"]


def render_bound(kind: str, entries: list[dict], fmt: str) -> str:
    if fmt == "json":
        return _json({"kind": kind, "reports": entries})
    rows = []
    for e in entries:
        exact = e["exact"] or {}
        rows.append([
            e["provenance"], e["metric"], repr(e["value"]), str(e["valid"]).lower(), e["reason"] or "",
            repr(exact["lo"]) if exact else "", repr(exact["hi"]) if exact else "",
            json.dumps(e["approximant"], sort_keys=True), json.dumps(e["ingredients"], sort_keys=True, default=str),
        ])
    return _csv(BOUND_COLUMNS, rows)


def _rows_file(path: str | None):
    if path is None:
        return POLYA_ROWS
    data = _load_json(path)
    rows = data.get("rows") if isinstance(data, dict) else data
    if not isinstance(rows, list):
        raise InputError("rows file must hold a list of [m, d] pairs")
    out = []
    for i, row in enumerate(rows):
        if isinstance(row, dict):
            row = [_field(row, "m", f"rows[{i}]"), _field(row, "d", f"rows[{i}]")]
        if not isinstance(row, list) or len(row) != 2:
            raise InputError(f"rows[{i}] must be an [m, d] pair")
        m, d = _int(row[0], f"rows[{i}].m"), _int(row[1], f"rows[{i}].d")
        if m < 0 or d < 2:
            raise InputError(f"rows[{i}]: need m >= 0 and d >= 2")
        out.append((m, d))
    return out


def _grid_file(path: str | None):
    if path is None:
        return ERLANG_GRID
    data = _load_json(path)
    grid = {}
    for key in ("k", "lambda", "beta"):
        vals = _field(data, key, "grid")
        if not isinstance(vals, list) or not vals:
            raise InputError(f"grid.{key} must be a nonempty list")
        grid[key] = [_num(v, f"grid.{key}") for v in vals]
    grid["k"] = [_int(v, "grid.k") for v in grid["k"]]
    if any(k < 1 for k in grid["k"]) or any(v <= 0 for v in grid["lambda"] + grid["beta"]):
        raise InputError("grid values must be positive")
    return grid


# commands --------------------------------------------------------------------


def cmd_polya_table(args) -> int:
    print(render_polya(_rows_file(args.rows), args.json), end="" if not args.json else "\n")
    return EXIT_OK


def cmd_erlang_table(args) -> int:
    print(render_erlang(_grid_file(args.grid), args.json), end="" if not args.json else "\n")
    return EXIT_OK


def cmd_bound(args) -> int:
    model = _load_json(args.model)
    if not isinstance(model, dict):
        raise InputError("model file must hold a JSON object")
    entries = evaluate_model(model)
    fmt = "csv" if args.csv else "json"
    print(render_bound(model["kind"], entries, fmt), end="" if fmt == "csv" else "\n")
    return EXIT_OK if all(e["valid"] for e in entries) else EXIT_INVALID


def cmd_verify(args) -> int:
    checks = SUITES[args.suite](seed=args.seed)
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}  {c.detail}")
    failed = sum(not c.ok for c in checks)
    print(f"{args.suite}: {len(checks) - failed}/{len(checks)} passed")
    return EXIT_OK if failed == 0 else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geombound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("polya-table", help="urn occupancy table")
    p.add_argument("--rows", help="JSON file with [m, d] pairs")
    p.add_argument("--json", action="store_true", help="JSON instead of CSV")
    p.set_defaults(func=cmd_polya_table)

    p = sub.add_parser("erlang-table", help="Erlang busy-period U grid")
    p.add_argument("--grid", help="JSON file with k, lambda and beta lists")
    p.add_argument("--json", action="store_true", help="JSON instead of CSV")
    p.set_defaults(func=cmd_erlang_table)

    p = sub.add_parser("bound", help="evaluate the bounds for a model file")
    p.add_argument("--model", required=True, help="JSON model file with a 'kind' field")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--csv", action="store_true", help="CSV output")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
