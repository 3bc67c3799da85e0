"""Command line interface: config handling, subcommands, CSV + JSON output.

Each subcommand writes a CSV table (to --out or stdout) and a JSON summary
(next to the CSV as <out>.summary.json, or to stderr when printing to
stdout).  The summary records the fully resolved parameters, seed, package
versions, and wall time, so any run can be reproduced from it alone.

Exit codes: 0 success, 1 domain error (out-of-range mathematics, size
caps), 2 usage error (bad flags, unknown config keys, unknown presets).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, algebra, chamber, codebook as codebook_mod, dmt, sim
from .errors import DmtError, DomainError, UsageError

DEFAULT_SEED = 1729

_SCHEMAS = {
    "dmt-curve": {"n": int, "m": int, "step": float, "seed": int, "out": str},
    "chamber-min": {"group": str, "n": int, "m": int, "s": str, "step": float,
                    "seed": int, "out": str},
    "codebook": {"preset": str, "rho_db": str, "r": float, "seed": int, "out": str},
    "count": {"preset": str, "a_list": str, "frobenius_cap": float, "seed": int,
              "out": str},
    "pep-check": {"draws": int, "seed": int, "out": str},
    "simulate": {"preset": str, "n": int, "m": int, "r": float, "frobenius_m": float,
                 "rho_db": str, "trials": int, "seed": int, "union_bound": bool,
                 "out": str},
}


def _load_config_file(path: str) -> dict:
    text = Path(path).read_bytes()
    if path.endswith(".toml"):
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode("utf-8"))
    if path.endswith(".json"):
        return json.loads(text.decode("utf-8"))
    raise UsageError(f"config file must end in .toml or .json: {path}")


def _resolve(subcommand: str, args: argparse.Namespace) -> dict:
    schema = _SCHEMAS[subcommand]
    resolved: dict = {}
    if getattr(args, "config", None):
        file_conf = _load_config_file(args.config)
        for key, value in file_conf.items():
            norm = key.replace("-", "_")
            if norm not in schema:
                raise UsageError(f"unknown config key {key!r} for {subcommand}")
            resolved[norm] = schema[norm](value) if not isinstance(value, bool) else value
    for key in schema:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
    resolved.setdefault("seed", DEFAULT_SEED)
    return resolved


def _float_list(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"could not parse {what} list {text!r}") from exc


def _require(resolved: dict, *keys: str):
    missing = [k for k in keys if resolved.get(k) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join('--' + k.replace('_', '-') for k in missing)}")


def _emit(resolved: dict, subcommand: str, header: list[str], rows: list[list],
          extra_summary: dict, started: float) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    csv_text = buf.getvalue()
    summary = {
        "subcommand": subcommand,
        "parameters": {k: v for k, v in resolved.items() if k != "out"},
        "seed": resolved.get("seed"),
        "versions": {
            "dmtcodes": __version__,
            "numpy": np.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
        "rows": len(rows),
        "wall_time_s": round(time.monotonic() - started, 6),
    }
    summary.update(extra_summary)
    out = resolved.get("out")
    if out:
        Path(out).write_text(csv_text, encoding="utf-8")
        Path(out + ".summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")


def _cmd_dmt_curve(args) -> int:
    started = time.monotonic()
    resolved = _resolve("dmt-curve", args)
    _require(resolved, "n", "m")
    n, m = resolved["n"], resolved["m"]
    step = resolved.get("step") or 0.1
    if step <= 0:
        raise UsageError("--step must be positive")
    curves = {
        "d_star": dmt.curve_d_star(n, m),
        "d1": dmt.curve_d1(n, m),
        "d2": dmt.curve_d2(n, m) if n % 2 == 0 else None,
    }
    r_end = max(c.r_max for c in curves.values() if c is not None)
    rs: list[float] = []
    for curve in curves.values():
        if curve is not None:
            rs.extend(r for r, _ in curve.breakpoints)
    i = 0
    while i * step <= r_end + 1e-12:
        r = i * step
        if all(abs(r - r0) > 1e-9 for r0 in rs):
            rs.append(min(r, r_end))
        i += 1
    rs = sorted(set(rs))
    rows = []
    for r in rs:
        row = [r]
        for tag, curve, group in (
            ("d_star", curves["d_star"], "SLN_C"),
            ("d1", curves["d1"], "SLN_R"),
            ("d2", curves["d2"], "SLN_H"),
        ):
            if curve is None or r > curve.r_max + 1e-12:
                row.extend([None, None])
            else:
                row.append(curve.value(r))
                row.append(int(dmt.remark_condition(group, m, r)))
        rows.append(row)
    summary = {
        "breakpoints": {
            tag: (list(map(list, curve.breakpoints)) if curve else None)
            for tag, curve in curves.items()
        }
    }
    _emit(resolved, "dmt-curve", ["r", "d_star", "cond_d_star", "d1", "cond_d1", "d2", "cond_d2"],
          rows, summary, started)
    return 0


def _cmd_chamber_min(args) -> int:
    started = time.monotonic()
    resolved = _resolve("chamber-min", args)
    _require(resolved, "group", "n", "m", "s")
    tag = chamber.normalize_group_tag(resolved["group"])
    n, m = resolved["n"], resolved["m"]
    rows = []
    for s in _float_list(resolved["s"], "s"):
        problem = chamber.ChamberProblem(chamber.GroupKind(tag, n), m, s)
        value, argmin = chamber.min_g_exact(problem)
        grid = chamber.min_g_grid(problem, resolved.get("step"))
        closed = dmt.d_bar(s, tag, n, m)
        rows.append([tag, n, m, s, value, grid.value, closed.value,
                     int(closed.condition_ok), argmin.describe()])
    _emit(resolved, "chamber-min",
          ["group", "n", "m", "s", "min_exact", "min_grid", "closed_form",
           "condition_held", "argmin_label"],
          rows, {}, started)
    return 0


def _cmd_codebook(args) -> int:
    started = time.monotonic()
    resolved = _resolve("codebook", args)
    _require(resolved, "preset", "rho_db", "r")
    rho_db = _float_list(resolved["rho_db"], "rho-db")
    if len(rho_db) != 1:
        raise UsageError("codebook needs exactly one --rho-db value")
    rho = 10.0 ** (rho_db[0] / 10.0)
    book = codebook_mod.build_code(resolved["preset"], rho, resolved["r"])
    k = algebra.get_basis(resolved["preset"]).basis_size
    rows = []
    for idx, (elem, mat) in enumerate(zip(book.raw_elements, book.matrices)):
        rows.append([idx, *elem.coords, mat.fro_norm, mat.abs_det])
    header = ["index"] + [f"c{t}" for t in range(k)] + ["fro_norm", "abs_det"]
    _emit(resolved, "codebook", header, rows,
          {"M": book.M, "rho": book.rho, "size": len(book)}, started)
    return 0


def _cmd_count(args) -> int:
    started = time.monotonic()
    resolved = _resolve("count", args)
    _require(resolved, "preset")
    thresholds = _float_list(resolved.get("a_list") or "2,5,10,20,50", "a")
    table = codebook_mod.count_dets(
        resolved["preset"], thresholds, frobenius_cap=resolved.get("frobenius_cap"))
    rows = []
    for i, a in enumerate(table.thresholds):
        rows.append([a, table.element_counts[i],
                     table.ideal_counts[i] if table.ideal_counts else None])
    _emit(resolved, "count", ["A", "element_count", "ideal_count"], rows, {}, started)
    return 0


def _cmd_pep_check(args) -> int:
    started = time.monotonic()
    resolved = _resolve("pep-check", args)
    draws = resolved.get("draws") or 10 ** 5
    seed = resolved["seed"]
    cases = [(1.0, 1), (1.0, 2), (5.0, 2)]
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for x_index in range(5):
        x = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2.0)
        for c, m_rx in cases:
            closed = sim.pep_average_closed(x, c, m_rx)
            mc, stderr = sim.pep_mc_estimate(x, c, m_rx, draws, seed + 1000 + x_index)
            z = abs(mc - closed) / stderr if stderr > 0 else 0.0
            worst = max(worst, z)
            rows.append([x_index, c, m_rx, mc, stderr, closed, z])
    _emit(resolved, "pep-check",
          ["x_index", "c", "m", "mc_estimate", "std_err", "closed_form", "abs_z"],
          rows, {"draws": draws, "worst_abs_z": worst}, started)
    return 0


def _cmd_simulate(args) -> int:
    started = time.monotonic()
    resolved = _resolve("simulate", args)
    _require(resolved, "preset", "m", "rho_db", "trials")
    preset = algebra.get_preset(resolved["preset"])
    rho_list = tuple(10.0 ** (db / 10.0) for db in _float_list(resolved["rho_db"], "rho-db"))
    config = sim.SimConfig(
        preset=resolved["preset"],
        n=resolved.get("n") or preset.degree_n,
        m=resolved["m"],
        rho_list=rho_list,
        trials=resolved["trials"],
        seed=resolved["seed"],
        r=resolved.get("r"),
        frobenius_radius=resolved.get("frobenius_m"),
        compute_union_bound=resolved.get("union_bound", True),
    )
    result = sim.estimate_pe(config)
    rows = []
    for pt in result.points:
        rows.append([pt.rho_db, pt.trials, pt.errors, pt.pe_hat, pt.ci_low,
                     pt.ci_high, pt.union_bound_mean])
    summary = {
        "slope": result.slope,
        "slope_se": result.slope_se,
        "slope_rhos": list(result.slope_rhos),
        "excluded_rhos": list(result.excluded_rhos),
    }
    sys.stderr.write(
        f"slope: {result.slope} (se {result.slope_se}) over {len(result.slope_rhos)} points\n")
    _emit(resolved, "simulate",
          ["rho_db", "trials", "errors", "pe_hat", "ci_low", "ci_high", "union_bound_mean"],
          rows, summary, started)
    return 0


_COMMANDS = {
    "dmt-curve": _cmd_dmt_curve,
    "chamber-min": _cmd_chamber_min,
    "codebook": _cmd_codebook,
    "count": _cmd_count,
    "pep-check": _cmd_pep_check,
    "simulate": _cmd_simulate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmtcodes", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, **flags):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="TOML or JSON config file; flags override it")
        for flag, (ftype, helptext) in flags.items():
            if ftype is bool:
                p.add_argument(f"--{flag}", dest=flag.replace("-", "_"),
                               action=argparse.BooleanOptionalAction, default=None,
                               help=helptext)
            else:
                p.add_argument(f"--{flag}", dest=flag.replace("-", "_"),
                               type=ftype, default=None, help=helptext)
        return p

    add("dmt-curve", n=(int, "transmit antennas"), m=(int, "receive antennas"),
        step=(float, "r grid spacing (default 0.1)"), seed=(int, "seed"),
        out=(str, "CSV output path"))
    add("chamber-min", group=(str, "slnc | slnr | slnh"), n=(int, "matrix size"),
        m=(int, "receive antennas"), s=(str, "comma list of gains"),
        step=(float, "grid oracle step (default u/200)"), seed=(int, "seed"),
        out=(str, "CSV output path"))
    add("codebook", preset=(str, "preset name"), **{"rho-db": (str, "SNR in dB")},
        r=(float, "multiplexing gain"), seed=(int, "seed"), out=(str, "CSV output path"))
    add("count", preset=(str, "preset name"),
        **{"a-list": (str, "comma list of determinant thresholds")},
        **{"frobenius-cap": (float, "explicit Frobenius search radius")},
        seed=(int, "seed"), out=(str, "CSV output path"))
    add("pep-check", draws=(int, "Monte Carlo draws (default 1e5)"),
        seed=(int, "seed"), out=(str, "CSV output path"))
    add("simulate", preset=(str, "preset name"), n=(int, "transmit antennas"),
        m=(int, "receive antennas"), r=(float, "multiplexing gain"),
        **{"frobenius-m": (float, "fixed codebook radius (instead of --r)")},
        **{"rho-db": (str, "comma list of SNRs in dB")},
        trials=(int, "Monte Carlo trials per SNR"), seed=(int, "seed"),
        **{"union-bound": (bool, "compute per-channel union bounds")},
        out=(str, "CSV output path"))
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.subcommand](args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return 1
    except DmtError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())
