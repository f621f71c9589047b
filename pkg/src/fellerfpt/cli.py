"""Command line front end: ``fellerfpt {cumulants,approx,simulate,compare}``.

Exit codes: 0 success, 2 usage/validation, 3 numerical failure, 4 I/O.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .cumulants import moments_from_cumulants_recursive, standardized_shape
from .feller import FellerParams, ParameterError, classify, fpt_cumulants, fpt_moments
from .laguerre import DEFAULT_DEGREE, build_approximant, build_pdf_table, check_conditions
from .series import SeriesControl
from .simulate import SimConfig, compare, default_t_cut, empirical_pdf, sample_fpt
from .tables import fmt, read_params_file, read_pdf, write_pdf_csv, write_pdf_json, write_sample_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

MODEL_KEYS = ("mu", "tau", "sigma", "c", "y0", "S")
FILE_KEYS = set(MODEL_KEYS) | {
    "dt", "n_paths", "t_max", "seed", "estimator", "bandwidth", "workers",
    "order", "grid_min", "grid_max", "grid_points", "t_cut",
}


class UsageError(ValueError):
    pass


def _model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--params", help="key=value parameter file, or a bundled example name")
    g.add_argument("--mu", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--sigma", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--y0", type=float)
    g.add_argument("--threshold", type=float, dest="S", help="threshold S")
    g.add_argument("--rel-tol", type=float, default=1e-15, help="series relative term tolerance")
    g.add_argument("--max-terms", type=int, default=10_000)


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--grid-points", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fellerfpt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cumulants", help="closed-form FPT cumulants and moments")
    _model_flags(p)
    p.add_argument("--order", type=int, help="number of cumulants K (default 5)")
    _output_flags(p)

    p = sub.add_parser("approx", help="Laguerre-Gamma density approximant")
    _model_flags(p)
    p.add_argument("--order", help="degree n, or comma-separated degrees (default 5)")
    _grid_flags(p)
    p.add_argument("--clip", action="store_true", help="clip negative density values to 0 (no renormalisation)")
    _output_flags(p)

    p = sub.add_parser("simulate", help="Milstein Monte Carlo first-passage times")
    _model_flags(p)
    p.add_argument("--paths", type=int, dest="n_paths")
    p.add_argument("--dt", type=float)
    p.add_argument("--tmax", type=float, dest="t_max")
    p.add_argument("--seed", type=int)
    p.add_argument("--estimator", choices=("kde", "histogram"))
    p.add_argument("--bandwidth", help="'silverman' or a fixed value")
    p.add_argument("--workers", type=int)
    _grid_flags(p)
    _output_flags(p)

    p = sub.add_parser("compare", help="error between an approximant table and an empirical density")
    p.add_argument("approx_table")
    p.add_argument("empirical_table")
    p.add_argument("--t-cut", type=float, default=None, help="sup error taken over t >= t_cut (default 2*dt)")
    _output_flags(p)
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    """Merge parameter file values with command-line flags (flags win)."""
    cfg: dict = {}
    if getattr(args, "params", None):
        raw = read_params_file(args.params)
        unknown = sorted(set(raw) - FILE_KEYS)
        if unknown:
            raise UsageError(f"unknown parameter file keys: {', '.join(unknown)}")
        cfg.update(raw)
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "params", "out", "format"):
            cfg[key] = val
    return cfg


def _feller(cfg: dict) -> FellerParams:
    missing = [k for k in MODEL_KEYS if k not in cfg]
    if missing:
        flags = ", ".join("--threshold" if k == "S" else f"--{k}" for k in missing)
        raise UsageError(f"missing model parameters: {flags}")
    return FellerParams.from_mapping({k: float(cfg[k]) for k in MODEL_KEYS})


def _control(cfg: dict) -> SeriesControl:
    return SeriesControl(rel_tol=float(cfg.get("rel_tol", 1e-15)), max_terms=int(cfg.get("max_terms", 10_000)))


def _jsonable(cfg: dict) -> dict:
    return {k: (v if isinstance(v, (int, float, str, bool)) or v is None else str(v)) for k, v in sorted(cfg.items())}


def _write_manifest(out: Path, command: str, cfg: dict, outputs: list[str], extra: dict | None = None) -> str:
    name = f"{command}_manifest.json"
    doc = {
        "subcommand": command,
        "config": _jsonable(cfg),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    if extra:
        doc.update(extra)
    (out / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return name


def _write_table(table, out: Path, stem: str, fmt_: str, manifest: str) -> str:
    if fmt_ == "json":
        name = f"{stem}.json"
        write_pdf_json(table, out / name, manifest)
    else:
        name = f"{stem}.csv"
        write_pdf_csv(table, out / name, manifest)
    return name


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n")


def cmd_cumulants(args, cfg: dict, out: Path) -> int:
    p = _feller(cfg)
    K = int(cfg.get("order", 5))
    if K < 1:
        raise UsageError("--order must be >= 1")
    ctl = _control(cfg)
    manifest = "cumulants_manifest.json"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        c = fpt_cumulants(K, p, ctl)
        m_rec = moments_from_cumulants_recursive(c)
        m_bell = fpt_moments(K, p, ctl)
    shape = standardized_shape(c) if K >= 4 else (math.nan, math.nan)
    cls = classify(p)
    summary = {
        "skewness": shape[0],
        "excess_kurtosis": shape[1],
        "s": p.s,
        "boundary": cls.boundary,
        "regime": cls.regime.value,
        "terms_used": c.terms_used,
        "tail_estimate": c.tail_estimate,
        "diagnostics": c.diagnostics,
        "warnings": [str(w.message) for w in caught],
        "manifest": manifest,
    }
    rows = [
        {"k": k, "cumulant": c[k], "moment": m_rec.values[k - 1], "moment_bell": m_bell.values[k - 1],
         "rel_difference": c.diagnostics["relative_difference"][k - 1]}
        for k in range(1, K + 1)
    ]
    if args.format == "json":
        name = "cumulants.json"
        _write_json(out / name, {"rows": rows, **summary})
    else:
        name = "cumulants.csv"
        lines = [f"# manifest: {json.dumps(manifest)}", "k,cumulant,moment,moment_bell,rel_difference"]
        lines += [f"{r['k']},{fmt(r['cumulant'])},{fmt(r['moment'])},{fmt(r['moment_bell'])},{fmt(r['rel_difference'])}" for r in rows]
        (out / name).write_text("\n".join(lines) + "\n")
        _write_json(out / "cumulants_summary.json", summary)
    outputs = [name] if args.format == "json" else [name, "cumulants_summary.json"]
    _write_manifest(out, "cumulants", cfg, outputs)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"c1={fmt(c[1])}" + (f" c2={fmt(c[2])}" if K >= 2 else ""))
    return EXIT_OK


def _degrees(cfg: dict) -> list[int]:
    raw = str(cfg.get("order", DEFAULT_DEGREE))
    try:
        degrees = [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--order must be an integer or comma-separated integers, got {raw!r}")
    if not degrees or any(n < 2 for n in degrees):
        raise UsageError("approximant degree must be >= 2")
    return degrees


def cmd_approx(args, cfg: dict, out: Path) -> int:
    p = _feller(cfg)
    degrees = _degrees(cfg)
    ctl = _control(cfg)
    c = fpt_cumulants(max(degrees), p, ctl)
    c1 = c[1]
    t_min = float(cfg.get("grid_min", 0.01 * c1))
    t_max = float(cfg.get("grid_max", 8.0 * c1))
    points = int(cfg.get("grid_points", 400))
    if not (t_min > 0 and t_max > t_min and points >= 2):
        raise UsageError(f"invalid grid: grid-min={t_min}, grid-max={t_max}, grid-points={points}")
    manifest = "approx_manifest.json"
    outputs = []
    for n in degrees:
        approx = build_approximant(c, n)
        table = build_pdf_table(approx, t_min, t_max, points, clip=bool(cfg.get("clip", False)), params=p.as_dict())
        outputs.append(_write_table(table, out, f"approx_n{n}", args.format, manifest))
        report = check_conditions(approx, c)
        coeffs = {
            "approximant": approx.as_dict(),
            "conditions": {**report.__dict__, "normalized": list(report.normalized)},
            "cumulants": list(c.values[:n]),
            "negative_count": table.negative_count,
            "manifest": manifest,
        }
        name = f"approx_n{n}_coeffs.json"
        _write_json(out / name, coeffs)
        outputs.append(name)
        print(f"n={n} alpha={fmt(approx.alpha)} beta={fmt(approx.beta)} negatives={table.negative_count}")
    _write_manifest(out, "approx", cfg, outputs)
    return EXIT_OK


def _sim_config(cfg: dict) -> SimConfig:
    bw = cfg.get("bandwidth", "silverman")
    if bw != "silverman":
        try:
            bw = float(bw)
        except ValueError:
            raise UsageError(f"bandwidth must be 'silverman' or a number, got {bw!r}")
    return SimConfig(
        dt=float(cfg.get("dt", 1e-2)),
        n_paths=int(cfg.get("n_paths", 10_000)),
        t_max=float(cfg["t_max"]) if "t_max" in cfg else None,
        seed=int(cfg.get("seed", 0)),
        estimator=str(cfg.get("estimator", "kde")),
        bandwidth=bw,
        workers=int(cfg.get("workers", 1)),
    )


def cmd_simulate(args, cfg: dict, out: Path) -> int:
    p = _feller(cfg)
    try:
        sim = _sim_config(cfg)
    except ValueError as exc:
        raise UsageError(str(exc))
    manifest = "simulate_manifest.json"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sample = sample_fpt(p, sim)
    grid = None
    if "grid_min" in cfg and "grid_max" in cfg:
        import numpy as np

        grid = np.linspace(float(cfg["grid_min"]), float(cfg["grid_max"]), int(cfg.get("grid_points", 400)))
    outputs = []
    if args.format == "json":
        name = "sample.json"
        _write_json(out / name, {"times": sample.times.tolist(), "censored": sample.censored.astype(int).tolist(),
                                 "t_max": sample.t_max, "dt": sample.dt, "reflections": sample.reflections,
                                 "manifest": manifest})
    else:
        name = "sample.csv"
        write_sample_csv(sample, out / name, manifest)
    outputs.append(name)
    summary = {**sample.summary(), "t_max": sample.t_max, "warnings": list(sample.warnings), "manifest": manifest}
    if sample.n_paths - sample.censored_count >= 100:
        emp = empirical_pdf(sample, sim, grid=grid)
        outputs.append(_write_table(emp.table, out, "density", args.format, manifest))
        summary["bandwidth"] = emp.bandwidth
        summary["estimator"] = emp.estimator
    else:
        summary["warnings"].append("fewer than 100 uncensored samples: no density estimate written")
    _write_json(out / "summary.json", summary)
    outputs.append("summary.json")
    _write_manifest(out, "simulate", cfg, outputs)
    for msg in summary["warnings"]:
        print(f"warning: {msg}", file=sys.stderr)
    for w in caught:
        if not any(str(w.message) == m for m in summary["warnings"]):
            print(f"warning: {w.message}", file=sys.stderr)
    print(f"paths={sample.n_paths} censored={sample.censored_count} mean={fmt(summary['mean'])}")
    return EXIT_OK


def cmd_compare(args, cfg: dict, out: Path) -> int:
    for path in (args.approx_table, args.empirical_table):
        if not Path(path).exists():
            raise FileNotFoundError(f"input file not found: {path}")
    approx = read_pdf(args.approx_table)
    emp = read_pdf(args.empirical_table)
    if args.t_cut is not None:
        t_cut = args.t_cut
    else:
        dt = cfg.get("dt", emp.params.get("dt"))
        t_cut = default_t_cut(float(dt)) if dt is not None else 0.0
    report = compare(approx, emp, t_cut)
    manifest = "compare_manifest.json"
    if args.format == "json":
        name = "errors.json"
        _write_json(out / name, {"t": report.grid.tolist(), "abs_error": report.abs_error.tolist(), "manifest": manifest})
    else:
        name = "errors.csv"
        lines = [f"# manifest: {json.dumps(manifest)}", "t,abs_error"]
        lines += [f"{fmt(t)},{fmt(e)}" for t, e in zip(report.grid, report.abs_error)]
        (out / name).write_text("\n".join(lines) + "\n")
    _write_json(out / "compare_summary.json", {**report.summary(), "manifest": manifest})
    _write_manifest(out, "compare", cfg, [name, "compare_summary.json"])
    print(f"sup_error={fmt(report.sup_error)} l1_error={fmt(report.l1_error)}")
    return EXIT_OK


COMMANDS = {"cumulants": cmd_cumulants, "approx": cmd_approx, "simulate": cmd_simulate, "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # invalid model parameters are a usage problem; anything else is numerical
        if isinstance(exc, ParameterError):
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
