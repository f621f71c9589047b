"""Data behind the four density figures: approximants of degree 2..5 against a simulated density.

For each bundled example this writes ``<name>_density.csv`` (columns t, g_n2..g_n5,
g_sim, err_n2..err_n5) and ``<name>_summary.json`` into the output directory.
With ``--plot`` (needs matplotlib) a PNG per example is drawn as well.

    python scripts/reproduce_figures.py --out figures
    python scripts/reproduce_figures.py --examples example1 --paths 2000 --plot
"""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np

from fellerfpt.feller import FellerParams, fpt_cumulants
from fellerfpt.laguerre import build_approximant, build_pdf_table
from fellerfpt.simulate import SimConfig, compare, default_t_cut, empirical_pdf, sample_fpt
from fellerfpt.tables import bundled_params, fmt, read_params_file

DEGREES = (2, 3, 4, 5)
FIGURES = {"example1": 1, "example2": 2, "example2-sigma2": 3, "example3": 4}


def run_example(name: str, paths: int | None, points: int, workers: int) -> tuple[dict, dict]:
    raw = read_params_file(name)
    p = FellerParams.from_mapping({k: float(raw[k]) for k in ("mu", "tau", "sigma", "c", "y0", "S")})
    cfg = SimConfig(
        dt=float(raw["dt"]),
        n_paths=paths or int(raw["n_paths"]),
        seed=int(raw["seed"]),
        estimator=raw.get("estimator", "kde"),
        workers=workers,
    )
    grid = np.linspace(float(raw["grid_min"]), float(raw["grid_max"]), points)
    c = fpt_cumulants(max(DEGREES), p)

    t0 = time.perf_counter()
    sample = sample_fpt(p, cfg)
    emp = empirical_pdf(sample, cfg, grid=grid)
    sim_seconds = time.perf_counter() - t0

    columns = {"t": grid}
    errors = {}
    for n in DEGREES:
        table = build_pdf_table(build_approximant(c, n), grid=grid)
        rep = compare(table, emp, default_t_cut(cfg.dt))
        columns[f"g_n{n}"] = table.values
        errors[n] = rep
    columns["g_sim"] = emp.values
    for n in DEGREES:
        columns[f"err_n{n}"] = errors[n].abs_error

    approx5 = build_approximant(c, 5)
    stats = sample.summary()
    summary = {
        "figure": FIGURES.get(name),
        "example": name,
        "params": p.as_dict(),
        "dt": cfg.dt,
        "n_paths": cfg.n_paths,
        "cumulants": list(c.values),
        "alpha": approx5.alpha,
        "beta": approx5.beta,
        "sim_mean": stats["mean"],
        "sim_std_error": stats["std_error"],
        "censored": stats["censored_count"],
        "t_cut": default_t_cut(cfg.dt),
        "sup_error": {n: errors[n].sup_error for n in DEGREES},
        "l1_error": {n: errors[n].l1_error for n in DEGREES},
        "simulation_seconds": sim_seconds,
    }
    return columns, summary


def write_csv(columns: dict, path: Path) -> None:
    names = list(columns)
    rows = zip(*(columns[k] for k in names))
    lines = [",".join(names)] + [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def plot(columns: dict, summary: dict, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    t = columns["t"]
    for n in DEGREES:
        top.plot(t, columns[f"g_n{n}"], lw=1, label=f"n={n}")
        bottom.plot(t, columns[f"err_n{n}"], lw=1, label=f"n={n}")
    top.plot(t, columns["g_sim"], color="red", lw=2, label="simulated")
    top.set_ylabel("density")
    top.legend()
    bottom.set_ylabel("absolute error")
    bottom.set_xlabel("t")
    top.set_title(f"{summary['example']}  (alpha={summary['alpha']:.3f}, beta={summary['beta']:.3f})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--examples", nargs="*", default=bundled_params())
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--paths", type=int, help="override the number of simulated paths")
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--plot", action="store_true", help="also draw PNGs (requires matplotlib)")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.examples:
        columns, summary = run_example(name, args.paths, args.points, args.workers)
        write_csv(columns, args.out / f"{name}_density.csv")
        (args.out / f"{name}_summary.json").write_text(json.dumps(summary, indent=1) + "\n")
        if args.plot:
            plot(columns, summary, args.out / f"{name}.png")
        sups = " ".join(f"n={n}:{summary['sup_error'][n]:.3f}" for n in DEGREES)
        print(f"{name}: alpha={summary['alpha']:.4f} mean_sim={summary['sim_mean']:.4f} "
              f"c1={summary['cumulants'][0]:.4f} sup_error {sups}")


if __name__ == "__main__":
    main()
