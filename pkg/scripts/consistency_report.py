"""Cross-checks of the cumulant machinery on the bundled examples, printed as a table.

Each row compares independent routes to the same quantity: the Stirling-series
cumulants against the closed-form mean/variance and the classical mean series,
Bell-polynomial moments against the cumulant recursion, and the mean against a
Richardson-extrapolated slope of the Laplace transform at zero.

    python scripts/consistency_report.py
"""
from __future__ import annotations

import argparse

from fellerfpt.cumulants import moments_from_cumulants_recursive, standardized_shape
from fellerfpt.feller import (
    FellerParams,
    classify,
    fpt_cumulants,
    fpt_mean_variance_closed,
    fpt_moments,
    laplace_fpt,
    mean_fpt_series,
)
from fellerfpt.laguerre import build_approximant, check_conditions
from fellerfpt.tables import bundled_params, read_params_file


def laplace_slope(p: FellerParams) -> float:
    h = 1e-3 * p.tau
    d1 = (laplace_fpt(h, p) - laplace_fpt(-h, p)) / (2 * h)
    d2 = (laplace_fpt(h / 2, p) - laplace_fpt(-h / 2, p)) / h
    return -(4 * d2 - d1) / 3


def report(name: str, K: int) -> None:
    raw = read_params_file(name)
    p = FellerParams.from_mapping({k: float(raw[k]) for k in ("mu", "tau", "sigma", "c", "y0", "S")})
    cls = classify(p)
    c = fpt_cumulants(K, p)
    mean, var = fpt_mean_variance_closed(p)
    mb = fpt_moments(K, p).values
    mr = moments_from_cumulants_recursive(c).values
    approx = build_approximant(c, min(K, 5))
    cond = check_conditions(approx, c)
    skew, kurt = standardized_shape(c)

    rel = lambda a, b: abs(a - b) / abs(b)
    print(f"== {name}: s={p.s:.6g} A={p.A:.6g} B={p.B:.6g} boundary={cls.boundary} regime={cls.regime.value}")
    print("   cumulants  " + "  ".join(f"c{k}={c[k]:.10g}" for k in range(1, K + 1)))
    print(f"   skewness={skew:.4f} excess kurtosis={kurt:.4f}  series terms={c.terms_used}")
    print(f"   c1 vs closed form       {rel(c[1], mean):.1e}")
    print(f"   c2 vs closed form       {rel(c[2], var):.1e}")
    print(f"   c1 vs mean series       {rel(c[1], mean_fpt_series(p)):.1e}")
    print(f"   c1 vs Laplace slope     {rel(c[1], laplace_slope(p)):.1e}")
    print(f"   Bell vs recursion       {max(rel(a, b) for a, b in zip(mb, mr)):.1e}")
    print(f"   gamma reference alpha={approx.alpha:.4f} beta={approx.beta:.4f} "
          f"beta<2/E[T]: {cond.beta_bound_ok}  mode defined: {cond.mode_defined}")
    print("   normalised coefficients " + " ".join(f"{a:+.4f}" for a in cond.normalized))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--examples", nargs="*", default=bundled_params())
    ap.add_argument("--order", type=int, default=6)
    args = ap.parse_args()
    for name in args.examples:
        report(name, args.order)


if __name__ == "__main__":
    main()
