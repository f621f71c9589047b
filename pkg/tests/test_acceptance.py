"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly with ``python tests/test_acceptance.py`` or through pytest;
the collected lines are repeated in the pytest terminal summary. Criteria that
cannot be met are still evaluated at their full tolerance and carry a strict
xfail marker, so they print FAIL and an unexpected pass breaks the run.
"""
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_genlaguerre

sys.path.insert(0, str(Path(__file__).parent))

from fellerfpt import EXAMPLES  # noqa: E402
from fellerfpt.combinatorics import StirlingTable, general_partition_poly  # noqa: E402
from fellerfpt.cumulants import (  # noqa: E402
    cumulants_from_moments,
    moments_from_cumulants_bell,
    moments_from_cumulants_recursive,
)
from fellerfpt.feller import (  # noqa: E402
    FellerParams,
    backward_difference_check,
    forward_difference_check,
    fpt_cumulants,
    fpt_mean_variance_closed,
    fpt_moments,
    h_vector,
    laplace_fpt,
    mean_fpt_series,
)
from fellerfpt.laguerre import build_approximant, build_pdf_table, laguerre, match_parameters  # noqa: E402
from fellerfpt.simulate import (  # noqa: E402
    SimConfig,
    compare,
    default_t_cut,
    empirical_pdf,
    sample_fpt,
    survival_slope,
)
from fellerfpt.tables import write_sample_csv  # noqa: E402
from oracles import general_partition_table, laguerre_table, mp_kummer_u_derivative  # noqa: E402

REFERENCE_SETS = ("example1", "example2", "example3")
SEED = 20240417  # fixed before any run; the seed shipped with the bundled example files


def _rel(a, b):
    return abs(a - b) / abs(b)


def _max_rel(a, b):
    return max(_rel(x, y) for x, y in zip(a, b))


def test_criterion_1_combinatorial_identities(acceptance_log):
    t0 = time.perf_counter()
    tab = StirlingTable()
    stirling_ok = True
    for n in range(1, 21):
        stirling_ok &= sum(tab.exact(n, j) for j in range(n + 1)) == math.factorial(n)
        stirling_ok &= tab.exact(n, 1) == math.factorial(n - 1)
        if n >= 2:
            stirling_ok &= tab.exact(n, 2) == math.factorial(n - 1) * sum(Fraction(1, i) for i in range(1, n))
    # 20 random points, converted exactly to rationals so both sides are evaluated
    # without rounding (a float relative error is ill-conditioned near polynomial roots)
    rng = np.random.default_rng(1)
    worst_g, worst_l, float_l = 0.0, 0.0, 0.0
    for _ in range(20):
        a = [Fraction(v) for v in rng.uniform(-2, 2, 5)]
        x = [Fraction(v) for v in rng.uniform(-2, 2, 5)]
        for k in range(1, 6):
            ref = general_partition_table(k, a, x)
            worst_g = max(worst_g, float(abs(general_partition_poly(k, a, x) - ref) / abs(ref)))
        alpha, t = Fraction(rng.uniform(-0.9, 3)), Fraction(rng.uniform(0, 10))
        for k in range(1, 6):
            ref = laguerre_table(k, alpha, t)
            worst_l = max(worst_l, float(abs(laguerre(k, alpha, t) - ref) / abs(ref)))
            float_l = max(float_l, abs(laguerre(k, float(alpha), float(t)) - float(ref)) / abs(float(ref)))
    elapsed = time.perf_counter() - t0
    ok = stirling_ok and worst_g < 1e-12 and worst_l < 1e-12 and elapsed < 1.0
    acceptance_log(1, ok, f"stirling={stirling_ok} partition_rel={worst_g:.1e} laguerre_rel={worst_l:.1e} "
                          f"(float evaluation: {float_l:.1e}) time={elapsed:.2f}s")
    assert ok


def test_criterion_2_moment_cumulant_round_trip(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(200):
        K = int(rng.integers(1, 9))
        c = list(rng.uniform(0.05, 2.0, K))
        mb = moments_from_cumulants_bell(c).values
        mr = moments_from_cumulants_recursive(c).values
        back = cumulants_from_moments(mr).values
        worst = max(worst, _max_rel(mb, mr), _max_rel(back, c))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 1.0
    acceptance_log(2, ok, f"max_rel={worst:.1e} time={elapsed:.2f}s")
    assert ok


def test_criterion_3_consistency_triangle(acceptance_log):
    t0 = time.perf_counter()
    worst = {"closed": 0.0, "moments": 0.0, "laplace": 0.0, "mean_series": 0.0}
    for name in REFERENCE_SETS:
        p = FellerParams(**EXAMPLES[name])
        c = fpt_cumulants(6, p)
        mean, var = fpt_mean_variance_closed(p)
        worst["closed"] = max(worst["closed"], _rel(c[1], mean), _rel(c[2], var))
        mb = fpt_moments(6, p).values
        mr = moments_from_cumulants_recursive(c).values
        worst["moments"] = max(worst["moments"], _max_rel(mb, mr))
        h = 1e-3 * p.tau
        d1 = (laplace_fpt(h, p) - laplace_fpt(-h, p)) / (2 * h)
        d2 = (laplace_fpt(h / 2, p) - laplace_fpt(-h / 2, p)) / h
        worst["laplace"] = max(worst["laplace"], _rel(-(4 * d2 - d1) / 3, c[1]))
        worst["mean_series"] = max(worst["mean_series"], _rel(mean_fpt_series(p), c[1]))
    elapsed = time.perf_counter() - t0
    ok = (worst["closed"] < 1e-10 and worst["moments"] < 1e-9 and worst["laplace"] < 1e-6
          and worst["mean_series"] < 1e-10 and elapsed < 5.0)
    detail = " ".join(f"{k}={v:.1e}" for k, v in worst.items())
    acceptance_log(3, ok, f"{detail} time={elapsed:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the forward-difference form of the identity is false; it holds for the backward difference, reported alongside")
def test_criterion_4_kummer_derivative_identity(acceptance_log):
    t0 = time.perf_counter()
    worst_h = 0.0
    for name in REFERENCE_SETS:
        s = FellerParams(**EXAMPLES[name]).s
        for y in (0.5, 2.0, 5.56):
            hs = h_vector(4, y, s)
            for k in range(1, 5):
                worst_h = max(worst_h, _rel(hs[k - 1].value, mp_kummer_u_derivative(k, s, y)))
    worst_fwd, worst_bwd = 0.0, 0.0
    for s, y in ((1.8, 4 / 3), (3.0, 2.0), (1.0, 0.5)):
        for n in range(1, 6):
            target = y**n / math.prod(s + i for i in range(n))
            worst_fwd = max(worst_fwd, _rel(forward_difference_check(n, s, y), target))
            worst_bwd = max(worst_bwd, _rel(backward_difference_check(n, s, y), target))
    elapsed = time.perf_counter() - t0
    ok = worst_h < 1e-6 and worst_fwd < 1e-9 and elapsed < 1.0
    acceptance_log(
        4, ok,
        f"h_vs_fd_rel={worst_h:.1e} forward_diff_rel={worst_fwd:.1e} "
        f"(backward_diff_rel={worst_bwd:.1e}) time={elapsed:.2f}s",
    )
    assert ok


def _approx_integral(approx, k):
    a, b = approx.alpha, approx.beta

    def smooth(t):
        poly = sum(A * eval_genlaguerre(j, a, b * t) for j, A in enumerate(approx.A))
        return t**k * b ** (a + 1) * math.exp(-b * t) * poly

    head, _ = integrate.quad(smooth, 0, 1, weight="alg", wvar=(a, 0), limit=200)
    tail, _ = integrate.quad(lambda t: t**a * smooth(t), 1, np.inf, limit=400, epsabs=1e-13, epsrel=1e-12)
    return head + tail


def test_criterion_5_approximant_structure(acceptance_log):
    t0 = time.perf_counter()
    worst_A, worst_mass, worst_mom = 0.0, 0.0, 0.0
    for name in REFERENCE_SETS:
        c = fpt_cumulants(5, FellerParams(**EXAMPLES[name]))
        approx = build_approximant(c, 5)
        m = moments_from_cumulants_recursive(c)
        worst_A = max(worst_A, abs(approx.A[1]) / approx.A[0], abs(approx.A[2]) / approx.A[0])
        worst_mass = max(worst_mass, abs(_approx_integral(approx, 0) - 1.0))
        for k in range(1, 6):
            worst_mom = max(worst_mom, _rel(_approx_integral(approx, k), m[k]))
    elapsed = time.perf_counter() - t0
    ok = worst_A < 1e-12 and worst_mass < 1e-8 and worst_mom < 1e-6 and elapsed < 5.0
    acceptance_log(5, ok, f"A1A2/A0={worst_A:.1e} mass_err={worst_mass:.1e} moment_rel={worst_mom:.1e} time={elapsed:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the sigma=2, mu=4 variant gives alpha=0.123; the quoted 0.07 is not reproduced by moment matching on any stated parameter set")
def test_criterion_6_reported_alpha_values(acceptance_log):
    t0 = time.perf_counter()
    a3 = match_parameters(fpt_cumulants(2, FellerParams(**EXAMPLES["example3"]))).alpha
    a2 = match_parameters(fpt_cumulants(2, FellerParams(**EXAMPLES["example2-sigma2"]))).alpha
    elapsed = time.perf_counter() - t0
    ok3 = abs(a3 - (-0.34)) <= 0.01
    ok2 = abs(a2 - 0.07) <= 0.01
    ok = ok3 and ok2 and elapsed < 5.0
    acceptance_log(6, ok, f"alpha_ex3={a3:.4f} (target -0.34, {'ok' if ok3 else 'off'}) "
                          f"alpha_sigma2={a2:.4f} (target 0.07, {'ok' if ok2 else 'off'}) time={elapsed:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def example1_run():
    p = FellerParams(**EXAMPLES["example1"])
    cfg = SimConfig(dt=1e-2, n_paths=10_000, seed=SEED)
    t0 = time.perf_counter()
    c = fpt_cumulants(5, p)
    approx = build_approximant(c, 5)
    sample = sample_fpt(p, cfg)
    grid = np.linspace(0.02, 8.0, 400)
    table = build_pdf_table(approx, grid=grid)
    emp = empirical_pdf(sample, cfg, grid=grid)
    report = compare(table, emp, default_t_cut(cfg.dt))
    return dict(p=p, c=c, sample=sample, report=report, elapsed=time.perf_counter() - t0)


@pytest.mark.xfail(strict=True, reason="grid-crossing bias of the dt=1e-2 scheme and the n=5 truncation error near the origin each exceed the 0.05 / 3 SE thresholds")
def test_criterion_7_example1_end_to_end(acceptance_log, example1_run):
    run = example1_run
    summ = run["sample"].summary()
    z = (summ["mean"] - run["c"][1]) / summ["std_error"]
    sup_ok = run["report"].sup_error < 0.05
    mean_ok = abs(z) < 3
    ok = sup_ok and mean_ok and run["elapsed"] < 60
    at = run["report"].grid[np.argmax(np.where(run["report"].grid >= run["report"].t_cut, run["report"].abs_error, -1))]
    acceptance_log(
        7, ok,
        f"sup_error={run['report'].sup_error:.3f} at t={at:.2f} (t_cut={run['report'].t_cut}) "
        f"mean={summ['mean']:.4f} c1={run['c'][1]:.4f} z={z:.1f} time={run['elapsed']:.1f}s",
    )
    assert ok


def test_criterion_8_tail_law(acceptance_log, example1_run):
    slope = survival_slope(example1_run["sample"])
    target = -1.0 / example1_run["c"][1]
    rel = abs(slope - target) / abs(target)
    ok = rel < 0.2
    acceptance_log(8, ok, f"slope={slope:.4f} target={target:.4f} rel_dev={rel:.3f}")
    assert ok


def test_criterion_9_reproducibility(acceptance_log, tmp_path):
    p = FellerParams(**EXAMPLES["example1"])
    t0 = time.perf_counter()
    blobs = []
    for workers in (1, 2, 8):
        sample = sample_fpt(p, SimConfig(dt=1e-2, n_paths=10_000, seed=SEED, workers=workers))
        path = tmp_path / f"sample_{workers}.csv"
        write_sample_csv(sample, path)
        blobs.append(path.read_bytes())
    elapsed = time.perf_counter() - t0
    ok = blobs[0] == blobs[1] == blobs[2] and elapsed < 60
    acceptance_log(9, ok, f"identical={blobs[0] == blobs[1] == blobs[2]} bytes={len(blobs[0])} time={elapsed:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
