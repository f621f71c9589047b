"""Milstein Monte Carlo for Feller first-passage times.

Each path draws its Brownian increments from its own Philox stream keyed by
(seed, path index), so a path's first-passage time does not depend on how
paths are batched or spread over workers.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .feller import FellerParams
from .laguerre import PdfTable

__all__ = [
    "SimConfig",
    "FptSample",
    "EmpiricalPdf",
    "ComparisonReport",
    "CensoringWarning",
    "milstein_step",
    "sample_fpt",
    "path_increments",
    "empirical_pdf",
    "silverman_bandwidth",
    "compare",
    "default_t_cut",
    "survival_slope",
]

BLOCK = 256  # increments drawn per path per refill
CENSOR_WARN_FRACTION = 0.5


class CensoringWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-2
    n_paths: int = 10_000
    t_max: float | None = None  # None: 20 * E[T], filled in by sample_fpt
    seed: int = 0
    estimator: str = "kde"  # "kde" (gaussian) or "histogram"
    bandwidth: str | float = "silverman"
    workers: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("SimConfig requires dt > 0")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError("SimConfig requires n_paths >= 1")
        if self.t_max is not None and not self.t_max > self.dt:
            raise ValueError("SimConfig requires t_max > dt")
        if self.estimator not in ("kde", "histogram"):
            raise ValueError(f"unknown estimator {self.estimator!r}; use 'kde' or 'histogram'")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "silverman":
                raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not float(self.bandwidth) > 0:
            raise ValueError("fixed bandwidth must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class FptSample:
    times: np.ndarray  # per path, in path order; censored entries hold t_max
    censored: np.ndarray  # boolean mask
    t_max: float
    dt: float
    reflections: int = 0
    warnings: tuple[str, ...] = ()

    @property
    def n_paths(self) -> int:
        return self.times.size

    @property
    def censored_count(self) -> int:
        return int(self.censored.sum())

    @property
    def censored_fraction(self) -> float:
        return self.censored_count / self.n_paths

    @property
    def uncensored(self) -> np.ndarray:
        return self.times[~self.censored]

    def summary(self) -> dict:
        t = self.uncensored
        n = t.size
        mean = float(t.mean()) if n else math.nan
        var = float(t.var(ddof=1)) if n > 1 else math.nan
        skew = float(np.mean((t - mean) ** 3) / t.std() ** 3) if n > 2 and t.std() > 0 else math.nan
        return {
            "n_paths": self.n_paths,
            "censored_count": self.censored_count,
            "reflections": self.reflections,
            "mean": mean,
            "variance": var,
            "skewness": skew,
            "std_error": math.sqrt(var / n) if n > 1 else math.nan,
        }


def milstein_step(y, p: FellerParams, dt: float, dW):
    """One Milstein step; states falling below c are reflected back into (c, inf)."""
    y = np.asarray(y, dtype=float)
    nxt = _raw_step(y, p, dt, np.asarray(dW, dtype=float))
    out = np.where(nxt < p.c, 2.0 * p.c - nxt, nxt)
    return float(out) if out.ndim == 0 else out


def _raw_step(y, p: FellerParams, dt: float, dW):
    root = np.sqrt(np.maximum(y - p.c, 0.0))
    return y + (-p.tau * y + p.mu) * dt + p.sigma * root * dW + 0.25 * p.sigma**2 * (dW * dW - dt)


def _generator(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, path]))


def path_increments(seed: int, path: int, n_steps: int, dt: float) -> np.ndarray:
    """Brownian increments of one path, exactly as used by the simulator."""
    gen = _generator(seed, path)
    n_blocks = -(-n_steps // BLOCK)
    draws = np.concatenate([gen.standard_normal(BLOCK) for _ in range(n_blocks)]) if n_blocks else np.zeros(0)
    return draws[:n_steps] * math.sqrt(dt)


def _simulate_chunk(args):
    p, dt, t_max, seed, start, stop = args
    n = stop - start
    n_steps = int(math.ceil(t_max / dt - 1e-9))
    sqdt = math.sqrt(dt)
    y = np.full(n, p.y0)
    times = np.full(n, t_max)
    censored = np.ones(n, dtype=bool)
    gens = [_generator(seed, i) for i in range(start, stop)]
    alive = np.arange(n)
    reflections = 0
    step = 0
    while alive.size and step < n_steps:
        width = min(BLOCK, n_steps - step)
        dW = np.stack([gens[i].standard_normal(BLOCK) for i in alive])[:, :width] * sqdt
        yy = y[alive]
        hit_at = np.full(alive.size, -1)
        active = np.ones(alive.size, dtype=bool)
        for b in range(width):
            nxt = _raw_step(yy, p, dt, dW[:, b])
            low = nxt < p.c
            reflections += int(np.count_nonzero(low & active))
            nxt = np.where(low, 2.0 * p.c - nxt, nxt)
            crossed = active & (nxt >= p.S)
            hit_at[crossed] = step + b + 1
            active &= ~crossed
            yy = np.where(active, nxt, yy)
            if not active.any():
                break
        done = hit_at >= 0
        idx = alive[done]
        times[idx] = hit_at[done] * dt
        censored[idx] = False
        y[alive] = yy
        alive = alive[~done]
        step += width
    return times, censored, reflections


def sample_fpt(p: FellerParams, cfg: SimConfig, t_max: float | None = None) -> FptSample:
    """Simulate cfg.n_paths first-passage times; crossing time = first grid point with Y >= S."""
    horizon = t_max if t_max is not None else cfg.t_max
    if horizon is None:
        from .feller import fpt_cumulants

        horizon = 20.0 * fpt_cumulants(1, p)[1]
    if not horizon > cfg.dt:
        raise ValueError("simulation horizon must exceed dt")
    n = int(cfg.n_paths)
    workers = max(1, min(cfg.workers, n))
    bounds = np.linspace(0, n, workers + 1).astype(int)
    jobs = [(p, cfg.dt, horizon, cfg.seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers == 1:
        results = [_simulate_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_simulate_chunk, jobs))
    times = np.concatenate([r[0] for r in results])
    censored = np.concatenate([r[1] for r in results])
    reflections = sum(r[2] for r in results)
    notes = []
    frac = censored.mean()
    if frac > CENSOR_WARN_FRACTION:
        msg = f"{frac:.1%} of paths censored at t_max={horizon:g}"
        notes.append(msg)
        warnings.warn(msg, CensoringWarning, stacklevel=2)
    if reflections:
        notes.append(f"{reflections} steps reflected at c; consider a smaller dt")
    return FptSample(times, censored, float(horizon), cfg.dt, reflections, tuple(notes))


# --- density estimation and comparison -------------------------------------


@dataclass(frozen=True)
class EmpiricalPdf:
    table: PdfTable
    estimator: str
    bandwidth: float  # kernel bandwidth, or bin width for histograms
    censored_fraction: float
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return self.table.grid

    @property
    def values(self) -> np.ndarray:
        return self.table.values


def silverman_bandwidth(x: np.ndarray) -> float:
    """0.9 min(sd, IQR/1.34) n^(-1/5)."""
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return 0.9 * spread * x.size ** (-0.2)


def empirical_pdf(sample: FptSample, cfg: SimConfig, grid=None, points: int = 400) -> EmpiricalPdf:
    """Histogram (Freedman-Diaconis bins) or Gaussian KDE of the uncensored times.

    Both are scaled so the estimate carries mass 1 - censored fraction.
    """
    t = np.sort(sample.uncensored)
    if t.size < 100:
        raise ValueError(f"empirical_pdf needs >= 100 uncensored samples, got {t.size}")
    if t[-1] - t[0] <= 0:
        raise ValueError("empirical_pdf needs a nondegenerate sample")
    mass = 1.0 - sample.censored_fraction
    if cfg.estimator == "histogram":
        edges = np.histogram_bin_edges(t, bins="fd")
        counts, edges = np.histogram(t, bins=edges)
        width = np.diff(edges)
        dens = counts / (sample.n_paths * width)
        centers = 0.5 * (edges[1:] + edges[:-1])
        table = PdfTable(centers, dens, source="simulation", params={"estimator": "histogram", "dt": sample.dt, "edges": edges.tolist()})
        return EmpiricalPdf(table, "histogram", float(width[0]), sample.censored_fraction)
    h = silverman_bandwidth(t) if cfg.bandwidth == "silverman" else float(cfg.bandwidth)
    if grid is None:
        grid = np.linspace(max(t[0] - 3 * h, cfg.dt), t[-1] + 3 * h, points)
    grid = np.asarray(grid, dtype=float)
    dens = np.empty(grid.size)
    norm = mass / (t.size * h * math.sqrt(2 * math.pi))
    for lo in range(0, grid.size, 64):
        z = (grid[lo : lo + 64, None] - t[None, :]) / h
        dens[lo : lo + 64] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    table = PdfTable(grid, dens, source="simulation", params={"estimator": "kde", "dt": sample.dt, "bandwidth": h})
    return EmpiricalPdf(table, "kde", h, sample.censored_fraction)


@dataclass(frozen=True)
class ComparisonReport:
    grid: np.ndarray
    abs_error: np.ndarray
    sup_error: float  # over grid points with t >= t_cut
    l1_error: float
    t_cut: float

    def summary(self) -> dict:
        return {"sup_error": self.sup_error, "l1_error": self.l1_error, "t_cut": self.t_cut, "points": int(self.grid.size)}


def default_t_cut(dt: float) -> float:
    """Near-zero cut for sup errors: two simulation steps."""
    return 2.0 * dt


def compare(approx_table: PdfTable, emp: EmpiricalPdf | PdfTable, t_cut: float = 0.0) -> ComparisonReport:
    """Pointwise |g_hat - g_emp| on the approximant grid restricted to the common support."""
    other = emp.table if isinstance(emp, EmpiricalPdf) else emp
    lo = max(approx_table.grid[0], other.grid[0])
    hi = min(approx_table.grid[-1], other.grid[-1])
    if not hi > lo:
        raise ValueError("tables have disjoint supports")
    sel = (approx_table.grid >= lo) & (approx_table.grid <= hi)
    grid = approx_table.grid[sel]
    if grid.size < 2:
        raise ValueError("fewer than two common grid points")
    err = np.abs(approx_table.values[sel] - np.interp(grid, other.grid, other.values))
    beyond = grid >= t_cut
    sup = float(err[beyond].max()) if beyond.any() else math.nan
    l1 = float(np.trapezoid(err, grid))
    return ComparisonReport(grid, err, sup, l1, float(t_cut))


def survival_slope(sample: FptSample, upper: float = 1e-1, lower: float = 1e-2) -> float:
    """Least-squares slope of log empirical survival where it lies in [lower, upper]."""
    t = np.sort(sample.times)
    n = t.size
    surv = 1.0 - np.arange(1, n + 1) / n
    sel = (surv <= upper) & (surv >= lower) & ~np.isin(t, [sample.t_max])
    if sel.sum() < 10:
        raise ValueError("too few points in the survival window")
    return float(np.polyfit(t[sel], np.log(surv[sel]), 1)[0])
