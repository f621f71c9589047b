"""Laguerre-Gamma polynomial approximation of a density on (0, inf).

    g_hat(t) = beta (beta t)^alpha exp(-beta t) sum_{k<=n} A_k L_k^(alpha)(beta t)

with A_k = sum_j C(k, j) (-beta)^j m_j / Gamma(alpha + j + 1). The gamma
reference (alpha, beta) is fixed by matching the first two moments, which
makes A_1 = A_2 = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .cumulants import CumulantVector, MomentVector, moments_from_cumulants_recursive

__all__ = [
    "DEFAULT_DEGREE",
    "GammaReference",
    "LaguerreGammaApprox",
    "ConditionReport",
    "PdfTable",
    "laguerre",
    "laguerre_all",
    "gamma_density",
    "match_parameters",
    "coefficients",
    "coefficients_direct",
    "build_approximant",
    "evaluate",
    "normalized_coefficients",
    "check_conditions",
    "build_pdf_table",
]

# A_3..A_5 carry skewness, kurtosis and hyper-skewness; higher terms are dropped.
DEFAULT_DEGREE = 5


def laguerre_all(n: int, alpha: float, t) -> np.ndarray:
    """L_0..L_n^(alpha)(t) stacked along axis 0, by the three-term recurrence.

    Object inputs (Fraction, sympy) are kept exact; anything else runs in float.
    """
    if not alpha > -1:
        raise ValueError(f"alpha must be > -1, got {alpha}")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    t = np.asarray(t)
    if t.dtype != object:
        t = t.astype(float)
    out = np.empty((n + 1,) + t.shape, dtype=t.dtype)
    out[0] = 1
    if n >= 1:
        out[1] = 1 + alpha - t
    for k in range(1, n):
        out[k + 1] = ((2 * k + 1 + alpha - t) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def laguerre(k: int, alpha: float, t):
    res = laguerre_all(k, alpha, t)[k]
    return float(res) if isinstance(res, np.floating) else res


def gamma_density(t, alpha: float, beta: float):
    """beta^(alpha+1) t^alpha exp(-beta t) / Gamma(alpha+1) for t > 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        logv = (alpha + 1) * math.log(beta) + alpha * np.log(t) - beta * t - gammaln(alpha + 1)
    out = np.exp(logv)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GammaReference:
    alpha: float
    beta: float
    beta_bound_ok: bool  # beta < 2 / E[T], i.e. 2 c2 > c1^2
    alpha_in_range: bool  # -1 < alpha < 1; equivalent to the line above
    mode_defined: bool  # alpha >= 1


def match_parameters(c: CumulantVector | Sequence[float]) -> GammaReference:
    """Method-of-moments gamma reference: beta = c1/c2, alpha = c1^2/c2 - 1."""
    vals = c.values if isinstance(c, CumulantVector) else tuple(c)
    if len(vals) < 2:
        raise ValueError("match_parameters needs c1 and c2")
    c1, c2 = float(vals[0]), float(vals[1])
    if not c2 > 0:
        raise ValueError(f"moment matching needs c2 > 0, got c2={c2}")
    if not c1 > 0:
        raise ValueError(f"moment matching needs c1 > 0, got c1={c1}")
    beta = c1 / c2
    alpha = c1 * c1 / c2 - 1.0
    return GammaReference(
        alpha=alpha,
        beta=beta,
        beta_bound_ok=bool(2.0 * c2 > c1 * c1),
        alpha_in_range=bool(-1.0 < alpha < 1.0),
        mode_defined=bool(alpha >= 1.0),
    )


def _moments_list(m: MomentVector | Sequence[float], n: int) -> list[float]:
    vals = m.values if isinstance(m, MomentVector) else tuple(float(v) for v in m)
    if len(vals) < n:
        raise ValueError(f"degree {n} needs {n} moments, got {len(vals)}")
    return [1.0, *vals[:n]]


def coefficients(m: MomentVector | Sequence[float], alpha: float, beta: float, n: int) -> list[float]:
    """A_0..A_n by running the Laguerre recurrence on polynomials in y = beta*m.

    Each L_k(y) is carried as its power-basis coefficients; the moment
    functional then maps y^j to beta^j m_j.
    """
    if not alpha > -1 or not beta > 0:
        raise ValueError("need alpha > -1 and beta > 0")
    mm = _moments_list(m, n)
    scaled = np.array([beta**j * mm[j] for j in range(n + 1)])
    polys = [np.zeros(n + 1) for _ in range(n + 1)]
    polys[0][0] = 1.0
    if n >= 1:
        polys[1][0] = 1.0 + alpha
        polys[1][1] = -1.0
    for k in range(1, n):
        nxt = (2 * k + 1 + alpha) * polys[k] - (k + alpha) * polys[k - 1]
        nxt[1:] -= polys[k][:-1]
        polys[k + 1] = nxt / (k + 1)
    out = []
    for k in range(n + 1):
        # A_k(y) = k! / Gamma(alpha + 1 + k) L_k(y)
        norm = math.exp(gammaln(k + 1) - gammaln(alpha + 1 + k))
        out.append(norm * math.fsum(polys[k][: k + 1] * scaled[: k + 1]))
    return out


def coefficients_direct(m: MomentVector | Sequence[float], alpha: float, beta: float, n: int) -> list[float]:
    mm = _moments_list(m, n)
    out = []
    for k in range(n + 1):
        terms = [math.comb(k, j) * (-beta) ** j * mm[j] * math.exp(-gammaln(alpha + j + 1)) for j in range(k + 1)]
        out.append(math.fsum(terms))
    return out


@dataclass(frozen=True)
class LaguerreGammaApprox:
    alpha: float
    beta: float
    n: int
    A: tuple[float, ...]
    beta_bound_ok: bool = True
    alpha_in_range: bool = True
    mode_defined: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        return evaluate(self, t)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "n": self.n,
            "A": list(self.A),
            "beta_bound_ok": self.beta_bound_ok,
            "alpha_in_range": self.alpha_in_range,
            "mode_defined": self.mode_defined,
        }


def build_approximant(c: CumulantVector, n: int = DEFAULT_DEGREE, moments: MomentVector | None = None) -> LaguerreGammaApprox:
    """Moment-matched approximant of degree n from the cumulants of T."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    ref = match_parameters(c)
    if moments is None:
        if c.order < n:
            raise ValueError(f"degree {n} needs {n} cumulants, got {c.order}")
        moments = moments_from_cumulants_recursive(c.values[: max(n, 2)])
    A = coefficients(moments, ref.alpha, ref.beta, n)
    return LaguerreGammaApprox(
        alpha=ref.alpha,
        beta=ref.beta,
        n=n,
        A=tuple(A),
        beta_bound_ok=ref.beta_bound_ok,
        alpha_in_range=ref.alpha_in_range,
        mode_defined=ref.mode_defined,
    )


def evaluate(approx: LaguerreGammaApprox, t):
    """g_hat(t) for t > 0; signed (the truncated series may dip below zero)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("the approximant is only defined for t > 0")
    x = approx.beta * t
    L = laguerre_all(approx.n, approx.alpha, x)
    poly = np.tensordot(np.asarray(approx.A), L, axes=1)
    weight = np.exp(math.log(approx.beta) + approx.alpha * np.log(x) - x)
    out = weight * poly
    return float(out) if out.ndim == 0 else out


def normalized_coefficients(approx: LaguerreGammaApprox) -> np.ndarray:
    """a_k = E[Q_k(beta T)] = (-1)^k A_k sqrt(Gamma(alpha+1) Gamma(alpha+1+k) / k!)."""
    k = np.arange(approx.n + 1)
    scale = np.exp(0.5 * (gammaln(approx.alpha + 1) + gammaln(approx.alpha + 1 + k) - gammaln(k + 1)))
    return (-1.0) ** k * np.asarray(approx.A) * scale


@dataclass(frozen=True)
class ConditionReport:
    beta_bound_ok: bool
    alpha_in_range: bool
    mode_defined: bool
    min_delta: float  # g(t) = o(t^delta) needed with delta above this
    normalized: tuple[float, ...]
    decay_slope: float  # slope of log|a_k| against log k over k >= 3; nan if undetermined
    l2_tail: float  # sum of a_k^2 for k >= 3 (L2 mass beyond the matched terms)


def check_conditions(approx: LaguerreGammaApprox, c: CumulantVector | Sequence[float]) -> ConditionReport:
    """Advisory sufficient-condition report; never blocks evaluation."""
    vals = c.values if isinstance(c, CumulantVector) else tuple(c)
    c1, c2 = vals[0], vals[1]
    a = normalized_coefficients(approx)
    ks = np.arange(a.size)
    sel = (ks >= 3) & (np.abs(a) > 0)
    slope = float("nan")
    if sel.sum() >= 2:
        slope = float(np.polyfit(np.log(ks[sel]), np.log(np.abs(a[sel])), 1)[0])
    return ConditionReport(
        beta_bound_ok=bool(2 * c2 > c1 * c1),
        alpha_in_range=bool(-1 < approx.alpha < 1),
        mode_defined=bool(approx.alpha >= 1),
        min_delta=0.5 * (c1 * c1 / c2 - 1.0),
        normalized=tuple(float(x) for x in a),
        decay_slope=slope,
        l2_tail=float(np.sum(a[3:] ** 2)),
    )


@dataclass(frozen=True)
class PdfTable:
    """Density values on a strictly increasing time grid."""

    grid: np.ndarray
    values: np.ndarray
    source: str = "approximant"
    params: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        flags = tuple(self.flags) if self.flags else tuple("negative" if v < 0 else "" for v in values)
        if len(flags) != grid.size:
            raise ValueError("one flag per grid point required")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "flags", flags)

    @property
    def negative_count(self) -> int:
        return sum(1 for f in self.flags if "negative" in f)

    def __len__(self) -> int:
        return self.grid.size


def build_pdf_table(
    approx: LaguerreGammaApprox,
    t_min: float | None = None,
    t_max: float | None = None,
    points: int = 400,
    grid: Sequence[float] | None = None,
    clip: bool = False,
    params: dict | None = None,
) -> PdfTable:
    """Sample the approximant on a grid kept away from t = 0.

    With ``clip=True`` negative values are set to zero (no renormalisation)
    and flagged ``negative,clipped``.
    """
    if grid is None:
        if t_min is None or t_max is None:
            raise ValueError("give either an explicit grid or t_min and t_max")
        if not (t_min > 0 and t_max > t_min and points >= 2):
            raise ValueError(f"invalid grid spec t_min={t_min}, t_max={t_max}, points={points}")
        grid = np.linspace(t_min, t_max, points)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing, positive, with at least two points")
    values = np.asarray(evaluate(approx, grid), dtype=float)
    neg = values < 0
    if clip:
        flags = tuple("negative,clipped" if b else "" for b in neg)
        values = np.where(neg, 0.0, values)
    else:
        flags = tuple("negative" if b else "" for b in neg)
    meta = {"approximant": approx.as_dict(), "clipped": clip, "negative_count": int(neg.sum())}
    if params:
        meta["parameters"] = dict(params)
    return PdfTable(grid, values, source="approximant", params=meta, flags=flags)

