"""First-passage-time cumulants and moments of the Feller (CIR) diffusion.

Model: dY = (-tau Y + mu) dt + sigma sqrt(Y - c) dW, started at y0 < S, with
T the first time Y reaches S. Its Laplace transform is a ratio of Kummer
functions in the scaled variable ``2 tau (w - c) / sigma^2``; expanding the
log of each Kummer factor in the parameter gives every cumulant of T as a
difference of logarithmic polynomials of the series ``h_j``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np
from scipy.special import gammaln

from .combinatorics import bell_complete_all, harmonic_numbers, log_partition_all, stirling_weights
from .cumulants import CumulantVector, MomentVector, moments_from_cumulants_recursive
from .series import DEFAULT_CONTROL, SeriesControl, SeriesSum, TruncationError, _stop_index, sum_series

__all__ = [
    "FellerParams",
    "ParameterError",
    "CancellationWarning",
    "Regime",
    "StationaryLaw",
    "Classification",
    "classify",
    "kummer_1f1",
    "laplace_fpt",
    "h_series",
    "h_vector",
    "c_star",
    "c_star_vector",
    "fpt_cumulants",
    "fpt_mean_variance_closed",
    "mean_fpt_series",
    "fpt_moments",
    "fpt_moments_recursive",
    "forward_difference_check",
    "backward_difference_check",
]

CANCELLATION_THRESHOLD = 1e-10
EQUALITY_RTOL = 1e-12


class ParameterError(ValueError):
    """A FellerParams invariant is violated; ``invariant`` names it."""

    def __init__(self, invariant: str, detail: str = ""):
        msg = f"invalid parameters: requires {invariant}"
        super().__init__(f"{msg} ({detail})" if detail else msg)
        self.invariant = invariant


class CancellationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class FellerParams:
    mu: float
    tau: float
    sigma: float
    c: float
    y0: float
    S: float

    def __post_init__(self):
        for name in ("mu", "tau", "sigma", "c", "y0", "S"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"finite {name}", f"{name}={v}")
            object.__setattr__(self, name, v)
        if not self.tau > 0:
            raise ParameterError("tau > 0", f"tau={self.tau}")
        if not self.sigma > 0:
            raise ParameterError("sigma > 0", f"sigma={self.sigma}")
        if not self.c <= 0:
            raise ParameterError("c <= 0", f"c={self.c}")
        if not self.c < self.y0:
            raise ParameterError("c < y0", f"c={self.c}, y0={self.y0}")
        if not self.y0 < self.S:
            raise ParameterError("y0 < S", f"y0={self.y0}, S={self.S}")
        if not self.s > 0:
            raise ParameterError("s = 2(mu - c tau)/sigma^2 > 0", f"s={self.s}")

    @classmethod
    def from_mapping(cls, d: Mapping) -> "FellerParams":
        d = dict(d)
        if "threshold" in d and "S" not in d:
            d["S"] = d.pop("threshold")
        missing = [k for k in ("mu", "tau", "sigma", "c", "y0", "S") if k not in d]
        if missing:
            raise ParameterError("all of mu, tau, sigma, c, y0, S", f"missing {', '.join(missing)}")
        return cls(**{k: float(d[k]) for k in ("mu", "tau", "sigma", "c", "y0", "S")})

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def s(self) -> float:
        return 2.0 * (self.mu - self.c * self.tau) / self.sigma**2

    def scaled(self, w: float) -> float:
        """Kummer argument 2 tau (w - c) / sigma^2."""
        return 2.0 * self.tau * (w - self.c) / self.sigma**2

    @property
    def A(self) -> float:
        return self.scaled(self.y0)

    @property
    def B(self) -> float:
        return self.scaled(self.S)

    @property
    def entrance_boundary(self) -> bool:
        return self.s >= 1.0 - EQUALITY_RTOL

    @property
    def asymptotic_mean(self) -> float:
        return self.mu / self.tau


class Regime(str, enum.Enum):
    SUPRATHRESHOLD = "suprathreshold"
    SUBTHRESHOLD = "subthreshold"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class StationaryLaw:
    """Shifted gamma law of Y at equilibrium (no threshold)."""

    shape: float
    scale: float
    location: float
    asymptotic_mean: float

    @property
    def mean(self) -> float:
        return self.location + self.shape * self.scale


@dataclass(frozen=True)
class Classification:
    boundary: str
    regime: Regime
    stationary: StationaryLaw


def classify(p: FellerParams, rtol: float = EQUALITY_RTOL) -> Classification:
    boundary = "entrance" if p.entrance_boundary else "non-entrance"
    gap = p.asymptotic_mean - p.S
    if abs(gap) <= rtol * max(1.0, abs(p.S)):
        regime = Regime.THRESHOLD
    elif gap > 0:
        regime = Regime.SUPRATHRESHOLD
    else:
        regime = Regime.SUBTHRESHOLD
    law = StationaryLaw(shape=p.s, scale=p.sigma**2 / (2.0 * p.tau), location=p.c, asymptotic_mean=p.asymptotic_mean)
    return Classification(boundary, regime, law)


# --- Kummer function and the FPT Laplace transform ------------------------


def _log_abs(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


def kummer_1f1(a: float, b: float, y: float, ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesSum:
    """1F1(a; b; y) by direct summation of its defining series."""
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"kummer_1f1: b={b} is a nonpositive integer")
    if y == 0:
        return SeriesSum(1.0, 1, 0.0, 0.0)

    def make(N):
        n = np.arange(1, N, dtype=float)
        steps = _log_abs(a + n - 1) - _log_abs(b + n - 1) + math.log(abs(y)) - np.log(n)
        signs = np.sign(a + n - 1) * np.sign(b + n - 1) * math.copysign(1.0, y)
        logmag = np.concatenate(([0.0], np.cumsum(steps)))
        sign = np.concatenate(([1.0], np.cumprod(signs)))
        return logmag, sign, np.ones((N, 1))

    (res,), _ = sum_series(make, [0], ctl, label=f"1F1({a}; {b}; {y})")
    return res


def laplace_fpt(z: float, p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Laplace transform E[exp(-z T)] as a ratio of Kummer functions.

    Defined for z >= 0; negative z is accepted while the denominator has no
    zero on [z, 0] (beyond its first zero E[exp(|z| T)] is infinite).
    """
    num = kummer_1f1(z / p.tau, p.s, p.A, ctl)
    den = kummer_1f1(z / p.tau, p.s, p.B, ctl)
    ok = num.value > 0 and den.value > 0
    if ok and z < 0:
        ok = all(kummer_1f1(w / p.tau, p.s, p.B, ctl).value > 0 for w in np.linspace(z, 0.0, 17)[1:-1])
    if not ok:
        raise ValueError(f"z={z} lies outside the region where the transform is defined")
    return math.exp(num.log_abs - den.log_abs)


# --- parameter-derivative series h_j and the c* builders -------------------


def h_vector(K: int, y: float, s: float, ctl: SeriesControl = DEFAULT_CONTROL) -> list[SeriesSum]:
    """h_1(y)..h_K(y), the u-derivatives at u = 0 of 1F1(u; s; y)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if y < 0:
        raise ValueError(f"h-series needs y >= 0, got {y}")
    if not s > 0:
        raise ValueError(f"h-series needs s > 0, got {s}")
    if y == 0:
        return [SeriesSum(0.0, 0, 0.0, -math.inf) for _ in range(K)]
    logy = math.log(y)

    def make(N):
        n = np.arange(1, N, dtype=float)
        logmag = np.concatenate(([-math.inf], np.cumsum(logy - np.log(s + n - 1))))
        return logmag, np.ones(N), stirling_weights(N, K)

    out, _ = sum_series(make, list(range(1, K + 1)), ctl, label=f"h-series(y={y}, s={s})")
    return out


def h_series(j: int, y: float, s: float, ctl: SeriesControl = DEFAULT_CONTROL) -> SeriesSum:
    if j < 1:
        raise ValueError("j must be >= 1")
    return h_vector(j, y, s, ctl)[j - 1]


def c_star_vector(K: int, w: float, p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL):
    """(c*_1(w)..c*_K(w), terms used, largest tail estimate)."""
    if w < p.c:
        raise ValueError(f"c_star needs w > c, got w={w}, c={p.c}")
    hs = h_vector(K, p.scaled(w), p.s, ctl)
    vals = np.array(log_partition_all([h.value for h in hs]))
    terms = max(h.terms for h in hs)
    tail = max(h.tail for h in hs)
    return vals, terms, tail


def c_star(k: int, w: float, p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    return float(c_star_vector(k, w, p, ctl)[0][k - 1])


# --- cumulants and moments of T --------------------------------------------


def fpt_cumulants(K: int, p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> CumulantVector:
    """c_k(T) = (-1/tau)^k [c*_k(y0) - c*_k(S)], k = 1..K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    ca, ta, taila = c_star_vector(K, p.y0, p, ctl)
    cb, tb, tailb = c_star_vector(K, p.S, p, ctl)
    diff = ca - cb
    if not np.all(np.isfinite(diff)):
        raise ArithmeticError("non-finite cumulant: series values overflowed")
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(diff) / np.abs(cb)
    cancelled = [k + 1 for k in range(K) if rel[k] < CANCELLATION_THRESHOLD]
    if cancelled:
        warnings.warn(
            f"relative cancellation below {CANCELLATION_THRESHOLD:g} in cumulant orders {cancelled}",
            CancellationWarning,
            stacklevel=2,
        )
    k = np.arange(1, K + 1)
    values = (-1.0 / p.tau) ** k * diff
    diagnostics = {
        "c1_positive": bool(values[0] > 0),
        "c2_positive": bool(K < 2 or values[1] > 0),
        "relative_difference": rel.tolist(),
        "cancelled_orders": cancelled,
        "terms_y0": ta,
        "terms_S": tb,
    }
    return CumulantVector(tuple(values), terms_used=max(ta, tb), tail_estimate=max(taila, tailb), diagnostics=diagnostics)


def _log_rising(s: float, N: int) -> np.ndarray:
    """log <s>_n for n = 0..N-1."""
    return np.concatenate(([0.0], np.cumsum(np.log(s + np.arange(N - 1)))))


def fpt_mean_variance_closed(p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> tuple[float, float]:
    """Mean and variance of T from the explicit coefficient series.

    Uses a_{1,n} = 1/(n <s>_n) and a_{2,n} = 2 H_{n-1} a_{1,n} - (a_1 * a_1)_n
    (discrete convolution) instead of the Stirling-number route.
    """
    A, B, s = p.A, p.B, p.s
    N = 64
    while True:
        n_eff = min(N, ctl.max_terms)
        n = np.arange(n_eff, dtype=float)
        lr = _log_rising(s, n_eff)
        with np.errstate(divide="ignore"):
            log_n = np.log(n)
        if np.max(n[1:] * math.log(B) - log_n[1:] - lr[1:]) > 700:
            raise OverflowError("closed-form moment series overflows for this threshold")
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(n > 0, np.exp(n * math.log(B) - log_n - lr), 0.0)
            v = np.where(n > 0, np.exp(n * math.log(A) - log_n - lr), 0.0) if A > 0 else np.zeros(n_eff)
        H = harmonic_numbers(n_eff)
        Hm1 = np.concatenate(([0.0], H[: n_eff - 1]))
        t1 = u - v
        t2 = 2.0 * Hm1 * (v - u) - (np.convolve(v, v)[:n_eff] - np.convolve(u, u)[:n_eff])
        i1 = _stop_index(t1, np.cumsum(t1), 1, ctl, ctl.abs_floor)
        i2 = _stop_index(t2, np.cumsum(t2), 2, ctl, ctl.abs_floor)
        if i1 is not None and i2 is not None:
            sum1 = math.fsum(t1[: i1 + 1])
            sum2 = math.fsum(t2[: i2 + 1])
            return sum1 / p.tau, sum2 / p.tau**2
        if n_eff >= ctl.max_terms:
            raise TruncationError("closed-form mean/variance series did not converge", float(abs(t1[-1])), n_eff)
        N *= 2


def mean_fpt_series(p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Classical mean-FPT series written with gamma functions.

    E[T] = (S - y0)/(mu - tau c)
         + (1/tau) sum_{n>=2} s^n Gamma(s) / (n Gamma(s+n)) [(S-c)^n - (y0-c)^n] / (mu/tau - c)^n
    """
    s = p.s
    lvl = p.mu / p.tau - p.c
    rS = math.log((p.S - p.c) / lvl)
    ry = math.log((p.y0 - p.c) / lvl)
    N = 64
    while True:
        n_eff = min(N, ctl.max_terms)
        n = np.arange(2, n_eff + 2, dtype=float)
        base = n * math.log(s) + gammaln(s) - gammaln(s + n) - np.log(n)
        terms = np.exp(base + n * rS) - np.exp(base + n * ry)
        i = _stop_index(terms, np.cumsum(terms), 0, ctl, ctl.abs_floor)
        if i is not None:
            return (p.S - p.y0) / (p.mu - p.tau * p.c) + math.fsum(terms[: i + 1]) / p.tau
        if n_eff >= ctl.max_terms:
            raise TruncationError("mean-FPT series did not converge", float(abs(terms[-1])), n_eff)
        N *= 2


def fpt_moments(K: int, p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> MomentVector:
    """Raw moments of T via the binomial property of complete Bell polynomials.

    E[T^k] = (-1)^k / tau^k sum_i C(k, i) Y_{k-i}[c*(y0)] Y_i[-c*(S)]
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    ca, _, _ = c_star_vector(K, p.y0, p, ctl)
    cb, _, _ = c_star_vector(K, p.S, p, ctl)
    Ya = bell_complete_all(list(ca))
    Yb = bell_complete_all(list(-cb))
    out = []
    for k in range(1, K + 1):
        acc = math.fsum(math.comb(k, i) * Ya[k - i] * Yb[i] for i in range(k + 1))
        out.append((-1.0 / p.tau) ** k * acc)
    return MomentVector(tuple(out))


def fpt_moments_recursive(K: int, p: FellerParams, ctl: SeriesControl = DEFAULT_CONTROL) -> MomentVector:
    return moments_from_cumulants_recursive(fpt_cumulants(K, p, ctl))


def forward_difference_check(n: int, s: float, y: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """n-th forward difference (unit step) of u -> 1F1(u; s; y) at u = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    vals = [(-1) ** (n - i) * math.comb(n, i) * kummer_1f1(float(i), s, y, ctl).value for i in range(n + 1)]
    return math.fsum(vals)


def backward_difference_check(n: int, s: float, y: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """n-th backward difference (unit step) of u -> 1F1(u; s; y) at u = 0.

    The points u = 0, -1, ..., -n make the Kummer series terminate, and the
    result is exactly y^n / <s>_n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    vals = [(-1) ** i * math.comb(n, i) * kummer_1f1(float(-i), s, y, ctl).value for i in range(n + 1)]
    return math.fsum(vals)
