"""Truncated summation of positive-ratio power series in log scale.

Terms are generated as (log|t_n|, sign t_n) pairs and rescaled by the
largest magnitude before summation, so series whose peak term exceeds the
double range (large Kummer arguments) are still summed correctly; the
result is reported both as a float and as ``log|value|``.

Stopping rule: once past the peak term, stop when ``|t_n| < rel_tol |S_n|``
(or ``|t_n| <= abs_floor``) holds for ``consecutive`` terms in a row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = ["SeriesControl", "SeriesSum", "TruncationError", "sum_series"]


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-15
    abs_floor: float = 1e-300
    max_terms: int = 10_000
    consecutive: int = 3
    compensated: bool = False

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_floor < 0:
            raise ValueError("abs_floor must be >= 0")
        if self.max_terms < 10:
            raise ValueError("max_terms must be >= 10")
        if self.consecutive < 1:
            raise ValueError("consecutive must be >= 1")


DEFAULT_CONTROL = SeriesControl()


class SeriesSum(NamedTuple):
    value: float
    terms: int
    tail: float
    log_abs: float


class TruncationError(ArithmeticError):
    """Series failed the stopping rule within ``max_terms``."""

    def __init__(self, message: str, tail_estimate: float, terms: int):
        super().__init__(f"{message} (terms={terms}, tail estimate={tail_estimate:.3e})")
        self.tail_estimate = tail_estimate
        self.terms = terms


def _stop_index(T: np.ndarray, P: np.ndarray, start: int, ctl: SeriesControl, floor: float):
    """Index of the last term to keep, or None when the rule is not met yet."""
    absT = np.abs(T)
    peak = start + int(np.argmax(absT[start:])) if absT.size > start else start
    small = (absT < ctl.rel_tol * np.abs(P)) | (absT <= floor)
    small[:peak] = False
    run = 0
    for i in range(peak, small.size):
        run = run + 1 if small[i] else 0
        if run >= ctl.consecutive:
            return i
    return None


def _tail(T: np.ndarray, i: int) -> float:
    last = abs(T[i])
    if last == 0.0:
        return 0.0
    prev = abs(T[i - 1]) if i > 0 else 0.0
    if prev == 0.0:
        return math.inf
    q = last / prev
    return last * q / (1.0 - q) if q < 1.0 else math.inf


def sum_series(
    make_terms: Callable[[int], tuple[np.ndarray, np.ndarray, np.ndarray]],
    starts: list[int],
    ctl: SeriesControl = DEFAULT_CONTROL,
    label: str = "series",
) -> tuple[list[SeriesSum], np.ndarray]:
    """Sum one or more series that share a scalar term sequence.

    ``make_terms(N)`` returns ``(logmag, sign, W)`` with ``logmag`` and
    ``sign`` of length N and a weight matrix ``W`` of shape (N, K); column k
    is the series ``sum_n sign_n exp(logmag_n) W[n, k]`` starting at index
    ``starts[k]``. Returns one ``SeriesSum`` per column and the scaled term
    matrix (useful for diagnostics).
    """
    N = 64
    while True:
        n_eff = min(N, ctl.max_terms)
        logmag, sign, W = make_terms(n_eff)
        finite = logmag[np.isfinite(logmag)]
        M = float(finite.max()) if finite.size else 0.0
        with np.errstate(under="ignore"):
            scaled = np.where(np.isfinite(logmag), sign * np.exp(logmag - M), 0.0)
            T = scaled[:, None] * W
            floor = ctl.abs_floor * math.exp(-M) if M < 700 else 0.0
        P = np.cumsum(T, axis=0)
        stops = [_stop_index(T[:, k], P[:, k], starts[k], ctl, floor) for k in range(W.shape[1])]
        if all(s is not None for s in stops):
            out = []
            for k, i in enumerate(stops):
                col = T[: i + 1, k]
                total = math.fsum(col) if ctl.compensated else float(np.sum(col))
                log_abs = (math.log(abs(total)) + M) if total != 0.0 else -math.inf
                with np.errstate(over="ignore"):
                    value = float(np.float64(total) * np.exp(np.float64(M)))
                tail = _tail(T[:, k], i) * math.exp(M) if M < 700 else math.inf
                out.append(SeriesSum(value, i + 1, tail, log_abs))
            return out, T
        if n_eff >= ctl.max_terms:
            worst = max(abs(T[-1, k]) for k in range(W.shape[1])) * math.exp(min(M, 700))
            raise TruncationError(f"{label} did not converge", worst, n_eff)
        N *= 2
