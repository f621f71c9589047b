"""Combinatorial building blocks for the cumulant algebra.

Rising factorials, harmonic numbers, unsigned Stirling numbers of the first
kind, and the exponential Bell / partition polynomial families.

The polynomial routines use plain Python arithmetic on their inputs, so they
accept floats as well as symbolic objects (e.g. ``sympy`` symbols).
"""
from __future__ import annotations

import math
import threading
from typing import Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "StirlingTable",
    "stirling_first_unsigned",
    "stirling_weights",
    "rising_factorial",
    "log_rising_factorial",
    "harmonic",
    "harmonic_numbers",
    "bell_partial",
    "bell_partial_table",
    "bell_complete",
    "bell_complete_all",
    "log_partition_poly",
    "log_partition_all",
    "general_partition_poly",
]

# 64-bit integers overflow at [21, 1]; floats at roughly 170!.
EXACT_INT_HORIZON = 20
FLOAT_HORIZON = 170


class StirlingTable:
    """Lazily grown triangle of unsigned Stirling numbers of the first kind.

    Entries are built with ``[n+1, j] = [n, j-1] + n [n, j]`` as exact Python
    integers and handed out as floats. Growth happens under a lock; once a row
    exists it is never modified, so concurrent readers are safe.

    The normalised columns ``w_j(n) = j! [n, j] / n!`` used by the Kummer
    parameter-derivative series are kept in a separate float cache. They stay
    bounded by 1 and never overflow, so that cache can grow far beyond
    ``max_n``.
    """

    def __init__(self, max_n: int = FLOAT_HORIZON):
        if max_n < 1:
            raise ValueError("max_n must be a positive integer")
        self.max_n = max_n
        self._rows: list[list[int]] = [[1]]
        self._lock = threading.Lock()
        self._weights = np.zeros((0, 0))

    def _grow(self, n: int) -> None:
        with self._lock:
            rows = self._rows
            while len(rows) <= n:
                m = len(rows) - 1
                prev = rows[m]
                new = [0] * (m + 2)
                for j in range(1, m + 2):
                    left = prev[j - 1]
                    right = prev[j] if j <= m else 0
                    new[j] = left + m * right
                rows.append(new)

    def exact(self, n: int, j: int) -> int:
        self._check(n, j)
        if n >= len(self._rows):
            self._grow(n)
        return self._rows[n][j]

    def __call__(self, n: int, j: int) -> float:
        return float(self.exact(n, j))

    def row(self, n: int) -> np.ndarray:
        self._check(n, 0)
        if n >= len(self._rows):
            self._grow(n)
        return np.array([float(v) for v in self._rows[n]])

    def _check(self, n: int, j: int) -> None:
        if n < 0 or j < 0:
            raise ValueError(f"Stirling indices must be nonnegative, got ({n}, {j})")
        if j > n:
            raise ValueError(f"Stirling index j={j} exceeds n={n}")
        if n > self.max_n:
            raise ValueError(f"n={n} exceeds table horizon max_n={self.max_n}")

    def weights(self, n_rows: int, k: int) -> np.ndarray:
        """Array ``W[n, j-1] = j! [n, j] / n!`` for ``0 <= n < n_rows``, ``1 <= j <= k``."""
        W = self._weights
        if W.shape[0] >= n_rows and W.shape[1] >= k:
            return W[:n_rows, :k]
        with self._lock:
            W = self._weights
            rows = max(n_rows, W.shape[0])
            cols = max(k, W.shape[1])
            out = np.zeros((rows, cols))
            # w_j(n+1) = (j w_{j-1}(n) + n w_j(n)) / (n+1), w_0(n) = [n == 0]
            jj = np.arange(1, cols + 1, dtype=float)
            prev0 = 1.0
            prev = np.zeros(cols)
            for n in range(rows - 1):
                shifted = np.empty(cols)
                shifted[0] = prev0
                shifted[1:] = prev[:-1]
                cur = (jj * shifted + n * prev) / (n + 1)
                out[n + 1] = cur
                prev, prev0 = cur, 0.0
            self._weights = out
            return out[:n_rows, :k]


_TABLE = StirlingTable()


def stirling_first_unsigned(n: int, j: int) -> float:
    """Unsigned Stirling number of the first kind ``[n, j]`` as a float."""
    return _TABLE(n, j)


def stirling_weights(n_rows: int, k: int) -> np.ndarray:
    return _TABLE.weights(n_rows, k)


def rising_factorial(a, n: int):
    """Pochhammer symbol a (a+1) ... (a+n-1); equals 1 for n = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1
    for i in range(n):
        out = out * (a + i)
    return out


def log_rising_factorial(a: float, n) -> float | np.ndarray:
    """log of the rising factorial for a > 0, safe for large n."""
    if np.any(np.asarray(a) <= 0):
        raise ValueError("log_rising_factorial requires a > 0")
    return gammaln(np.add(a, n)) - gammaln(a)


def harmonic(n: int) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.fsum(1.0 / i for i in range(1, n + 1))


def harmonic_numbers(n_max: int) -> np.ndarray:
    """H_0..H_{n_max} with Neumaier-compensated running sums."""
    out = np.zeros(n_max + 1)
    total = 0.0
    comp = 0.0
    for i in range(1, n_max + 1):
        x = 1.0 / i
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
        out[i] = total + comp
    return out


def bell_partial_table(x: Sequence, k_max: int) -> list[list]:
    """All partial Bell polynomials ``B[n][j]`` for ``0 <= j <= n <= k_max``.

    Uses ``B_{n,j} = sum_{i=1}^{n-j+1} C(n-1, i-1) x_i B_{n-i, j-1}``.
    """
    if len(x) < k_max:
        raise ValueError(f"need at least {k_max} inputs, got {len(x)}")
    zero = x[0] * 0 if k_max > 0 else 0
    B = [[zero] * (n + 1) for n in range(k_max + 1)]
    B[0][0] = zero + 1
    for n in range(1, k_max + 1):
        for j in range(1, n + 1):
            acc = zero
            for i in range(1, n - j + 2):
                acc = acc + math.comb(n - 1, i - 1) * x[i - 1] * B[n - i][j - 1]
            B[n][j] = acc
    return B


def bell_partial(k: int, j: int, x: Sequence):
    if k < 1 or j < 1:
        raise ValueError("bell_partial needs k >= 1 and j >= 1")
    if j > k:
        raise ValueError(f"bell_partial: j={j} exceeds k={k}")
    if len(x) < k - j + 1:
        raise ValueError(f"bell_partial needs {k - j + 1} inputs, got {len(x)}")
    padded = list(x[: k - j + 1]) + [x[0] * 0] * (j - 1)
    return bell_partial_table(padded, k)[k][j]


def bell_complete_all(y: Sequence, k_max: int | None = None) -> list:
    """Complete Bell polynomials Y_0..Y_K with Y_{n+1} = sum C(n, i) Y_{n-i} y_{i+1}."""
    K = len(y) if k_max is None else k_max
    if len(y) < K:
        raise ValueError(f"need {K} inputs, got {len(y)}")
    Y = [1]
    for n in range(K):
        acc = 0
        for i in range(n + 1):
            acc = acc + math.comb(n, i) * Y[n - i] * y[i]
        Y.append(acc)
    return Y


def bell_complete(k: int, y: Sequence):
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1
    return bell_complete_all(y, k)[k]


def log_partition_all(x: Sequence, k_max: int | None = None) -> list:
    """Logarithmic partition polynomials P_1..P_K (returned as a list, P_1 first)."""
    K = len(x) if k_max is None else k_max
    if len(x) < K:
        raise ValueError(f"need {K} inputs, got {len(x)}")
    P: list = []
    for k in range(1, K + 1):
        acc = x[k - 1]
        for r in range(1, k):
            acc = acc - math.comb(k - 1, r) * x[r - 1] * P[k - r - 1]
        P.append(acc)
    return P


def log_partition_poly(k: int, x: Sequence):
    if k < 1:
        raise ValueError("k must be positive")
    return log_partition_all(x, k)[k - 1]


def general_partition_poly(k: int, a: Sequence, x: Sequence):
    """G_k(a; x) = sum_j a_j B_{k,j}(x)."""
    if k < 1:
        raise ValueError("k must be positive")
    if len(a) < k or len(x) < k:
        raise ValueError(f"general_partition_poly needs {k} coefficients and inputs")
    B = bell_partial_table(x, k)
    acc = 0
    for j in range(1, k + 1):
        acc = acc + a[j - 1] * B[k][j]
    return acc
