"""Moment/cumulant conversions for a positive random variable.

All sign bookkeeping between Laplace-transform Taylor coefficients
``g_k = (-1)^k E[T^k]`` and raw moments lives in this module. Everything
downstream works with raw moments and cumulants of T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .combinatorics import bell_complete_all, log_partition_all

__all__ = [
    "MomentVector",
    "CumulantVector",
    "laplace_coefficients",
    "moments_from_laplace_coefficients",
    "cumulants_from_moments",
    "moments_from_cumulants_bell",
    "moments_from_cumulants_recursive",
    "standardized_shape",
]


@dataclass(frozen=True)
class MomentVector:
    """Raw moments m_1..m_K (m_0 = 1 is implicit)."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> float:
        """1-based access; ``m[0]`` is 1."""
        if j == 0:
            return 1.0
        if j < 0:
            raise IndexError(j)
        return self.values[j - 1]

    def with_zeroth(self) -> list[float]:
        return [1.0, *self.values]


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants c_1..c_K plus truncation metadata from the series that produced them."""

    values: tuple[float, ...]
    terms_used: int = 0
    tail_estimate: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> float:
        """1-based access: ``c[1]`` is the mean."""
        if k < 1:
            raise IndexError(k)
        return self.values[k - 1]


def _as_values(x) -> tuple[float, ...]:
    if isinstance(x, (MomentVector, CumulantVector)):
        return x.values
    return tuple(float(v) for v in x)


def laplace_coefficients(m: MomentVector | Sequence[float]) -> list[float]:
    """Taylor coefficients g_1..g_K of the Laplace transform: g_k = (-1)^k m_k."""
    vals = _as_values(m)
    return [(-1) ** k * v for k, v in enumerate(vals, start=1)]


def moments_from_laplace_coefficients(g: Sequence[float]) -> MomentVector:
    return MomentVector(tuple((-1) ** k * v for k, v in enumerate(g, start=1)))


def cumulants_from_moments(m: MomentVector | Sequence[float]) -> CumulantVector:
    """Cumulants of T from its raw moments.

    The logarithmic polynomials act on the Laplace coefficients, which yields
    the formal cumulants of the Laplace transform, ``(-1)^k c_k(T)``.
    """
    vals = _as_values(m)
    if not vals:
        raise ValueError("cumulants_from_moments needs at least one moment")
    formal = log_partition_all(laplace_coefficients(vals))
    return CumulantVector(tuple((-1) ** k * v for k, v in enumerate(formal, start=1)))


def moments_from_cumulants_bell(c: CumulantVector | Sequence[float]) -> MomentVector:
    vals = _as_values(c)
    if not vals:
        raise ValueError("need at least one cumulant")
    return MomentVector(tuple(bell_complete_all(list(vals))[1:]))


def moments_from_cumulants_recursive(c: CumulantVector | Sequence[float]) -> MomentVector:
    """m_k = c_k + sum_{i<k} C(k-1, i-1) c_i m_{k-i}."""
    vals = _as_values(c)
    if not vals:
        raise ValueError("need at least one cumulant")
    m = [1.0]
    for k in range(1, len(vals) + 1):
        acc = vals[k - 1]
        for i in range(1, k):
            acc += math.comb(k - 1, i - 1) * vals[i - 1] * m[k - i]
        m.append(acc)
    return MomentVector(tuple(m[1:]))


def standardized_shape(c: CumulantVector | Sequence[float]) -> tuple[float, float]:
    """(skewness, excess kurtosis) from the first four cumulants."""
    vals = _as_values(c)
    if len(vals) < 4:
        raise ValueError("standardized_shape needs at least 4 cumulants")
    c2 = vals[1]
    if not c2 > 0:
        raise ValueError(f"standardized_shape needs c2 > 0, got {c2}")
    return vals[2] / c2**1.5, vals[3] / c2**2
