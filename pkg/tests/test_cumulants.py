import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fellerfpt.cumulants import (
    CumulantVector,
    MomentVector,
    cumulants_from_moments,
    laplace_coefficients,
    moments_from_cumulants_bell,
    moments_from_cumulants_recursive,
    moments_from_laplace_coefficients,
    standardized_shape,
)
from oracles import gamma_cumulants, gamma_moments

cumulant_lists = st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False), min_size=1, max_size=8)


def test_vectors_are_one_based():
    m = MomentVector((1.5, 4.0))
    assert m[0] == 1.0 and m[1] == 1.5 and m[2] == 4.0
    assert m.order == 2 and m.with_zeroth() == [1.0, 1.5, 4.0]
    c = CumulantVector((2.0, 3.0))
    assert c[1] == 2.0 and len(c) == 2
    with pytest.raises(IndexError):
        c[0]
    with pytest.raises(IndexError):
        m[3]


@pytest.mark.parametrize("shape,rate", [(0.5, 1.0), (2.3, 0.7), (7.0, 3.0)])
def test_gamma_law(shape, rate):
    c = gamma_cumulants(shape, rate, 7)
    m = gamma_moments(shape, rate, 7)
    assert moments_from_cumulants_bell(c).values == pytest.approx(m, rel=1e-12)
    assert moments_from_cumulants_recursive(c).values == pytest.approx(m, rel=1e-12)
    assert cumulants_from_moments(m).values == pytest.approx(c, rel=1e-9)
    skew, kurt = standardized_shape(c)
    assert skew == pytest.approx(2 / math.sqrt(shape))
    assert kurt == pytest.approx(6 / shape)


@settings(max_examples=100, deadline=None)
@given(c=cumulant_lists)
def test_bell_and_recursion_agree(c):
    a = moments_from_cumulants_bell(c).values
    b = moments_from_cumulants_recursive(c).values
    scale = max(1.0, max(abs(v) for v in a))
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12 * scale)


@settings(max_examples=100, deadline=None)
@given(c=cumulant_lists)
def test_round_trip(c):
    back = cumulants_from_moments(moments_from_cumulants_recursive(c)).values
    m = moments_from_cumulants_recursive(c).values
    scale = max(1.0, max(abs(v) for v in m))
    assert back == pytest.approx(c, abs=1e-10 * scale)


@settings(max_examples=60, deadline=None)
@given(c=cumulant_lists, shift=st.floats(min_value=-3, max_value=3))
def test_shift_changes_only_first_cumulant(c, shift):
    m = moments_from_cumulants_recursive(c).values
    # moments of T + shift by the binomial theorem
    ms = [1.0, *m]
    shifted = [math.fsum(math.comb(k, j) * ms[j] * shift ** (k - j) for j in range(k + 1)) for k in range(1, len(c) + 1)]
    back = cumulants_from_moments(shifted).values
    expected = [c[0] + shift, *c[1:]]
    scale = max(1.0, max(abs(v) for v in shifted))
    assert back == pytest.approx(expected, abs=1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(c=cumulant_lists, lam=st.floats(min_value=0.1, max_value=3))
def test_homogeneity(c, lam):
    scaled = [lam**k * v for k, v in enumerate(c, start=1)]
    a = moments_from_cumulants_recursive(scaled).values
    b = [lam**k * v for k, v in enumerate(moments_from_cumulants_recursive(c).values, start=1)]
    scale = max(1.0, max(abs(v) for v in b))
    assert a == pytest.approx(b, rel=1e-10, abs=1e-12 * scale)


def test_laplace_coefficient_signs():
    m = [1.0, 2.0, 6.0]
    g = laplace_coefficients(m)
    assert g == [-1.0, 2.0, -6.0]
    assert moments_from_laplace_coefficients(g).values == tuple(m)


def test_standardized_shape_validation():
    with pytest.raises(ValueError):
        standardized_shape([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        standardized_shape([1.0, 0.0, 3.0, 4.0])
    with pytest.raises(ValueError):
        moments_from_cumulants_bell([])
