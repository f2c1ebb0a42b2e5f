import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import binom

from spatial_unitroot.errors import InvalidArgumentError
from spatial_unitroot.kernels import (
    EXACT_LIMIT,
    binomial_kernel_prob,
    binomial_pmf_vector,
    kernel_weight,
)


def test_kernel_prob_examples():
    assert binomial_kernel_prob(0, 0, 0.3) == 1.0
    assert binomial_kernel_prob(2, 1, 0.5) == 0.5
    assert binomial_kernel_prob(5, 7, 0.5) == 0.0
    assert binomial_kernel_prob(5, -1, 0.5) == 0.0


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_kernel_prob_rejects_alpha_outside_unit_interval(alpha):
    with pytest.raises(InvalidArgumentError):
        binomial_kernel_prob(3, 1, alpha)


@pytest.mark.parametrize("p", [0.5, 0.1, 0.73])
def test_pmf_sums_to_one(p):
    for m in (0, 1, 7, 60, 61, 200, 1000):
        assert abs(binomial_pmf_vector(m, p).sum() - 1.0) < 1e-12


@given(st.integers(0, 400), st.floats(0.01, 0.99))
def test_kernel_matches_scipy_binomial(m, alpha):
    r = np.arange(m + 1)
    np.testing.assert_allclose(
        kernel_weight(np.full(m + 1, m), r, alpha, 1 - alpha), binom.pmf(r, m, alpha), rtol=1e-9, atol=1e-300
    )


@given(
    st.integers(0, 120),
    st.integers(0, 120),
    st.floats(-0.95, 0.95).filter(lambda x: abs(x) > 0.05),
    st.floats(-0.95, 0.95).filter(lambda x: abs(x) > 0.05),
)
def test_signed_weights_match_exact_arithmetic(m, r, a, b):
    r = min(r, m)
    exact = math.comb(m, r) * a**r * b ** (m - r)
    assert kernel_weight(m, r, a, b) == pytest.approx(exact, rel=1e-10, abs=1e-300)


def test_log_space_branch_is_continuous_with_exact_table():
    m = np.array([EXACT_LIMIT, EXACT_LIMIT + 1])
    for r in (0, 17, 30):
        w = kernel_weight(m, r, 0.5, 0.5)
        assert w[1] == pytest.approx(w[0] * (EXACT_LIMIT + 1) / (EXACT_LIMIT + 1 - r) * 0.5, rel=1e-12)


def test_large_m_stays_finite():
    w = kernel_weight(np.full(5001, 5000), np.arange(5001), 0.5, 0.5)
    assert np.all(np.isfinite(w))
    assert abs(w.sum() - 1.0) < 1e-10
