import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qkdrate.photon_stats import p_at_least, poisson_pmf, truncation_bound


def test_pmf_trivial():
    assert poisson_pmf(0, 0) == 1.0
    assert poisson_pmf(1, 1) == pytest.approx(math.exp(-1), rel=1e-15)


def test_pmf_against_mpmath():
    mpmath.mp.dps = 40
    ref = mpmath.exp(-mpmath.mpf("0.5")) * mpmath.mpf("0.125") / 6
    assert poisson_pmf(0.5, 3) == pytest.approx(float(ref), rel=1e-13)
    assert poisson_pmf(0.5, 3) == pytest.approx(0.0126361, abs=5e-8)


def test_pmf_large_l_no_overflow():
    ref = mpmath.exp(-10) * mpmath.mpf(10) ** 150 / mpmath.factorial(150)
    assert poisson_pmf(10.0, 150) == pytest.approx(float(ref), rel=1e-9)


def test_negative_mu_rejected():
    with pytest.raises(ValueError):
        poisson_pmf(-0.1, 2)
    with pytest.raises(ValueError):
        p_at_least(-1.0, 1)


def test_p_at_least_values():
    assert p_at_least(0, 1) == 0
    assert p_at_least(0.1, 2) == pytest.approx(1 - math.exp(-0.1) * 1.1, rel=1e-13)
    assert p_at_least(0.1, 2) == pytest.approx(0.0046788, abs=5e-8)
    assert p_at_least(800.0, 1) == 1.0
    with pytest.raises(ValueError):
        p_at_least(0.3, 3)


def test_truncation_bound_examples():
    L = truncation_bound(0.5, 1e-15)
    assert L <= 25
    tail = 1 - sum(poisson_pmf(0.5, l) for l in range(L + 1))
    assert tail < 1e-15 + 1e-16
    assert truncation_bound(0, 1e-15) == 0
    L10 = truncation_bound(10, 1e-12)
    brute_tail = sum(poisson_pmf(10, l) for l in range(L10 + 1, 201))
    assert brute_tail < 1e-12


def test_truncation_bound_floor():
    for mu in (0.01, 1.0, 4.0, 9.0):
        assert truncation_bound(mu) >= max(10, math.ceil(mu + 10 * math.sqrt(mu)))


@given(st.floats(min_value=1e-6, max_value=10.0))
def test_truncated_mass(mu):
    L = truncation_bound(mu, 1e-15)
    s = float(np.sum(poisson_pmf(mu, np.arange(L + 1))))
    assert 1 - 1e-14 <= s <= 1 + 1e-14


@given(st.floats(min_value=0.0, max_value=50.0))
def test_at_least_relations(mu):
    assert p_at_least(mu, 1) == pytest.approx(1 - poisson_pmf(mu, 0), abs=1e-15)
    assert p_at_least(mu, 2) <= p_at_least(mu, 1)
