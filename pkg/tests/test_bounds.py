import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccpart.bounds import (
    BoundsError,
    RiskSpec,
    allocate_beta,
    binomial_tail_log,
    explicit_sample_size,
    implicit_sample_size,
    sample_size,
)

mpmath.mp.dps = 50

# (eps, beta, rho, c) grid shared with the acceptance suite
EPS_GRID = [0.005, 0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7]
BETA_GRID = [1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.3]
RHO_GRID = [1, 2, 3, 5, 10, 20, 50, 100, 200, 500]
C_GRID = [1, 2, 6, 24, 1024]


def exact_tail(rho, K, eps):
    """Exact-rational lower binomial tail as an mpmath number."""
    e = Fraction(eps)
    total = sum(Fraction(math.comb(K, l)) * e**l * (1 - e) ** (K - l) for l in range(rho))
    return mpmath.mpf(total.numerator) / total.denominator


def mp_tail_log(rho, K, eps):
    e = mpmath.mpf(eps)
    return mpmath.log(mpmath.fsum(mpmath.binomial(K, l) * e**l * (1 - e) ** (K - l) for l in range(rho)))


@pytest.mark.parametrize("args,expected", [
    ((0.05, 1e-3, 20), 820),
    ((0.025, 5e-4, 10), 1051),
    ((0.1, 1e-3, 1), 110),
    ((0.025, 5e-4, 20), 1684),
])
def test_explicit_examples(args, expected):
    res = explicit_sample_size(*args)
    assert res.K == expected and res.bound_kind == "explicit"


def test_explicit_config_count_factor():
    # ln(c/beta) term: c feasible configurations act like beta / c
    assert explicit_sample_size(0.05, 1e-3, 20, 4).K == explicit_sample_size(0.05, 2.5e-4, 20).K


@pytest.mark.parametrize("args,expected", [
    ((0.1, 1e-3, 1), 66),
    ((0.05, 1e-3, 20), 726),
    ((0.5, 0.3, 1), 2),
    ((0.1, 1e-3, 21), 372),
])
def test_implicit_examples(args, expected):
    assert implicit_sample_size(*args).K == expected


def test_implicit_minimality_certified_exactly():
    K = implicit_sample_size(0.05, 1e-3, 20).K
    assert 20 <= K <= 820
    assert exact_tail(20, K, 0.05) <= mpmath.mpf(Fraction(1e-3).numerator) / Fraction(1e-3).denominator
    assert exact_tail(20, K - 1, 0.05) > mpmath.mpf(Fraction(1e-3).numerator) / Fraction(1e-3).denominator


def test_tail_rho_one_exact():
    assert binomial_tail_log(1, 66, 0.1) == 66 * math.log1p(-0.1)


def test_tail_hand_sum():
    assert binomial_tail_log(2, 5, 0.5) == pytest.approx(math.log(6 / 32), rel=1e-15)


def test_tail_domain_error():
    with pytest.raises(BoundsError):
        binomial_tail_log(6, 5, 0.5)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 2000), st.integers(1, 60), st.sampled_from([1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.9]))
def test_tail_matches_high_precision(K, rho, eps):
    rho = min(rho, K)
    got = binomial_tail_log(rho, K, eps)
    want = mp_tail_log(rho, K, eps)
    assert abs(got - float(want)) <= 1e-12 * max(1.0, abs(float(want)))


def test_tail_matches_exact_rational_small():
    rng = np.random.default_rng(0)
    for _ in range(200):
        K = int(rng.integers(1, 120))
        rho = int(rng.integers(1, K + 1))
        eps = float(rng.choice([0.01, 0.1, 0.3, 0.5, 0.8]))
        want = mpmath.log(exact_tail(rho, K, eps))
        got = binomial_tail_log(rho, K, eps)
        assert abs(got - float(want)) <= 1e-12 * max(1.0, abs(float(want)))


def test_tail_nonincreasing_in_K():
    for rho, eps in [(1, 0.1), (5, 0.05), (20, 0.2)]:
        vals = [binomial_tail_log(rho, K, eps) for K in range(rho, rho + 400)]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_implicit_below_explicit_on_grid():
    for eps, beta, rho, c in itertools.product(EPS_GRID, BETA_GRID, RHO_GRID, C_GRID):
        ex = explicit_sample_size(eps, beta, rho, c).K
        im = implicit_sample_size(eps, beta, rho, c).K
        assert rho <= im <= ex, (eps, beta, rho, c)


def test_implicit_rho_one_closed_form_on_grid():
    for eps, beta in itertools.product(EPS_GRID, BETA_GRID):
        closed = math.ceil(math.log(beta) / math.log1p(-eps))
        # exact cross-check for the rare case where the ratio sits on an integer
        if abs(math.log(beta) / math.log1p(-eps) - round(math.log(beta) / math.log1p(-eps))) < 1e-9:
            continue
        assert implicit_sample_size(eps, beta, 1).K == closed


def test_implicit_is_minimal_on_sample_of_grid():
    rng = np.random.default_rng(11)
    grid = list(itertools.product(EPS_GRID, BETA_GRID, RHO_GRID[:7], C_GRID))
    for i in rng.choice(len(grid), size=60, replace=False):
        eps, beta, rho, c = grid[i]
        K = implicit_sample_size(eps, beta, rho, c).K
        lim = mpmath.log(mpmath.mpf(beta) / c)
        assert mp_tail_log(rho, K, eps) <= lim
        if K > rho:
            assert mp_tail_log(rho, K - 1, eps) > lim


def test_sample_size_dispatch_and_validation():
    assert sample_size("explicit", 0.05, 1e-3, 20).K == 820
    assert sample_size("implicit", 0.05, 1e-3, 20).K == 726
    with pytest.raises(BoundsError):
        sample_size("other", 0.05, 1e-3, 20)
    for bad in [(0.0, 1e-3, 1), (0.1, 1.5, 1), (0.1, 1e-3, 0), (0.1, 1e-3, 1.5)]:
        with pytest.raises(BoundsError):
            explicit_sample_size(*bad)


def test_allocate_beta():
    assert allocate_beta(1e-3, 2) == [5e-4, 5e-4]
    assert allocate_beta(0.01, 1) == [0.01]
    assert allocate_beta(1e-3, 4) == [2.5e-4] * 4
    with pytest.raises(BoundsError):
        allocate_beta(1e-3, 0)


def test_risk_spec_invariants():
    spec = RiskSpec(0.1, 1e-3, b=4, config_count=2)
    assert spec.configs == 2
    assert RiskSpec(0.1, 1e-3, b=3).configs == 8
    with pytest.raises(BoundsError):
        RiskSpec(0.1, 0.5)
    with pytest.raises(BoundsError):
        RiskSpec(0.1, 1e-3, b=1, config_count=3)
