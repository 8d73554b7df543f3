"""Inequality kernel: frozen oracle values and randomized property sweeps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from septrack.oddpower import (
    SeparationCoefficients,
    check_binomial_envelope,
    check_separation_inequality,
    ineq_holds,
    odd_pow,
    power_split_bounds,
    separation_coefficients,
    solve_l_for_d,
    young_bound,
)


class TestOddPow:
    def test_negative_base(self):
        assert odd_pow(-2.0, 3) == -8.0

    def test_zero(self):
        assert odd_pow(0.0, 9) == 0.0

    def test_fractional_base_exact(self):
        # repeated multiplication keeps this product exact
        assert odd_pow(1.5, 5) == 7.59375

    @pytest.mark.parametrize("r", [0, 2, 4, -3])
    def test_rejects_non_odd(self, r):
        with pytest.raises(ValueError):
            odd_pow(1.0, r)

    def test_multiplicative(self):
        # sign-correct odd powers factor over products
        rng = np.random.default_rng(11)
        for _ in range(500):
            x1, x2 = rng.uniform(-10, 10, 2)
            r = int(rng.choice([1, 3, 5, 7, 9]))
            lhs = odd_pow(x1 * x2, r)
            rhs = odd_pow(x1, r) * odd_pow(x2, r)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


class TestYoungBound:
    def test_zero_factor(self):
        lhs, rhs = young_bound(3.0, 0.0, 2, 3, 1.7)
        assert lhs == 0.0
        assert rhs >= 0.0

    def test_equality_case(self):
        lhs, rhs = young_bound(1.0, 1.0, 1, 1, 1.0)
        assert lhs == 1.0
        assert rhs == 1.0

    def test_rejects_bad_weight(self):
        with pytest.raises(ValueError):
            young_bound(1.0, 1.0, 1, 1, 0.0)

    def test_rejects_non_integer_exponents(self):
        with pytest.raises(ValueError):
            young_bound(1.0, 1.0, 0, 1, 1.0)

    @given(
        x1=st.floats(-10, 10),
        x2=st.floats(-10, 10),
        b1=st.integers(1, 6),
        b2=st.integers(1, 6),
        xi=st.floats(0.05, 20),
    )
    @settings(max_examples=300, deadline=None)
    def test_holds_everywhere(self, x1, x2, b1, b2, xi):
        lhs, rhs = young_bound(x1, x2, b1, b2, xi)
        assert ineq_holds(lhs, rhs)


class TestPowerSplitBounds:
    def test_equal_arguments_zero_difference(self):
        res = power_split_bounds(1.3, 1.3, 5, 2.0)
        assert res.diff_lhs == 0.0

    def test_sum_split_tight_at_lam_one(self):
        res = power_split_bounds(2.5, 0.0, 3, 1.0)
        assert res.sum_lhs == res.sum_rhs == 2.5

    @given(
        x1=st.floats(-10, 10),
        x2=st.floats(-10, 10),
        h=st.sampled_from([3, 5, 7, 9]),
        lam=st.sampled_from([1.0, 2.0, 3.0]),
    )
    @settings(max_examples=300, deadline=None)
    def test_holds_everywhere(self, x1, x2, h, lam):
        res = power_split_bounds(x1, x2, h, lam)
        assert ineq_holds(res.diff_lhs, res.diff_rhs)
        assert ineq_holds(res.sum_lhs, res.sum_rhs)


class TestSeparationCoefficients:
    def test_reference_values_r3(self):
        # term-by-term sums evaluated independently before the build:
        # d = 2*0.1^1.5 + 0.1^3, ub = 0.1^-3 + 2*0.1^-1.5 + 0.1^-1
        coeffs = separation_coefficients(3, 0.1)
        assert coeffs.d == pytest.approx(0.0642455532033676, rel=1e-12)
        assert coeffs.upsilon_bar == pytest.approx(1073.2455532033675, rel=1e-12)

    def test_degenerate_power_one(self):
        coeffs = separation_coefficients(1, 0.5)
        assert coeffs.d == 0.0
        assert coeffs.upsilon_bar == 2.0

    def test_rejects_large_l(self):
        with pytest.raises(ValueError, match="d=3"):
            separation_coefficients(3, 1.0)

    def test_rejects_undershoot_at_power_one(self):
        # for r=1 the overshoot is 1/l, so l > 1 is inadmissible
        with pytest.raises(ValueError, match="upsilon_bar"):
            separation_coefficients(1, 2.0)

    def test_type_validates_range(self):
        with pytest.raises(ValueError):
            SeparationCoefficients(r=3, l=0.1, d=1.5, upsilon_bar=10.0)

    def test_monotone_in_l(self):
        for r in (3, 5, 7, 9):
            l_hi = solve_l_for_d(r, 0.95)
            ls = np.linspace(0.2 * l_hi, l_hi, 12)
            ds = [separation_coefficients(r, l).d for l in ls]
            ubs = [separation_coefficients(r, l).upsilon_bar for l in ls]
            assert all(a < b for a, b in zip(ds, ds[1:]))
            assert all(a > b for a, b in zip(ubs, ubs[1:]))

    def test_overshoot_growth_is_geometric_not_worse(self):
        # for fixed l the log of the overshoot grows linearly with the power
        l = 0.1
        cap = math.log(1.0 / l) + 1.0
        for r in (1, 3, 5, 7, 9, 11, 13, 15):
            ub = separation_coefficients(r, l).upsilon_bar
            assert math.log(ub) / r <= cap


class TestSolveLForD:
    def test_round_trip_r3(self):
        l = solve_l_for_d(3, 0.0642455532033676)
        assert l == pytest.approx(0.1, abs=1e-6)

    @pytest.mark.parametrize("r", [3, 5, 7, 9])
    def test_round_trip_mid_range(self, r):
        l = solve_l_for_d(r, 0.5)
        assert abs(separation_coefficients(r, l).d - 0.5) <= 1e-9

    def test_monotone_in_target(self):
        ls = [solve_l_for_d(5, dt) for dt in (0.05, 0.1, 0.3, 0.6, 0.9)]
        assert all(a < b for a, b in zip(ls, ls[1:]))

    def test_rejects_power_one(self):
        with pytest.raises(ValueError):
            solve_l_for_d(1, 0.5)

    def test_rejects_target_out_of_range(self):
        with pytest.raises(ValueError):
            solve_l_for_d(3, 1.0)


class TestSeparationInequality:
    def test_zero_perturbation(self):
        coeffs = separation_coefficients(3, 0.1)
        assert check_separation_inequality(4.2, 0.0, coeffs)

    def test_reference_point(self):
        # |2^3 - 1| = 7 against 0.0642*1 + 1073.2*1
        coeffs = separation_coefficients(3, 0.1)
        assert check_separation_inequality(1.0, 1.0, coeffs)

    def test_zero_base_point(self):
        coeffs = separation_coefficients(5, 0.1)
        assert check_separation_inequality(0.0, 3.7, coeffs)

    def test_envelope_zero(self):
        coeffs = separation_coefficients(3, 0.1)
        assert check_binomial_envelope(0.0, coeffs)

    def test_envelope_reference_point(self):
        # |(-1)^3 - 1| = 2 against 0.0642 + 1073.2*8
        coeffs = separation_coefficients(3, 0.1)
        assert check_binomial_envelope(-2.0, coeffs)

    def test_envelope_implies_separation(self):
        # normalized envelope at p = x2/x1 transfers to the raw pair
        rng = np.random.default_rng(5)
        coeffs = {r: separation_coefficients(r, solve_l_for_d(r, 0.5))
                  for r in (3, 5, 7, 9)}
        for _ in range(2000):
            x1 = rng.uniform(-10, 10)
            x2 = rng.uniform(-10, 10)
            if x1 == 0.0:
                continue
            cc = coeffs[int(rng.choice([3, 5, 7, 9]))]
            if check_binomial_envelope(x2 / x1, cc):
                assert check_separation_inequality(x1, x2, cc)
