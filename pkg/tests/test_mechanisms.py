import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wasserstein_dp.mechanisms import (
    GAUSSIAN,
    LAPLACE,
    DpBudget,
    MechanismSpec,
    RdpBudget,
    WdpBudget,
    attack_success_probability,
    dp_gaussian,
    dp_laplace,
    rdp_gaussian,
    rdp_laplace,
    wdp_gaussian,
    wdp_laplace,
)


def lap(scale, sens=1.0):
    return MechanismSpec(kind=LAPLACE, scale=scale, sensitivity=sens)


def gau(scale, sens=1.0):
    return MechanismSpec(kind=GAUSSIAN, scale=scale, sensitivity=sens)


class TestUnitArgumentBudgets:
    """The closed-form budgets at unit arguments, pinned at 1e-12 relative."""

    def test_wdp_gaussian_unit(self):
        assert wdp_gaussian(gau(1.0), 1.0).epsilon == pytest.approx(0.5, rel=1e-12)

    def test_rdp_gaussian_unit(self):
        assert rdp_gaussian(1.0, 2.0).epsilon == pytest.approx(1.0, rel=1e-12)

    def test_dp_laplace_unit(self):
        assert dp_laplace(1.0).epsilon == pytest.approx(1.0, rel=1e-12)

    def test_rdp_laplace_alpha_one(self):
        assert rdp_laplace(1.0, 1.0).epsilon == pytest.approx(
            0.36787944117144233, rel=1e-12
        )

    def test_dp_gaussian_is_unbounded(self):
        assert math.isinf(dp_gaussian().epsilon)


class TestWdpLaplace:
    def test_unit_arguments(self):
        assert wdp_laplace(lap(1.0), 1.0).epsilon == pytest.approx(
            0.4288819424803534, rel=1e-12
        )

    def test_zero_sensitivity(self):
        assert wdp_laplace(lap(1.0, sens=0.0), 3.0).epsilon == 0.0

    def test_order_two(self):
        assert wdp_laplace(lap(2.0), 2.0).epsilon == pytest.approx(
            0.33970047752891774, rel=1e-12
        )

    def test_kind_mismatch(self):
        with pytest.raises(ValueError):
            wdp_laplace(gau(1.0), 1.0)

    def test_linear_in_sensitivity(self):
        base = wdp_laplace(lap(1.3), 2.5).epsilon
        for c in (0.5, 2.0, 7.0):
            scaled = wdp_laplace(lap(1.3, sens=c), 2.5).epsilon
            assert scaled == pytest.approx(c * base, rel=1e-12)


class TestWdpGaussian:
    def test_unit_arguments(self):
        assert wdp_gaussian(gau(1.0), 1.0).epsilon == pytest.approx(0.5, rel=1e-12)

    def test_order_two(self):
        assert wdp_gaussian(gau(2.0), 2.0).epsilon == pytest.approx(
            0.3535533905932738, rel=1e-12
        )

    def test_zero_sensitivity(self):
        assert wdp_gaussian(gau(5.0, sens=0.0), 2.0).epsilon == 0.0

    def test_kind_mismatch(self):
        with pytest.raises(ValueError):
            wdp_gaussian(lap(1.0), 1.0)

    @settings(max_examples=100, deadline=None)
    @given(
        sigma=st.floats(0.1, 100),
        mu=st.floats(1, 10),
        c=st.floats(0.01, 100),
    )
    def test_sensitivity_scales_inside_the_root(self, sigma, mu, c):
        # the sensitivity sits inside (.)^(1/mu): scaling by c scales the
        # budget by c^(1/mu), so linearity holds only at mu = 1
        base = wdp_gaussian(gau(sigma), mu).epsilon
        scaled = wdp_gaussian(gau(sigma, sens=c), mu).epsilon
        assert scaled == pytest.approx(c ** (1.0 / mu) * base, rel=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(mu=st.floats(1, 10), lo=st.floats(0.2, 50), hi=st.floats(0.2, 50))
    def test_strictly_decreasing_in_sigma(self, mu, lo, hi):
        if lo == hi:
            hi = lo * 1.5
        lo, hi = min(lo, hi), max(lo, hi)
        assert wdp_gaussian(gau(hi), mu).epsilon < wdp_gaussian(gau(lo), mu).epsilon


class TestOrderMonotonicity:
    """x^(1/mu) is non-decreasing in mu once the base is at most 1."""

    @settings(max_examples=100, deadline=None)
    @given(
        sigma=st.floats(1.0, 50),
        mu1=st.floats(1, 10),
        mu2=st.floats(1, 10),
    )
    def test_gaussian(self, sigma, mu1, mu2):
        mu1, mu2 = min(mu1, mu2), max(mu1, mu2)
        eps1 = wdp_gaussian(gau(sigma), mu1).epsilon
        eps2 = wdp_gaussian(gau(sigma), mu2).epsilon
        assert eps1 <= eps2 + 1e-15

    @settings(max_examples=100, deadline=None)
    @given(
        lam=st.floats(1.0, 50),
        mu1=st.floats(1, 10),
        mu2=st.floats(1, 10),
    )
    def test_laplace(self, lam, mu1, mu2):
        # lambda >= 1 keeps the root base below 1
        mu1, mu2 = min(mu1, mu2), max(mu1, mu2)
        eps1 = wdp_laplace(lap(lam), mu1).epsilon
        eps2 = wdp_laplace(lap(lam), mu2).epsilon
        assert eps1 <= eps2 + 1e-15


class TestRdpLaplace:
    def test_alpha_two(self):
        assert rdp_laplace(1.0, 2.0).epsilon == pytest.approx(
            0.6191236299985928, rel=1e-12
        )

    def test_huge_scale_vanishes(self):
        assert rdp_laplace(1e6, 2.0).epsilon == pytest.approx(0.0, abs=1e-5)

    def test_branch_continuity(self):
        at_one = rdp_laplace(1.0, 1.0).epsilon
        near_one = rdp_laplace(1.0, 1.0 + 1e-6).epsilon
        assert near_one == pytest.approx(at_one, abs=1e-4)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            rdp_laplace(0.0, 2.0)
        with pytest.raises(ValueError):
            rdp_laplace(1.0, 0.5)


class TestRdpGaussian:
    def test_values(self):
        assert rdp_gaussian(2.0, 2.0).epsilon == pytest.approx(0.25, rel=1e-12)
        assert rdp_gaussian(100.0, 2.0).epsilon == pytest.approx(1e-4, rel=1e-12)

    def test_rejects_alpha_at_most_one(self):
        with pytest.raises(ValueError):
            rdp_gaussian(1.0, 1.0)


class TestDpLaplace:
    def test_values(self):
        assert dp_laplace(2.0).epsilon == pytest.approx(0.5, rel=1e-12)
        assert dp_laplace(1e9).epsilon == pytest.approx(0.0, abs=1e-8)
        assert dp_laplace(1.0).delta == 0.0


class TestAttackSuccess:
    def test_published_operating_points(self):
        assert attack_success_probability(0.76) == pytest.approx(0.681, abs=5e-4)
        # printed as 0.898 next to epsilon 2.2; the formula gives 0.9002
        assert attack_success_probability(2.2) == pytest.approx(0.898, abs=0.003)

    def test_symmetry_point(self):
        assert attack_success_probability(0.0) == 0.5

    def test_range(self):
        # strictly below 1 wherever doubles can still resolve e^-eps
        for eps in (0.0, 0.1, 1.0, 10.0, 30.0):
            p = attack_success_probability(eps)
            assert 0.5 <= p < 1.0
        assert attack_success_probability(50.0) <= 1.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            attack_success_probability(-0.1)


class TestValidation:
    def test_spec_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            MechanismSpec(kind="cauchy", scale=1.0)
        with pytest.raises(ValueError):
            MechanismSpec(kind=LAPLACE, scale=0.0)
        with pytest.raises(ValueError):
            MechanismSpec(kind=LAPLACE, scale=1.0, sensitivity=-1.0)

    def test_budgets_reject_bad_fields(self):
        with pytest.raises(ValueError):
            WdpBudget(mu=0.5, epsilon=1.0)
        with pytest.raises(ValueError):
            WdpBudget(mu=1.0, epsilon=-0.1)
        with pytest.raises(ValueError):
            RdpBudget(alpha=0.5, epsilon=1.0)
        with pytest.raises(ValueError):
            DpBudget(epsilon=1.0, delta=1.0)

    def test_wdp_budget_rejects_bad_order_argument(self):
        with pytest.raises(ValueError):
            wdp_gaussian(gau(1.0), 0.5)
