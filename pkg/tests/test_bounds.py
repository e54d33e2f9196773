"""
Tests for covering numbers and concentration bounds
"""

import math

import pytest

from src.adz.bounds import (
    asymptotic_ratio_limit,
    bound_report,
    chernoff_cover_bound,
    chernoff_objective,
    covering_number,
    log_chernoff_cover_asymptotic,
    log_chernoff_cover_bound,
    ring_cover,
    rnn_bound,
    theta_constants,
    zeta_delta,
)
from src.adz.exceptions import InfeasibleSampleCountError, UnsupportedCaseError
from src.adz.models import BoundParams


class TestZetaDelta:
    """
    Test cases for the optimized Chernoff parameter
    """

    def test_canonical_row(self):
        """Test zeta = 16(1 + sqrt(0.75)) at (1, 1, 1, 1, 16)"""
        zeta, delta = zeta_delta(1, 1.0, 1.0, 1.0, 16)

        assert zeta == pytest.approx(29.8564, abs=1e-3)
        assert delta == pytest.approx(0.033494, abs=1e-6)

    def test_boundary_sample_count(self):
        """Test zeta = eps n / b^2 when n = 4 lambda (b/eps)^2"""
        zeta, _ = zeta_delta(2, 1.0, 1.0, 1.0, 8)
        assert zeta == 8.0

    def test_large_n(self):
        """Test zeta ~ 2 eps n / b^2 for large n"""
        zeta, _ = zeta_delta(1, 1.0, 1.0, 1.0, 1e7)
        assert zeta / 2e7 == pytest.approx(1.0, abs=1e-3)

    def test_infeasible(self):
        """Test that n < 4 lambda (b/eps)^2 raises"""
        with pytest.raises(InfeasibleSampleCountError, match="Sample count below"):
            zeta_delta(1, 1.0, 1.0, 1.0, 3)

    def test_delta_locally_minimizes(self):
        """Test that perturbing delta by 5% does not lower the Chernoff objective"""
        lam, b, k, eps, n = 3, 1.0, 2.0, 0.5, 1e4
        _, delta = zeta_delta(lam, b, k, eps, n)
        center = chernoff_objective(delta, lam, b, k, eps, n)
        for factor in [0.95, 1.05]:
            assert chernoff_objective(delta * factor, lam, b, k, eps, n) >= center


class TestThetaConstants:
    """
    Test cases for theta_lambda and Theta_lambda
    """

    def test_theta_one(self):
        """Test Theta_1 by substitution"""
        theta, big_theta = theta_constants(1)
        assert theta == 5.0
        assert big_theta == pytest.approx(5 * math.sqrt(math.pi) * (2.5 + 1 / 30) ** (1 / 6), rel=1e-15)

    def test_growth_regime(self):
        """Test theta_lambda / (lambda ln lambda) <= 6 for lambda in 3..100"""
        for lam in range(3, 101):
            theta, _ = theta_constants(lam)
            assert theta / (lam * math.log(lam)) <= 6

    def test_big_theta_increasing(self):
        """Test that Theta_lambda increases strictly on 1..50"""
        values = [theta_constants(lam)[1] for lam in range(1, 51)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_invalid_dimension(self):
        """Test that lambda < 1 is rejected"""
        with pytest.raises(ValueError, match="at least 1"):
            theta_constants(0)


class TestCoveringNumber:
    """
    Test cases for covering-number sandwiches and greedy covers
    """

    def test_interval(self):
        """Test that [-1, 1] needs 10 intervals of radius 0.1"""
        result = covering_number(1, 1.0, 0.1, mode="greedy", shape="box")
        assert result.exact == 10
        assert result.exact_in_sandwich

    def test_unit_disc_half_radius(self):
        """Test the disc K(1) with delta = 0.5"""
        result = covering_number(2, 1.0, 0.5, mode="greedy")
        assert 4 <= result.exact <= 9
        assert result.exact_in_sandwich

    def test_ring_cover_of_disc(self):
        """Test the central disk plus six sectors"""
        assert ring_cover(1.0, 0.5) == 7

    def test_single_ball(self):
        """Test that delta >= rho gives one ball"""
        result = covering_number(3, 1.0, 1.5)
        assert result.exact == 1
        assert result.lower == result.upper == 1.0

    def test_formula_mode_has_no_exact_count(self):
        """Test that formula mode only returns the sandwich"""
        result = covering_number(2, 1.0, 0.25)
        assert result.exact is None
        assert result.exact_in_sandwich is None
        assert result.lower <= result.upper

    @pytest.mark.parametrize("lam", [1, 2, 3])
    @pytest.mark.parametrize("ratio", [0.25, 0.5])
    def test_greedy_in_sandwich(self, lam, ratio):
        """Test greedy counts inside the sandwich"""
        for shape in ["ball", "box"]:
            assert covering_number(lam, 1.0, ratio, mode="greedy", shape=shape).exact_in_sandwich

    @pytest.mark.slow
    @pytest.mark.parametrize("lam", [2, 3])
    def test_greedy_in_sandwich_fine(self, lam):
        """Test greedy counts inside the sandwich at delta/rho = 0.1"""
        assert covering_number(lam, 1.0, 0.1, mode="greedy").exact_in_sandwich

    def test_greedy_dimension_limit(self):
        """Test that greedy covers stop at lambda = 3"""
        with pytest.raises(UnsupportedCaseError, match="lambda <= 3"):
            covering_number(4, 1.0, 0.5, mode="greedy")

    def test_invalid_arguments(self):
        """Test mode, shape and radius validation"""
        with pytest.raises(ValueError, match="mode must be"):
            covering_number(2, 1.0, 0.5, mode="exact")
        with pytest.raises(ValueError, match="shape must be"):
            covering_number(2, 1.0, 0.5, shape="cube")
        with pytest.raises(ValueError, match="must be positive"):
            covering_number(2, 1.0, 0.0)


class TestChernoffCoverBound:
    """
    Test cases for the sup-norm concentration bound
    """

    def test_decreasing_in_n(self):
        """Test that the bound decreases over n in 10^3..10^6 for lambda = 3"""
        logs = [
            log_chernoff_cover_bound(BoundParams(lam=3, b=1.0, k=1.0, eps=0.5, n=10.0 ** p))
            for p in range(3, 7)
        ]
        assert all(a > b for a, b in zip(logs, logs[1:]))

    def test_asymptotic_ratio(self):
        """Test exact / asymptotic display against its large-n limit at n = 10^6"""
        for lam in [1, 2, 3]:
            params = BoundParams(lam=lam, b=1.0, k=1.0, eps=0.5, n=1e6)
            ratio = math.exp(log_chernoff_cover_bound(params) - log_chernoff_cover_asymptotic(params))
            assert ratio == pytest.approx(asymptotic_ratio_limit(lam), rel=1e-2)

    def test_clamped_at_one(self):
        """Test clamping when the expression exceeds 1"""
        params = BoundParams(lam=3, b=1.0, k=10.0, eps=1.0, n=20)
        assert log_chernoff_cover_bound(params) > 0
        assert chernoff_cover_bound(params) == 1.0

    def test_report_canonical_row(self):
        """Test the report of the canonical row"""
        report = bound_report(BoundParams(lam=1, b=1.0, k=1.0, eps=1.0, n=16))

        assert report.feasible
        assert report.zeta == pytest.approx(29.8564, abs=1e-3)
        assert 0 <= report.bound <= 1
        assert report.covering_lower <= report.covering_upper

    def test_report_flags_infeasible_rows(self):
        """Test that infeasible rows are flagged with bound 1"""
        report = bound_report(BoundParams(lam=2, b=1.0, k=1.0, eps=0.1, n=100))

        assert not report.feasible
        assert report.bound == 1.0
        assert report.zeta is None


class TestRnnBound:
    """
    Test cases for the random-network bound
    """

    def test_big_lambda(self):
        """Test Lambda = 4 for alpha = 2, r = 1, norm 1"""
        result = rnn_bound(1.0, 1.0, 2, 3, 1024, eps=1.0)
        assert result.big_lambda == 4.0
        assert result.lipschitz == 2.0

    def test_eps_from_rate(self):
        """Test eps = Lambda sqrt(k dim ln m / m)"""
        m = 2 ** 14
        result = rnn_bound(1.0, 1.0, 2, 3, m, k_rate=2.0)
        assert result.eps_used == pytest.approx(4 * math.sqrt(2 * 3 * math.log(m) / m), rel=1e-14)
        assert result.k_rate == 2.0

    def test_simplified_bound_reaches_below_one(self):
        """Test that some m <= 10^6 makes the simplified display informative"""
        values = [rnn_bound(1.0, 1.0, 2, 3, 2 ** p, k_rate=2.0).simplified for p in range(2, 20)]
        assert min(v for v in values if v is not None) < 1

    def test_probability_range(self):
        """Test that both bounds lie in [0, 1]"""
        for m in [16, 1024, 2 ** 16]:
            result = rnn_bound(2.0, 1.0, 3, 2, m, eps=0.5)
            assert 0 <= result.bound <= 1
            assert result.simplified is None or 0 <= result.simplified <= 1

    def test_small_m_is_infeasible(self):
        """Test that tiny networks give the trivial bound"""
        result = rnn_bound(1.0, 1.0, 2, 3, 4, eps=0.1)
        assert not result.feasible
        assert result.bound == 1.0

    def test_step_activation_rejected(self):
        """Test that alpha = 1 has no bound"""
        with pytest.raises(UnsupportedCaseError, match="alpha = 1"):
            rnn_bound(1.0, 1.0, 1, 3, 1024, eps=1.0)

    def test_exactly_one_accuracy_input(self):
        """Test that eps and k_rate are mutually exclusive"""
        with pytest.raises(ValueError, match="exactly one"):
            rnn_bound(1.0, 1.0, 2, 3, 1024, eps=1.0, k_rate=2.0)

    def test_rate_precondition(self):
        """Test that k_rate ln m >= 4 is enforced"""
        with pytest.raises(InfeasibleSampleCountError, match="below 4"):
            rnn_bound(1.0, 1.0, 2, 3, 8, k_rate=1.0)
