"""
Tests for the N_l^alpha multipliers, numerical Mellin transforms and operator identities
"""

import math

import numpy as np
import pytest

from src.adz.exceptions import EnvelopeError, PoleError, UnsupportedCaseError
from src.adz.mellin import (
    MellinEnvelope,
    asymptotic_ratio,
    base_multiplier,
    inverse_weight,
    mellin_numeric,
    multiplier_inverse_identity,
    n_multiplier,
    n_multiplier_compact,
    operator_identity_check,
    operator_identity_residuals,
    unit_interval_mellin,
    zero_scan,
)
from src.adz.models import MultiplierSpec
from src.adz.specfun import gamma_complex

ORIGIN_ONE = MellinEnvelope(value_at_zero=1.0)


def admissible_specs(ell_max, alpha_max, n):
    for ell in range(ell_max + 1):
        for alpha in range(alpha_max + 1):
            spec = MultiplierSpec(ell=ell, alpha=alpha, n=n)
            if spec.admissible:
                yield spec


class TestMellinNumeric:
    """
    Test cases for M{psi}(iy) on log-spaced Gauss-Legendre panels
    """

    @pytest.mark.parametrize("y", [1.0, 2.5])
    def test_exponential_gives_gamma(self, y):
        """Test M{e^-t}(iy) = Gamma(iy)"""
        value = mellin_numeric(lambda t: np.exp(-t), y, ORIGIN_ONE)
        expected = gamma_complex(1j * y)
        assert abs(value - expected) / abs(expected) < 1e-7

    @pytest.mark.parametrize("y", [0.5, -3.0])
    def test_indicator(self, y):
        """Test M{[t < 1]}(iy) = 1/(iy)"""
        value = mellin_numeric(lambda t: (t < 1).astype(float), y, ORIGIN_ONE)
        assert abs(value - 1 / (1j * y)) < 1e-12

    def test_scaling_law(self):
        """Test M{psi(2 .)}(iy) = 2^(-iy) M{psi}(iy)"""
        y = 1.5
        base = mellin_numeric(lambda t: np.exp(-t), y, ORIGIN_ONE)
        scaled = mellin_numeric(lambda t: np.exp(-2 * t), y, ORIGIN_ONE)
        assert abs(scaled - 2.0 ** (-1j * y) * base) < 1e-9

    @pytest.mark.parametrize("y", [0.7, 3.0])
    def test_euler_derivative(self, y):
        """Test M{t psi'}(iy) = -iy M{psi}(iy) for psi = e^-t"""
        base = mellin_numeric(lambda t: np.exp(-t), y, ORIGIN_ONE)
        derived = mellin_numeric(lambda t: -t * np.exp(-t), y)
        assert abs(derived + 1j * y * base) < 1e-7

    def test_origin_vanishing_at_zero(self):
        """Test that y = 0 is allowed when psi(0+) = 0"""
        value = mellin_numeric(lambda t: t * np.exp(-t), 0.0)
        assert value == pytest.approx(1.0, abs=1e-10)

    def test_pole_at_zero(self):
        """Test that y = 0 diverges when psi(0+) != 0"""
        with pytest.raises(PoleError, match="diverges"):
            mellin_numeric(lambda t: np.exp(-t), 0.0, ORIGIN_ONE)

    def test_slow_tail_rejected(self):
        """Test that psi = 1/(1+t) violates the envelope"""
        with pytest.raises(EnvelopeError, match="envelope ends"):
            mellin_numeric(lambda t: 1 / (1 + t), 1.0, ORIGIN_ONE)

    def test_invalid_envelope(self):
        """Test that the envelope bounds must be ordered"""
        with pytest.raises(ValueError, match="0 < t_min < t_max"):
            MellinEnvelope(t_min=1.0, t_max=0.5)


class TestMultiplier:
    """
    Test cases for the three-case and compact forms of N_l^alpha
    """

    def test_radial_value_at_origin(self):
        """Test N_0^0(0) = 1/(4 pi) in dimension 3"""
        value = n_multiplier(MultiplierSpec(ell=0, alpha=0, n=3), 0.0)
        assert value == pytest.approx(1 / (4 * math.pi), rel=1e-14)

    @pytest.mark.parametrize("y", [0.5, -0.5, 1.0, -1.0, 10.0, -10.0])
    def test_compact_form_agrees(self, y):
        """Test the three-case form against the gamma-ratio form away from y = 0"""
        for spec in admissible_specs(5, 3, 3):
            value = n_multiplier(spec, y)
            assert abs(value - n_multiplier_compact(spec, y)) / abs(value) < 1e-9

    def test_compact_form_singular_at_origin(self):
        """Test that the compact form reports its removable singularity"""
        with pytest.raises(PoleError):
            n_multiplier_compact(MultiplierSpec(ell=0, alpha=1, n=3), 0.0)

    @pytest.mark.parametrize("n", [2, 3])
    def test_asymptotic_modulus(self, n):
        """Test |N_l^alpha(y)| against 1/2 |y|^alpha (|y|/2 pi)^((n-1)/2) at y = 10^4"""
        for ell in range(5):
            for alpha in range(1, 4):
                ratio = asymptotic_ratio(MultiplierSpec(ell=ell, alpha=alpha, n=n), 1e4)
                assert abs(ratio - 1) < 0.02

    @pytest.mark.parametrize("ell,alpha", [(0, 1), (0, 3), (1, 2), (3, 1), (2, 2), (4, 3)])
    def test_raising_alpha_multiplies_by_pochhammer_step(self, ell, alpha):
        """Test N^alpha / N^(alpha-1) = -(iy + alpha - 1)"""
        for y in [0.5, -1.5, 7.0]:
            upper = n_multiplier(MultiplierSpec(ell=ell, alpha=alpha, n=3), y)
            lower = n_multiplier(MultiplierSpec(ell=ell, alpha=alpha - 1, n=3), y)
            expected = -(1j * y + alpha - 1)
            assert abs(upper / lower - expected) / abs(expected) < 1e-10

    def test_finite_on_grid(self):
        """Test that admissible multipliers are finite on a grid through y = 0"""
        y = np.linspace(-50, 50, 201)
        for n in [2, 3]:
            for spec in admissible_specs(6, 3, n):
                assert np.all(np.isfinite(n_multiplier(spec, y)))

    @pytest.mark.parametrize("n", [2, 3])
    def test_no_zeros(self, n):
        """Test that admissible multipliers do not vanish on |y| <= 10^3"""
        for spec in admissible_specs(6, 3, n):
            assert zero_scan(spec) > 0

    def test_forced_zero_at_origin(self):
        """Test that (iy)_alpha makes N_1^1 vanish at y = 0"""
        assert n_multiplier(MultiplierSpec(ell=1, alpha=1, n=3), 0.0) == 0

    def test_inadmissible_spec(self):
        """Test that alpha = 0 with an even degree >= 2 is rejected"""
        with pytest.raises(UnsupportedCaseError, match="not defined"):
            n_multiplier(MultiplierSpec(ell=2, alpha=0, n=3), 1.0)

    def test_base_multiplier(self):
        """Test that the base order is 1 exactly on even degrees >= 2"""
        assert [base_multiplier(ell, 3).alpha for ell in range(6)] == [0, 0, 1, 0, 1, 0]


class TestInverseIdentity:
    """
    Test cases for 1/N_l as a Mellin transform over (0, 1)
    """

    def test_radial_origin(self):
        """Test that both sides equal 4 pi at l = 0, n = 3, y = 0"""
        assert multiplier_inverse_identity(0, 3, 0.0) < 1e-9

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("y", [0.5, 2.0])
    def test_degrees_up_to_six(self, n, y):
        """Test the standard and even weights for l = 0..6"""
        for ell in range(7):
            case = "even" if ell >= 2 and ell % 2 == 0 else "standard"
            assert multiplier_inverse_identity(ell, n, y, case) < 1e-8

    def test_unit_interval_moments(self):
        """Test int_0^1 v^(-iy) v^k dv = 1/(k + 1 - iy) and a weighted moment"""
        for k in [0, 1, 3]:
            value = unit_interval_mellin(lambda v, k=k: v ** k, 0.0, 1.5)
            assert abs(value - 1 / (k + 1 - 1.5j)) < 1e-10
        assert unit_interval_mellin(np.ones_like, 1.0, 0.0) == pytest.approx(2 / 3, abs=1e-10)

    def test_weight_class_validation(self):
        """Test that each weight is tied to its degree class"""
        with pytest.raises(ValueError, match="outside"):
            inverse_weight(2, 3, "standard")
        with pytest.raises(ValueError, match="in \\{2, 4"):
            inverse_weight(3, 3, "even")
        with pytest.raises(ValueError, match="case must be"):
            inverse_weight(1, 3, "odd")


class TestOperatorIdentities:
    """
    Test cases for the Stirling operator identities on monomials
    """

    def test_all_residuals_vanish(self):
        """Test exact residuals for alpha <= 6 and k <= 8"""
        for alpha in range(1, 7):
            for k in range(9):
                assert operator_identity_residuals(alpha, k) == (0, 0, 0)

    def test_check_examples(self):
        """Test the summary check at (3, 2) and (5, 7)"""
        assert operator_identity_check(3, 2) == 0
        assert operator_identity_check(5, 7) == 0

    def test_invalid_inputs(self):
        """Test alpha and degree validation"""
        with pytest.raises(ValueError, match="positive integer"):
            operator_identity_residuals(0, 1)
        with pytest.raises(ValueError, match="nonnegative"):
            operator_identity_residuals(2, -1)
