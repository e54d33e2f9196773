"""
Tests for activations, the dual Radon transform and N^alpha reconstructions
"""

import math

import numpy as np
import pytest

from src.adz.barron import DualProfile, ZonalExpansion, closed_form_f, eval_f, gaussian, norm_1_inf, shifted_gaussian
from src.adz.radon import (
    activation,
    ball_lattice,
    boundary_taylor,
    convolve_activation,
    dual_radon,
    lipschitz_check,
    nalpha_eval,
    ridge_integral,
    sample_ball,
)
from src.adz.specfun import sphere_area
from src.adz.spherical import sphere_quadrature

THETA = np.array([0.48, 0.6, 0.64])


@pytest.fixture(scope="module")
def shifted():
    return shifted_gaussian(3)


@pytest.fixture(scope="module")
def points():
    return np.array([[0.0, 0.0, 0.0], [0.5, -0.4, 0.3], [-1.0, 0.6, 0.8], [0.0, 1.5, 0.0]])


class TestActivation:
    """
    Test cases for truncated-power activations
    """

    def test_examples(self):
        """Test ReLU, step and quadratic values"""
        assert activation(2, 1.5) == 1.5
        assert activation(1, -0.3) == 0.0
        assert activation(1, 0.3) == 1.0
        assert activation(3, 2.0) == 2.0

    def test_step_at_zero(self):
        """Test the convention delta^(-1)(0) = 0"""
        assert activation(1, 0.0) == 0.0

    def test_nonnegative_and_nondecreasing(self):
        """Test monotonicity on a grid for alpha = 1..4"""
        b = np.linspace(-3, 3, 601)
        for alpha in range(1, 5):
            values = activation(alpha, b)
            assert np.all(values >= 0)
            assert np.all(np.diff(values) >= 0)

    def test_invalid_order(self):
        """Test that alpha < 1 is rejected"""
        with pytest.raises(ValueError, match="positive integer"):
            activation(0, 1.0)


class TestDualRadon:
    """
    Test cases for R*{h}(x) = int h(w, <w, x>) dw
    """

    def test_constant_profile(self):
        """Test R*{c} = c |S^{n-1}|"""
        rule = sphere_quadrature(3, 8)
        value = dual_radon(lambda w, b: np.full(len(b), 2.0 + 0j), np.array([0.3, 0.1, -0.2]), rule)
        assert value == pytest.approx(2.0 * sphere_area(3), rel=1e-12)

    def test_radial_gaussian_recovers_f(self):
        """Test R*{h} = f for the radial Gaussian at |x| in {0, 1, 2}"""
        profile = DualProfile(gaussian(3), 0)
        rule = sphere_quadrature(3, 24)
        x = np.outer([0.0, 1.0, 2.0], THETA)
        np.testing.assert_allclose(dual_radon(profile.pairs, x, rule), closed_form_f(gaussian(3), x), atol=1e-6)

    def test_linearity(self, shifted):
        """Test R*{2 h1 - h2} = 2 R*{h1} - R*{h2}"""
        rule = sphere_quadrature(3, 8)
        h1 = DualProfile(shifted, 0).pairs
        h2 = DualProfile(gaussian(3), 0).pairs
        x = np.array([0.2, -0.5, 0.1])
        combined = dual_radon(lambda w, b: 2 * h1(w, b) - h2(w, b), x, rule)
        assert abs(combined - (2 * dual_radon(h1, x, rule) - dual_radon(h2, x, rule))) < 1e-12


class TestReconstruction:
    """
    Test cases for the N^alpha reconstruction integral
    """

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("alpha", [1, 2, 3])
    def test_radial_gaussian(self, n, alpha):
        """Test N^alpha reconstruction of the radial Gaussian on K(2)"""
        density = gaussian(n)
        x = np.array([np.zeros(n), np.full(n, 0.5), np.eye(n)[0] * 1.9])
        values = nalpha_eval(DualProfile(density, alpha), alpha, 2.0, x)
        np.testing.assert_allclose(values, closed_form_f(density, x), atol=1e-4)

    def test_shifted_gaussian(self, shifted, points):
        """Test alpha = 2 reconstruction of the shifted Gaussian on K(2)"""
        values = nalpha_eval(DualProfile(shifted, 2), 2, 2.0, points)
        np.testing.assert_allclose(values, closed_form_f(shifted, points), atol=1e-4)

    def test_alpha_independence(self, shifted, points):
        """Test that alpha = 1 and alpha = 2 reconstructions agree"""
        one = nalpha_eval(DualProfile(shifted, 1), 1, 2.0, points)
        two = nalpha_eval(DualProfile(shifted, 2), 2, 2.0, points)
        assert np.max(np.abs(one - two)) < 2e-4

    def test_radius_consistency(self):
        """Test that r = 2 and r = 3 reconstructions agree on K(2)"""
        profile = DualProfile(gaussian(3), 2)
        x = np.outer([0.0, 0.8, 1.6], THETA)
        assert np.max(np.abs(nalpha_eval(profile, 2, 2.0, x) - nalpha_eval(profile, 2, 3.0, x))) < 2e-4

    def test_zero_profile(self, shifted):
        """Test that h^alpha = 0 reconstructs 0"""
        profile = DualProfile(shifted.scaled(0.0), 2)
        value = nalpha_eval(profile, 2, 1.0, np.array([0.1, 0.2, 0.3]), sphere_quadrature(3, 8))
        assert value == 0

    def test_alpha_mismatch(self, shifted):
        """Test that the profile order must match alpha"""
        with pytest.raises(ValueError, match="expected 1"):
            nalpha_eval(DualProfile(shifted, 2), 1, 1.0, np.zeros(3))

    def test_points_outside_ball(self, shifted):
        """Test that points outside K(r) are rejected"""
        with pytest.raises(ValueError, match="must lie in the ball"):
            ridge_integral(DualProfile(shifted, 1), 1.0, np.array([1.0, 1.0, 0.0]))

    def test_ridge_needs_positive_alpha(self, shifted):
        """Test that alpha = 0 is routed to dual_radon"""
        with pytest.raises(ValueError, match="use dual_radon"):
            ridge_integral(DualProfile(shifted, 0), 1.0, np.zeros(3))

    def test_threads_do_not_change_values(self):
        """Test that parallel evaluation over points matches serial evaluation"""
        profile = DualProfile(gaussian(3), 2)
        rule = sphere_quadrature(3, 8)
        x = np.outer([0.1, 0.4, 0.9], THETA)
        serial = ridge_integral(profile, 1.0, x, rule)
        parallel = ridge_integral(profile, 1.0, x, rule, threads=3)
        np.testing.assert_array_equal(serial, parallel)

    @pytest.mark.slow
    def test_lattice_reconstruction(self, shifted):
        """Test alpha = 2 reconstruction on a lattice of K(1)"""
        x = ball_lattice(3, 1.0, 3)
        values = nalpha_eval(DualProfile(shifted, 2), 2, 1.0, x, threads=4)
        np.testing.assert_allclose(values, eval_f(shifted, x), atol=1e-4)


class TestConvolveActivation:
    """
    Test cases for the truncated convolution h°
    """

    @pytest.fixture(scope="class")
    def pieces(self):
        return ZonalExpansion(shifted_gaussian(3), THETA, 3)

    @pytest.mark.parametrize("ell", [0, 1, 3])
    @pytest.mark.parametrize("alpha", [1, 2])
    def test_undoes_derivative(self, pieces, ell, alpha):
        """Test h° plus the edge Taylor polynomial returns h_l on [-r, r]"""
        r = 2.0
        edge = [pieces.g_piece(ell, k, -r)[0] for k in range(alpha)]
        for t in [-1.5, 0.0, 1.2, 2.0]:
            convolved = convolve_activation(lambda b: pieces.g_piece(ell, alpha, b), alpha, r, t)
            value = convolved + boundary_taylor(edge, r, t)
            assert abs(value - pieces.g_piece(ell, 0, t)[0]) < 1e-5

    def test_vanishes_outside_interval(self, pieces):
        """Test the Iverson factor [t <= r] and the lower end t = -r"""
        h = lambda b: pieces.g_piece(1, 1, b)
        assert convolve_activation(h, 1, 1.0, 1.5) == 0
        assert convolve_activation(h, 1, 1.0, -1.0) == 0

    def test_step_is_running_integral(self):
        """Test alpha = 1 against int_{-r}^t b^2 db"""
        value = convolve_activation(lambda b: b ** 2, 1, 1.0, 0.5)
        assert value == pytest.approx((0.125 + 1) / 3, abs=1e-14)

    def test_norm_bound(self, pieces):
        """Test sup |h°| <= sup |h^alpha| (2r)^alpha / alpha! on a grid"""
        r = 1.5
        t = np.linspace(-r, r, 61)
        for alpha in [1, 2, 3]:
            sup_alpha = np.max(np.abs(pieces.g_piece(1, alpha, np.linspace(-r, r, 601))))
            convolved = [abs(convolve_activation(lambda b: pieces.g_piece(1, alpha, b), alpha, r, s)) for s in t]
            assert max(convolved) <= sup_alpha * (2 * r) ** alpha / math.factorial(alpha) * (1 + 1e-3)


class TestBallHelpers:
    """
    Test cases for ball sampling, lattices and Lipschitz estimates
    """

    def test_sample_ball_inside(self):
        """Test that samples lie in K(r)"""
        x = sample_ball(3, 2.0, 1000, np.random.default_rng(1))
        assert x.shape == (1000, 3)
        assert np.max(np.linalg.norm(x, axis=1)) <= 2.0 + 1e-12

    def test_lattice_points(self):
        """Test the coarsest lattice of the unit disc"""
        x = ball_lattice(2, 1.0, 1)
        assert len(x) == 5
        assert np.max(np.linalg.norm(x, axis=1)) <= 1.0

    def test_lattice_resolution_validation(self):
        """Test that the grid resolution must be positive"""
        with pytest.raises(ValueError, match="positive integer"):
            ball_lattice(2, 1.0, 0)

    def test_lipschitz_of_linear_map(self):
        """Test the empirical quotient of x -> 3 x_1"""
        value = lipschitz_check(lambda x: 3 * x[:, 0], 3, 1.0, pairs=2000)
        assert value <= 3.0 + 1e-12
        assert value > 2.5

    def test_step_reconstruction_is_lipschitz(self):
        """Test Lip(f) <= ||h^1||_(1,inf) for the radial Gaussian"""
        density = gaussian(3)
        bound = norm_1_inf(DualProfile(density, 1))
        value = lipschitz_check(lambda x: closed_form_f(density, x), 3, 2.0, pairs=4000)
        assert value <= bound * (1 + 1e-3)
