"""
Dual Radon transform, truncated-power activations and the N^alpha reconstruction integral
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .barron import DualProfile
from .specfun import gauss_legendre
from .spherical import SphereQuadrature, sphere_quadrature

logger = logging.getLogger(__name__)

DEFAULT_B_ORDER = 24
DEFAULT_B_PANEL_WIDTH = 2.0
BALL_TOLERANCE = 1e-12

Array = np.ndarray
RidgeProfile = Callable[[Array, Array], Array]


def activation(alpha: int, b: Union[float, Array]) -> Union[float, Array]:
    """
    delta^(-alpha)(b) = b_+^(alpha-1) / (alpha-1)!, with the step at alpha = 1 and delta^(-1)(0) = 0.
    """
    if alpha < 1:
        raise ValueError("activation order alpha must be a positive integer")
    b = np.asarray(b, dtype=float)
    if alpha == 1:
        out = (b > 0).astype(float)
    else:
        out = np.where(b > 0, np.maximum(b, 0.0) ** (alpha - 1), 0.0) / math.factorial(alpha - 1)
    return float(out) if out.ndim == 0 else out


def _as_points(x: Array, n: int):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ValueError(f"points must have last dimension {n}")
    return x.reshape(-1, n), x.ndim == 1


def _check_ball(points: Array, r: float) -> None:
    if r <= 0:
        raise ValueError("radius r must be positive")
    if np.any(np.linalg.norm(points, axis=1) > r * (1 + BALL_TOLERANCE)):
        raise ValueError(f"points must lie in the ball K({r})")


def dual_radon(h: RidgeProfile, x: Array, rule: SphereQuadrature) -> Union[complex, Array]:
    """
    R*{h}(x) = sum_w weight(w) h(w, <w, x>).

    Args:
        h: Vectorized profile taking directions (k, n) and offsets (k,), e.g. DualProfile.pairs
        x: Point (n,) or points (m, n)
        rule: Sphere rule for the direction integral
    """
    points, single = _as_points(x, rule.n)
    out = np.empty(len(points), dtype=complex)
    for i, point in enumerate(points):
        values = np.asarray(h(rule.nodes, rule.nodes @ point), dtype=complex)
        out[i] = np.dot(rule.weights, values)
    return out[0] if single else out


def _ridge_row(
    profile: DualProfile,
    rule: SphereQuadrature,
    r: float,
    point: Array,
    b_order: int,
    b_panel_width: float,
) -> complex:
    alpha = profile.alpha
    s = rule.nodes @ point
    panels = max(1, math.ceil(2 * r / b_panel_width))
    reference = gauss_legendre(b_order)
    # panel j of [-r, s] in units of the full length s + r
    fractions = ((np.arange(panels)[:, None] + (reference.nodes[None, :] + 1) / 2) / panels).ravel()
    unit_weights = np.tile(reference.weights / 2 / panels, panels)
    length = s + r
    b = -r + length[:, None] * fractions[None, :]
    weights = length[:, None] * unit_weights[None, :]
    directions = np.repeat(rule.nodes, len(fractions), axis=0)
    h = profile.pairs(directions, b.ravel()).reshape(b.shape)
    kernel = (s[:, None] - b) ** (alpha - 1) / math.factorial(alpha - 1)
    per_direction = np.sum(weights * kernel * h, axis=1)
    return complex(np.dot(rule.weights, per_direction))


def ridge_integral(
    profile: DualProfile,
    r: float,
    x: Array,
    theta_rule: Optional[SphereQuadrature] = None,
    b_order: int = DEFAULT_B_ORDER,
    b_panel_width: float = DEFAULT_B_PANEL_WIDTH,
    threads: int = 1,
) -> Union[complex, Array]:
    """
    int_S int_{-r}^{r} h^alpha(w, b) delta^(-alpha)(<w, x> - b) db dw.

    The b-integral runs over [-r, <w, x>] only, so the jump (alpha = 1) or kink
    (alpha = 2) of the activation is a panel end.
    """
    alpha = profile.alpha
    if alpha < 1:
        raise ValueError("ridge integrals need alpha >= 1; use dual_radon for alpha = 0")
    theta_rule = theta_rule or sphere_quadrature(profile.n, 24)
    points, single = _as_points(x, profile.n)
    _check_ball(points, r)

    def row(point: Array) -> complex:
        return _ridge_row(profile, theta_rule, r, point, b_order, b_panel_width)

    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = np.array(list(pool.map(row, points)), dtype=complex)
    else:
        out = np.array([row(point) for point in points], dtype=complex)
    return out[0] if single else out


class BoundaryPolynomial:
    """
    P_r(x) = int_S sum_{k<alpha} h^k(w, -r) (<w, x> + r)^k / k! dw.

    The lower profiles are evaluated once at b = -r on the direction rule.
    """

    def __init__(self, profile: DualProfile, r: float, theta_rule: Optional[SphereQuadrature] = None):
        if r <= 0:
            raise ValueError("radius r must be positive")
        self.alpha = profile.alpha
        self.r = r
        self.rule = theta_rule or sphere_quadrature(profile.n, 24)
        edge = np.full(len(self.rule), -r)
        self.coefficients = np.array([
            profile.lower(k).pairs(self.rule.nodes, edge) / math.factorial(k)
            for k in range(self.alpha)
        ])
        logger.debug(f"Boundary polynomial of degree {self.alpha - 1} on {len(self.rule)} directions")

    def __call__(self, x: Array) -> Union[complex, Array]:
        points, single = _as_points(x, self.rule.n)
        shifted = points @ self.rule.nodes.T + self.r
        powers = shifted[None, :, :] ** np.arange(self.alpha)[:, None, None]
        values = np.einsum("kw,kpw,w->p", self.coefficients, powers, self.rule.weights)
        return values[0] if single else values


def boundary_polynomial(
    profile: DualProfile,
    r: float,
    x: Array,
    theta_rule: Optional[SphereQuadrature] = None,
) -> Union[complex, Array]:
    """Polynomial part P_r(x) of the N^alpha representation."""
    return BoundaryPolynomial(profile, r, theta_rule)(x)


def nalpha_eval(
    profile: DualProfile,
    alpha: int,
    r: float,
    x: Array,
    theta_rule: Optional[SphereQuadrature] = None,
    b_order: int = DEFAULT_B_ORDER,
    b_panel_width: float = DEFAULT_B_PANEL_WIDTH,
    threads: int = 1,
) -> Union[complex, Array]:
    """
    Reconstruct f on K(r) from h^alpha: ridge integral plus boundary polynomial.

    Args:
        profile: Dual profile h^alpha
        alpha: Activation order, must equal profile.alpha
        r: Ball radius
        x: Point (n,) or points (m, n) with |x| <= r
    """
    if profile.alpha != alpha:
        raise ValueError(f"profile has alpha={profile.alpha}, expected {alpha}")
    theta_rule = theta_rule or sphere_quadrature(profile.n, 24)
    ridges = ridge_integral(profile, r, x, theta_rule, b_order, b_panel_width, threads)
    return ridges + boundary_polynomial(profile, r, x, theta_rule)


def convolve_activation(
    h: Callable[[Array], Array],
    alpha: int,
    r: float,
    t: float,
    order: int = 48,
) -> complex:
    """
    h°(t) = [t <= r] int h(b) [-r <= b] delta^(-alpha)(t - b) db, by Gauss-Legendre on [-r, t].
    """
    if alpha < 1:
        raise ValueError("activation order alpha must be a positive integer")
    if t > r or t <= -r:
        return 0j
    rule = gauss_legendre(order, -r, t)
    kernel = activation(alpha, t - rule.nodes) if alpha > 1 else np.ones(order)
    return complex(np.dot(rule.weights, kernel * np.asarray(h(rule.nodes), dtype=complex)))


def boundary_taylor(edge_values: Sequence[complex], r: float, t: Union[float, Array]) -> Union[complex, Array]:
    """sum_k d_k (t + r)^k / k! from edge derivatives d_k = h^(k)(-r)."""
    t = np.asarray(t, dtype=float)
    total = sum(d * (t + r) ** k / math.factorial(k) for k, d in enumerate(edge_values))
    return complex(total) if np.ndim(total) == 0 else total


def sample_ball(n: int, r: float, count: int, rng: np.random.Generator) -> Array:
    """Uniform points in the ball K(r) of R^n."""
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = r * rng.random(count) ** (1 / n)
    return directions * radii[:, None]


def ball_lattice(n: int, r: float, resolution: int) -> Array:
    """
    Cubic lattice points of spacing r/resolution inside K(r).

    Returns:
        Array of shape (k, n), ordered lexicographically
    """
    if resolution < 1:
        raise ValueError("grid resolution must be a positive integer")
    axis = np.linspace(-r, r, 2 * resolution + 1)
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return mesh[np.linalg.norm(mesh, axis=1) <= r * (1 + BALL_TOLERANCE)]


def lipschitz_check(
    f: Callable[[Array], Array],
    n: int,
    r: float,
    pairs: int = 10_000,
    seed: int = 0,
) -> float:
    """
    Largest |f(x) - f(u)| / |x - u| over random pairs in K(r).

    Half of the pairs are independent uniform draws, half are local pairs at
    distance of order r/20, pulled back into the ball.
    """
    rng = np.random.default_rng(seed)
    half = pairs // 2
    x = sample_ball(n, r, pairs, rng)
    u = np.empty_like(x)
    u[:half] = sample_ball(n, r, half, rng)
    local = x[half:] + rng.standard_normal((pairs - half, n)) * r / 20
    norms = np.linalg.norm(local, axis=1, keepdims=True)
    u[half:] = np.where(norms > r, local * (r / norms), local)
    gaps = np.linalg.norm(x - u, axis=1)
    keep = gaps > 1e-12
    quotients = np.abs(np.asarray(f(x[keep])) - np.asarray(f(u[keep]))) / gaps[keep]
    value = float(np.max(quotients)) if quotients.size else 0.0
    logger.debug(f"Empirical Lipschitz quotient over {int(keep.sum())} pairs: {value:.6g}")
    return value
