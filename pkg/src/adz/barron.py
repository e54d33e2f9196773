"""
Barron functions f = F{phi} from catalog source densities, their zonal pieces and dual profiles
"""

import logging
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from .exceptions import IntegrationError, UnsupportedCaseError
from .specfun import (
    Quadrature1D,
    bessel_kernel,
    cis_shifted,
    composite_gauss_legendre,
    gauss_jacobi,
    gauss_legendre,
    gegenbauer,
    quarter_phase,
    shifted_cos,
    sine_integral,
    sphere_area,
)
from .spherical import SphereQuadrature, sphere_quadrature, zonal_table

logger = logging.getLogger(__name__)

DEFAULT_RADIAL_ORDER = 24
DEFAULT_PANEL_WIDTH = 1.0
DEFAULT_SPHERE_RESOLUTION = 24
DEFAULT_T_COUNT = 2049
POINT_CHUNK = 32
DIRECTION_CHUNK = 64
PAIR_CHUNK = 4096
PARITIES = ("even", "odd", "mixed")

Array = np.ndarray


@dataclass(eq=False)
class SourceDensity:
    """
    A density phi in L1(R^n) with the metadata the quadratures need.

    Attributes:
        n: Dimension
        catalog_id: Catalog name
        func: Vectorized phi over points of shape (..., n)
        decay_radius: Radius P beyond which the weighted mass is negligible (or handled by norm_tail)
        radial: phi depends on |u| only
        radial_profile: phi as a function of |u| when radial
        inner_radius: phi vanishes for |u| < inner_radius
        parity: "even", "odd" or "mixed"
        max_alpha: Largest supported weight exponent alpha
        profile_scale: Decay scale of the dual profiles in t
        closed_form: Analytic Fourier transform, when known
        norm_tail: alpha -> int_{|u|>P} |u|^alpha |phi(u)| du, when not negligible
        profile_tail: (alpha, t) -> int_P^inf rho^{n-1+alpha} phi(rho) cos(t rho + alpha pi/2) d rho
        params: Catalog parameters
    """

    n: int
    catalog_id: str
    func: Callable[[Array], Array]
    decay_radius: float
    radial: bool = False
    radial_profile: Optional[Callable[[Array], Array]] = None
    inner_radius: float = 0.0
    parity: str = "mixed"
    max_alpha: int = 6
    profile_scale: float = 1.0
    closed_form: Optional[Callable[[Array], Array]] = None
    norm_tail: Optional[Callable[[int], float]] = None
    profile_tail: Optional[Callable[[int, Array], Array]] = None
    params: Dict[str, float] = field(default_factory=dict)
    _cache: Dict[Tuple, object] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("densities need dimension n >= 2")
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of: {', '.join(PARITIES)}")
        if self.radial and self.radial_profile is None:
            raise ValueError("radial densities need a radial_profile")
        if self.decay_radius <= self.inner_radius:
            raise ValueError("decay_radius must exceed inner_radius")

    def __call__(self, u: Array) -> Array:
        return self.func(np.asarray(u, dtype=float))

    def scaled(self, c: complex) -> "SourceDensity":
        """The density c*phi with every derived quantity rescaled."""
        def scale(fn):
            return None if fn is None else (lambda *args: c * fn(*args))

        return replace(
            self,
            func=scale(self.func),
            radial_profile=scale(self.radial_profile),
            closed_form=scale(self.closed_form),
            norm_tail=None if self.norm_tail is None else (lambda a: abs(c) * self.norm_tail(a)),
            profile_tail=scale(self.profile_tail),
            params={**self.params, "scale": c},
        )

    def _cached(self, key: Tuple, build: Callable[[], object]) -> object:
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    def radial_rule(
        self,
        order: int = DEFAULT_RADIAL_ORDER,
        panel_width: float = DEFAULT_PANEL_WIDTH,
    ) -> Quadrature1D:
        """Composite Gauss-Legendre rule on [inner_radius, decay_radius]."""
        return self._cached(
            ("radial", order, panel_width),
            lambda: composite_gauss_legendre(self.inner_radius, self.decay_radius, panel_width, order),
        )

    def ball_grid(
        self,
        sphere_resolution: int = DEFAULT_SPHERE_RESOLUTION,
        order: int = DEFAULT_RADIAL_ORDER,
        panel_width: float = DEFAULT_PANEL_WIDTH,
    ) -> Tuple[Quadrature1D, SphereQuadrature, Array]:
        """
        Radial rule, sphere rule and phi at every product node.

        Returns:
            (radial rule, sphere rule, phi values of shape (radial nodes, sphere nodes))
        """
        def build():
            radial = self.radial_rule(order, panel_width)
            sphere = sphere_quadrature(self.n, sphere_resolution)
            points = radial.nodes[:, None, None] * sphere.nodes[None, :, :]
            values = np.asarray(self(points), dtype=complex)
            logger.debug(
                f"Ball grid for {self.catalog_id}: {values.size} nodes "
                f"({len(radial)} radial x {len(sphere)} directions)"
            )
            return radial, sphere, values

        return self._cached(("ball", sphere_resolution, order, panel_width), build)

    def check_radial(self, samples: int = 100, seed: int = 0) -> float:
        """Largest |phi(u) - phi(|u| w)| over random u and random directions w."""
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((samples, self.n)) * self.decay_radius / 3
        w = rng.standard_normal((samples, self.n))
        w *= (np.linalg.norm(u, axis=1) / np.linalg.norm(w, axis=1))[:, None]
        return float(np.max(np.abs(self(u) - self(w))))


def _radial(profile: Callable[[Array], Array]) -> Callable[[Array], Array]:
    return lambda u: profile(np.linalg.norm(u, axis=-1))


def gaussian(n: int) -> SourceDensity:
    """phi(u) = exp(-|u|^2/2), f(x) = (2 pi)^{n/2} exp(-|x|^2/2)."""
    profile = lambda rho: np.exp(-np.asarray(rho) ** 2 / 2)
    return SourceDensity(
        n=n,
        catalog_id="gaussian",
        func=_radial(profile),
        decay_radius=10.0,
        radial=True,
        radial_profile=profile,
        parity="even",
        closed_form=lambda x: (2 * math.pi) ** (n / 2) * np.exp(-np.sum(np.asarray(x) ** 2, axis=-1) / 2) + 0j,
    )


def shifted_gaussian(n: int, center: float = 1.0) -> SourceDensity:
    """phi(u) = exp(-|u - c e1|^2/2), f(x) = (2 pi)^{n/2} exp(i c x1 - |x|^2/2)."""
    shift = np.zeros(n)
    shift[0] = center

    def func(u: Array) -> Array:
        return np.exp(-np.sum((u - shift) ** 2, axis=-1) / 2)

    def closed(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return (2 * math.pi) ** (n / 2) * np.exp(1j * center * x[..., 0] - np.sum(x ** 2, axis=-1) / 2)

    return SourceDensity(
        n=n,
        catalog_id="shifted_gaussian",
        func=func,
        decay_radius=abs(center) + 10.0,
        parity="mixed",
        closed_form=closed,
        params={"center": center},
    )


def harmonic_gaussian(n: int) -> SourceDensity:
    """phi(u) = u1 exp(-|u|^2/2), f(x) = i x1 (2 pi)^{n/2} exp(-|x|^2/2)."""
    def func(u: Array) -> Array:
        return u[..., 0] * np.exp(-np.sum(u ** 2, axis=-1) / 2)

    def closed(x: Array) -> Array:
        x = np.asarray(x, dtype=float)
        return 1j * x[..., 0] * (2 * math.pi) ** (n / 2) * np.exp(-np.sum(x ** 2, axis=-1) / 2)

    return SourceDensity(
        n=n,
        catalog_id="harmonic_gaussian",
        func=func,
        decay_radius=10.0,
        parity="odd",
        closed_form=closed,
    )


def radial_shell(n: int, inner: float = 1.0, outer: float = 3.0, width: float = 0.25) -> SourceDensity:
    """Smoothed indicator of the annulus inner < |u| < outer."""
    if not 0 < inner < outer:
        raise ValueError("radial_shell needs 0 < inner < outer")
    if width <= 0:
        raise ValueError("radial_shell width must be positive")

    def profile(rho: Array) -> Array:
        rho = np.asarray(rho)
        return 0.5 * (np.tanh((rho - inner) / width) - np.tanh((rho - outer) / width))

    return SourceDensity(
        n=n,
        catalog_id="radial_shell",
        func=_radial(profile),
        decay_radius=outer + 20 * width,
        radial=True,
        radial_profile=profile,
        parity="even",
        profile_scale=1 / width,
        params={"inner": inner, "outer": outer, "width": width},
    )


def sigma(n: int, decay_radius: float = 200.0) -> SourceDensity:
    """phi(u) = [|u| > 1] / |u|^{n+1}; algebraic decay, alpha = 0 only."""
    area = sphere_area(n)

    def profile(rho: Array) -> Array:
        rho = np.asarray(rho, dtype=float)
        safe = np.where(rho > 1, rho, 1.0)
        return np.where(rho > 1, safe ** (-n - 1), 0.0)

    def norm_tail(alpha: int) -> float:
        return area / decay_radius

    def profile_tail(alpha: int, t: Array) -> Array:
        at = np.abs(np.asarray(t, dtype=float))
        return np.cos(at * decay_radius) / decay_radius - at * (math.pi / 2 - sine_integral(at * decay_radius))

    return SourceDensity(
        n=n,
        catalog_id="sigma",
        func=_radial(profile),
        decay_radius=decay_radius,
        radial=True,
        radial_profile=profile,
        inner_radius=1.0,
        parity="even",
        max_alpha=0,
        norm_tail=norm_tail,
        profile_tail=profile_tail,
        params={"decay_radius": decay_radius},
    )


CATALOG: Dict[str, Callable[..., SourceDensity]] = {
    "gaussian": gaussian,
    "shifted_gaussian": shifted_gaussian,
    "harmonic_gaussian": harmonic_gaussian,
    "radial_shell": radial_shell,
    "sigma": sigma,
}


def catalog_density(catalog_id: str, n: int, **params) -> SourceDensity:
    """
    Build a catalog density by name.

    Raises:
        UnsupportedCaseError: If the name is not in the catalog
    """
    try:
        factory = CATALOG[catalog_id]
    except KeyError:
        raise UnsupportedCaseError(
            f"Unknown density '{catalog_id}'. Available: {', '.join(CATALOG)}",
            details={"catalog_id": catalog_id},
        )
    return factory(n, **params)


def _check_alpha(density: SourceDensity, alpha: int) -> None:
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha > density.max_alpha:
        raise UnsupportedCaseError(
            f"{density.catalog_id} supports alpha <= {density.max_alpha}",
            details={"alpha": alpha},
        )


def _as_points(x: Array, n: int) -> Tuple[Array, bool]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ValueError(f"points must have last dimension {n}")
    single = x.ndim == 1
    return x.reshape(-1, n), single


def eval_f(
    density: SourceDensity,
    x: Array,
    sphere_resolution: int = DEFAULT_SPHERE_RESOLUTION,
    radial_order: int = DEFAULT_RADIAL_ORDER,
    panel_width: float = DEFAULT_PANEL_WIDTH,
) -> Union[complex, Array]:
    """
    f(x) = int phi(u) exp(i <u, x>) du by radial-angular quadrature.

    Radial densities use the one-dimensional Bessel form
    (2 pi)^{n/2} int rho^{n-1} phi(rho) J_lam(rho r) / (rho r)^lam d rho.

    Args:
        density: Source density
        x: Point of shape (n,) or points of shape (k, n)

    Returns:
        Complex value, or array of shape (k,)
    """
    points, single = _as_points(x, density.n)
    n = density.n
    if density.radial:
        rule = density.radial_rule(radial_order, panel_width)
        lam = (n - 2) / 2
        coeff = rule.weights * rule.nodes ** (n - 1) * density.radial_profile(rule.nodes)
        radii = np.linalg.norm(points, axis=1)
        kernel = bessel_kernel(lam, lam, np.outer(radii, rule.nodes))
        out = (2 * math.pi) ** (n / 2) * (kernel @ coeff) + 0j
        if density.norm_tail is not None:
            out = out + np.where(radii == 0, density.norm_tail(0), 0.0)
    else:
        radial, sphere, values = density.ball_grid(sphere_resolution, radial_order, panel_width)
        weights = (radial.weights * radial.nodes ** (n - 1))[:, None] * sphere.weights[None, :]
        mass = (weights * values).ravel()
        nodes = (radial.nodes[:, None, None] * sphere.nodes[None, :, :]).reshape(-1, n)
        out = np.empty(len(points), dtype=complex)
        for start in range(0, len(points), POINT_CHUNK):
            chunk = points[start:start + POINT_CHUNK]
            out[start:start + POINT_CHUNK] = np.exp(1j * (chunk @ nodes.T)) @ mass
    return out[0] if single else out


def closed_form_f(density: SourceDensity, x: Array) -> Union[complex, Array]:
    """Analytic Fourier transform of a catalog density."""
    if density.closed_form is None:
        raise UnsupportedCaseError(f"{density.catalog_id} has no closed-form transform")
    points, single = _as_points(x, density.n)
    out = np.asarray(density.closed_form(points), dtype=complex)
    return out[0] if single else out


def barron_norm(
    density: SourceDensity,
    alpha: int,
    sphere_resolution: int = DEFAULT_SPHERE_RESOLUTION,
    radial_order: int = DEFAULT_RADIAL_ORDER,
    panel_width: float = DEFAULT_PANEL_WIDTH,
) -> float:
    """int |u|^alpha |phi(u)| du by radial-angular quadrature plus any declared tail."""
    _check_alpha(density, alpha)
    n = density.n
    tail = density.norm_tail(alpha) if density.norm_tail is not None else 0.0
    if density.radial:
        rule = density.radial_rule(radial_order, panel_width)
        body = sphere_area(n) * np.sum(
            rule.weights * rule.nodes ** (n - 1 + alpha) * np.abs(density.radial_profile(rule.nodes))
        )
        return float(body + tail)
    radial, sphere, values = density.ball_grid(sphere_resolution, radial_order, panel_width)
    weights = (radial.weights * radial.nodes ** (n - 1 + alpha))[:, None] * sphere.weights[None, :]
    return float(np.sum(weights * np.abs(values)) + tail)


class ZonalExpansion:
    """
    Zonal pieces of f and G along one direction theta.

    The angular moments A_l(rho) = int phi(rho w) Z_l(theta, w) dw are
    computed once for l <= ell_max; every piece is a radial sum over them.
    """

    def __init__(
        self,
        density: SourceDensity,
        theta: Array,
        ell_max: int,
        sphere_resolution: Optional[int] = None,
        radial_order: int = DEFAULT_RADIAL_ORDER,
        panel_width: float = DEFAULT_PANEL_WIDTH,
    ):
        if ell_max < 0:
            raise ValueError("ell_max must be nonnegative")
        self.density = density
        self.n = density.n
        self.ell_max = ell_max
        self.theta = np.asarray(theta, dtype=float) / np.linalg.norm(theta)
        resolution = sphere_resolution or max(DEFAULT_SPHERE_RESOLUTION, ell_max + 12)
        radial, sphere, values = density.ball_grid(resolution, radial_order, panel_width)
        zonals = zonal_table(ell_max, self.n, sphere.nodes @ self.theta)
        self.rho = radial.nodes
        self.radial_weights = radial.weights
        self.moments = values @ (zonals * sphere.weights[None, :]).T
        logger.debug(f"Angular moments for {density.catalog_id}: degrees 0..{ell_max}, {len(sphere)} directions")

    def _check_ell(self, ell: int) -> None:
        if not 0 <= ell <= self.ell_max:
            raise ValueError(f"degree {ell} outside 0..{self.ell_max}")

    def f_piece(self, ell: int, t: Array) -> Array:
        """f_l(theta, t) = (2 pi)^{n/2} i^l int phi(u) Z_l(theta, u/|u|) J_{l+lam}(t|u|)/(t|u|)^lam du."""
        self._check_ell(ell)
        t = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
        lam = (self.n - 2) / 2
        coeff = self.radial_weights * self.rho ** (self.n - 1) * self.moments[:, ell]
        kernel = bessel_kernel(ell + lam, lam, np.outer(t, self.rho))
        return (2 * math.pi) ** (self.n / 2) * quarter_phase(ell) * (kernel @ coeff)

    def f_pieces(self, t: float) -> Array:
        """f_0..f_ell_max at one t."""
        return np.array([self.f_piece(ell, t)[0] for ell in range(self.ell_max + 1)])

    def g_piece(self, ell: int, alpha: int, t: Array) -> Array:
        """G_l^alpha(theta, t) = int phi(u)|u|^alpha Z_l(theta, u/|u|) cis_l(t|u| + alpha pi/2) du."""
        self._check_ell(ell)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        coeff = self.radial_weights * self.rho ** (self.n - 1 + alpha) * self.moments[:, ell]
        return cis_shifted(ell, alpha, np.outer(t, self.rho)) @ coeff

    def g_pieces(self, alpha: int, t: float) -> Array:
        """G_0^alpha..G_ell_max^alpha at one t."""
        return np.array([self.g_piece(ell, alpha, t)[0] for ell in range(self.ell_max + 1)])


def zonal_piece_f(density: SourceDensity, ell: int, theta: Array, t: Array) -> Union[complex, Array]:
    """Zonal piece f_l(theta, t) of f = F{phi}."""
    values = ZonalExpansion(density, theta, ell).f_piece(ell, t)
    return values[0] if np.ndim(t) == 0 else values


def g_profile(density: SourceDensity, alpha: int, ell: int, theta: Array, t: Array) -> Union[complex, Array]:
    """G_l (alpha = 0) or h_l^alpha (alpha >= 1) along theta."""
    _check_alpha(density, alpha)
    values = ZonalExpansion(density, theta, ell).g_piece(ell, alpha, t)
    return values[0] if np.ndim(t) == 0 else values


def _even_count(count: int) -> int:
    return count + (count % 2)


def inversion_rhs(
    expansion: ZonalExpansion,
    ell: int,
    t: float,
    count: int = 64,
) -> complex:
    """2|S^{n-2}| int_0^1 G_l(theta, t v) C_l(v) (1 - v^2)^{(n-3)/2} dv."""
    n = expansion.n
    rule = gauss_jacobi(count, (n - 3) / 2)
    g = expansion.g_piece(ell, 0, t * rule.nodes)
    return sphere_area(n - 1) * rule.integrate(g * gegenbauer(ell, (n - 2) / 2, rule.nodes))


def f_identity_rhs(
    expansion: ZonalExpansion,
    ell: int,
    t: float,
    count: int = 64,
) -> complex:
    """2|S^{n-2}| int_0^1 G_l(theta, t v) C_{l-1}^{n/2}(v) / ((n-1) v) (1 - v^2)^{(n-1)/2} dv for even l."""
    if ell < 2 or ell % 2:
        raise ValueError("F is defined for even degrees ell >= 2")
    n = expansion.n
    rule = gauss_jacobi(_even_count(count), (n - 1) / 2)
    v = rule.nodes
    g = expansion.g_piece(ell, 0, t * v)
    weight = gegenbauer(ell - 1, n / 2, v) / ((n - 1) * v)
    return sphere_area(n - 1) * rule.integrate(g * weight)


def tail_integral_F(
    density: SourceDensity,
    ell: int,
    theta: Array,
    t: float,
    panel_width: float = 1.0,
    order: int = 24,
    tolerance: float = 1e-13,
    max_panels: int = 400,
    expansion: Optional[ZonalExpansion] = None,
) -> complex:
    """
    F_l(theta, t) = -int_t^inf f_l(theta, v) dv / v for even l >= 2.

    Panels are added until three consecutive increments fall below tolerance.

    Raises:
        IntegrationError: If the cap of max_panels is reached first
    """
    if ell < 2 or ell % 2:
        raise ValueError("F is defined for even degrees ell >= 2")
    if t <= 0:
        raise ValueError("t must be positive")
    expansion = expansion or ZonalExpansion(density, theta, ell)
    x, w = special.roots_legendre(order)
    total = 0j
    quiet = 0
    increment = math.inf
    for k in range(max_panels):
        lo = t + k * panel_width
        v = lo + (x + 1) * panel_width / 2
        increment = panel_width / 2 * np.sum(w * expansion.f_piece(ell, v) / v)
        total += increment
        quiet = quiet + 1 if abs(increment) < tolerance else 0
        if quiet >= 3:
            logger.debug(f"F_{ell} tail converged after {k + 1} panels")
            return -total
    raise IntegrationError(
        f"F_{ell} tail integral did not converge within {max_panels} panels",
        details={"t": t, "last_increment": abs(increment)},
    )


class DualProfile:
    """
    h^alpha(theta, t) = 1/2 i^alpha int rho^{n-1} phi°(theta rho) e^{i t rho} d rho
                      + 1/2 (-i)^alpha int rho^{n-1} phi°(-theta rho) e^{-i t rho} d rho,
    with phi°(u) = |u|^alpha phi(u).

    Attributes:
        alpha: Derivative order
        density: Source density
        table: Tabulated values over (theta nodes, t grid) after tabulate()
        sup_per_theta: Refined max_t |h(theta, t)| per theta node after tabulate()
        edge_max: Largest |h| on the t-grid ends, the truncation estimate
    """

    def __init__(
        self,
        density: SourceDensity,
        alpha: int,
        radial_order: int = DEFAULT_RADIAL_ORDER,
        panel_width: float = DEFAULT_PANEL_WIDTH,
    ):
        _check_alpha(density, alpha)
        self.density = density
        self.alpha = alpha
        self.n = density.n
        self.radial_order = radial_order
        self.panel_width = panel_width
        rule = density.radial_rule(radial_order, panel_width)
        self.rho = rule.nodes
        self.weights = rule.weights * rule.nodes ** (self.n - 1 + alpha)
        self.table: Optional[Array] = None
        self.t_grid: Optional[Array] = None
        self.theta_rule: Optional[SphereQuadrature] = None
        self.sup_per_theta: Optional[Array] = None
        self.edge_max: Optional[float] = None

    @property
    def half_width(self) -> float:
        """Default t-range T = 4 (1 + decay scale)."""
        return 4.0 * (1.0 + self.density.profile_scale)

    def default_t_grid(self, count: int = DEFAULT_T_COUNT) -> Array:
        count = count + (1 - count % 2)
        return np.linspace(-self.half_width, self.half_width, count)

    def lower(self, k: int) -> "DualProfile":
        """The profile h^k of the same density."""
        return DualProfile(self.density, k, self.radial_order, self.panel_width)

    def _radial_values(self, t: Array) -> Array:
        phases = shifted_cos(self.alpha, np.multiply.outer(t, self.rho))
        values = phases @ (self.weights * self.density.radial_profile(self.rho))
        if self.density.profile_tail is not None:
            values = values + self.density.profile_tail(self.alpha, t)
        return values + 0j

    def _ray_coefficients(self, directions: Array) -> Tuple[Array, Array]:
        points = directions[:, None, :] * self.rho[None, :, None]
        plus = 0.5 * quarter_phase(self.alpha) * self.weights * self.density(points)
        minus = 0.5 * quarter_phase(-self.alpha) * self.weights * self.density(-points)
        return plus, minus

    def __call__(self, theta: Array, t: Array) -> Union[complex, Array]:
        """
        Evaluate on directions x t-values.

        Args:
            theta: Unit vector (n,) or stack (k, n)
            t: Scalar or 1-D array (m,)

        Returns:
            Scalar, (m,), or (k, m) matching the inputs
        """
        theta = np.asarray(theta, dtype=float)
        directions = np.atleast_2d(theta)
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if self.density.radial:
            out = np.broadcast_to(self._radial_values(ts), (len(directions), len(ts))).copy()
        else:
            phase = np.exp(1j * np.outer(self.rho, ts))
            out = np.empty((len(directions), len(ts)), dtype=complex)
            for start in range(0, len(directions), DIRECTION_CHUNK):
                plus, minus = self._ray_coefficients(directions[start:start + DIRECTION_CHUNK])
                out[start:start + DIRECTION_CHUNK] = plus @ phase + minus @ phase.conj()
        if theta.ndim == 1:
            out = out[0]
            return out[0] if np.ndim(t) == 0 else out
        return out

    def pairs(self, directions: Array, b: Array) -> Array:
        """h(w_j, b_j) for matched arrays of directions (k, n) and offsets (k,)."""
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if self.density.radial:
            return self._radial_values(b)
        out = np.empty(len(b), dtype=complex)
        for start in range(0, len(b), PAIR_CHUNK):
            stop = start + PAIR_CHUNK
            plus, minus = self._ray_coefficients(directions[start:stop])
            phase = np.exp(1j * np.outer(b[start:stop], self.rho))
            out[start:stop] = np.sum(plus * phase + minus * phase.conj(), axis=1)
        return out

    def _refine(self, theta: Array, t_grid: Array, index: int) -> float:
        lo = t_grid[max(index - 1, 0)]
        hi = t_grid[min(index + 1, len(t_grid) - 1)]
        result = optimize.minimize_scalar(
            lambda s: -abs(self(theta, s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        return -float(result.fun)

    def tabulate(self, theta_rule: SphereQuadrature, t_grid: Optional[Array] = None) -> Array:
        """
        Tabulate |h| over theta nodes x t grid and refine each per-direction maximum.

        Returns:
            The table of shape (theta nodes, t points)
        """
        if theta_rule.n != self.n:
            raise ValueError("theta rule dimension does not match the profile")
        t_grid = self.default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
        if self.density.radial:
            row = self._radial_values(t_grid)
            index = int(np.argmax(np.abs(row)))
            sup = max(float(np.abs(row[index])), self._refine(theta_rule.nodes[0], t_grid, index))
            table = np.broadcast_to(row, (len(theta_rule), len(t_grid)))
            sups = np.full(len(theta_rule), sup)
        else:
            table = self(theta_rule.nodes, t_grid)
            magnitudes = np.abs(table)
            indices = np.argmax(magnitudes, axis=1)
            sups = np.array([
                max(magnitudes[j, k], self._refine(theta_rule.nodes[j], t_grid, k))
                for j, k in enumerate(indices)
            ])
        self.table = table
        self.t_grid = t_grid
        self.theta_rule = theta_rule
        self.sup_per_theta = sups
        self.edge_max = float(np.max(np.abs(table[:, [0, -1]])))
        logger.debug(
            f"h^{self.alpha} table for {self.density.catalog_id}: T={t_grid[-1]:.2f}, "
            f"edge max {self.edge_max:.2e}"
        )
        return table


def h_profile(density: SourceDensity, alpha: int, theta: Array, t: Array) -> Union[complex, Array]:
    """h^alpha(theta, t) of a density."""
    return DualProfile(density, alpha)(theta, t)


def norm_1_inf(
    profile: DualProfile,
    theta_rule: Optional[SphereQuadrature] = None,
    t_grid: Optional[Array] = None,
) -> float:
    """||h||_{1,inf} = int max_t |h(theta, t)| d theta over the tabulated grid."""
    theta_rule = theta_rule or sphere_quadrature(profile.n, DEFAULT_SPHERE_RESOLUTION)
    profile.tabulate(theta_rule, t_grid)
    if profile.density.radial:
        return float(sphere_area(profile.n) * profile.sup_per_theta[0])
    return float(np.dot(theta_rule.weights, profile.sup_per_theta))


def _sigma_rule(r: float, decay_radius: float, order: int) -> Quadrature1D:
    width = 2.0 if r <= 0 else min(2.0, 3.0 / r)
    breaks = (1.125, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)
    return composite_gauss_legendre(1.0, decay_radius, width, order, breaks)


def sigma_fourier_direct(n: int, r: float, decay_radius: Optional[float] = None, order: int = 24) -> float:
    """
    F{sigma}(x) at |x| = r for sigma(u) = [|u| > 1] / |u|^{n+1}, by the radial Bessel integral.

    The integral runs to P = max(400, 400/r); at r = 0 the exact tail |S^{n-1}|/P is added.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    P = decay_radius or (400.0 if r == 0 else max(400.0, 400.0 / r))
    rule = _sigma_rule(r, P, order)
    lam = (n - 2) / 2
    body = (2 * math.pi) ** (n / 2) * np.sum(rule.weights * rule.nodes ** -2 * bessel_kernel(lam, lam, r * rule.nodes))
    if r == 0:
        body += sphere_area(n) / P
    return float(body)


def _sigma_angle_rule(order: int = 32, panels: int = 4) -> Tuple[Array, Array]:
    rule = composite_gauss_legendre(0.0, math.pi / 2, math.pi / (2 * panels), order)
    return rule.nodes, rule.weights


def _sigma_integral(n: int, r: float, integrand: Callable[[Array], Array]) -> float:
    psi, w = _sigma_angle_rule()
    v = np.sin(psi)
    return float(np.sum(w * np.cos(psi) ** (n - 2) * integrand(v)))


def sigma_closed_form(n: int, r: float, kappa: float = 1.0) -> float:
    """kappa * 2 int_0^1 (1-v^2)^{(n-3)/2} (cos(vr) + vr Si(vr) - (pi/2) vr) dv, via v = sin(psi)."""
    def g(v):
        s = v * r
        return np.cos(s) + s * sine_integral(s) - math.pi / 2 * s
    return 2 * kappa * _sigma_integral(n, r, g)


def sigma_linear_part(n: int, r: float, kappa: float = 1.0) -> float:
    """Linear part -kappa pi r / (n-1) of the closed form."""
    return -kappa * math.pi * r / (n - 1)


def laplacian_g_closed(n: int, r: float, kappa: float = 1.0) -> float:
    """Radial Laplacian of G: 2 kappa int v^2 w(v) (sin(vr)/(vr) + (n-1) Si(vr)/(vr)) dv."""
    def g(v):
        s = v * r
        safe = np.where(s == 0, 1.0, s)
        si_ratio = np.where(s == 0, 1.0, sine_integral(safe) / safe)
        return v ** 2 * (np.sinc(s / math.pi) + (n - 1) * si_ratio)
    return 2 * kappa * _sigma_integral(n, r, g)
