"""
Quadrature on the unit sphere, zonal harmonics, Poisson kernel and Abel summation
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import ScheduleError
from .specfun import (
    Quadrature1D,
    gauss_jacobi,
    gegenbauer,
    gegenbauer_table,
    harmonic_dim,
    sphere_area,
)

logger = logging.getLogger(__name__)

POISSON_TAIL_TOLERANCE = 1e-10
POISSON_MAX_DEGREE = 10_000


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """
    Product rule on S^{n-1}.

    Attributes:
        n: Ambient dimension
        nodes: Unit vectors, shape (count, n)
        weights: Positive surface-measure weights, shape (count,)
        exact_degree: Highest polynomial degree integrated exactly
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __len__(self) -> int:
        return int(self.weights.size)

    def integrate(self, values: np.ndarray) -> Union[complex, np.ndarray]:
        """Weighted sum over the leading (node) axis of values."""
        total = np.tensordot(self.weights, np.asarray(values), axes=(0, 0))
        return total.item() if np.ndim(total) == 0 else total


@lru_cache(maxsize=32)
def _product_rule(n: int, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    if n == 2:
        count = 2 * resolution
        angles = 2 * math.pi * np.arange(count) / count
        nodes = np.column_stack([np.cos(angles), np.sin(angles)])
        return nodes, np.full(count, 2 * math.pi / count)

    polar = gauss_jacobi(resolution, (n - 3) / 2)
    sub_nodes, sub_weights = _product_rule(n - 1, resolution)
    radius = np.sqrt(1.0 - polar.nodes ** 2)
    first = np.repeat(polar.nodes, len(sub_weights))
    rest = (radius[:, None, None] * sub_nodes[None, :, :]).reshape(-1, n - 1)
    nodes = np.column_stack([first, rest])
    weights = np.outer(polar.weights, sub_weights).ravel()
    return nodes, weights


def sphere_quadrature(n: int, resolution: int) -> SphereQuadrature:
    """
    Build a product quadrature rule on S^{n-1}.

    n = 2 uses 2*resolution equispaced angles. For n >= 3 the first coordinate
    carries Gauss-Jacobi nodes for the weight (1 - t^2)^((n-3)/2) and the
    remaining coordinates a scaled rule on S^{n-2}.

    Args:
        n: Ambient dimension, at least 2
        resolution: Polar node count per recursion level

    Returns:
        SphereQuadrature exact for polynomials of degree <= 2*resolution - 1
    """
    if n < 2:
        raise ValueError("sphere quadrature needs n >= 2")
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    nodes, weights = _product_rule(n, resolution)
    logger.debug(f"Sphere rule on S^{n - 1}: {len(weights)} nodes at resolution {resolution}")
    return SphereQuadrature(n, nodes, weights, 2 * resolution - 1)


def random_unit_vectors(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform directions on S^{n-1} by normalizing Gaussian vectors."""
    raw = rng.standard_normal((count, n))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def zonal_constant(ell: int, n: int) -> float:
    """N(ell, n) / |S^{n-1}|, the value Z_ell(theta, theta)."""
    return harmonic_dim(ell, n) / sphere_area(n)


def zonal(ell: int, n: int, theta: np.ndarray, alpha: np.ndarray) -> Union[float, np.ndarray]:
    """
    Zonal harmonic Z_ell(theta, alpha) = N(ell,n)/|S^{n-1}| * C_ell^{(n-2)/2}(<theta, alpha>).

    alpha may be a stack of unit vectors with shape (..., n).
    """
    c = np.asarray(alpha) @ np.asarray(theta)
    return zonal_constant(ell, n) * gegenbauer(ell, (n - 2) / 2, c)


def zonal_table(ell_max: int, n: int, c: np.ndarray) -> np.ndarray:
    """Z_0..Z_ell_max as functions of the inner product c; shape (ell_max + 1,) + shape(c)."""
    table = gegenbauer_table(ell_max, (n - 2) / 2, c)
    scale = np.array([zonal_constant(ell, n) for ell in range(ell_max + 1)])
    return table * scale.reshape((-1,) + (1,) * np.ndim(c))


def funk_hecke_rhs(
    profile: Callable[[np.ndarray], np.ndarray],
    ell: int,
    n: int,
    rule: Quadrature1D,
) -> complex:
    """
    Funk-Hecke multiplier |S^{n-2}| * int h(v) C_ell(v) (1 - v^2)^((n-3)/2) dv.

    Args:
        profile: Vectorized h on [-1, 1]
        ell: Harmonic degree
        n: Ambient dimension
        rule: Gauss-Jacobi rule with exponent (n-3)/2

    Returns:
        The multiplier; integrating h(<theta, .>) against a degree-ell harmonic Y
        gives this value times Y(theta)
    """
    expected = (n - 3) / 2
    if rule.weight_exponent is not None and abs(rule.weight_exponent - expected) > 1e-12:
        raise ValueError(f"rule exponent {rule.weight_exponent} does not match (n-3)/2 = {expected}")
    values = np.asarray(profile(rule.nodes)) * gegenbauer(ell, (n - 2) / 2, rule.nodes)
    return sphere_area(n - 1) * rule.integrate(values)


def zonal_l1_norm(ell: int, n: int, count: Optional[int] = None) -> float:
    """int |Z_ell(theta, alpha)| d alpha over S^{n-1}, reduced to one dimension."""
    rule = gauss_jacobi(count or 4 * ell + 64, (n - 3) / 2)
    c = np.abs(gegenbauer(ell, (n - 2) / 2, rule.nodes))
    return zonal_constant(ell, n) * sphere_area(n - 1) * rule.integrate(c)


def poisson_truncation(n: int, R: float, tolerance: float = POISSON_TAIL_TOLERANCE) -> Tuple[int, float]:
    """
    Smallest degree L with a certified Poisson-series tail below tolerance.

    The term bound R^l N(l,n)/|S^{n-1}| uses |C_l| <= 1; once the ratio q of
    successive bounds drops below one the tail is at most t_{L+1} / (1 - q).

    Returns:
        (L, tail bound)

    Raises:
        ScheduleError: If no L <= 10^4 reaches the tolerance
    """
    if not 0 <= R < 1:
        raise ValueError("R must lie in [0, 1)")
    if R == 0:
        return 0, 0.0
    area = sphere_area(n)
    for L in range(POISSON_MAX_DEGREE + 1):
        nxt = harmonic_dim(L + 1, n)
        q = R * harmonic_dim(L + 2, n) / nxt
        if q >= 1:
            continue
        tail = R ** (L + 1) * nxt / area / (1 - q)
        if tail < tolerance:
            logger.debug(f"Poisson series at R={R}: degree {L}, tail bound {tail:.3e}")
            return L, tail
    raise ScheduleError(
        f"Poisson series at R={R} needs degree above {POISSON_MAX_DEGREE}",
        details={"n": n, "R": R, "tolerance": tolerance},
    )


def poisson_kernel(n: int, R: float, c: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Poisson kernel p(alpha, R theta) = sum_l R^l Z_l(theta, alpha) as a function of c = <theta, alpha>.

    Raises:
        ScheduleError: When R is too close to 1 for a degree-10^4 truncation
    """
    L, _ = poisson_truncation(n, R)
    table = zonal_table(L, n, np.asarray(c, dtype=float))
    powers = R ** np.arange(L + 1)
    out = np.tensordot(powers, table, axes=(0, 0))
    return out.item() if np.ndim(out) == 0 else out


def poisson_kernel_closed(n: int, R: float, c: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Closed form (1 - R^2) / (|S^{n-1}| (1 - 2Rc + R^2)^{n/2})."""
    c = np.asarray(c, dtype=float)
    out = (1 - R ** 2) / (sphere_area(n) * (1 - 2 * R * c + R ** 2) ** (n / 2))
    return out.item() if out.ndim == 0 else out


def poisson_smooth(values: np.ndarray, rule: SphereQuadrature, R: float, theta: np.ndarray) -> complex:
    """Poisson integral u(R theta) = int g(alpha) p(alpha, R theta) d alpha of sampled g."""
    kernel = poisson_kernel_closed(rule.n, R, rule.nodes @ np.asarray(theta))
    return rule.integrate(np.asarray(values) * kernel)


@dataclass
class AbelSchedule:
    """
    Parameters of an Abel summation.

    Attributes:
        R_values: Increasing radii in (0, 1) used for the extrapolation
        ell_max: Truncation degree
        tail_tolerance: Terms at or below this size on the last window certify the ordinary sum
    """

    R_values: Tuple[float, ...] = (0.9, 0.99, 0.999)
    ell_max: int = 48
    tail_tolerance: float = 1e-12

    def __post_init__(self):
        self.R_values = tuple(float(R) for R in self.R_values)
        if len(self.R_values) < 2:
            raise ValueError("Abel schedule needs at least two R values")
        if any(not 0 < R < 1 for R in self.R_values):
            raise ValueError("R values must lie in (0, 1)")
        if any(b <= a for a, b in zip(self.R_values, self.R_values[1:])):
            raise ValueError("R values must be strictly increasing")
        if self.ell_max < 0:
            raise ValueError("ell_max must be nonnegative")

    def truncation_tail(self, R: float, n: int, constant: float) -> float:
        """Bound of sum_{l > ell_max} R^l * constant * l^(n-2)."""
        L = self.ell_max
        first = R ** (L + 1) * constant * (L + 1) ** (n - 2)
        ratio = R * ((L + 2) / (L + 1)) ** (n - 2)
        if ratio >= 1:
            return math.inf
        return first / (1 - ratio)


@dataclass
class AbelDiagnostics:
    """Diagnostics of one Abel summation."""

    partial_means: Dict[float, complex]
    ordinary_sum: complex
    extrapolate: complex
    gaps: List[float]
    last_increment: float
    tail_certified: bool
    divergent: bool
    tail_bounds: Dict[float, float] = field(default_factory=dict)


def abel_sum(
    terms: Union[Callable[[int], complex], Sequence[complex], np.ndarray],
    schedule: Optional[AbelSchedule] = None,
    n: int = 2,
) -> Tuple[Union[complex, np.ndarray], AbelDiagnostics]:
    """
    Abel sum lim_{R -> 1} sum_l R^l a_l of a truncated series.

    When the last window of terms is below the schedule's tail tolerance the
    ordinary partial sum is returned; otherwise the linear extrapolation in
    (1 - R) through the two largest radii.

    Args:
        terms: Callable l -> a_l, or precomputed a_0..a_L (leading axis may carry
            extra point axes)
        schedule: Abel schedule (default AbelSchedule())
        n: Dimension used for the l^(n-2) growth bound in diagnostics

    Returns:
        (value, diagnostics); diagnostics are reported for the largest magnitude
        point when terms carry extra axes
    """
    schedule = schedule or AbelSchedule()
    if callable(terms):
        coeffs = np.array([terms(ell) for ell in range(schedule.ell_max + 1)], dtype=complex)
    else:
        coeffs = np.asarray(terms, dtype=complex)[: schedule.ell_max + 1]
        if coeffs.shape[0] < schedule.ell_max + 1:
            pad = [(0, schedule.ell_max + 1 - coeffs.shape[0])] + [(0, 0)] * (coeffs.ndim - 1)
            coeffs = np.pad(coeffs, pad)
    L = coeffs.shape[0] - 1
    degrees = np.arange(L + 1)

    def mean(R: float) -> np.ndarray:
        return np.tensordot(R ** degrees, coeffs, axes=(0, 0))

    partial = {R: mean(R) for R in schedule.R_values}
    ordinary = coeffs.sum(axis=0)

    r1, r2 = schedule.R_values[-2], schedule.R_values[-1]
    x1, x2 = 1 - r1, 1 - r2
    extrapolate = (x1 * partial[r2] - x2 * partial[r1]) / (x1 - x2)

    magnitudes = np.abs(coeffs).reshape(L + 1, -1)
    window = max(1, min(L + 1, max(4, (L + 1) // 8)))
    tail_certified = bool(np.all(magnitudes[-window:] <= schedule.tail_tolerance))
    value = ordinary if tail_certified else extrapolate

    worst = int(np.argmax(np.max(magnitudes, axis=0)))

    def pick(a: np.ndarray) -> complex:
        return complex(np.asarray(a).reshape(-1)[worst])

    gaps = [abs(pick(partial[R]) - pick(value)) for R in schedule.R_values]
    divergent = any(later > earlier for earlier, later in zip(gaps, gaps[1:]))
    last_increment = abs(pick(partial[r2]) - pick(partial[r1]))

    scaled = magnitudes[-window:, worst] / np.maximum(degrees[-window:], 1) ** max(n - 2, 0)
    constant = float(np.max(scaled)) if scaled.size else 0.0
    tail_bounds = {R: schedule.truncation_tail(R, n, constant) for R in schedule.R_values}

    if divergent:
        logger.warning(f"Abel partial means move away from the limit: gaps {gaps}")

    diagnostics = AbelDiagnostics(
        partial_means={R: pick(v) for R, v in partial.items()},
        ordinary_sum=pick(ordinary),
        extrapolate=pick(extrapolate),
        gaps=gaps,
        last_increment=last_increment,
        tail_certified=tail_certified,
        divergent=divergent,
        tail_bounds=tail_bounds,
    )
    if np.ndim(value) == 0:
        value = complex(value)
    return value, diagnostics
