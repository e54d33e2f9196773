"""
Special functions and combinatorial primitives shared by every adz module
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import special

from .exceptions import PoleError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, complex, np.ndarray]

POLE_TOLERANCE = 1e-14
BESSEL_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True, eq=False)
class Quadrature1D:
    """
    One-dimensional quadrature rule.

    Attributes:
        nodes: Strictly increasing abscissae
        weights: Positive weights, one per node
        degree: Highest polynomial degree integrated exactly against the rule's weight
        weight_exponent: Exponent e of the weight (1 - v^2)^e, None for plain panels
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    weight_exponent: Optional[float] = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights must have the same length")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.nodes.size)

    def integrate(self, integrand: Union[Callable[[np.ndarray], np.ndarray], np.ndarray]) -> complex:
        """
        Apply the rule to a vectorized callable or to precomputed node values.

        Returns:
            The weighted sum; real inputs give a real result
        """
        values = integrand(self.nodes) if callable(integrand) else np.asarray(integrand)
        total = np.tensordot(self.weights, values, axes=(0, 0))
        return total.item() if np.ndim(total) == 0 else total


def cis(ell: int, x: ArrayLike) -> ArrayLike:
    """cos(x) for even ell, i*sin(x) for odd ell."""
    if ell % 2 == 0:
        return np.cos(x)
    return 1j * np.sin(x)


def shifted_cos(alpha: int, x: ArrayLike) -> ArrayLike:
    """cos(x + alpha*pi/2) by exact quarter-turn rotation."""
    turn = alpha % 4
    if turn == 0:
        return np.cos(x)
    if turn == 1:
        return -np.sin(x)
    if turn == 2:
        return -np.cos(x)
    return np.sin(x)


def shifted_sin(alpha: int, x: ArrayLike) -> ArrayLike:
    """sin(x + alpha*pi/2) by exact quarter-turn rotation."""
    return shifted_cos(alpha - 1, x)


def cis_shifted(ell: int, alpha: int, x: ArrayLike) -> ArrayLike:
    """cis_ell(x + alpha*pi/2)."""
    if ell % 2 == 0:
        return shifted_cos(alpha, x)
    return 1j * shifted_sin(alpha, x)


def quarter_phase(alpha: int) -> complex:
    """i^alpha without rounding."""
    return (1, 1j, -1, -1j)[alpha % 4]


def _is_pole(z: np.ndarray) -> np.ndarray:
    return (
        (np.abs(z.imag) <= POLE_TOLERANCE)
        & (z.real <= POLE_TOLERANCE)
        & (np.abs(z.real - np.round(z.real)) <= POLE_TOLERANCE)
    )


def log_gamma_complex(z: ArrayLike) -> ArrayLike:
    """
    Principal branch of ln Gamma(z).

    Args:
        z: Complex scalar or array, off the nonpositive integers

    Returns:
        ln Gamma(z) with the same shape as z

    Raises:
        PoleError: If any z lies within 1e-14 of a nonpositive integer
    """
    arr = np.asarray(z, dtype=complex)
    poles = _is_pole(arr)
    if np.any(poles):
        raise PoleError(
            "log_gamma_complex evaluated at a nonpositive integer",
            details={"z": str(arr[poles].ravel()[0])},
        )
    out = special.loggamma(arr)
    return out.item() if out.ndim == 0 else out


def gamma_complex(z: ArrayLike) -> ArrayLike:
    return np.exp(log_gamma_complex(z))


def gamma_quotient_modulus(a: float, b: float, t: ArrayLike) -> ArrayLike:
    """|Gamma((a - it)/2) / Gamma((b - it)/2)| evaluated through log-gamma differences."""
    t = np.asarray(t, dtype=float)
    diff = log_gamma_complex((a - 1j * t) / 2) - log_gamma_complex((b - 1j * t) / 2)
    out = np.exp(np.real(diff))
    return out.item() if np.ndim(out) == 0 else out


def stirling_gamma_modulus(sigma: float, t: ArrayLike) -> ArrayLike:
    """Large-|t| asymptote sqrt(2 pi) exp(-pi|t|/2) |t|^(sigma - 1/2) of |Gamma(sigma + it)|."""
    t = np.abs(np.asarray(t, dtype=float))
    log_value = 0.5 * math.log(2 * math.pi) - math.pi * t / 2 + (sigma - 0.5) * np.log(t)
    out = np.exp(log_value)
    return out.item() if np.ndim(out) == 0 else out


def gegenbauer_table(ell_max: int, lam: float, v: ArrayLike) -> np.ndarray:
    """
    Gegenbauer polynomials C_0..C_ell_max normalized so that C_ell(1) = 1.

    The normalized three-term recurrence
    c_{l+1} = (2(l+lam) v c_l - l c_{l-1}) / (l + 2 lam)
    stays regular at lam = 0, where it reduces to Chebyshev T_l.

    Args:
        ell_max: Highest degree
        lam: Gegenbauer index, (n-2)/2 for the sphere S^{n-1}
        v: Evaluation points; clamped to [-1, 1]

    Returns:
        Array of shape (ell_max + 1,) + shape(v)
    """
    if ell_max < 0:
        raise ValueError("ell_max must be nonnegative")
    if lam < 0:
        raise ValueError("Gegenbauer index must be nonnegative")
    v = np.clip(np.asarray(v, dtype=float), -1.0, 1.0)
    table = np.empty((ell_max + 1,) + v.shape)
    table[0] = 1.0
    if ell_max >= 1:
        table[1] = v
    for ell in range(1, ell_max):
        table[ell + 1] = (2 * (ell + lam) * v * table[ell] - ell * table[ell - 1]) / (ell + 2 * lam)
    return table


def gegenbauer(ell: int, lam: float, v: ArrayLike) -> ArrayLike:
    """Gegenbauer polynomial of degree ell with C_ell(1) = 1."""
    if ell < 0:
        raise ValueError("Gegenbauer degree must be nonnegative")
    out = gegenbauer_table(ell, lam, v)[ell]
    return out.item() if out.ndim == 0 else out


def bessel_j(nu: float, x: ArrayLike) -> ArrayLike:
    out = special.jv(nu, x)
    return out.item() if np.ndim(out) == 0 else out


def bessel_kernel(nu: float, lam: float, z: ArrayLike) -> np.ndarray:
    """
    J_nu(z) / z^lam for z >= 0, with the series limit below BESSEL_SERIES_CUTOFF.

    Requires nu >= lam so the kernel is finite at the origin.
    """
    z = np.asarray(z, dtype=float)
    small = z < BESSEL_SERIES_CUTOFF
    safe = np.where(small, 1.0, z)
    regular = special.jv(nu, safe) / safe ** lam
    half = z / 2
    series = (
        half ** (nu - lam) / 2 ** lam / special.gamma(nu + 1)
        * (1 - half ** 2 / (nu + 1))
    )
    return np.where(small, series, regular)


def sine_integral(x: ArrayLike) -> ArrayLike:
    si, _ = special.sici(x)
    return si.item() if np.ndim(si) == 0 else si


@lru_cache(maxsize=None)
def _unsigned_stirling(alpha: int, m: int) -> int:
    if alpha == 0 and m == 0:
        return 1
    if m <= 0 or m > alpha:
        return 0
    return (alpha - 1) * _unsigned_stirling(alpha - 1, m) + _unsigned_stirling(alpha - 1, m - 1)


def stirling_first(alpha: int, m: int, signed: bool = False) -> int:
    """
    Stirling numbers of the first kind.

    Args:
        alpha: Nonnegative order
        m: Cycle count; values outside 0..alpha give 0
        signed: Return s(alpha, m) = (-1)^(alpha-m) [alpha m] instead of [alpha m]

    Returns:
        Exact integer value
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    value = _unsigned_stirling(alpha, m)
    if signed and (alpha - m) % 2:
        return -value
    return value


def pochhammer(a: ArrayLike, k: int) -> ArrayLike:
    """Rising factorial a(a+1)...(a+k-1); (a)_0 = 1."""
    if k < 0:
        raise ValueError("Pochhammer length must be nonnegative")
    arr = np.asarray(a, dtype=complex)
    result = np.ones_like(arr)
    for j in range(k):
        result = result * (arr + j)
    return result.item() if result.ndim == 0 else result


def sphere_area(n: int) -> float:
    """Surface area |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2) of the unit sphere in R^n."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def harmonic_dim(ell: int, n: int) -> int:
    """Dimension N(ell, n) of degree-ell spherical harmonics on S^{n-1}."""
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if ell == 0:
        return 1
    return (n + 2 * ell - 2) * math.comb(n + ell - 3, ell - 1) // ell


def gauss_jacobi(count: int, exponent: float) -> Quadrature1D:
    """
    Gauss rule for the weight (1 - v^2)^exponent on [-1, 1].

    Args:
        count: Number of nodes
        exponent: Weight exponent, > -1; (n-3)/2 for Funk-Hecke integrals on S^{n-1}

    Returns:
        Quadrature1D exact through degree 2*count - 1
    """
    if count < 1:
        raise ValueError("count must be a positive integer")
    if exponent <= -1:
        raise ValueError("exponent must exceed -1")
    nodes, weights = special.roots_jacobi(count, exponent, exponent)
    order = np.argsort(nodes)
    logger.debug(f"Gauss-Jacobi rule: {count} nodes, exponent {exponent}")
    return Quadrature1D(nodes[order], weights[order], 2 * count - 1, exponent)


def gauss_legendre(count: int, a: float = -1.0, b: float = 1.0) -> Quadrature1D:
    """Gauss-Legendre rule mapped to [a, b]."""
    if count < 1:
        raise ValueError("count must be a positive integer")
    if b <= a:
        raise ValueError("interval must have positive length")
    x, w = special.roots_legendre(count)
    half = (b - a) / 2
    return Quadrature1D(a + half * (x + 1), half * w, 2 * count - 1)


def composite_gauss_legendre(
    a: float,
    b: float,
    panel_width: float,
    order: int,
    breaks: Iterable[float] = (),
) -> Quadrature1D:
    """
    Composite Gauss-Legendre rule on [a, b].

    Args:
        a: Left end
        b: Right end
        panel_width: Maximum panel width
        order: Nodes per panel
        breaks: Points inside (a, b) that must be panel boundaries

    Returns:
        Quadrature1D; empty when a == b
    """
    if panel_width <= 0:
        raise ValueError("panel_width must be positive")
    if b < a:
        raise ValueError("b must not be smaller than a")
    cuts = sorted({a, b} | {float(p) for p in breaks if a < p < b})
    x, w = special.roots_legendre(order)
    nodes, weights = [], []
    for left, right in zip(cuts[:-1], cuts[1:]):
        if right - left <= 1e-15:
            continue
        panels = max(1, math.ceil((right - left) / panel_width - 1e-12))
        edges = np.linspace(left, right, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = (hi - lo) / 2
            nodes.append(lo + half * (x + 1))
            weights.append(half * w)
    if not nodes:
        return Quadrature1D(np.empty(0), np.empty(0), 2 * order - 1)
    return Quadrature1D(np.concatenate(nodes), np.concatenate(weights), 2 * order - 1)


def legendre_duplication_residual(z: Sequence[complex]) -> np.ndarray:
    """Relative residual of Gamma(z)Gamma(z+1/2) = 2^{1-2z} sqrt(pi) Gamma(2z) in log form."""
    z = np.asarray(z, dtype=complex)
    lhs = log_gamma_complex(z) + log_gamma_complex(z + 0.5)
    rhs = (1 - 2 * z) * math.log(2) + 0.5 * math.log(math.pi) + log_gamma_complex(2 * z)
    return np.abs(np.expm1(lhs - rhs))
