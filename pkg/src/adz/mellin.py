"""
The N_l^alpha multiplier family, numerical Mellin transforms on the imaginary axis,
and exact operator identities on monomials
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple, Union

import numpy as np
from scipy import special

from .exceptions import EnvelopeError, PoleError, UnsupportedCaseError
from .models import MultiplierSpec
from .specfun import (
    composite_gauss_legendre,
    gegenbauer,
    log_gamma_complex,
    pochhammer,
    sphere_area,
    stirling_first,
)

logger = logging.getLogger(__name__)

DEFAULT_LOG_PANEL = 0.25
DEFAULT_LOG_ORDER = 16
ENVELOPE_TOLERANCE = 1e-12
INVERSE_COUNT = 48
INVERSE_TAU_MAX = 40.0

Laurent = Dict[int, int]


@dataclass(frozen=True)
class MellinEnvelope:
    """
    Support and origin behavior of psi on (0, inf).

    Attributes:
        t_min: Integration starts at ln(t_min)
        t_max: Integration ends at ln(t_max)
        value_at_zero: psi(0+), subtracted on (0, 1) and restored as psi(0+)/(iy)
    """

    t_min: float = math.exp(-40.0)
    t_max: float = 60.0
    value_at_zero: complex = 0.0

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("envelope needs 0 < t_min < t_max")


def mellin_numeric(
    psi: Callable[[np.ndarray], np.ndarray],
    y: float,
    envelope: MellinEnvelope = MellinEnvelope(),
    panel_width: float = DEFAULT_LOG_PANEL,
    order: int = DEFAULT_LOG_ORDER,
) -> complex:
    """
    M{psi}(iy) = int_0^inf t^(iy) psi(t) dt/t, by Gauss-Legendre panels in s = ln t.

    With c = psi(0+) the integral is regularized as
    c/(iy) + int e^(iys) (psi(e^s) - c [s < 0]) ds.

    Raises:
        PoleError: If y = 0 and psi(0+) != 0
        EnvelopeError: If the integrand is not negligible at the envelope ends
    """
    c = complex(envelope.value_at_zero)
    if y == 0 and c != 0:
        raise PoleError("Mellin transform at y = 0 diverges when psi(0+) != 0", details={"psi0": str(c)})
    lo, hi = math.log(envelope.t_min), math.log(envelope.t_max)
    rule = composite_gauss_legendre(lo, hi, panel_width, order, breaks=(0.0,))
    s = rule.nodes

    def integrand(points: np.ndarray) -> np.ndarray:
        values = np.asarray(psi(np.exp(points)), dtype=complex)
        return values - c * (points < 0)

    edges = np.abs(integrand(np.array([lo, hi])))
    if np.max(edges) > ENVELOPE_TOLERANCE:
        raise EnvelopeError(
            f"Integrand {np.max(edges):.2e} at the envelope ends exceeds {ENVELOPE_TOLERANCE:.0e}",
            details={"t_min": envelope.t_min, "t_max": envelope.t_max},
        )
    value = complex(np.dot(rule.weights, np.exp(1j * y * s) * integrand(s)))
    if c != 0:
        value += c / (1j * y)
    return value


def _check_spec(spec: MultiplierSpec) -> None:
    if not spec.admissible:
        raise UnsupportedCaseError(
            f"N_{spec.ell}^{spec.alpha} is not defined: even degrees >= 2 need alpha >= 1",
            details={"ell": spec.ell, "alpha": spec.alpha},
        )


def n_multiplier(spec: MultiplierSpec, y: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    N_l^alpha(y) from the three-case definition (l = 0, l odd, l even >= 2).

    Gamma quotients are formed as differences of log-gamma.

    Raises:
        UnsupportedCaseError: For alpha = 0 with an even degree >= 2
    """
    _check_spec(spec)
    n, ell, alpha = spec.n, spec.ell, spec.alpha
    iy = 1j * np.asarray(y, dtype=float)
    log_pi = (n - 1) / 2 * math.log(math.pi)
    if ell == 0:
        ratio = np.exp(log_gamma_complex((n - iy) / 2) - log_gamma_complex((1 - iy) / 2) - log_pi)
        value = ratio * (-1) ** alpha * pochhammer(iy, alpha) / 2
    elif ell % 2:
        half = (ell - 1) // 2
        ratio = np.exp(log_gamma_complex((n + ell - iy) / 2) - log_gamma_complex((2 - iy) / 2) - log_pi)
        value = ratio * (-1) ** alpha * pochhammer(iy, alpha) / (2 * (-1) ** half * pochhammer((1 + iy) / 2, half))
    else:
        half = (ell - 2) // 2
        ratio = np.exp(log_gamma_complex((n + ell - iy) / 2) - log_gamma_complex((1 - iy) / 2) - log_pi)
        value = ratio * (-1) ** (alpha - 1) * pochhammer(1 + iy, alpha - 1) / ((-1) ** half * pochhammer((2 + iy) / 2, half))
    return complex(value) if np.ndim(value) == 0 else value


def n_multiplier_compact(spec: MultiplierSpec, y: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    Gamma-ratio form of N_l^alpha(y), valid for y != 0.

    Raises:
        PoleError: At y = 0 for degrees whose compact form has a removable singularity
    """
    n, ell, alpha = spec.n, spec.ell, spec.alpha
    iy = 1j * np.asarray(y, dtype=float)
    log_value = (
        log_gamma_complex((n + ell - iy) / 2)
        + log_gamma_complex((2 - ell - iy) / 2)
        + log_gamma_complex(1 - iy)
        - math.log(2)
        - (n - 1) / 2 * math.log(math.pi)
        - log_gamma_complex((2 - iy) / 2)
        - log_gamma_complex((1 - iy) / 2)
        - log_gamma_complex(1 - iy - alpha)
    )
    value = np.exp(log_value)
    return complex(value) if np.ndim(value) == 0 else value


def n_asymptote(spec: MultiplierSpec, y: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Large-|y| modulus 1/2 |y|^alpha (|y| / 2 pi)^((n-1)/2)."""
    ay = np.abs(np.asarray(y, dtype=float))
    value = 0.5 * ay ** spec.alpha * (ay / (2 * math.pi)) ** ((spec.n - 1) / 2)
    return float(value) if np.ndim(value) == 0 else value


def asymptotic_ratio(spec: MultiplierSpec, y: float) -> float:
    """|N_l^alpha(y)| divided by its large-|y| asymptote."""
    return abs(n_multiplier(spec, y)) / n_asymptote(spec, y)


def zero_scan(spec: MultiplierSpec, y_max: float = 1e3, count: int = 4001) -> float:
    """
    Smallest |N_l^alpha(y)| / (1 + asymptote) on a symmetric y grid.

    (iy)_alpha makes y = 0 a zero whenever alpha >= 1 and the degree lies outside
    {2, 4, ...}; that point is dropped from the grid.
    """
    y = np.linspace(-y_max, y_max, count)
    if spec.alpha >= 1 and not spec.in_even_class:
        y = y[y != 0]
    modulus = np.abs(n_multiplier(spec, y)) / (1 + n_asymptote(spec, y))
    smallest = float(np.min(modulus))
    logger.debug(f"Zero scan of N_{spec.ell}^{spec.alpha}, n={spec.n}: min scaled modulus {smallest:.3e}")
    return smallest


def base_multiplier(ell: int, n: int) -> MultiplierSpec:
    """N_l := N_l^[l even and l >= 2]."""
    return MultiplierSpec(ell=ell, alpha=int(ell >= 2 and ell % 2 == 0), n=n)


def inverse_weight(ell: int, n: int, case: str) -> Tuple[Callable[[np.ndarray], np.ndarray], float]:
    """
    Polynomial part g and endpoint exponent e of the inverse-multiplier weight g(v)(1 - v^2)^e.

    standard: C_l^{(n-2)/2}(v), e = (n-3)/2
    even: C_{l-1}^{n/2}(v) / ((n-1) v), e = (n-1)/2
    """
    if case == "standard":
        if ell >= 2 and ell % 2 == 0:
            raise ValueError("the standard weight is for degrees outside {2, 4, ...}")
        return (lambda v: gegenbauer(ell, (n - 2) / 2, v)), (n - 3) / 2
    if case == "even":
        if ell < 2 or ell % 2:
            raise ValueError("the even weight is for degrees in {2, 4, ...}")
        return (lambda v: gegenbauer(ell - 1, n / 2, v) / ((n - 1) * v)), (n - 1) / 2
    raise ValueError("case must be 'standard' or 'even'")


def unit_interval_mellin(
    g: Callable[[np.ndarray], np.ndarray],
    exponent: float,
    y: float,
    count: int = INVERSE_COUNT,
    tau_max: float = INVERSE_TAU_MAX,
) -> complex:
    """
    int_0^1 v^(-iy) g(v) (1 - v^2)^exponent dv for a polynomial g.

    [1/2, 1] uses a Gauss-Jacobi rule for the endpoint factor (1 - v)^exponent;
    (0, 1/2] is mapped to v = e^(-tau)/2 and integrated on Gauss-Legendre panels.
    """
    x, w = special.roots_jacobi(count, exponent, 0.0)
    v = (3 + x) / 4
    upper = np.sum(w * 4.0 ** (-exponent - 1) * v ** (-1j * y) * g(v) * (1 + v) ** exponent)

    rule = composite_gauss_legendre(0.0, tau_max, 1.0, 24)
    v = 0.5 * np.exp(-rule.nodes)
    lower = np.sum(rule.weights * v ** (1 - 1j * y) * g(v) * (1 - v * v) ** exponent)
    return complex(upper + lower)


def multiplier_inverse_identity(ell: int, n: int, y: float, case: str = "standard") -> float:
    """
    |1/N_l(y) - 2|S^{n-2}| M{weight}(1 - iy)| with N_l = N_l^[l even >= 2].
    """
    g, exponent = inverse_weight(ell, n, case)
    rhs = 2 * sphere_area(n - 1) * unit_interval_mellin(g, exponent, y)
    lhs = 1 / n_multiplier(base_multiplier(ell, n), y)
    residual = abs(lhs - rhs)
    logger.debug(f"Inverse identity l={ell}, n={n}, y={y}: residual {residual:.2e}")
    return residual


def _shift(p: Laurent, j: int) -> Laurent:
    return {e + j: c for e, c in p.items()}


def _derivative(p: Laurent) -> Laurent:
    return {e - 1: c * e for e, c in p.items() if e != 0}


def _euler(p: Laurent) -> Laurent:
    """(t d/dt) p."""
    return {e: c * e for e, c in p.items() if e != 0}


def _derivative_of_shift(p: Laurent) -> Laurent:
    """(d/dt t) p."""
    return {e: c * (e + 1) for e, c in p.items() if e != -1}


def _power(op: Callable[[Laurent], Laurent], p: Laurent, times: int) -> Laurent:
    for _ in range(times):
        p = op(p)
    return p


def _add(p: Laurent, q: Laurent, scale: int = 1) -> Laurent:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + scale * c
    return out


def _max_difference(p: Laurent, q: Laurent) -> int:
    diff = _add(p, q, -1)
    return max((abs(c) for c in diff.values()), default=0)


def operator_identity_residuals(alpha: int, k: int) -> Tuple[int, int, int]:
    """
    Exact residuals on p(t) = t^k of

        t^a d^(a-1) t^(-1) p = sum_m s(a, m) (t d)^(m-1) p
        t^a d^a p            = sum_m s(a, m) (t d)^m p
        t^(-1) d^(a-1) t^a p = sum_m [a m] (d t)^(m-1) p

    with s signed and [a m] unsigned Stirling numbers of the first kind.
    """
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if k < 0:
        raise ValueError("monomial degree must be nonnegative")
    p: Laurent = {k: 1}

    lhs1 = _shift(_power(_derivative, _shift(p, -1), alpha - 1), alpha)
    rhs1: Laurent = {}
    for m in range(1, alpha + 1):
        rhs1 = _add(rhs1, _power(_euler, p, m - 1), stirling_first(alpha, m, signed=True))

    lhs2 = _shift(_power(_derivative, p, alpha), alpha)
    rhs2: Laurent = {}
    for m in range(0, alpha + 1):
        rhs2 = _add(rhs2, _power(_euler, p, m), stirling_first(alpha, m, signed=True))

    lhs3 = _shift(_power(_derivative, _shift(p, alpha), alpha - 1), -1)
    rhs3: Laurent = {}
    for m in range(1, alpha + 1):
        rhs3 = _add(rhs3, _power(_derivative_of_shift, p, m - 1), stirling_first(alpha, m))

    return (
        int(_max_difference(lhs1, rhs1)),
        int(_max_difference(lhs2, rhs2)),
        int(_max_difference(lhs3, rhs3)),
    )


def operator_identity_check(alpha: int, k: int) -> int:
    """Largest exact residual of the three Stirling operator identities on t^k."""
    return max(operator_identity_residuals(alpha, k))
