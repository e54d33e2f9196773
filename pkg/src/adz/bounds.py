"""
Covering numbers and the sup-norm concentration bound for sums of Lipschitz summands
"""

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special
from scipy.spatial import cKDTree

from .exceptions import InfeasibleSampleCountError, UnsupportedCaseError
from .models import BoundParams, BoundReport
from .radon import activation

logger = logging.getLogger(__name__)

GREEDY_MAX_DIM = 3
LATTICE_REFINEMENT = {2: 8, 3: 3}
RING_FRACTIONS = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95)


def theta_constants(lam: int) -> Tuple[float, float]:
    """
    (theta_lam, Theta_lam): covering density constant and Theta = theta sqrt(pi) (lam^3 + lam^2 + lam/2 + 1/30)^(1/6).
    """
    if lam < 1:
        raise ValueError("dimension lambda must be at least 1")
    if lam >= 3:
        theta = lam * math.log(lam) + lam * math.log(math.log(lam)) + 5 * lam
    else:
        theta = 5.0 * lam
    big_theta = theta * math.sqrt(math.pi) * (lam ** 3 + lam ** 2 + lam / 2 + 1 / 30) ** (1 / 6)
    return theta, big_theta


def log_ball_volume(lam: int, rho: float) -> float:
    """ln |K(rho)| in R^lam."""
    return lam / 2 * math.log(math.pi) - special.gammaln(lam / 2 + 1) + lam * math.log(rho)


def _log_volume(lam: int, rho: float, shape: str) -> float:
    if shape == "ball":
        return log_ball_volume(lam, rho)
    if shape == "box":
        return lam * math.log(2 * rho)
    raise ValueError("shape must be 'ball' or 'box'")


@dataclass
class CoveringResult:
    """
    Covering-number sandwich for K by radius-delta balls.

    Attributes:
        lower: |K| (1 - delta/rho)^lam / |K(delta)|
        upper: theta_lam |K| (1 + delta/rho)^lam / |K(delta)|
        exact: Size of an explicit cover, when one was built
    """

    lower: float
    upper: float
    exact: Optional[int] = None

    @property
    def exact_in_sandwich(self) -> Optional[bool]:
        if self.exact is None:
            return None
        return self.lower <= self.exact <= self.upper


def _lattice(lam: int, rho: float, step: float, shape: str) -> np.ndarray:
    count = math.ceil(rho / step) + 1
    axis = step * np.arange(-count, count + 1)
    mesh = np.stack(np.meshgrid(*([axis] * lam), indexing="ij"), axis=-1).reshape(-1, lam)
    if shape == "ball":
        keep = np.linalg.norm(mesh, axis=1) <= rho + step * math.sqrt(lam) / 2
    else:
        keep = np.max(np.abs(mesh), axis=1) <= rho + step / 2
    return mesh[keep]


def greedy_cover(points: np.ndarray, radius: float) -> int:
    """
    Lazy greedy set cover of a point set by radius balls centered at its own points.

    Ties go to the candidate nearest the origin.
    """
    order = np.lexsort((np.arange(len(points)), np.linalg.norm(points, axis=1)))
    points = points[order]
    neighbors = cKDTree(points).query_ball_point(points, radius)
    uncovered = np.ones(len(points), dtype=bool)
    heap = [(-len(nb), i) for i, nb in enumerate(neighbors)]
    heapq.heapify(heap)
    remaining = len(points)
    centers = 0
    while remaining:
        stale, i = heapq.heappop(heap)
        gain = int(np.count_nonzero(uncovered[neighbors[i]]))
        if gain == -stale:
            uncovered[neighbors[i]] = False
            remaining -= gain
            centers += 1
        elif gain:
            heapq.heappush(heap, (-gain, i))
    return centers


def ring_cover(rho: float, delta: float) -> int:
    """
    Disk cover of K(rho) in R^2 by a central disk and rings of congruent sectors.

    A sector a <= |x| <= b of half-angle phi fits a radius-delta disk centered at
    distance sqrt(delta^2 + a b) when cos(phi) = (a + b) / (2 sqrt(delta^2 + a b)).
    """
    if delta >= rho:
        return 1
    count = 1
    a = delta
    while a < rho:
        best = None
        for fraction in RING_FRACTIONS:
            b = min(rho, a + 2 * delta * fraction)
            cos_phi = min(1.0, (a + b) / (2 * math.sqrt(delta ** 2 + a * b)))
            sectors = math.ceil(math.pi / math.acos(cos_phi) - 1e-12)
            score = (b * b - a * a) / sectors
            if best is None or score > best[0]:
                best = (score, b, sectors)
        _, a, sectors = best
        count += sectors
    return count


def covering_number(
    lam: int,
    rho: float,
    delta: float,
    mode: str = "formula",
    shape: str = "ball",
) -> CoveringResult:
    """
    Two-sided covering-number bounds, optionally with an explicit cover.

    Args:
        lam: Dimension
        rho: Radius of K(rho), or half-side of the box [-rho, rho]^lam
        delta: Cover radius
        mode: "formula" for the sandwich only, "greedy" to also build a cover (lam <= 3)
        shape: "ball" or "box"
    """
    if rho <= 0 or delta <= 0:
        raise ValueError("rho and delta must be positive")
    if mode not in ("formula", "greedy"):
        raise ValueError("mode must be 'formula' or 'greedy'")
    if shape == "ball" and delta >= rho:
        return CoveringResult(lower=1.0, upper=1.0, exact=1)

    theta, _ = theta_constants(lam)
    log_ratio = _log_volume(lam, rho, shape) - log_ball_volume(lam, delta)
    lower = math.exp(log_ratio) * max(0.0, 1 - delta / rho) ** lam
    upper = math.exp(log_ratio + math.log(theta) + lam * math.log1p(delta / rho))
    result = CoveringResult(lower=max(1.0, lower) if shape == "ball" else lower, upper=upper)
    if mode == "formula":
        return result

    if lam > GREEDY_MAX_DIM:
        raise UnsupportedCaseError(
            f"Greedy covers are built for lambda <= {GREEDY_MAX_DIM}",
            details={"lambda": lam},
        )
    if lam == 1:
        result.exact = max(1, math.ceil(rho / delta - 1e-12))
    else:
        step = delta / LATTICE_REFINEMENT[lam]
        points = _lattice(lam, rho, step, shape)
        result.exact = greedy_cover(points, delta - step * math.sqrt(lam) / 2)
        if lam == 2 and shape == "ball":
            result.exact = min(result.exact, ring_cover(rho, delta))
        logger.debug(f"Greedy cover of {len(points)} lattice points in R^{lam}: {result.exact} balls")
    if not result.exact_in_sandwich:
        logger.warning(f"Cover size {result.exact} outside [{result.lower:.4g}, {result.upper:.4g}]")
    return result


def zeta_delta(lam: int, b: float, k: float, eps: float, n: float) -> Tuple[float, float]:
    """
    zeta = (eps n / b^2)(1 + sqrt(1 - 4 lam (b/eps)^2 / n)) and delta = lam / (k zeta).

    Raises:
        InfeasibleSampleCountError: If n < 4 lam (b/eps)^2
    """
    disc = 1 - 4 * lam * (b / eps) ** 2 / n
    if disc < -1e-12:
        raise InfeasibleSampleCountError(
            details={"lambda": lam, "b": b, "eps": eps, "n": n, "required": 4 * lam * (b / eps) ** 2}
        )
    zeta = eps * n / b ** 2 * (1 + math.sqrt(max(disc, 0.0)))
    return zeta, lam / (k * zeta)


def chernoff_objective(delta: float, lam: int, b: float, k: float, eps: float, n: float) -> float:
    """ln of (k delta)^(-lam) exp(-2 (n/b^2)(eps/2 - k delta)^2)."""
    return -lam * math.log(k * delta) - 2 * n / b ** 2 * (eps / 2 - k * delta) ** 2


def log_chernoff_cover_bound(params: BoundParams) -> float:
    """ln of 2 N delta^lam (k sqrt(e)/lam)^lam zeta^lam exp(-eps zeta / 4), unclamped."""
    lam = params.lam
    zeta, delta = zeta_delta(lam, params.b, params.k, params.eps, params.n)
    cover = covering_number(lam, params.rho, delta)
    return (
        math.log(2)
        + math.log(cover.upper)
        + lam * (math.log(delta) + math.log(params.k) + 0.5 - math.log(lam) + math.log(zeta))
        - params.eps * zeta / 4
    )


def chernoff_cover_bound(params: BoundParams) -> float:
    """P{sup_K |mean - expectation| > eps} bound, clamped to [0, 1]."""
    return math.exp(min(0.0, log_chernoff_cover_bound(params)))


def log_chernoff_cover_asymptotic(params: BoundParams) -> float:
    """ln of the large-n display 2|K| Theta (2 pi lam)^(-lam/2) (eps k n / b^2)^lam exp(-(n/2)(eps/b)^2)."""
    lam = params.lam
    _, big_theta = theta_constants(lam)
    return (
        math.log(2)
        + log_ball_volume(lam, params.rho)
        + math.log(big_theta)
        - lam / 2 * math.log(2 * math.pi * lam)
        + lam * math.log(params.eps * params.k * params.n / params.b ** 2)
        - params.n / 2 * (params.eps / params.b) ** 2
    )


def chernoff_cover_asymptotic(params: BoundParams) -> float:
    return math.exp(min(0.0, log_chernoff_cover_asymptotic(params)))


def asymptotic_ratio_limit(lam: int) -> float:
    """Large-n limit of exact bound / asymptotic display."""
    log_value = (
        special.gammaln(lam / 2 + 1)
        + lam / 2 * math.log(8 * math.e ** 2 / lam)
        - 0.5 * math.log(math.pi)
        - math.log(lam ** 3 + lam ** 2 + lam / 2 + 1 / 30) / 6
    )
    return math.exp(log_value)


def bound_report(params: BoundParams) -> BoundReport:
    """Every bound quantity for one parameter row; infeasible rows are flagged, not raised."""
    theta, big_theta = theta_constants(params.lam)
    try:
        zeta, delta = zeta_delta(params.lam, params.b, params.k, params.eps, params.n)
    except InfeasibleSampleCountError:
        logger.info(f"Infeasible sample count n={params.n} for lambda={params.lam}")
        return BoundReport(params=params, feasible=False, theta=theta, big_theta=big_theta, bound=1.0)
    cover = covering_number(params.lam, params.rho, delta)
    log_bound = log_chernoff_cover_bound(params)
    return BoundReport(
        params=params,
        feasible=True,
        zeta=zeta,
        delta=delta,
        theta=theta,
        big_theta=big_theta,
        covering_lower=cover.lower,
        covering_upper=cover.upper,
        log_bound=log_bound,
        bound=math.exp(min(0.0, log_bound)),
        log_asymptotic=log_chernoff_cover_asymptotic(params),
    )


@dataclass
class NetworkBound:
    """
    Concentration bound for an RVFL network of size m.

    Attributes:
        bound: Exact-lemma probability bound, clamped to [0, 1]
        simplified: The simplified display 2|K((alpha-1)/2)| Theta (k ln m / (2 pi m^(k-1)))^(n/2), clamped
        big_lambda: 2r ||f|N^alpha|| delta^(-alpha)(2r)
        lipschitz: 2r ||f|N^alpha|| delta^(1-alpha)(2r)
        eps_used: Accuracy the bound refers to
        k_rate: Rate parameter used by the simplified display
        feasible: Whether m >= 4 n (Lambda/eps)^2
    """

    bound: float
    simplified: Optional[float]
    big_lambda: float
    lipschitz: float
    eps_used: float
    k_rate: Optional[float]
    feasible: bool


def rnn_bound(
    norm: float,
    r: float,
    alpha: int,
    dim: int,
    m: int,
    eps: Optional[float] = None,
    k_rate: Optional[float] = None,
) -> NetworkBound:
    """
    Bound on P{||f - f_m||_{inf, K(r)} > eps} for a random network with delta^(-alpha) activations.

    Either eps or k_rate is given; with k_rate, eps = Lambda sqrt(k_rate dim ln m / m).

    Raises:
        UnsupportedCaseError: For alpha = 1
        InfeasibleSampleCountError: If k_rate ln m < 4
    """
    if alpha == 1:
        raise UnsupportedCaseError("No concentration bound is available for alpha = 1", details={"alpha": 1})
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if (eps is None) == (k_rate is None):
        raise ValueError("exactly one of eps and k_rate must be given")
    if m < 2:
        raise ValueError("m must be at least 2")
    big_lambda = 2 * r * norm * activation(alpha, 2 * r)
    lipschitz = 2 * r * norm * activation(alpha - 1, 2 * r)
    log_m = math.log(m)
    if k_rate is not None:
        if k_rate * log_m < 4:
            raise InfeasibleSampleCountError(
                f"k_rate * ln(m) = {k_rate * log_m:.4g} is below 4",
                details={"k_rate": k_rate, "m": m},
            )
        eps = big_lambda * math.sqrt(k_rate * dim * log_m / m)
    else:
        k_rate = eps ** 2 * m / (big_lambda ** 2 * dim * log_m)

    params = BoundParams(lam=dim, b=big_lambda, k=lipschitz, eps=eps, n=m, rho=r)
    try:
        bound = chernoff_cover_bound(params)
        feasible = True
    except InfeasibleSampleCountError:
        bound, feasible = 1.0, False

    simplified = None
    if k_rate * log_m >= 4:
        _, big_theta = theta_constants(dim)
        log_simplified = (
            math.log(2)
            + (log_ball_volume(dim, (alpha - 1) / 2))
            + math.log(big_theta)
            + dim / 2 * (math.log(k_rate * log_m) - math.log(2 * math.pi) - (k_rate - 1) * log_m)
        )
        simplified = math.exp(min(0.0, log_simplified))
    return NetworkBound(
        bound=bound,
        simplified=simplified,
        big_lambda=big_lambda,
        lipschitz=lipschitz,
        eps_used=eps,
        k_rate=k_rate,
        feasible=feasible,
    )
