"""
Random-feature (RVFL) networks sampled from the law |h| / ||h||_1
"""

import hashlib
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .barron import DualProfile
from .exceptions import EnvelopeError, ZeroNormError
from .radon import BoundaryPolynomial, activation, ball_lattice, lipschitz_check
from .specfun import composite_gauss_legendre, sphere_area
from .spherical import SphereQuadrature, random_unit_vectors, sphere_quadrature

logger = logging.getLogger(__name__)

ENVELOPE_MARGIN = 0.05
MIN_ACCEPTANCE = 1e-4
MIN_PROPOSALS = 100_000
MAX_BATCH = 65_536
ZERO_NORM = 1e-12
ENVELOPE_T_COUNT = 257
ENVELOPE_SAMPLES = 512
QUANTILE_LEVELS = (0.1, 0.5, 0.9)
POINT_CHUNK = 256

Array = np.ndarray


def trial_seed(base: int, j: int) -> int:
    """Counter-based 64-bit seed for trial j: first 8 bytes of sha256("base:j")."""
    digest = hashlib.sha256(f"{base}:{j}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(eq=False)
class FeatureDensity:
    """
    The sampling law of (w, b): |h(w, b)| / ||h||_1 with h(w, b) = h^alpha(w, b)[-r <= b <= r].

    Attributes:
        n: Dimension
        alpha: Activation order
        r: Ball radius
        h: Vectorized h over directions (k, n) and offsets (k,)
        norm_1: ||h||_1 over the sphere and [-r, r]
        envelope: Upper bound M >= |h| used for rejection
        direct_link: Deterministic polynomial part carried by every network
    """

    n: int
    alpha: int
    r: float
    h: Callable[[Array, Array], Array]
    norm_1: float
    envelope: float
    direct_link: Optional[BoundaryPolynomial] = None

    def __post_init__(self):
        if self.norm_1 <= ZERO_NORM:
            raise ZeroNormError(details={"norm_1": self.norm_1})
        if self.envelope <= 0:
            raise ValueError("envelope must be positive")

    def __call__(self, directions: Array, b: Array) -> Array:
        b = np.asarray(b, dtype=float)
        values = np.asarray(self.h(directions, b), dtype=complex)
        return np.where(np.abs(b) <= self.r, values, 0j)

    def scaled(self, c: float) -> "FeatureDensity":
        """Density of c*h; the sampling law is unchanged."""
        return FeatureDensity(
            n=self.n,
            alpha=self.alpha,
            r=self.r,
            h=lambda w, b: c * self.h(w, b),
            norm_1=abs(c) * self.norm_1,
            envelope=abs(c) * self.envelope,
            direct_link=self.direct_link,
        )


def build_density(
    profile: DualProfile,
    alpha: int,
    r: float,
    theta_rule: Optional[SphereQuadrature] = None,
    b_order: int = 24,
    b_panel_width: float = 0.5,
    margin: float = ENVELOPE_MARGIN,
    with_direct_link: bool = True,
) -> FeatureDensity:
    """
    Build the feature law from h^alpha.

    ||h||_1 is a product quadrature over theta_rule x composite Gauss-Legendre on [-r, r].
    The envelope is (1 + margin) times the largest |h| on the rule nodes, a set of
    random directions and a uniform b-grid.

    Raises:
        ZeroNormError: If ||h||_1 <= 1e-12
    """
    if profile.alpha != alpha:
        raise ValueError(f"profile has alpha={profile.alpha}, expected {alpha}")
    if r <= 0:
        raise ValueError("radius r must be positive")
    theta_rule = theta_rule or sphere_quadrature(profile.n, 24)
    b_rule = composite_gauss_legendre(-r, r, b_panel_width, b_order)

    if profile.density.radial:
        row = np.abs(profile(theta_rule.nodes[0], b_rule.nodes))
        norm_1 = sphere_area(profile.n) * float(np.dot(b_rule.weights, row))
        grid = np.abs(profile(theta_rule.nodes[0], np.linspace(-r, r, ENVELOPE_T_COUNT)))
        peak = max(float(np.max(row)), float(np.max(grid)))
    else:
        table = np.abs(profile(theta_rule.nodes, b_rule.nodes))
        norm_1 = float(theta_rule.weights @ table @ b_rule.weights)
        extra = random_unit_vectors(profile.n, ENVELOPE_SAMPLES, np.random.default_rng(0))
        directions = np.concatenate([theta_rule.nodes, extra])
        grid = np.abs(profile(directions, np.linspace(-r, r, ENVELOPE_T_COUNT)))
        peak = max(float(np.max(table)), float(np.max(grid)))

    logger.debug(f"Feature law for alpha={alpha}, r={r}: ||h||_1={norm_1:.6g}, grid max={peak:.6g}")
    return FeatureDensity(
        n=profile.n,
        alpha=alpha,
        r=r,
        h=profile.pairs,
        norm_1=norm_1,
        envelope=(1 + margin) * peak,
        direct_link=BoundaryPolynomial(profile, r, theta_rule) if with_direct_link else None,
    )


def sample_features(
    density: FeatureDensity,
    m: int,
    seed: int,
    batch_size: Optional[int] = None,
) -> Tuple[Array, Array]:
    """
    Draw m pairs (w_j, b_j) by rejection from w uniform on the sphere, b uniform on [-r, r].

    Returns:
        (directions of shape (m, n), offsets of shape (m,))

    Raises:
        EnvelopeError: If the acceptance rate falls below 1e-4
    """
    if m < 1:
        raise ValueError("sample count m must be a positive integer")
    rng = np.random.default_rng(seed)
    batch = batch_size or min(MAX_BATCH, max(4096, 4 * m))
    directions: List[Array] = []
    offsets: List[Array] = []
    accepted = 0
    proposed = 0
    hits = 0
    while accepted < m:
        w = random_unit_vectors(density.n, batch, rng)
        b = rng.uniform(-density.r, density.r, batch)
        u = rng.random(batch)
        magnitude = np.abs(density(w, b))
        hits += int(np.count_nonzero(magnitude > density.envelope))
        keep = u * density.envelope < magnitude
        take = min(m - accepted, int(np.count_nonzero(keep)))
        directions.append(w[keep][:take])
        offsets.append(b[keep][:take])
        accepted += take
        proposed += batch
        if proposed >= MIN_PROPOSALS and accepted / proposed < MIN_ACCEPTANCE:
            raise EnvelopeError(
                f"Acceptance rate {accepted / proposed:.2e} below {MIN_ACCEPTANCE:.0e}",
                details={"accepted": accepted, "proposed": proposed},
            )
    if hits:
        logger.warning(f"|h| exceeded the envelope at {hits} of {proposed} proposals")
    logger.debug(f"Sampled {m} features from {proposed} proposals")
    return np.concatenate(directions), np.concatenate(offsets)


@dataclass(eq=False)
class RandomFeatureNetwork:
    """
    f_m(x) = sum_j a_j delta^(-alpha)(<w_j, x> - b_j) + P(x).

    Attributes:
        alpha: Activation order
        r: Ball radius
        coefficients: a_j, each of modulus ||h||_1 / m
        directions: w_j of shape (m, n)
        offsets: b_j in [-r, r]
        seed: Seed the atoms were drawn with
        direct_link: Deterministic polynomial part P, when carried
    """

    alpha: int
    r: float
    coefficients: Array
    directions: Array
    offsets: Array
    seed: int
    direct_link: Optional[BoundaryPolynomial] = None

    @property
    def m(self) -> int:
        return len(self.coefficients)

    @property
    def n(self) -> int:
        return self.directions.shape[1]

    @property
    def atoms(self) -> List[Tuple[complex, Array, float]]:
        return list(zip(self.coefficients, self.directions, self.offsets))

    def ridge_lipschitz_bound(self) -> float:
        """sum |a_j| delta^(1-alpha)(2r), the Lipschitz bound of the ridge part for alpha >= 2."""
        if self.alpha < 2:
            raise ValueError("ridge part is discontinuous for alpha = 1")
        return float(np.sum(np.abs(self.coefficients)) * activation(self.alpha - 1, 2 * self.r))


def build_network(density: FeatureDensity, m: int, seed: int) -> RandomFeatureNetwork:
    """Sample m atoms and set a_j = ||h||_1 phase(h(w_j, b_j)) / m."""
    directions, offsets = sample_features(density, m, seed)
    values = density(directions, offsets)
    phases = values / np.abs(values)
    return RandomFeatureNetwork(
        alpha=density.alpha,
        r=density.r,
        coefficients=density.norm_1 * phases / m,
        directions=directions,
        offsets=offsets,
        seed=seed,
        direct_link=density.direct_link,
    )


def eval_ridges(net: RandomFeatureNetwork, x: Array) -> Array:
    """Random part sum_j a_j delta^(-alpha)(<w_j, x> - b_j)."""
    x = np.asarray(x, dtype=float)
    points = x.reshape(-1, net.n)
    out = np.empty(len(points), dtype=complex)
    for start in range(0, len(points), POINT_CHUNK):
        chunk = points[start:start + POINT_CHUNK]
        out[start:start + POINT_CHUNK] = activation(net.alpha, chunk @ net.directions.T - net.offsets) @ net.coefficients
    return out[0] if x.ndim == 1 else out


def eval_network(net: RandomFeatureNetwork, x: Array) -> Array:
    """f_m(x), including the direct link when the network carries one."""
    values = eval_ridges(net, x)
    if net.direct_link is not None:
        values = values + net.direct_link(x)
    return values


@dataclass
class SupError:
    """
    Grid estimate of ||f - f_m||_{inf, K(r)}.

    Attributes:
        grid_max: Largest |f - f_m| on the lattice
        slack_bound: grid_max plus the Lipschitz slack over the lattice covering radius
        spacing: Lattice spacing
        points: Number of lattice points in K(r)
    """

    grid_max: float
    slack_bound: float
    spacing: float
    points: int


def _grid_resolution(alpha: int, resolution: int) -> int:
    return 2 * resolution if alpha == 1 else resolution


def sup_error(
    net: RandomFeatureNetwork,
    f_oracle: Callable[[Array], Array],
    r: float,
    grid_resolution: int,
    lipschitz_f: Optional[float] = None,
) -> SupError:
    """
    max |f - f_m| over a cubic lattice of K(r) with spacing r/grid_resolution.

    The slack bound adds (Lip(f - P) + Lip(ridges)) * spacing * sqrt(n)/2. For alpha = 1
    the lattice is refined twice over and the ridge part contributes no slack.
    """
    resolution = _grid_resolution(net.alpha, grid_resolution)
    points = ball_lattice(net.n, r, resolution)
    spacing = r / resolution

    def target(x: Array) -> Array:
        values = np.asarray(f_oracle(x), dtype=complex)
        return values - net.direct_link(x) if net.direct_link is not None else values

    grid_max = float(np.max(np.abs(target(points) - eval_ridges(net, points))))
    if lipschitz_f is None:
        lipschitz_f = lipschitz_check(target, net.n, r, pairs=2000, seed=net.seed)
    lipschitz_net = net.ridge_lipschitz_bound() if net.alpha >= 2 else 0.0
    slack = grid_max + (lipschitz_f + lipschitz_net) * spacing * math.sqrt(net.n) / 2
    return SupError(grid_max=grid_max, slack_bound=slack, spacing=spacing, points=len(points))


@dataclass
class TrialReport:
    """
    Exceedance frequencies and error quantiles of an RVFL campaign.

    Attributes:
        m_values: Network sizes
        eps_values: Accuracy thresholds
        trials: Trials per network size
        base_seed: Seed every trial seed is derived from
        errors: Grid sup errors, shape (len(m_values), trials)
        seeds: Trial seeds, same shape as errors
        frequencies: (m, eps) -> (frequency, wilson_low, wilson_high)
        quantiles: m -> error quantiles at QUANTILE_LEVELS
        slope: Log-log regression slope of median error against m
        ridge_max: Largest |ridge part| seen per m
        lambda_bound: Bound on |ridge part| the campaign was checked against, if any
        bounds: (m, eps) -> theoretical exceedance bound, if supplied
        runtime: Wall-clock seconds
    """

    m_values: List[int]
    eps_values: List[float]
    trials: int
    base_seed: int
    errors: Array
    seeds: Array
    frequencies: Dict[Tuple[int, float], Tuple[float, float, float]]
    quantiles: Dict[int, Array]
    slope: float
    ridge_max: Dict[int, float] = field(default_factory=dict)
    lambda_bound: Optional[float] = None
    bounds: Dict[Tuple[int, float], Optional[float]] = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def lambda_violations(self) -> int:
        if self.lambda_bound is None:
            return 0
        return sum(1 for value in self.ridge_max.values() if value > self.lambda_bound * (1 + 1e-12))

    def rows(self) -> List[Dict[str, object]]:
        """One row per (m, eps), in input order."""
        rows = []
        for i, m in enumerate(self.m_values):
            q = self.quantiles[m]
            for eps in self.eps_values:
                freq, low, high = self.frequencies[(m, eps)]
                rows.append({
                    "m": m,
                    "eps": eps,
                    "trials": self.trials,
                    "exceed_freq": freq,
                    "wilson_low": low,
                    "wilson_high": high,
                    "q10": q[0],
                    "median": q[1],
                    "q90": q[2],
                    "ridge_max": self.ridge_max.get(m),
                    "bound": self.bounds.get((m, eps)),
                })
        return rows


def wilson_interval(successes: int, trials: int) -> Tuple[float, float]:
    """Wilson 95% interval for a binomial proportion."""
    ci = stats.binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def run_trials(
    density: FeatureDensity,
    f_oracle: Callable[[Array], Array],
    m_values: Sequence[int],
    eps_values: Sequence[float],
    trials: int,
    base_seed: int,
    grid_resolution: int,
    threads: int = 1,
    lambda_bound: Optional[float] = None,
    bound: Optional[Callable[[int, float], Optional[float]]] = None,
) -> TrialReport:
    """
    Monte-Carlo campaign over network sizes.

    Trial t of size index i uses seed trial_seed(base_seed, i * trials + t), so the
    report does not depend on thread count or execution order.
    """
    if trials < 30:
        raise ValueError("a campaign needs at least 30 trials")
    if not m_values:
        raise ValueError("m_values must not be empty")
    start = time.perf_counter()
    m_values = [int(m) for m in m_values]
    eps_values = [float(e) for e in eps_values]
    resolution = _grid_resolution(density.alpha, grid_resolution)
    points = ball_lattice(density.n, density.r, resolution)
    targets = np.asarray(f_oracle(points), dtype=complex)
    if density.direct_link is not None:
        targets = targets - density.direct_link(points)

    seeds = np.array([
        [trial_seed(base_seed, i * trials + t) for t in range(trials)]
        for i in range(len(m_values))
    ], dtype=np.uint64)

    def one(task: Tuple[int, int]) -> Tuple[float, float]:
        i, t = task
        net = build_network(density, m_values[i], int(seeds[i, t]))
        ridges = eval_ridges(net, points)
        return float(np.max(np.abs(targets - ridges))), float(np.max(np.abs(ridges)))

    tasks = [(i, t) for i in range(len(m_values)) for t in range(trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(task) for task in tasks]

    errors = np.array([e for e, _ in results]).reshape(len(m_values), trials)
    ridges = np.array([g for _, g in results]).reshape(len(m_values), trials)
    frequencies = {}
    bounds = {}
    for i, m in enumerate(m_values):
        for eps in eps_values:
            exceed = int(np.count_nonzero(errors[i] > eps))
            low, high = wilson_interval(exceed, trials)
            frequencies[(m, eps)] = (exceed / trials, low, high)
            bounds[(m, eps)] = bound(m, eps) if bound is not None else None
    quantiles = {m: np.quantile(errors[i], QUANTILE_LEVELS) for i, m in enumerate(m_values)}
    medians = np.array([quantiles[m][1] for m in m_values])
    slope = float(np.polyfit(np.log(m_values), np.log(medians), 1)[0]) if len(m_values) > 1 else math.nan
    runtime = time.perf_counter() - start
    logger.info(f"RVFL campaign: {len(tasks)} trials in {runtime:.1f}s, slope {slope:.3f}")
    return TrialReport(
        m_values=m_values,
        eps_values=eps_values,
        trials=trials,
        base_seed=base_seed,
        errors=errors,
        seeds=seeds,
        frequencies=frequencies,
        quantiles=quantiles,
        slope=slope,
        ridge_max={m: float(np.max(ridges[i])) for i, m in enumerate(m_values)},
        lambda_bound=lambda_bound,
        bounds=bounds,
        runtime=runtime,
    )
