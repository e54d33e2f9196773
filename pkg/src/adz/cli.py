"""
Experiment driver

    python -m src.adz <decompose|represent|rvfl|sigma|bounds|mellin-check> --config PATH
        [--profile NAME] [--out PATH] [--format csv|json] [--seed U64] [--threads K]
        [--env-file PATH] [--log-level LEVEL]

Exit codes: 0 ok, 2 config error, 3 self-check failure, 4 infeasible precondition.
"""

import argparse
import logging
import math
import sys
import time
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from . import __version__
from .barron import (
    DualProfile,
    SourceDensity,
    ZonalExpansion,
    barron_norm,
    catalog_density,
    closed_form_f,
    eval_f,
    f_identity_rhs,
    inversion_rhs,
    laplacian_g_closed,
    norm_1_inf,
    sigma_closed_form,
    sigma_fourier_direct,
    sigma_linear_part,
    tail_integral_F,
)
from .bounds import GREEDY_MAX_DIM, LATTICE_REFINEMENT, bound_report, covering_number, rnn_bound
from .config import ADZSettings
from .config_loader import load_experiment_config
from .exceptions import ADZError, ConfigError, InfeasibleSampleCountError, NumericalToleranceError
from .mellin import (
    asymptotic_ratio,
    multiplier_inverse_identity,
    n_multiplier,
    n_multiplier_compact,
    operator_identity_residuals,
    zero_scan,
)
from .models import (
    BoundParams,
    BoundsConfig,
    DecomposeConfig,
    ExperimentConfig,
    MellinCheckConfig,
    MultiplierSpec,
    RepresentConfig,
    RvflConfig,
    SigmaConfig,
)
from .output import ExperimentResult, write_result
from .radon import activation, dual_radon, nalpha_eval, sample_ball
from .rvfl import build_density, run_trials
from .specfun import gamma_quotient_modulus, sphere_area
from .spherical import AbelSchedule, abel_sum, random_unit_vectors, sphere_quadrature

logger = logging.getLogger(__name__)

GREEDY_POINT_LIMIT = 2_000_000
OPERATOR_IDENTITIES = ("euler_shifted", "euler", "derivative_shift")
SLOPE_RANGE = (-0.65, -0.35)
KAPPA_DEVIATION = 1e-3


def _threads(config: ExperimentConfig, settings: ADZSettings) -> int:
    return config.threads or settings.threads


def _density(config) -> SourceDensity:
    return catalog_density(config.density.id, config.n, **config.density.params)


def cmd_decompose(config: DecomposeConfig, settings: ADZSettings) -> ExperimentResult:
    """Zonal pieces f_l and G_l with inversion, F-identity and Abel-reconstruction residuals."""
    columns = [
        "ell", "theta_id", "t", "re_f", "im_f", "re_G", "im_G",
        "inversion_residual", "F_residual", "abel_residual",
    ]
    result = ExperimentResult("decompose", columns)
    if not config.ell_values or not config.t_values:
        return result

    density = _density(config)
    thetas = random_unit_vectors(config.n, config.theta_count, np.random.default_rng(config.seed))
    schedule = AbelSchedule(ell_max=config.ell_max)
    abel_worst = 0.0
    divergent = 0
    for theta_id, theta in enumerate(thetas):
        expansion = ZonalExpansion(
            density, theta, config.ell_max,
            radial_order=settings.radial_order, panel_width=settings.radial_panel_width,
        )
        for t in config.t_values:
            value, diagnostics = abel_sum(expansion.f_pieces(t), schedule, config.n)
            abel_residual = abs(value - eval_f(density, t * theta))
            abel_worst = max(abel_worst, abel_residual)
            divergent += int(diagnostics.divergent)
            for ell in config.ell_values:
                f = complex(expansion.f_piece(ell, t)[0])
                g = complex(expansion.g_piece(ell, 0, t)[0])
                inversion = abs(f - inversion_rhs(expansion, ell, t, config.gauss_jacobi_count))
                f_residual = None
                if ell >= 2 and ell % 2 == 0:
                    tail = tail_integral_F(density, ell, theta, t, expansion=expansion)
                    f_residual = abs(tail - f_identity_rhs(expansion, ell, t, config.gauss_jacobi_count))
                result.rows.append({
                    "ell": ell,
                    "theta_id": theta_id,
                    "t": t,
                    "re_f": f.real,
                    "im_f": f.imag,
                    "re_G": g.real,
                    "im_G": g.imag,
                    "inversion_residual": inversion,
                    "F_residual": f_residual,
                    "abel_residual": abel_residual,
                })

    inversion_worst = max(row["inversion_residual"] for row in result.rows)
    f_values = [row["F_residual"] for row in result.rows if row["F_residual"] is not None]
    f_worst = max(f_values) if f_values else None
    result.summary.update(
        max_inversion_residual=inversion_worst,
        max_F_residual=f_worst,
        max_abel_residual=abel_worst,
        abel_divergent=divergent,
    )
    for name, value in (("inversion", inversion_worst), ("F-identity", f_worst), ("Abel", abel_worst)):
        if value is not None and value >= config.tolerance:
            result.failures.append(f"{name} residual {value:.3e} >= {config.tolerance:.1e}")
    return result


def cmd_represent(config: RepresentConfig, settings: ADZSettings) -> ExperimentResult:
    """Dual-Radon (alpha = 0) or N^alpha reconstruction at random points of K(r)."""
    n = config.n
    columns = ["point_id"] + [f"x{i + 1}" for i in range(n)] + [
        "re_f", "im_f", "re_reconstruction", "im_reconstruction", "abs_error",
    ]
    result = ExperimentResult("represent", columns)
    density = _density(config)
    resolution = config.sphere_resolution or settings.sphere_resolution
    rule = sphere_quadrature(n, resolution)
    profile = DualProfile(density, config.alpha, settings.radial_order, settings.radial_panel_width)

    points = sample_ball(n, config.r, config.point_count, np.random.default_rng(config.seed))
    f = eval_f(density, points, resolution, settings.radial_order, settings.radial_panel_width)
    if config.alpha == 0:
        reconstruction = dual_radon(profile.pairs, points, rule)
    else:
        reconstruction = nalpha_eval(profile, config.alpha, config.r, points, rule, threads=_threads(config, settings))
    errors = np.abs(f - reconstruction)
    for i, point in enumerate(points):
        row = {f"x{j + 1}": point[j] for j in range(n)}
        row.update(
            point_id=i,
            re_f=f[i].real,
            im_f=f[i].imag,
            re_reconstruction=reconstruction[i].real,
            im_reconstruction=reconstruction[i].imag,
            abs_error=errors[i],
        )
        result.rows.append(row)

    phi_norm = barron_norm(density, config.alpha, resolution, settings.radial_order, settings.radial_panel_width)
    h_norm = norm_1_inf(profile, rule)
    ratio = h_norm / phi_norm
    worst = float(np.max(errors))
    result.summary.update(
        phi_norm=phi_norm,
        h_norm_1_inf=h_norm,
        ratio=ratio,
        t_edge_max=profile.edge_max,
        max_abs_error=worst,
    )
    if ratio > 1 + 1e-6:
        result.failures.append(f"||h||_(1,inf) / ||phi||_1 = {ratio:.9f} exceeds 1")
    if worst >= config.tolerance:
        result.failures.append(f"reconstruction error {worst:.3e} >= {config.tolerance:.1e}")
    return result


def _oracle(density: SourceDensity) -> Callable[[np.ndarray], np.ndarray]:
    if density.closed_form is not None:
        return lambda x: closed_form_f(density, x)
    return lambda x: eval_f(density, x)


def cmd_rvfl(config: RvflConfig, settings: ADZSettings) -> ExperimentResult:
    """Monte-Carlo campaign of random-feature networks against the concentration bound."""
    columns = [
        "m", "eps", "trials", "exceed_freq", "wilson_low", "wilson_high",
        "q10", "median", "q90", "ridge_max", "bound",
    ]
    result = ExperimentResult("rvfl", columns)
    density = _density(config)
    rule = sphere_quadrature(config.n, settings.sphere_resolution)
    profile = DualProfile(density, config.alpha, settings.radial_order, settings.radial_panel_width)
    features = build_density(profile, config.alpha, config.r, rule)
    # every summand is bounded by ||h||_1 delta^(-alpha)(2r) on K(r)
    lambda_bound = features.norm_1 * activation(config.alpha, 2 * config.r)
    norm = features.norm_1 / (2 * config.r)

    bound: Optional[Callable[[int, float], Optional[float]]] = None
    if config.alpha >= 2:
        def bound(m: int, eps: float) -> Optional[float]:
            if m < 2:
                return None
            return rnn_bound(norm, config.r, config.alpha, config.n, m, eps=eps).bound
    else:
        result.notes.append("bound column empty: no concentration bound is available for alpha = 1")

    report = run_trials(
        features,
        _oracle(density),
        config.m_values,
        config.eps_values,
        config.trials,
        config.seed,
        config.grid_resolution,
        threads=_threads(config, settings),
        lambda_bound=lambda_bound,
        bound=bound,
    )
    result.rows = report.rows()
    result.summary.update(
        norm_1=features.norm_1,
        lambda_bound=lambda_bound,
        lambda_violations=report.lambda_violations,
        slope=report.slope,
    )
    if config.alpha >= 2 and config.k_rate is not None:
        sizes = [m for m in config.m_values if m >= 2 and config.k_rate * math.log(m) >= 4]
        result.summary["k_rate"] = config.k_rate
        if sizes:
            network = rnn_bound(norm, config.r, config.alpha, config.n, max(sizes), k_rate=config.k_rate)
            result.summary["k_rate_eps"] = network.eps_used
            result.summary["k_rate_simplified_bound"] = network.simplified

    if report.lambda_violations:
        result.failures.append(f"{report.lambda_violations} network sizes exceeded the ridge-part bound")
    for row in result.rows:
        if row["bound"] is not None and row["bound"] < 1 and row["exceed_freq"] > row["bound"]:
            result.failures.append(
                f"exceedance {row['exceed_freq']} above bound {row['bound']:.3e} at m={row['m']}, eps={row['eps']}"
            )
    if len(config.m_values) >= 3 and not SLOPE_RANGE[0] <= report.slope <= SLOPE_RANGE[1]:
        result.failures.append(f"median error slope {report.slope:.3f} outside {list(SLOPE_RANGE)}")
    return result


def _laplacian_fd(g: Callable[[float], float], r: float, step: float, n: int) -> float:
    """Radial Laplacian G'' + (n-1) G'/r by central differences; n G''(0) at the origin."""
    if r == 0:
        return n * 2 * (g(step) - g(0.0)) / step ** 2
    left, mid, right = g(abs(r - step)), g(r), g(r + step)
    second = (right - 2 * mid + left) / step ** 2
    first = (right - left) / (2 * step)
    return second + (n - 1) * first / r


def cmd_sigma(config: SigmaConfig, settings: ADZSettings) -> ExperimentResult:
    """Fourier transform of sigma(u) = [|u| > 1]/|u|^(n+1): direct quadrature, fitted closed form, G and its Laplacian."""
    n = config.n
    columns = [
        "radius", "direct", "closed_form", "linear_part", "G",
        "laplacian_G_fd", "laplacian_G_closed", "normalized_residual",
    ]
    result = ExperimentResult("sigma", columns)
    if not config.radii:
        return result
    radii = np.asarray(config.radii, dtype=float)
    direct = np.array([sigma_fourier_direct(n, r) for r in radii])
    unit = np.array([sigma_closed_form(n, r) for r in radii])
    kappa = float(np.dot(direct, unit) / np.dot(unit, unit))
    scale = float(np.max(np.abs(direct)))

    def G(r: float) -> float:
        return sigma_closed_form(n, r, kappa) - sigma_linear_part(n, r, kappa)

    for r, d, c in zip(radii, direct, unit):
        result.rows.append({
            "radius": float(r),
            "direct": float(d),
            "closed_form": kappa * float(c),
            "linear_part": sigma_linear_part(n, r, kappa),
            "G": G(r),
            "laplacian_G_fd": _laplacian_fd(G, float(r), config.fd_step, n),
            "laplacian_G_closed": laplacian_g_closed(n, r, kappa),
            "normalized_residual": abs(d - kappa * c) / scale,
        })

    printed = sphere_area(n)
    expected = sphere_area(n - 1)
    worst = max((row["normalized_residual"] for row in result.rows), default=0.0)
    result.summary.update(
        kappa=kappa,
        kappa_sphere_n_minus_2=expected,
        kappa_printed=printed,
        kappa_relative_deviation_printed=abs(kappa - printed) / printed,
        max_normalized_residual=worst,
    )
    if abs(kappa - printed) / printed > KAPPA_DEVIATION:
        logger.warning(f"Fitted kappa_{n} = {kappa:.9g} differs from |S^{n - 1}| = {printed:.9g}")
        result.notes.append(f"fitted kappa differs from |S^(n-1)|; |S^(n-2)| = {expected!r}")
    if worst >= config.tolerance:
        result.failures.append(f"closed-form residual {worst:.3e} >= {config.tolerance:.1e}")
    if radii.size and radii[0] == 0:
        origin = abs(direct[0] - printed)
        result.summary["origin_error"] = origin
        if origin >= 1e-6:
            result.failures.append(f"F{{sigma}}(0) off |S^(n-1)| by {origin:.3e}")
    return result


def _greedy_allowed(lam: int, rho: float, delta: float) -> bool:
    if lam > GREEDY_MAX_DIM:
        return False
    if lam == 1:
        return True
    step = delta / LATTICE_REFINEMENT[lam]
    return (2 * rho / step + 3) ** lam <= GREEDY_POINT_LIMIT


def cmd_bounds(config: BoundsConfig, settings: ADZSettings) -> ExperimentResult:
    """Concentration, covering and network bound tables in one file, keyed by the table column."""
    columns = [
        "table", "lam", "b", "k", "eps", "n", "rho", "delta", "shape", "feasible", "zeta",
        "theta", "big_theta", "covering_lower", "covering_upper", "greedy_count", "greedy_in_sandwich",
        "log_bound", "bound", "log_asymptotic", "norm", "r", "alpha", "m", "k_rate",
        "big_lambda", "lipschitz", "simplified",
    ]
    result = ExperimentResult("bounds", columns)

    for row in config.rows:
        report = bound_report(BoundParams(**row.model_dump()))
        entry = {"table": "chernoff", **row.model_dump(), **report.model_dump(exclude={"params"})}
        if report.feasible and config.greedy and _greedy_allowed(row.lam, row.rho, report.delta):
            cover = covering_number(row.lam, row.rho, report.delta, mode="greedy")
            entry.update(greedy_count=cover.exact, greedy_in_sandwich=cover.exact_in_sandwich)
        result.rows.append(entry)

    for row in config.covering:
        greedy = config.greedy and _greedy_allowed(row.lam, row.rho, row.delta)
        cover = covering_number(row.lam, row.rho, row.delta, mode="greedy" if greedy else "formula", shape=row.shape)
        result.rows.append({
            "table": "covering",
            **row.model_dump(),
            "covering_lower": cover.lower,
            "covering_upper": cover.upper,
            "greedy_count": cover.exact,
            "greedy_in_sandwich": cover.exact_in_sandwich,
        })

    for row in config.network:
        for m in row.m_values:
            entry = {"table": "network", "norm": row.norm, "r": row.r, "alpha": row.alpha,
                     "lam": row.dim, "m": m, "k_rate": row.k_rate}
            try:
                network = rnn_bound(row.norm, row.r, row.alpha, row.dim, m, k_rate=row.k_rate)
            except InfeasibleSampleCountError:
                entry.update(feasible=False, bound=1.0)
            else:
                entry.update(
                    feasible=network.feasible,
                    eps=network.eps_used,
                    big_lambda=network.big_lambda,
                    lipschitz=network.lipschitz,
                    bound=network.bound,
                    simplified=network.simplified,
                )
            result.rows.append(entry)

    outside = [row for row in result.rows if row.get("greedy_in_sandwich") is False]
    result.summary.update(
        rows=len(result.rows),
        infeasible=sum(1 for row in result.rows if row.get("feasible") is False),
        greedy_outside_sandwich=len(outside),
    )
    if outside:
        result.failures.append(f"{len(outside)} greedy covers fall outside the covering sandwich")
    for row in result.rows:
        for key in ("bound", "simplified"):
            value = row.get(key)
            if value is not None and not 0 <= value <= 1:
                result.failures.append(f"{key} {value} outside [0, 1]")
    return result


def cmd_mellin_check(config: MellinCheckConfig, settings: ADZSettings) -> ExperimentResult:
    """Inverse-multiplier identities, compact-form agreement, asymptotics and exact operator identities."""
    columns = ["table", "n", "ell", "alpha", "y", "k", "case", "value", "residual"]
    result = ExperimentResult("mellin-check", columns)
    failures: Dict[str, float] = {}

    def track(name: str, value: float) -> None:
        failures[name] = max(failures.get(name, 0.0), value)

    for n in config.n_values:
        for ell in range(config.ell_max + 1):
            case = "even" if ell >= 2 and ell % 2 == 0 else "standard"
            for y in config.y_values:
                residual = multiplier_inverse_identity(ell, n, y, case)
                track("inverse", residual)
                result.rows.append({"table": "inverse", "n": n, "ell": ell, "y": y, "case": case, "residual": residual})

    for n in config.n_values:
        for ell in range(config.ell_max + 1):
            for alpha in range(config.alpha_max + 1):
                spec = MultiplierSpec(ell=ell, alpha=alpha, n=n)
                if not spec.admissible:
                    continue
                for y in config.y_values:
                    # the compact form has removable singularities at y = 0
                    if y == 0:
                        continue
                    value = n_multiplier(spec, y)
                    residual = abs(value - n_multiplier_compact(spec, y)) / abs(value)
                    track("compact", residual)
                    result.rows.append({"table": "compact", "n": n, "ell": ell, "alpha": alpha, "y": y,
                                        "value": abs(value), "residual": residual})
                if alpha >= 1:
                    ratio = asymptotic_ratio(spec, config.asymptotic_y)
                    track("asymptotic", abs(ratio - 1))
                    result.rows.append({"table": "asymptotic", "n": n, "ell": ell, "alpha": alpha,
                                        "y": config.asymptotic_y, "value": ratio, "residual": abs(ratio - 1)})
                smallest = zero_scan(spec, config.zero_scan_y_max)
                if smallest <= 0:
                    result.failures.append(f"N_{ell}^{alpha} vanishes on the scan grid for n={n}")
                result.rows.append({"table": "zeros", "n": n, "ell": ell, "alpha": alpha,
                                    "y": config.zero_scan_y_max, "value": smallest})

    for alpha in range(1, config.operator_alpha_max + 1):
        for k in range(config.operator_degree_max + 1):
            for case, residual in zip(OPERATOR_IDENTITIES, operator_identity_residuals(alpha, k)):
                track("operator", residual)
                result.rows.append({"table": "operator", "alpha": alpha, "k": k, "case": case, "residual": residual})

    y = config.asymptotic_y
    quotient = gamma_quotient_modulus(7, 8, y) / math.sqrt(2 / y)
    result.rows.append({"table": "gamma_quotient", "y": y, "value": quotient, "residual": abs(quotient - 1)})

    result.summary.update({f"max_{name}_residual": value for name, value in failures.items()})
    limits = {
        "inverse": config.tolerance,
        "compact": config.tolerance,
        "asymptotic": config.asymptotic_tolerance,
    }
    for name, limit in limits.items():
        if failures.get(name, 0.0) >= limit:
            result.failures.append(f"{name} residual {failures[name]:.3e} >= {limit:.1e}")
    if failures.get("operator", 0):
        result.failures.append(f"operator identity residual {failures['operator']} is not zero")
    return result


COMMANDS: Dict[str, Callable[[ExperimentConfig, ADZSettings], ExperimentResult]] = {
    "decompose": cmd_decompose,
    "represent": cmd_represent,
    "rvfl": cmd_rvfl,
    "sigma": cmd_sigma,
    "bounds": cmd_bounds,
    "mellin-check": cmd_mellin_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adz", description="Barron-space representation experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        p = sub.add_parser(name, help=handler.__doc__.splitlines()[0])
        p.add_argument("--config", required=True, help="Experiment config (.json, .yaml, .yml)")
        p.add_argument("--profile", help="Config profile to apply (default: $ADZ_PROFILE)")
        p.add_argument("--out", help="Output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="Output format")
        p.add_argument("--seed", type=int, help="Base seed")
        p.add_argument("--threads", type=int, help="Worker threads")
        p.add_argument("--env-file", help=".env file with ADZ_* settings")
        p.add_argument("--log-level", type=str.upper, choices=ADZSettings.LOG_LEVELS, help="Logging level")
    return parser


def _settings(args: argparse.Namespace) -> ADZSettings:
    try:
        settings = ADZSettings.from_env(args.env_file)
    except ValidationError as e:
        errors = [{"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]} for err in e.errors()]
        raise ConfigError("Invalid ADZ_* settings", details={"errors": errors})
    if args.log_level:
        settings = settings.model_copy(update={"log_level": args.log_level})
    return settings


def run(args: argparse.Namespace) -> ExperimentResult:
    """
    Execute one subcommand and write its output.

    Raises:
        NumericalToleranceError: After writing, when check is enabled and a self-check failed
    """
    settings = _settings(args)
    settings.configure_logging()
    overrides = {"seed": args.seed, "threads": args.threads, "output": args.out, "format": args.format}
    config = load_experiment_config(args.command, args.config, args.profile, overrides)

    start = time.perf_counter()
    result = COMMANDS[args.command](config, settings)
    runtime = time.perf_counter() - start
    logger.info(f"{args.command} finished in {runtime:.2f}s with {len(result.rows)} rows")

    write_result(result, config, settings, __version__, runtime)
    for failure in result.failures:
        logger.warning(f"Self-check failed: {failure}")
    if config.check and result.failures:
        raise NumericalToleranceError(
            f"{len(result.failures)} self-checks failed in {args.command}",
            details={"failures": result.failures},
        )
    return result


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run(args)
    except ADZError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        print(f"adz: {e.message}", file=sys.stderr)
        for key, value in e.details.items():
            print(f"  {key}: {value}", file=sys.stderr)
        return e.exit_code
    return 0
