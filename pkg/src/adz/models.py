"""
Pydantic models for experiment configurations and bound parameters
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class StrictModel(BaseModel):
    """Base for every schema: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")


class DensitySpec(StrictModel):
    """
    Catalog density reference

    Attributes:
        id: Catalog name (gaussian, shifted_gaussian, harmonic_gaussian, radial_shell, sigma)
        params: Keyword parameters of the catalog entry
    """

    id: str = Field(..., description="Catalog density name")
    params: Dict[str, float] = Field(default_factory=dict, description="Catalog parameters")


class MultiplierSpec(StrictModel):
    """
    Index of a multiplier N_l^alpha

    Attributes:
        ell: Degree
        alpha: Derivative order
        n: Dimension
    """

    ell: int = Field(..., ge=0, description="Degree")
    alpha: int = Field(..., ge=0, description="Derivative order")
    n: int = Field(..., ge=2, description="Dimension")

    @property
    def in_even_class(self) -> bool:
        """Degree lies in {2, 4, 6, ...}."""
        return self.ell >= 2 and self.ell % 2 == 0

    @property
    def admissible(self) -> bool:
        return self.alpha >= 1 or not self.in_even_class


class BoundParams(StrictModel):
    """
    Inputs of the sup-norm concentration bound

    Attributes:
        lam: Ambient dimension lambda
        b: Almost-sure bound of the summands
        k: Lipschitz constant of the summands
        eps: Accuracy
        n: Sample count
        rho: Radius of the ball K(rho) the supremum runs over
    """

    lam: int = Field(..., ge=1, description="Ambient dimension")
    b: float = Field(..., gt=0, description="Almost-sure summand bound")
    k: float = Field(..., gt=0, description="Lipschitz constant")
    eps: float = Field(..., gt=0, description="Accuracy")
    n: float = Field(..., gt=0, description="Sample count")
    rho: float = Field(default=1.0, gt=0, description="Ball radius")


class BoundReport(StrictModel):
    """
    Computed quantities of the concentration bound

    Attributes:
        params: Inputs
        feasible: Whether n >= 4 lambda (b/eps)^2
        zeta: Optimized Chernoff parameter
        delta: Net radius lambda/(k zeta)
        theta: Covering density constant theta_lambda
        big_theta: Theta_lambda
        covering_lower: Lower covering sandwich value
        covering_upper: Upper covering sandwich value
        log_bound: Natural log of the unclamped bound
        bound: min(1, exp(log_bound))
        log_asymptotic: Natural log of the simplified large-n display
    """

    params: BoundParams
    feasible: bool
    zeta: Optional[float] = None
    delta: Optional[float] = None
    theta: float
    big_theta: float
    covering_lower: Optional[float] = None
    covering_upper: Optional[float] = None
    log_bound: Optional[float] = None
    bound: Optional[float] = None
    log_asymptotic: Optional[float] = None


class ExperimentConfig(StrictModel):
    """
    Fields shared by every subcommand

    Attributes:
        seed: Base seed
        output: Output path (stdout when omitted)
        format: csv or json
        threads: Worker threads, overrides ADZ_THREADS
        check: Raise on failed self-checks
    """

    seed: int = Field(default=0, ge=0, lt=2 ** 64, description="Base seed")
    output: Optional[str] = Field(default=None, description="Output path")
    format: Literal["csv", "json"] = Field(default="csv", description="Output format")
    threads: Optional[int] = Field(default=None, ge=1, description="Worker threads")
    check: bool = Field(default=False, description="Raise on failed self-checks")


class DecomposeConfig(ExperimentConfig):
    """Zonal decomposition check: f_l, G_l, the inversion identity and Abel reconstruction"""

    n: int = Field(default=3, ge=2, description="Dimension")
    density: DensitySpec
    ell_values: List[int] = Field(default_factory=lambda: list(range(7)), description="Degrees to tabulate")
    theta_count: int = Field(default=2, ge=1, description="Random directions")
    t_values: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], description="Radial offsets t > 0")
    ell_max: int = Field(default=48, ge=0, description="Abel truncation degree")
    gauss_jacobi_count: int = Field(default=64, ge=1, description="Inversion rule size")
    tolerance: float = Field(default=1e-5, gt=0, description="Inversion residual tolerance")

    @field_validator("ell_values")
    @classmethod
    def validate_ell_values(cls, v: List[int]) -> List[int]:
        if any(ell < 0 for ell in v):
            raise ValueError("ell_values must be nonnegative")
        return v

    @field_validator("t_values")
    @classmethod
    def validate_t_values(cls, v: List[float]) -> List[float]:
        if any(t <= 0 for t in v):
            raise ValueError("t_values must be positive")
        return v

    @model_validator(mode="after")
    def validate_ell_max(self) -> "DecomposeConfig":
        if self.ell_values and max(self.ell_values) > self.ell_max:
            raise ValueError("ell_values must not exceed ell_max")
        return self


class RepresentConfig(ExperimentConfig):
    """Dual-Radon (alpha = 0) or N^alpha reconstruction on K(r)"""

    n: int = Field(default=3, ge=2, description="Dimension")
    density: DensitySpec
    alpha: int = Field(default=0, ge=0, description="Activation order")
    r: float = Field(default=1.0, gt=0, description="Ball radius")
    point_count: int = Field(default=10, ge=1, description="Random evaluation points in K(r)")
    sphere_resolution: Optional[int] = Field(default=None, ge=2, description="Direction rule resolution")
    tolerance: float = Field(default=1e-4, gt=0, description="Reconstruction tolerance")


class RvflConfig(ExperimentConfig):
    """Random-feature network campaign"""

    n: int = Field(default=3, ge=2, description="Dimension")
    density: DensitySpec
    alpha: int = Field(default=2, ge=1, description="Activation order")
    r: float = Field(default=1.0, gt=0, description="Ball radius")
    m_values: List[int] = Field(..., min_length=1, description="Network sizes")
    eps_values: List[float] = Field(..., min_length=1, description="Accuracy thresholds")
    trials: int = Field(default=200, ge=30, description="Trials per network size")
    grid_resolution: int = Field(default=6, ge=1, description="Lattice resolution of K(r)")
    k_rate: Optional[float] = Field(default=None, gt=0, description="Rate parameter of the theoretical bound")

    @field_validator("m_values")
    @classmethod
    def validate_m_values(cls, v: List[int]) -> List[int]:
        if any(m < 1 for m in v):
            raise ValueError("m_values must be positive")
        if len(set(v)) != len(v):
            raise ValueError("m_values must not repeat")
        return v

    @field_validator("eps_values")
    @classmethod
    def validate_eps_values(cls, v: List[float]) -> List[float]:
        if any(e <= 0 for e in v):
            raise ValueError("eps_values must be positive")
        if len(set(v)) != len(v):
            raise ValueError("eps_values must not repeat")
        return v


class SigmaConfig(ExperimentConfig):
    """Slow-decay example sigma(u) = [|u| > 1]/|u|^(n+1)"""

    n: int = Field(default=3, ge=2, le=4, description="Dimension")
    radii: List[float] = Field(
        default_factory=lambda: [0.25 * i for i in range(41)],
        description="Radii |x| in [0, 10]",
    )
    fd_step: float = Field(default=1e-2, gt=0, description="Finite-difference step for the Laplacian")
    tolerance: float = Field(default=1e-3, gt=0, description="Normalized closed-form residual tolerance")

    @field_validator("radii")
    @classmethod
    def validate_radii(cls, v: List[float]) -> List[float]:
        if any(x < 0 for x in v):
            raise ValueError("radii must be nonnegative")
        return sorted(v)


class BoundRow(StrictModel):
    """One (lambda, b, k, eps, n) row"""

    lam: int = Field(..., ge=1)
    b: float = Field(..., gt=0)
    k: float = Field(..., gt=0)
    eps: float = Field(..., gt=0)
    n: float = Field(..., gt=0)
    rho: float = Field(default=1.0, gt=0)


class CoveringRow(StrictModel):
    """One covering-number request"""

    lam: int = Field(..., ge=1)
    rho: float = Field(..., gt=0)
    delta: float = Field(..., gt=0)
    shape: Literal["ball", "box"] = "ball"


class NetworkBoundRow(StrictModel):
    """Theoretical RVFL bound over a grid of network sizes"""

    norm: float = Field(..., gt=0, description="||f | N^alpha||")
    r: float = Field(..., gt=0)
    alpha: int = Field(..., ge=2)
    dim: int = Field(..., ge=1)
    m_values: List[int] = Field(..., min_length=1)
    k_rate: float = Field(..., gt=0)


class BoundsConfig(ExperimentConfig):
    """Concentration-bound tables"""

    rows: List[BoundRow] = Field(default_factory=list)
    covering: List[CoveringRow] = Field(default_factory=list)
    greedy: bool = Field(default=True, description="Add greedy counts for lambda <= 3")
    network: List[NetworkBoundRow] = Field(default_factory=list)


class MellinCheckConfig(ExperimentConfig):
    """Multiplier identities, asymptotics and exact operator identities"""

    ell_max: int = Field(default=6, ge=0)
    n_values: List[int] = Field(default_factory=lambda: [2, 3])
    y_values: List[float] = Field(default_factory=lambda: [0.5, 2.0])
    alpha_max: int = Field(default=3, ge=1)
    asymptotic_y: float = Field(default=1e4, gt=0)
    operator_alpha_max: int = Field(default=6, ge=1, le=6)
    operator_degree_max: int = Field(default=8, ge=0, le=8)
    tolerance: float = Field(default=1e-8, gt=0)
    asymptotic_tolerance: float = Field(default=0.02, gt=0)
    zero_scan_y_max: float = Field(default=1e3, gt=0)

    @field_validator("n_values")
    @classmethod
    def validate_n_values(cls, v: List[int]) -> List[int]:
        if any(n < 2 for n in v):
            raise ValueError("n_values must be at least 2")
        return v


CONFIG_MODELS = {
    "decompose": DecomposeConfig,
    "represent": RepresentConfig,
    "rvfl": RvflConfig,
    "sigma": SigmaConfig,
    "bounds": BoundsConfig,
    "mellin-check": MellinCheckConfig,
}
