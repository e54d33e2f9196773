"""
Runtime settings for the adz library and experiment driver
"""

import logging
from typing import Optional, ClassVar, Tuple
from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class ADZSettings(BaseSettings):
    """
    Process-wide settings read from ADZ_* environment variables and .env files.

    Attributes:
        log_level: Logging level name (default: "INFO")
        log_format: Format string handed to logging.basicConfig
        log_file: Optional log file; empty means stderr
        threads: Worker threads for trial campaigns and grid evaluations (default: 1)
        sphere_resolution: Default resolution of sphere product rules (default: 24)
        radial_order: Gauss-Legendre order per radial panel (default: 24)
        radial_panel_width: Width of radial quadrature panels (default: 1.0)
        gauss_jacobi_count: Default Gauss-Jacobi node count (default: 64)
        record_runtime: Write wall-clock runtime into output preambles (default: False)
    """

    log_level: str = Field(default="INFO", description="Logging level name")
    log_format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log record format",
    )
    log_file: Optional[str] = Field(default=None, description="Log file path")
    threads: int = Field(default=1, description="Worker threads")
    sphere_resolution: int = Field(default=24, description="Sphere rule resolution")
    radial_order: int = Field(default=24, description="Radial Gauss-Legendre order")
    radial_panel_width: float = Field(default=1.0, description="Radial panel width")
    gauss_jacobi_count: int = Field(default=64, description="Gauss-Jacobi node count")
    record_runtime: bool = Field(default=False, description="Record runtime in output")

    LOG_LEVELS: ClassVar[Tuple[str, ...]] = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

    model_config = {
        "env_prefix": "ADZ_",
        "env_file": ".env",
        "case_sensitive": False,
        "extra": "ignore",
    }

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """
        Validate the logging level name.

        Raises:
            ValueError: If the level is not a standard logging level
        """
        level = v.upper()
        if level not in cls.LOG_LEVELS:
            raise ValueError(f"log_level must be one of: {', '.join(cls.LOG_LEVELS)}")
        return level

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError("threads must be a positive integer")
        return v

    @field_validator("sphere_resolution")
    @classmethod
    def validate_sphere_resolution(cls, v: int) -> int:
        if v < 2:
            raise ValueError("sphere_resolution must be at least 2")
        return v

    @field_validator("radial_order")
    @classmethod
    def validate_radial_order(cls, v: int) -> int:
        if v < 4:
            raise ValueError("radial_order must be at least 4")
        return v

    @field_validator("radial_panel_width")
    @classmethod
    def validate_radial_panel_width(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("radial_panel_width must be positive")
        return v

    @field_validator("gauss_jacobi_count")
    @classmethod
    def validate_gauss_jacobi_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("gauss_jacobi_count must be a positive integer")
        return v

    def configure_logging(self) -> None:
        """Install the root logging configuration described by these settings."""
        logging.basicConfig(
            level=getattr(logging, self.log_level),
            format=self.log_format,
            filename=self.log_file or None,
            force=True,
        )

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "ADZSettings":
        """
        Load settings from environment variables.

        Args:
            env_file: Path to .env file (optional)

        Returns:
            ADZSettings instance with values from the environment
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        return cls()
