"""
Experiment configuration loader

Reads a JSON or YAML experiment file, substitutes ${VAR} references from the
environment, applies an optional profile and validates the result against the
schema of one subcommand.

Usage:
    from src.adz.config_loader import load_experiment_config

    config = load_experiment_config("rvfl", "config/rvfl.json", profile="desk")
"""

import json
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from .exceptions import ConfigError
from .models import CONFIG_MODELS, ExperimentConfig

logger = logging.getLogger(__name__)

PROFILE_ENV_VAR = "ADZ_PROFILE"
ENV_PATTERN = re.compile(r"\$\{([^}]+)\}")
YAML_SUFFIXES = (".yaml", ".yml")


class ExperimentConfigLoader:
    """Loader for experiment configuration files"""

    def __init__(self, config_path: str):
        """
        Initialize the loader

        Args:
            config_path: Path to a .json, .yaml or .yml file
        """
        self.config_path = Path(config_path)
        self.config_data: Dict[str, Any] = {}
        self.active_profile: Optional[str] = None

    def load(self, profile: Optional[str] = None) -> Dict[str, Any]:
        """
        Load the configuration file

        Args:
            profile: Profile to apply; falls back to ADZ_PROFILE

        Returns:
            Configuration dictionary with the profile merged in and the
            profiles section removed

        Raises:
            ConfigError: If the file is missing, unparsable or the profile is unknown
        """
        if not self.config_path.exists():
            raise ConfigError(f"Config file not found: {self.config_path}", details={"path": str(self.config_path)})

        data = self._parse(self.config_path.read_text(encoding="utf-8"))
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("Config file must contain a mapping at the top level")

        self.config_data = self._substitute_env_vars(data)

        profile = profile or os.environ.get(PROFILE_ENV_VAR)
        if profile:
            self._apply_profile(profile)
        self.config_data.pop("profiles", None)

        logger.debug(f"Loaded {self.config_path} (profile: {self.active_profile or 'none'})")
        return self.config_data

    def _parse(self, text: str) -> Any:
        if self.config_path.suffix.lower() in YAML_SUFFIXES:
            try:
                import yaml
            except ImportError:
                raise ConfigError(
                    "YAML configs need PyYAML: pip install -r requirements-yaml.txt",
                    details={"path": str(self.config_path)},
                )
            try:
                return yaml.safe_load(text)
            except yaml.YAMLError as e:
                mark = getattr(e, "problem_mark", None)
                details = {"path": str(self.config_path)}
                if mark is not None:
                    details.update(line=mark.line + 1, column=mark.column + 1)
                raise ConfigError(f"Invalid YAML: {e}", details=details)
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"Invalid JSON: {e.msg}",
                details={"path": str(self.config_path), "line": e.lineno, "column": e.colno},
            )

    def _substitute_env_vars(self, data: Any) -> Any:
        """
        Replace ${VAR} in string values with environment values

        Unset variables are left as written. A value that consists of a single
        reference to a numeric variable becomes a number.
        """
        if isinstance(data, dict):
            return {k: self._substitute_env_vars(v) for k, v in data.items()}
        if isinstance(data, list):
            return [self._substitute_env_vars(item) for item in data]
        if isinstance(data, str):
            substituted = ENV_PATTERN.sub(lambda match: os.environ.get(match.group(1), match.group(0)), data)
            if substituted != data and ENV_PATTERN.fullmatch(data):
                try:
                    return json.loads(substituted)
                except json.JSONDecodeError:
                    return substituted
            return substituted
        return data

    def _apply_profile(self, profile: str) -> None:
        """
        Merge a named profile over the base configuration

        Raises:
            ConfigError: If the profile is not defined
        """
        profiles = self.config_data.get("profiles") or {}
        if profile not in profiles:
            available = ", ".join(profiles) or "none"
            raise ConfigError(
                f"Profile '{profile}' not found. Available: {available}",
                details={"profile": profile},
            )
        self.active_profile = profile
        self._deep_merge(self.config_data, profiles[profile])

    def _deep_merge(self, base: dict, override: dict) -> None:
        for key, value in override.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_merge(base[key], value)
            else:
                base[key] = value

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Value at a dotted path

        Args:
            key_path: Dotted path, e.g. "density.params.center"
            default: Value returned when the path is absent
        """
        value: Any = self.config_data
        for key in key_path.split("."):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def validate(self, command: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        Validate the loaded data against a subcommand schema

        Args:
            command: Subcommand name
            overrides: Values that replace file values when not None (CLI flags)

        Raises:
            ConfigError: With the pydantic error locations in details["errors"]
        """
        if command not in CONFIG_MODELS:
            raise ConfigError(
                f"Unknown subcommand '{command}'. Available: {', '.join(CONFIG_MODELS)}",
                details={"command": command},
            )
        data = dict(self.config_data)
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        try:
            return CONFIG_MODELS[command].model_validate(data)
        except ValidationError as e:
            errors = [
                {"field": ".".join(str(part) for part in err["loc"]), "message": err["msg"]}
                for err in e.errors()
            ]
            summary = "; ".join(f"{err['field']}: {err['message']}" for err in errors)
            raise ConfigError(f"Invalid {command} config: {summary}", details={"errors": errors})


def load_experiment_config(
    command: str,
    config_path: str,
    profile: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Load and validate an experiment config in one step

    Args:
        command: Subcommand name (decompose, represent, rvfl, sigma, bounds, mellin-check)
        config_path: Path to the config file
        profile: Profile to apply (optional)
        overrides: CLI values for seed, threads, output and format

    Example:
        >>> config = load_experiment_config("bounds", "config/bounds.json")
        >>> config.rows[0].lam
        1
    """
    loader = ExperimentConfigLoader(config_path)
    loader.load(profile=profile)
    return loader.validate(command, overrides)
