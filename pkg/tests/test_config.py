"""
Tests for runtime settings
"""

import logging
import os
import tempfile
from unittest.mock import patch

import pytest

from src.adz.config import ADZSettings


class TestADZSettings:
    """
    Test cases for the ADZSettings class
    """

    def test_default_values(self):
        """Test ADZSettings with default values"""
        with patch.dict(os.environ, {}, clear=True):
            settings = ADZSettings(_env_file=None)

        assert settings.log_level == "INFO"
        assert settings.log_file is None
        assert settings.threads == 1
        assert settings.sphere_resolution == 24
        assert settings.radial_order == 24
        assert settings.radial_panel_width == 1.0
        assert settings.gauss_jacobi_count == 64
        assert settings.record_runtime is False

    def test_custom_values(self):
        """Test ADZSettings with custom values"""
        settings = ADZSettings(
            _env_file=None,
            log_level="debug",
            threads=8,
            sphere_resolution=32,
            radial_order=16,
            radial_panel_width=0.5,
            record_runtime=True,
        )

        assert settings.log_level == "DEBUG"
        assert settings.threads == 8
        assert settings.sphere_resolution == 32
        assert settings.radial_order == 16
        assert settings.radial_panel_width == 0.5
        assert settings.record_runtime is True

    def test_log_level_validation_invalid(self):
        """Test log level validation with unknown level names"""
        for level in ["verbose", "TRACE", ""]:
            with pytest.raises(ValueError, match="log_level must be one of"):
                ADZSettings(_env_file=None, log_level=level)

    def test_threads_validation_invalid(self):
        """Test threads validation with nonpositive values"""
        for threads in [0, -1]:
            with pytest.raises(ValueError, match="threads must be a positive integer"):
                ADZSettings(_env_file=None, threads=threads)

    def test_sphere_resolution_validation_invalid(self):
        """Test sphere resolution validation"""
        with pytest.raises(ValueError, match="sphere_resolution must be at least 2"):
            ADZSettings(_env_file=None, sphere_resolution=1)

    def test_radial_order_validation_invalid(self):
        """Test radial order validation"""
        with pytest.raises(ValueError, match="radial_order must be at least 4"):
            ADZSettings(_env_file=None, radial_order=3)

    def test_radial_panel_width_validation_invalid(self):
        """Test radial panel width validation"""
        for width in [0.0, -1.0]:
            with pytest.raises(ValueError, match="radial_panel_width must be positive"):
                ADZSettings(_env_file=None, radial_panel_width=width)

    def test_gauss_jacobi_count_validation_invalid(self):
        """Test Gauss-Jacobi count validation"""
        with pytest.raises(ValueError, match="gauss_jacobi_count must be a positive integer"):
            ADZSettings(_env_file=None, gauss_jacobi_count=0)

    def test_from_env_with_env_file(self):
        """Test loading settings from an environment file"""
        env_content = """
ADZ_LOG_LEVEL=WARNING
ADZ_THREADS=4
ADZ_SPHERE_RESOLUTION=30
ADZ_RECORD_RUNTIME=true
"""
        with tempfile.NamedTemporaryFile(mode="w", suffix=".env", delete=False) as f:
            f.write(env_content)
            env_file_path = f.name

        try:
            with patch.dict(os.environ, {}, clear=True):
                settings = ADZSettings.from_env(env_file=env_file_path)

            assert settings.log_level == "WARNING"
            assert settings.threads == 4
            assert settings.sphere_resolution == 30
            assert settings.record_runtime is True
        finally:
            os.unlink(env_file_path)

    def test_from_env_with_os_environment(self):
        """Test loading settings from the OS environment"""
        with patch.dict(os.environ, {"ADZ_THREADS": "2", "ADZ_RADIAL_ORDER": "32"}, clear=True):
            settings = ADZSettings.from_env()

        assert settings.threads == 2
        assert settings.radial_order == 32

    def test_from_env_with_invalid_threads(self):
        """Test loading settings with a non-numeric thread count"""
        with patch.dict(os.environ, {"ADZ_THREADS": "many"}, clear=True):
            with pytest.raises(ValueError):
                ADZSettings.from_env()

    def test_env_priority(self):
        """Test that direct parameters take priority over environment"""
        with patch.dict(os.environ, {"ADZ_THREADS": "6", "ADZ_LOG_LEVEL": "ERROR"}):
            settings = ADZSettings(_env_file=None, threads=3, log_level="INFO")

        assert settings.threads == 3
        assert settings.log_level == "INFO"

    def test_configure_logging(self, mocker):
        """Test that configure_logging installs the root configuration"""
        basic_config = mocker.patch("src.adz.config.logging.basicConfig")
        settings = ADZSettings(_env_file=None, log_level="DEBUG", log_file="run.log")

        settings.configure_logging()

        basic_config.assert_called_once_with(
            level=logging.DEBUG,
            format=settings.log_format,
            filename="run.log",
            force=True,
        )
