"""Tests for settings configuration."""

import pytest
from _pytest.monkeypatch import MonkeyPatch
from pydantic import ValidationError

from py_cnar import CnarSettings
from py_cnar.config import get_settings


class TestCnarSettings:
    """Tests for CnarSettings."""

    def test_default_settings(self, monkeypatch: MonkeyPatch) -> None:
        """Test default settings values."""
        monkeypatch.delenv("CNAR_LOADINGS_CACHE_DIR", raising=False)
        settings = CnarSettings()
        assert settings.output_dir == "output"
        assert settings.workers == 1
        assert settings.log_level == "WARNING"
        assert settings.loadings_cache_dir is None
        assert settings.default_seed == 2024

    def test_programmatic_settings(self) -> None:
        """Test creating settings programmatically."""
        settings = CnarSettings(
            output_dir="./runs",
            workers=4,
            log_level="DEBUG",
            loadings_cache_dir="./cache",
            default_seed=7,
        )

        assert settings.output_dir == "./runs"
        assert settings.workers == 4
        assert settings.log_level == "DEBUG"
        assert settings.loadings_cache_dir == "./cache"
        assert settings.default_seed == 7

    def test_environment_variables(self, monkeypatch: MonkeyPatch) -> None:
        """Test loading from environment variables."""
        monkeypatch.setenv("CNAR_WORKERS", "3")
        monkeypatch.setenv("CNAR_OUTPUT_DIR", "/tmp/cnar")
        monkeypatch.setenv("CNAR_DEFAULT_SEED", "99")

        settings = CnarSettings()

        assert settings.workers == 3
        assert settings.output_dir == "/tmp/cnar"
        assert settings.default_seed == 99

    def test_case_insensitive_env_vars(self, monkeypatch: MonkeyPatch) -> None:
        """Test that environment variables are case-insensitive."""
        monkeypatch.setenv("cnar_log_level", "INFO")

        settings = CnarSettings()
        assert settings.log_level == "INFO"

    def test_invalid_values(self) -> None:
        """Test that out-of-range values are rejected."""
        with pytest.raises(ValidationError):
            CnarSettings(workers=0)
        with pytest.raises(ValidationError):
            CnarSettings(log_level="LOUD")  # type: ignore[arg-type]


def test_get_settings_is_cached(monkeypatch: MonkeyPatch) -> None:
    """Test that settings are read once until the cache is cleared."""
    monkeypatch.setenv("CNAR_WORKERS", "2")
    first = get_settings()
    monkeypatch.setenv("CNAR_WORKERS", "5")

    assert get_settings() is first
    assert get_settings().workers == 2

    get_settings.cache_clear()
    assert get_settings().workers == 5
