"""Tests for settings loading and validation."""

import os
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from cameron_liebler.config import Settings, get_settings


class TestDefaults:
    """Tests for default values."""

    def test_defaults(self):
        """Test the documented defaults when no CL_ variables are set."""
        with patch.dict(os.environ, {}, clear=True):
            settings = Settings(_env_file=None)
        assert settings.max_q == 13
        assert settings.omega is None
        assert settings.witness_limit == 10
        assert settings.verify_workers == 1
        assert settings.verify_chunk_size == 512
        assert settings.closure_budget == 100_000
        assert settings.search_budget == 5_000
        assert settings.log_format == "auto"
        assert settings.is_production is False


class TestEnvironment:
    """Tests for environment overrides."""

    def test_prefixed_variables_override(self):
        env = {"CL_MAX_Q": "11", "CL_OMEGA": "5", "CL_VERIFY_WORKERS": "4"}
        with patch.dict(os.environ, env, clear=True):
            settings = Settings(_env_file=None)
        assert settings.max_q == 11
        assert settings.omega == 5
        assert settings.verify_workers == 4

    def test_get_settings_is_cached(self):
        assert get_settings() is get_settings()

    def test_production_flag(self):
        with patch.dict(os.environ, {"CL_ENVIRONMENT": "production"}, clear=True):
            assert Settings(_env_file=None).is_production is True


class TestValidation:
    """Tests for field validators."""

    def test_max_q_too_small(self):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, max_q=2)

    @pytest.mark.parametrize(
        "name", ["verify_workers", "verify_chunk_size", "witness_limit", "closure_budget", "search_budget"]
    )
    def test_sizes_must_be_positive(self, name):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, **{name: 0})

    def test_log_format_normalised(self):
        assert Settings(_env_file=None, log_format="JSON").log_format == "json"

    def test_log_format_rejected(self):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, log_format="xml")
