"""Configuration management using Pydantic Settings.

Environment variables (prefixed with ``CL_``) are loaded from a .env file and can be
overridden by actual environment variables.
"""

from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_FORMATS = ("auto", "json", "text")


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="CL_",
        case_sensitive=False,
        extra="ignore",
    )

    # Geometry
    max_q: int = Field(
        default=13,
        description="Largest field order accepted by build_geometry",
    )
    omega: int | None = Field(
        default=None,
        description="Field code of the non-square used by the quadric pencil. "
        "If not set, the smallest non-square is used",
    )

    # Verification
    witness_limit: int = Field(
        default=10,
        description="Maximum number of failing ids kept in a verification report",
    )
    verify_workers: int = Field(
        default=1,
        description="Worker threads for the chunked Klein-quadric fold",
    )
    verify_chunk_size: int = Field(
        default=512,
        description="Klein points per chunk in the tight-set fold",
    )

    # Symmetry
    closure_budget: int = Field(
        default=100_000,
        description="Maximum group order before closure is abandoned",
    )

    # Search
    search_budget: int = Field(
        default=5_000,
        description="Maximum number of derived classes evaluated by one search",
    )

    # Environment
    environment: str = Field(
        default="development",
        description="Environment name (development, ci, production)",
    )
    debug: bool = Field(
        default=False,
        description="Enable debug mode",
    )

    # Logging
    log_level: str = Field(
        default="",
        description="Override log level (DEBUG, INFO, WARNING, ERROR). If empty, auto-determined.",
    )
    log_format: str = Field(
        default="auto",
        description="Log format: 'json' for structured, 'text' for readable, 'auto' for environment-based",
    )

    @field_validator("max_q")
    @classmethod
    def validate_max_q(cls, v: int) -> int:
        """Reject capacity bounds that exclude every odd prime power."""
        if v < 3:
            raise ValueError("max_q must be at least 3")
        return v

    @field_validator(
        "verify_workers", "verify_chunk_size", "witness_limit", "closure_budget", "search_budget"
    )
    @classmethod
    def validate_positive(cls, v: int, info) -> int:
        """Require strictly positive sizes."""
        if v < 1:
            raise ValueError(f"{info.field_name} must be positive")
        return v

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Restrict the log format to the supported values."""
        v = v.lower()
        if v not in LOG_FORMATS:
            raise ValueError(f"log_format must be one of {', '.join(LOG_FORMATS)}")
        return v

    @property
    def is_production(self) -> bool:
        """Check if running in production environment."""
        return self.environment == "production"


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
