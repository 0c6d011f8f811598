"""
Configuration management using Pydantic settings.
"""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide defaults loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="STALEBOOST_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Output
    output_dir: str = "runs"

    # Logging
    log_level: str = "INFO"
    log_format: str = "json"
    structured_logging: bool = True

    # Run-file defaults; a value given in the run file wins
    max_bins: int = 255
    default_seed: int = 0
    progress_every: int = 50


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the cached settings instance."""
    return Settings()
