from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional
from pathlib import Path


class Settings(BaseSettings):
    """Toolkit settings from SPECRECON_* environment variables"""

    # Logging
    log_level: str = "INFO"
    log_dir: Optional[Path] = None

    # Runs
    workers: int = 1
    summary_digits: int = 4

    model_config = SettingsConfigDict(
        env_prefix="SPECRECON_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
