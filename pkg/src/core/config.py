# hexinject - Runtime Settings
# Environment-driven defaults loaded from .env

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

load_dotenv()

DESK_SHOTS = 10**6
FULL_SCALE_SHOTS = 10**7
DEFAULT_BATCH_SIZE = 64 * 1024


class Settings(BaseModel):
    """Process-wide settings read from the environment."""
    log_level: str = "INFO"
    log_dir: Optional[str] = "logs"
    batch_size: int = Field(DEFAULT_BATCH_SIZE, ge=64)
    workers: int = Field(1, ge=1)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of {valid_levels}")
        return v.upper()


def load_settings() -> Settings:
    """
    Build settings from HEXINJECT_* environment variables.

    Returns:
        Settings with defaults for anything unset. An empty
        HEXINJECT_LOG_DIR disables file logging.
    """
    log_dir = os.getenv("HEXINJECT_LOG_DIR", "logs")
    return Settings(
        log_level=os.getenv("HEXINJECT_LOG_LEVEL", "INFO"),
        log_dir=log_dir or None,
        batch_size=int(os.getenv("HEXINJECT_BATCH_SIZE", DEFAULT_BATCH_SIZE)),
        workers=int(os.getenv("HEXINJECT_WORKERS", 1)),
    )
