from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class CnarSettings(BaseSettings):
    output_dir: str = "output"

    # Benchmark replications are spread over this many processes
    workers: int = Field(default=1, ge=1)

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    # Where fixed loading matrices are cached, one .npy per (N, M)
    loadings_cache_dir: str | None = None

    default_seed: int = Field(default=2024, ge=0)

    model_config = SettingsConfigDict(env_prefix="CNAR_", env_file=".env", extra="ignore")


@lru_cache
def get_settings() -> CnarSettings:
    return CnarSettings()
