from pathlib import Path
from typing import Literal, Optional

import psutil
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


def _physical_cores() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class KnotSettings(BaseSettings):
    """Process-wide configuration, read from ``KNOT_*`` environment variables."""

    model_config = SettingsConfigDict(env_prefix="KNOT_", case_sensitive=False)

    threads: int = Field(default_factory=_physical_cores)
    base_dir: Path = Path("data")
    production_mode: bool = True
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Objective
    weights_file: Optional[Path] = None

    # Rendering defaults
    stroke_width: float = 4.0
    gap: float = 15.0

    version: str = "knotfair-0.3.0"

    @field_validator("threads")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        return max(1, value)

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper(cls, value: str) -> str:
        return value.upper() if isinstance(value, str) else value

    @property
    def checkpoints_dir(self) -> Path:
        return self.base_dir / "checkpoints"

    @property
    def logs_dir(self) -> Path:
        return self.base_dir / "logs"

    @property
    def renders_dir(self) -> Path:
        return self.base_dir / "renders"


settings = KnotSettings()
