"""Settings loader and run configuration for kernelfix commands."""

import os
from pathlib import Path
from typing import Any, Literal

import structlog
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

logger = structlog.get_logger()


class Settings(BaseModel):
    """Size bounds and defaults for the exhaustive operations."""

    workers: int = Field(default=1, ge=1)
    exhaustive_limit: int = Field(default=25, ge=1)
    permis_limit: int = Field(default=10, ge=1)
    census_limit: int = Field(default=7, ge=1)
    tethered_limit: int = Field(default=14, ge=1)
    shortest_word_limit: int = Field(default=12, ge=1)
    shortest_word_budget: int = Field(default=2_000_000, ge=1)


class SettingsLoader:
    """Loads settings from an optional YAML file."""

    def __init__(self, settings_file: str = "kernelfix.yaml", explicit: bool = False):
        self.settings_file = Path(settings_file)
        self.explicit = explicit
        self.settings = Settings()

    def load_settings(self) -> Settings:
        """Load settings, keeping the defaults when the file is missing or broken."""
        if not self.settings_file.exists():
            log = logger.warning if self.explicit else logger.info
            log("Settings file does not exist", file=str(self.settings_file))
            return self.settings

        try:
            self.settings = self._load_yaml_file(self.settings_file)
        except Exception as e:
            logger.error(
                "Failed to load settings file",
                file=str(self.settings_file),
                error=str(e),
            )

        return self.settings

    def _load_yaml_file(self, yaml_file: Path) -> Settings:
        with open(yaml_file) as f:
            content = yaml.safe_load(f)

        if not content:
            return Settings()
        if not isinstance(content, dict):
            raise ValueError("settings file must hold a mapping")

        # Accept both a top-level mapping and one nested under "kernelfix"
        section: dict[str, Any] = content.get("kernelfix", content)
        return Settings.model_validate(section)

    def reload(self) -> Settings:
        self.settings = Settings()
        return self.load_settings()


def get_settings_loader() -> SettingsLoader:
    """Get configured settings loader instance."""
    settings_file = os.getenv("KERNELFIX_CONFIG")
    if settings_file:
        return SettingsLoader(settings_file, explicit=True)
    return SettingsLoader()


def get_worker_count(default: int = 1) -> int:
    """Worker count from ``KERNELFIX_WORKERS``, falling back to ``default``."""
    raw = os.getenv("KERNELFIX_WORKERS")
    if raw is None:
        return default
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        logger.warning(
            f"Invalid KERNELFIX_WORKERS '{raw}', defaulting to {default}",
            workers=raw,
        )
        return default
    return workers


class RunConfig(BaseModel):
    """Validated options shared by every CLI command."""

    graph: str | None = None
    graph_file: str | None = None
    workers: int = Field(default=1, ge=1)
    output_format: Literal["json", "text"] = "json"
    deterministic: bool = False
    requires_graph: bool = True

    @model_validator(mode="after")
    def _one_source(self) -> "RunConfig":
        if self.requires_graph and (self.graph is None) == (self.graph_file is None):
            raise ValueError("give exactly one of --graph or --graph-file")
        if self.deterministic:
            self.workers = 1
        return self

    def graph_text(self) -> str:
        if self.graph is not None:
            return self.graph
        if self.graph_file is None:
            raise ValueError("no graph input given")
        return Path(self.graph_file).read_text()


def build_run_config(**options: Any) -> RunConfig:
    """Build a ``RunConfig``; pydantic errors propagate to the caller."""
    try:
        return RunConfig(**options)
    except ValidationError:
        logger.error("Invalid run configuration", options=sorted(options))
        raise
