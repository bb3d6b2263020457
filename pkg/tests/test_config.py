"""Unit tests for config module."""

import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest
import yaml
from pydantic import ValidationError

from kernelfix.config import (
    RunConfig,
    Settings,
    SettingsLoader,
    build_run_config,
    get_settings_loader,
    get_worker_count,
)


class TestSettings:
    """Test Settings defaults and validation."""

    def test_defaults(self) -> None:
        """Test the default size bounds."""
        settings = Settings()

        assert settings.workers == 1
        assert settings.exhaustive_limit == 25
        assert settings.permis_limit == 10
        assert settings.census_limit == 7
        assert settings.shortest_word_limit == 12

    def test_rejects_non_positive(self) -> None:
        """Test that bounds must be positive."""
        with pytest.raises(ValidationError):
            Settings(permis_limit=0)


class TestSettingsLoader:
    """Test SettingsLoader class."""

    def setup_method(self) -> None:
        """Setup test fixtures."""
        self.temp_dir = tempfile.mkdtemp()
        self.settings_file = Path(self.temp_dir) / "kernelfix.yaml"
        self.loader = SettingsLoader(str(self.settings_file))

    def create_test_yaml(self, content: object) -> Path:
        """Helper to create test YAML file."""
        with open(self.settings_file, "w") as f:
            yaml.dump(content, f)
        return self.settings_file

    def test_load_nested_settings(self) -> None:
        """Test settings nested under the kernelfix key."""
        self.create_test_yaml({"kernelfix": {"workers": 4, "permis_limit": 8}})

        settings = self.loader.load_settings()

        assert settings.workers == 4
        assert settings.permis_limit == 8
        assert settings.census_limit == 7

    def test_load_top_level_settings(self) -> None:
        """Test settings given as a top-level mapping."""
        self.create_test_yaml({"exhaustive_limit": 20})

        assert self.loader.load_settings().exhaustive_limit == 20

    def test_missing_file(self) -> None:
        """Test that a missing file keeps the defaults."""
        assert self.loader.load_settings() == Settings()

    def test_empty_file(self) -> None:
        """Test that an empty file keeps the defaults."""
        self.settings_file.write_text("")

        assert self.loader.load_settings() == Settings()

    def test_invalid_yaml(self) -> None:
        """Test that broken YAML keeps the defaults."""
        self.settings_file.write_text("kernelfix: [unclosed")

        assert self.loader.load_settings() == Settings()

    def test_invalid_values(self) -> None:
        """Test that values failing validation keep the defaults."""
        self.create_test_yaml({"kernelfix": {"workers": 0}})

        assert self.loader.load_settings().workers == 1

    def test_non_mapping(self) -> None:
        """Test that a YAML list is rejected."""
        self.create_test_yaml([1, 2, 3])

        assert self.loader.load_settings() == Settings()

    def test_reload(self) -> None:
        """Test reloading picks up file changes."""
        self.create_test_yaml({"workers": 2})
        assert self.loader.load_settings().workers == 2

        self.create_test_yaml({"workers": 3})
        assert self.loader.reload().workers == 3


class TestRunConfig:
    """Test RunConfig validation."""

    def test_exactly_one_source(self) -> None:
        """Test that the graph must come from exactly one place."""
        with pytest.raises(ValidationError):
            RunConfig()
        with pytest.raises(ValidationError):
            RunConfig(graph="P3", graph_file="g.json")

    def test_graph_not_required(self) -> None:
        """Test commands that take no graph."""
        assert RunConfig(requires_graph=False).graph is None

    def test_deterministic_forces_one_worker(self) -> None:
        """Test that deterministic runs are single-process."""
        assert RunConfig(graph="P3", workers=8, deterministic=True).workers == 1

    def test_graph_text_from_file(self) -> None:
        """Test reading the graph text from a file."""
        graph_file = Path(tempfile.mkdtemp()) / "g.txt"
        graph_file.write_text("Bg\n")

        assert RunConfig(graph_file=str(graph_file)).graph_text() == "Bg\n"

    def test_build_run_config_reraises(self) -> None:
        """Test that build_run_config surfaces validation errors."""
        with pytest.raises(ValidationError):
            build_run_config(graph="P3", output_format="yaml")


def test_get_settings_loader_default() -> None:
    """Test the default loader without KERNELFIX_CONFIG."""
    with patch.dict("os.environ", {}, clear=True):
        loader = get_settings_loader()

        assert loader.settings_file == Path("kernelfix.yaml")
        assert loader.explicit is False


def test_get_settings_loader_from_env() -> None:
    """Test the loader path taken from KERNELFIX_CONFIG."""
    with patch.dict("os.environ", {"KERNELFIX_CONFIG": "/tmp/custom.yaml"}, clear=True):
        loader = get_settings_loader()

        assert loader.settings_file == Path("/tmp/custom.yaml")
        assert loader.explicit is True


@pytest.mark.parametrize(
    "env,expected",
    [({}, 3), ({"KERNELFIX_WORKERS": "6"}, 6), ({"KERNELFIX_WORKERS": "0"}, 3), ({"KERNELFIX_WORKERS": "many"}, 3)],
)
def test_get_worker_count(env: dict[str, str], expected: int) -> None:
    """Test the worker count override and its fallback."""
    with patch.dict("os.environ", env, clear=True):
        assert get_worker_count(3) == expected
