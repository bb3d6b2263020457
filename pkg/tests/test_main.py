"""Tests for the __main__.py module entry point."""

import pytest


class TestMainModule:
    """Test the main module entry point."""

    def test_main_entry_point(self) -> None:
        """Test that the module exposes the CLI main function."""
        import kernelfix.__main__
        import kernelfix.cli

        assert kernelfix.__main__.main is kernelfix.cli.main

    def test_main_requires_command(self) -> None:
        """Test that running without a subcommand is a usage error."""
        from kernelfix.__main__ import main

        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_module_structure(self) -> None:
        """Test that the module has the expected structure."""
        import kernelfix.__main__

        assert hasattr(kernelfix.__main__, "__name__")
        assert hasattr(kernelfix.__main__, "main")

        assert kernelfix.__main__.__doc__ is not None
        assert "Entry point" in kernelfix.__main__.__doc__
