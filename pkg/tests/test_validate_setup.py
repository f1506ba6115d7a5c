"""
Tests for the setup validation script.
"""

from pathlib import Path

import validate_setup

ROOT = Path(__file__).resolve().parents[1]


class TestValidateSetup:
    """Each check on an installed checkout."""

    def test_dependencies(self, capsys):
        """Every runtime dependency imports."""
        assert validate_setup.check_dependencies()
        assert "❌" not in capsys.readouterr().out

    def test_package_structure(self, monkeypatch):
        """The layout check passes from the repository root."""
        monkeypatch.chdir(ROOT)
        assert validate_setup.check_package_structure()

    def test_cli_commands(self, capsys):
        """Commands registered without an explicit name are found by their function name."""
        assert validate_setup.check_cli()
        assert "✅ CLI command 'validate'" in capsys.readouterr().out

    def test_main_exit_code(self, monkeypatch):
        """All checks pass on a complete checkout."""
        monkeypatch.chdir(ROOT)
        assert validate_setup.main() == 0
