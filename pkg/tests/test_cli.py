"""Tests for the mopkit command line.

Tests cover:
- ``mopkit run`` exit codes, report layout and byte-identical reruns
- CSV tables written next to the report
- ``mopkit validate`` diagnostics
- Malformed configurations and ``--version``
"""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

import pytest

from mopkit import __version__
from mopkit.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, SUITES, build_parser, main

if TYPE_CHECKING:
    from pathlib import Path

pytestmark = pytest.mark.integration


def _report(out: Path) -> dict:
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


class TestParser:
    """Test argument parsing."""

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify --version prints the package version."""
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_command_required(self) -> None:
        """Verify a bare invocation is a usage error."""
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2

    def test_overrides_parsed(self, tmp_path: Path) -> None:
        """Verify the override flags land on the namespace."""
        args = build_parser().parse_args(
            ["run", "config.json", "--backend", "float", "--precision", "128", "--out", str(tmp_path)]
        )
        assert args.backend == "float"
        assert args.precision == 128
        assert args.out == tmp_path

    def test_every_suite_has_a_runner(self) -> None:
        """Verify the suite table matches the configuration vocabulary."""
        from mopkit.config import VALID_SUITES  # noqa: PLC0415

        assert set(SUITES) == set(VALID_SUITES)


class TestRun:
    """Test ``mopkit run``."""

    def test_minimal_run(self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify the factorization suite passes and writes its files."""
        status = main(["run", str(fixtures_dir / "minimal.json"), "--out", str(tmp_path)])
        assert status == EXIT_OK
        assert capsys.readouterr().out.strip() == "mopkit: ok"
        report = _report(tmp_path)
        assert report["mopkit"] == __version__
        assert report["backend"] == "rational"
        assert report["precision_bits"] is None
        assert report["N"] == 4
        assert report["suites"]["factor"]["H"][:2] == ["1/1", "1/12"]
        assert (tmp_path / "pivots.csv").read_text(encoding="utf-8").splitlines()[:2] == ["n,H_n", "0,1/1"]

    def test_rerun_is_byte_identical(self, fixtures_dir: Path, tmp_path: Path) -> None:
        """Verify two runs of one configuration write the same report."""
        config = str(fixtures_dir / "minimal.json")
        main(["run", config, "--out", str(tmp_path)])
        first = (tmp_path / "report.json").read_bytes()
        main(["run", config, "--out", str(tmp_path)])
        assert (tmp_path / "report.json").read_bytes() == first

    def test_uvarov_suites(self, fixtures_dir: Path, tmp_path: Path) -> None:
        """Verify every exact suite passes on a discrete Uvarov perturbation."""
        status = main(["run", str(fixtures_dir / "uvarov.json"), "--out", str(tmp_path)])
        report = _report(tmp_path)
        assert {name: entry["ok"] for name, entry in report["suites"].items()} == dict.fromkeys(
            ["factor", "perturb", "residuals", "tau", "stieltjes", "existence"], True
        )
        assert status == EXIT_OK
        assert report["suites"]["perturb"]["M_L"] == 1
        assert report["suites"]["perturb"]["M_R"] == 1
        assert report["suites"]["tau"]["zeros"] == []
        assert (tmp_path / "tau.csv").exists()
        assert (tmp_path / "residuals.csv").exists()

    def test_float_override(self, fixtures_dir: Path, tmp_path: Path) -> None:
        """Verify --backend and --precision switch the field."""
        config = str(fixtures_dir / "minimal.json")
        main(["run", config, "--out", str(tmp_path), "--backend", "float", "--precision", "96"])
        report = _report(tmp_path)
        assert report["backend"] == "float"
        assert report["precision_bits"] == 96

    def test_suite_error_is_reported(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify a failing suite yields exit 1 and an error entry."""
        config = tmp_path / "pole.json"
        config.write_text(
            json.dumps(
                {
                    "suites": ["perturb"],
                    "measure": {"kind": "discrete", "atoms": [[[["0", "1"], ["1", "1"], ["2", "1"]]]]},
                    "perturbation": {"L": [[["1"]]], "R": [[["0"]], [["1"]]]},
                    "N": 2,
                }
            ),
            encoding="utf-8",
        )
        status = main(["run", str(config), "--out", str(tmp_path / "out")])
        assert status == EXIT_FAILED
        entry = _report(tmp_path / "out")["suites"]["perturb"]
        assert entry["error"] == "IntegrabilityViolation"
        assert entry["ok"] is False
        assert "FAILED perturb" in capsys.readouterr().out

    def test_malformed_config(self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify an unparsable file exits with the configuration status."""
        status = main(["run", str(fixtures_dir / "malformed.json"), "--out", str(tmp_path)])
        assert status == EXIT_CONFIG
        assert "invalid configuration" in capsys.readouterr().err
        assert not (tmp_path / "report.json").exists()

    @pytest.mark.slow
    def test_case_study(self, fixtures_dir: Path, tmp_path: Path) -> None:
        """Verify the Jacobi-Pineiro suite covers both perturbations."""
        status = main(["run", str(fixtures_dir / "jp_case_study.json"), "--out", str(tmp_path)])
        suite = _report(tmp_path)["suites"]["jp-case-study"]
        assert status == EXIT_OK
        assert {"closed_forms", "boundary", "perturbation_1", "perturbation_2"} <= set(suite)
        assert suite["params"] == {"alpha1": "1/4", "alpha2": "1/2", "alpha3": "3/4", "beta": "2"}


class TestValidate:
    """Test ``mopkit validate``."""

    def test_clean(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify a consistent configuration has no diagnostics."""
        assert main(["validate", str(fixtures_dir / "uvarov.json")]) == EXIT_OK
        assert json.loads(capsys.readouterr().out) == {"diagnostics": []}

    def test_band_violation(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify a leading-form failure is reported against perturbation.L."""
        assert main(["validate", str(fixtures_dir / "bad_band.json")]) == EXIT_FAILED
        [diagnostic] = json.loads(capsys.readouterr().out)["diagnostics"]
        assert diagnostic["code"] == "LeadingFormViolation"
        assert diagnostic["field_path"] == "perturbation.L"

    def test_malformed(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Verify a parse failure becomes a ConfigInvalid diagnostic."""
        assert main(["validate", str(fixtures_dir / "malformed.json")]) == EXIT_FAILED
        [diagnostic] = json.loads(capsys.readouterr().out)["diagnostics"]
        assert diagnostic["code"] == "ConfigInvalid"
