import json
from pathlib import Path
from typing import Any

import pytest
import yaml
from click.testing import CliRunner

from src.cli import EXIT_ERROR, EXIT_INTERNAL, EXIT_INVALID, EXIT_RESOURCES, EXIT_VALID, cli
from src.sl_entail.exceptions import CoreSizeBoundError
from tests.conftest import SAMPLES

RUNNER = CliRunner()


def _sample(name: str) -> str:
    return str(SAMPLES / f"{name}.sid")


def test_check_prints_one_verdict_per_sequent() -> None:
    result = RUNNER.invoke(cli, ["check", _sample("empty")])
    assert result.exit_code == EXIT_INVALID, result.output
    assert "sequent 1: valid" in result.stdout
    assert "sequent 2: invalid" in result.stdout


def test_check_json_report() -> None:
    result = RUNNER.invoke(cli, ["check", "--json", _sample("empty")])
    report = json.loads(result.stdout)
    assert [s["verdict"] for s in report["sequents"]] == ["valid", "invalid"]
    assert report["classification"]["erestricted"] is True


@pytest.mark.slow
def test_check_valid_problem() -> None:
    result = RUNNER.invoke(cli, ["check", _sample("ls_c")])
    assert result.exit_code == EXIT_VALID, result.output


def test_oracle_mode_prints_a_countermodel(tmp_path: Path) -> None:
    path = tmp_path / "swap.sid"
    path.write_text("(fields 1) (const a b) (entail (pto a (b)) ((pto b (a))))")
    result = RUNNER.invoke(cli, ["check", "--mode", "oracle", "--oracle-bound", "2", str(path)])
    assert result.exit_code == EXIT_INVALID, result.output
    assert "countermodel 1" in result.stdout


def test_malformed_file_is_an_error(tmp_path: Path) -> None:
    path = tmp_path / "broken.sid"
    path.write_text("(fields 1) (entail (pto a (b))")
    assert RUNNER.invoke(cli, ["check", str(path)]).exit_code == EXIT_ERROR


def test_undecidable_fragment_is_an_error(tmp_path: Path) -> None:
    path = tmp_path / "loop.sid"
    path.write_text("(fields 1) (pred (p x) (p x)) (entail (p a) ((p a)))")
    assert RUNNER.invoke(cli, ["check", str(path)]).exit_code == EXIT_ERROR


def test_emitted_files(tmp_path: Path) -> None:
    normalized, profile = tmp_path / "normalized.sid", tmp_path / "profile.txt"
    args = ["check", _sample("empty"), "--emit-normalized", str(normalized), "--emit-profile", str(profile)]
    RUNNER.invoke(cli, args)
    assert normalized.read_text().startswith("(fields 1)")
    assert profile.exists()


def test_normalize_command() -> None:
    result = RUNNER.invoke(cli, ["normalize", _sample("ls_c")])
    assert result.exit_code == EXIT_VALID, result.output
    assert result.stdout.count("(fields 1)") == 5, "one problem per partition of three constants"


def test_analyze_command() -> None:
    result = RUNNER.invoke(cli, ["analyze", _sample("lls")])
    assert result.exit_code == EXIT_VALID, result.output
    report = yaml.safe_load(result.stdout)
    assert report["classification"]["established"] is False
    assert report["roots"] == {"lls": "1"}


def test_analyze_lists_contexts_of_a_head() -> None:
    args = ["analyze", "--json", "--emit-contexts", "p:q", "--emit-contexts", "q:q", _sample("pq")]
    result = RUNNER.invoke(cli, args)
    assert result.exit_code == EXIT_VALID, result.output
    report = json.loads(result.stdout)
    assert set(report["contexts"]) == {"p:q", "q:q"}
    assert all("⊸ p(" in rule for rule in report["contexts"]["p:q"])
    assert any("↦" not in rule for rule in report["contexts"]["q:q"]), "q:q has an empty-heap rule"


def test_analyze_rejects_an_unknown_head() -> None:
    result = RUNNER.invoke(cli, ["analyze", "--emit-contexts", "nope", _sample("pq")])
    assert result.exit_code == EXIT_ERROR, result.output


def test_size_bound_violation_is_a_resource_error(monkeypatch: pytest.MonkeyPatch) -> None:
    def exceed(*args: Any, **kwargs: Any) -> None:
        raise CoreSizeBoundError("too large")

    monkeypatch.setattr("src.cli.solve", exceed)
    result = RUNNER.invoke(cli, ["check", _sample("empty")])
    assert result.exit_code == EXIT_RESOURCES, result.output


def test_crash_is_not_reported_as_invalid(monkeypatch: pytest.MonkeyPatch) -> None:
    def crash(*args: Any, **kwargs: Any) -> None:
        raise ValueError("broken")

    monkeypatch.setattr("src.cli.solve", crash)
    result = RUNNER.invoke(cli, ["check", _sample("empty")])
    assert result.exit_code == EXIT_INTERNAL, result.output
    assert "internal error" in result.output
