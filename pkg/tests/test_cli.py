"""Tests for heytingkit.cli module."""

import json

import pytest
from click.testing import CliRunner

from heytingkit.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, cli
from heytingkit.config import ENV_VARS

# -- Helpers --


@pytest.fixture(autouse=True)
def _isolated_settings(mocker, monkeypatch, tmp_path):
    mocker.patch("heytingkit.config.get_config_path", return_value=tmp_path / "config.json")
    for var in ENV_VARS.values():
        monkeypatch.delenv(var, raising=False)


def _run(*args: str):
    return CliRunner().invoke(cli, list(args))


def _json_lines(output: str) -> list[dict]:
    return [json.loads(line) for line in output.splitlines() if line.strip()]


# -- TestEval --


class TestEval:
    def test_double_negation(self):
        result = _run("eval", "--model", "fix_rc", "--formula", "~~R(c1)")
        assert result.exit_code == EXIT_OK
        assert result.output.strip() == "1"

    def test_with_params(self):
        result = _run("eval", "--model", "fix_rc", "--formula", "R(x)", "--params", "cu")
        assert result.output.strip() == "u"

    def test_verify_runs_both_paths(self):
        result = _run("--verify", "eval", "--model", "fix_rc", "--formula", "exists x. R(x)")
        assert result.exit_code == EXIT_OK
        assert result.output.strip() == "u"

    def test_json_summary(self):
        result = _run("--format", "json", "eval", "--model", "fix_neg", "--formula", "~R(c)")
        (line,) = _json_lines(result.output)
        assert line["summary"]["value"] == "b"

    def test_trace_rows_come_first(self):
        result = _run("eval", "--model", "fix_rc", "--formula", "~~R(c1)", "--trace", "--format", "json")
        lines = _json_lines(result.output)
        assert len(lines) > 1
        assert "summary" in lines[-1]
        assert all("value" in line for line in lines[:-1])

    def test_syntax_error_is_input_error(self):
        result = _run("eval", "--model", "fix_rc", "--formula", "R(c1")
        assert result.exit_code == EXIT_INPUT
        assert "SyntaxError at column 5" in result.output

    def test_frame_is_not_a_model(self):
        result = _run("eval", "--model", "s3", "--formula", "true")
        assert result.exit_code == EXIT_INPUT


# -- TestChecks --


class TestChecks:
    def test_los_holds(self):
        result = _run("check-los", "--model", "fix_rc", "--filter", "up:u", "--depth", "2")
        assert result.exit_code == EXIT_OK

    def test_los_fails(self):
        result = _run("check-los", "--model", "fix_neg", "--filter", "up:1", "--depth", "2")
        assert result.exit_code == EXIT_FAILED
        assert "FAIL" in result.output

    def test_los_json_is_deterministic(self):
        args = ("--format", "json", "check-los", "--model", "fix_rc", "--filter", "up:u", "--depth", "1")
        first, second = _run(*args), _run(*args)
        assert first.output == second.output
        lines = _json_lines(first.output)
        assert lines[-1]["summary"]["ok"] is True
        assert lines[-1]["summary"]["rows"] == len(lines) - 1

    def test_generic(self):
        assert _run("check-generic", "--model", "fix_rc", "--filter", "up:u", "--depth", "2").exit_code == EXIT_OK
        assert _run("check-generic", "--model", "fix_neg", "--filter", "up:1", "--depth", "2").exit_code == EXIT_FAILED

    def test_characterization(self):
        result = _run("check-char", "--model", "fix_neg", "--depth", "2")
        assert result.exit_code == EXIT_OK
        assert "equivalent: True" in result.output

    def test_bad_filter(self):
        result = _run("check-los", "--model", "fix_rc", "--filter", "0,u")
        assert result.exit_code == EXIT_INPUT


# -- TestStructures --


class TestStructures:
    def test_quotient(self):
        result = _run("quotient", "--model", "fix_rc", "--filter", "up:u")
        assert result.exit_code == EXIT_OK
        assert "Γ(M/up:u) = {[cu]}" in result.output

    def test_ultraproduct(self):
        result = _run("ultraproduct", "--family", "fix_fam", "--filter", "up:{x}", "--depth", "2")
        assert result.exit_code == EXIT_OK
        assert "index: x" in result.output

    def test_list_filters(self):
        result = _run("--format", "json", "list-filters", "--frame", "b4")
        rows = _json_lines(result.output)
        assert len(rows) == 4
        assert [r["filter"] for r in rows if r["maximal"]] == ["up:a", "up:b"]


# -- TestValidate --


class TestValidate:
    def test_sheaf(self):
        result = _run("validate", "fix_rc")
        assert result.exit_code == EXIT_OK
        assert "sheaf: True" in result.output
        assert "witness_choices: 1" in result.output
        assert "assumption" not in result.output

    def test_sequents(self):
        result = _run("validate", "sequents", "--samples", "3", "--seed", "1")
        assert result.exit_code == EXIT_OK
        assert "violations: 0" in result.output

    def test_missing_file(self, tmp_path):
        result = _run("validate", str(tmp_path / "absent.json"))
        assert result.exit_code == EXIT_INPUT


# -- TestGroup --


class TestGroup:
    def test_version(self):
        result = _run("--version")
        assert result.exit_code == 0
        assert "heytingkit" in result.output

    def test_invalid_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        result = _run("--config", str(bad), "list-filters", "--frame", "s3")
        assert result.exit_code == EXIT_INPUT

    def test_config_depth_used(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"depth": 1}))
        result = _run("--config", str(cfg), "--format", "json", "check-los", "--model", "fix_rc", "--filter", "up:u")
        assert _json_lines(result.output)[-1]["summary"]["depth"] == 1
