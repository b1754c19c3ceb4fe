"""Tests for heytingkit.config module."""

import json

import pytest

from heytingkit.config import (
    ENV_VARS,
    Settings,
    get_config_path,
    load_settings,
    save_settings,
)
from heytingkit.exceptions import ConfigError


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for var in ENV_VARS.values():
        monkeypatch.delenv(var, raising=False)


@pytest.fixture
def config_file(mocker, tmp_path):
    path = tmp_path / "config.json"
    mocker.patch("heytingkit.config.get_config_path", return_value=path)
    return path


class TestSettings:
    """Tests for the Settings dataclass."""

    def test_defaults(self):
        s = Settings()
        assert (s.depth, s.term_depth, s.scan_arity) == (3, 2, 1)
        assert s.max_enumeration == 200_000
        assert s.seed == 0
        assert s.verify is False

    def test_negative_depth_rejected(self):
        with pytest.raises(ConfigError, match="depth"):
            Settings(depth=-1)

    def test_limit_must_be_positive(self):
        with pytest.raises(ConfigError):
            Settings(max_enumeration=0)

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ConfigError, match="Unknown setting"):
            Settings.from_dict({"width": 3})

    def test_from_dict_rejects_bad_values(self):
        with pytest.raises(ConfigError):
            Settings.from_dict({"depth": "deep"})

    def test_override_ignores_none(self):
        s = Settings().override(depth=1, seed=None)
        assert s.depth == 1
        assert s.seed == 0

    def test_dict_round_trip(self):
        s = Settings(depth=2, verify=True)
        assert Settings.from_dict(s.to_dict()) == s


class TestLoadSettings:
    """Tests for settings resolution."""

    def test_missing_file_gives_defaults(self, config_file):
        assert not config_file.exists()
        assert load_settings() == Settings()

    def test_file_values(self, config_file):
        config_file.write_text(json.dumps({"depth": 2, "seed": 7}))
        s = load_settings()
        assert s.depth == 2
        assert s.seed == 7

    def test_environment_beats_file(self, config_file, monkeypatch):
        config_file.write_text(json.dumps({"depth": 2}))
        monkeypatch.setenv("HEYTINGKIT_DEPTH", "4")
        assert load_settings().depth == 4

    def test_blank_environment_ignored(self, config_file, monkeypatch):
        monkeypatch.setenv("HEYTINGKIT_SEED", "  ")
        assert load_settings().seed == 0

    def test_bad_environment_value(self, config_file, monkeypatch):
        monkeypatch.setenv("HEYTINGKIT_TERM_DEPTH", "two")
        with pytest.raises(ConfigError, match="HEYTINGKIT_TERM_DEPTH"):
            load_settings()

    def test_invalid_json(self, config_file):
        config_file.write_text("{not json")
        with pytest.raises(ConfigError, match="Invalid JSON"):
            load_settings()

    def test_file_must_hold_object(self, config_file):
        config_file.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_settings()

    def test_explicit_path(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text(json.dumps({"scan_arity": 2}))
        assert load_settings(path).scan_arity == 2


class TestSaveSettings:
    def test_save_then_load(self, config_file):
        dest = save_settings(Settings(depth=1, verify=True))
        assert dest == config_file
        assert load_settings() == Settings(depth=1, verify=True)

    def test_creates_parent_directory(self, tmp_path):
        dest = tmp_path / "nested" / "config.json"
        save_settings(Settings(), dest)
        assert json.loads(dest.read_text())["depth"] == 3


def test_config_path_uses_platformdirs(mocker, tmp_path):
    mocker.patch("heytingkit.config.platformdirs.user_config_dir", return_value=str(tmp_path))
    assert get_config_path() == tmp_path / "config.json"
