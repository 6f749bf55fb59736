import json
import logging

import pytest

import config
from errors.result import PudError, Result


def test_defaults_without_file(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "CONFIG_FILE", str(tmp_path / "absent.json"))
    assert config.load_settings() == config.DEFAULT_SETTINGS


def test_values_are_coerced(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"seed": "12", "sigma_tau": "0.03", "fresh_noise": "false", "sigma_sense": 0}))
    settings = config.load_settings(str(path))
    assert settings["seed"] == 12
    assert settings["sigma_tau"] == 0.03
    assert settings["fresh_noise"] is False
    assert isinstance(settings["sigma_sense"], float)


def test_dashed_keys_accepted(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"sigma-tau": 0.02}))
    assert config.load_settings(str(path))["sigma_tau"] == 0.02


def test_unknown_keys_ignored(tmp_path, caplog):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"colour": "blue"}))
    with caplog.at_level(logging.WARNING, logger='PudSim'):
        settings = config.load_settings(str(path))
    assert "colour" not in settings
    assert "colour" in caplog.text


def test_bad_number_rejected(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"cols": "many"}))
    with pytest.raises(PudError) as info:
        config.load_settings(str(path))
    assert info.value.result == Result.InvalidSettings


def test_malformed_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text("[1, 2]")
    with pytest.raises(PudError) as info:
        config.load_settings(str(path))
    assert info.value.result == Result.InvalidFormat


def test_save_and_reload(tmp_path):
    path = tmp_path / "nested" / "settings.json"
    settings = dict(config.DEFAULT_SETTINGS, seed=77, frac="3,2,1")
    config.save_settings(settings, str(path))
    assert config.load_settings(str(path)) == settings


def test_row_layout_constants():
    assert len(config.SIMRA_ROWS) == 8
    assert set(config.OPERAND_ROWS) | set(config.CALIB_ROWS) == set(config.SIMRA_ROWS)
    assert config.SCRATCH_START_ROW > max(config.STAGING_ROWS)


def test_app_version():
    assert config.get_app_version() == config.APP_VERSION
