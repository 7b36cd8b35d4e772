from __future__ import annotations

import json
from pathlib import Path

import pytest

from mmas.config import SCHEMA, ConfigError, load_config, parse_config

CONFIGS = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.json"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    cfg = load_config(path)
    assert cfg.schema == SCHEMA


def test_defaults():
    cfg = parse_config(json.dumps({"schema": SCHEMA}))
    assert cfg.system.kind == "vehicle"
    assert cfg.bounds.samples == 10_000
    assert cfg.scenario.step == 1e-3


def test_unknown_field_reports_line_and_path():
    text = '{\n  "schema": "mmas.config/1",\n  "scenario": {\n    "spd": 3\n  }\n}'
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == 4
    assert exc.value.path == "scenario.spd"
    assert "speed_kmh" in str(exc.value)


def test_schema_required_and_versioned():
    with pytest.raises(ConfigError):
        parse_config("{}")
    with pytest.raises(ConfigError):
        parse_config('{"schema": "mmas.config/2"}')


def test_type_errors():
    with pytest.raises(ConfigError, match="scenario.horizon"):
        parse_config('{"schema": "mmas.config/1", "scenario": {"horizon": "long"}}')
    with pytest.raises(ConfigError, match="analysis.grid"):
        parse_config('{"schema": "mmas.config/1", "analysis": {"grid": 2.5}}')


def test_bool_is_not_an_int():
    with pytest.raises(ConfigError):
        parse_config('{"schema": "mmas.config/1", "analysis": {"grid": true}}')


def test_choice_validation():
    with pytest.raises(ConfigError, match="sign_convention"):
        parse_config('{"schema": "mmas.config/1", "system": {"sign_convention": "upside"}}')


def test_duplicate_keys_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config('{"schema": "mmas.config/1", "schema": "mmas.config/1"}')


def test_malformed_json_has_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('{\n"schema": "mmas.config/1",\n}')
    assert exc.value.line is not None


def test_range_checks():
    with pytest.raises(ConfigError):
        parse_config('{"schema": "mmas.config/1", "scenario": {"step": 0}}')
    with pytest.raises(ConfigError):
        parse_config('{"schema": "mmas.config/1", "scenario": {"schedule": {"params": {"mass": {}}}}}')
