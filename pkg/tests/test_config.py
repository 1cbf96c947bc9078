from __future__ import annotations

from pathlib import Path

import pytest

from extnfs.config import (ENV_WORKDIR, PipelineConfig, coerce_value, dump_config, load_config,
                           parse_coords, read_config_file, validate_config)
from extnfs.errors import ConfigError


def test_defaults_are_valid() -> None:
    config = validate_config(PipelineConfig(workdir="work"))
    assert config.q_range == (4097, 1 << 16)
    assert config.lpb_bound == (1 << 16, 1 << 16)
    assert config.descent_bounds == (1 << 40, 1 << 20)


def test_validation_collects_every_error() -> None:
    config = PipelineConfig(workdir="work", ell=7, slack=-1, workers=0)
    with pytest.raises(ConfigError) as info:
        validate_config(config)
    message = str(info.value)
    assert "ell must divide p^2 + 1." in message
    assert "slack cannot be negative." in message
    assert "workers must be at least 1." in message


def test_q_range_outside_large_prime_bound() -> None:
    with pytest.raises(ConfigError, match="q range"):
        validate_config(PipelineConfig(workdir="work", q_min=100))
    with pytest.raises(ConfigError, match="q range"):
        validate_config(PipelineConfig(workdir="work", q_max=1 << 17))


def test_type2_basis_is_normalized() -> None:
    config = validate_config(PipelineConfig(workdir=" work ", type2_basis=" Matrix "))
    assert config.type2_basis == "matrix"
    assert config.workdir == "work"
    with pytest.raises(ConfigError, match="type2_basis"):
        validate_config(PipelineConfig(workdir="work", type2_basis="lattice"))


def test_zero_generator_is_rejected() -> None:
    with pytest.raises(ConfigError, match="generator must be nonzero"):
        validate_config(PipelineConfig(workdir="work", generator="1048991,0,0,0"))


def test_parse_coords() -> None:
    assert parse_coords("5, 0, 1, 0") == (5, 0, 1, 0)
    assert parse_coords("0x10,0,0,1") == (16, 0, 0, 1)
    with pytest.raises(ConfigError):
        parse_coords("1,2,3")


def test_coerce_value() -> None:
    assert coerce_value("box", "16") == (16, 16, 16, 16)
    assert coerce_value("box", "8,8,4,4") == (8, 8, 4, 4)
    assert coerce_value("p", "0x101") == 257
    assert coerce_value("memory_fraction", "0.25") == 0.25
    assert coerce_value("generator", "1,2,3,4") == "1,2,3,4"
    with pytest.raises(ConfigError, match="Unknown configuration key"):
        coerce_value("colour", "red")
    with pytest.raises(ConfigError, match="Invalid value for seed"):
        coerce_value("seed", "many")


def test_config_file_with_include(tmp_path: Path) -> None:
    (tmp_path / "base.cfg").write_text("seed = 7\nbox = 4\n", encoding="utf-8")
    (tmp_path / "run.cfg").write_text(
        "# run settings\ninclude = base.cfg\nbox = 4,4,2,2\nsieve-bound = 2048  # smaller\n",
        encoding="utf-8",
    )
    values = read_config_file(tmp_path / "run.cfg")
    assert values == {"seed": 7, "box": (4, 4, 2, 2), "sieve_bound": 2048}


def test_include_cycle(tmp_path: Path) -> None:
    (tmp_path / "a.cfg").write_text("include = b.cfg\n", encoding="utf-8")
    (tmp_path / "b.cfg").write_text("include = a.cfg\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="Include cycle"):
        read_config_file(tmp_path / "a.cfg")


def test_malformed_line(tmp_path: Path) -> None:
    path = tmp_path / "bad.cfg"
    path.write_text("seed 7\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        read_config_file(path)


def test_load_config_precedence(tmp_path: Path) -> None:
    path = tmp_path / "run.cfg"
    path.write_text(f"workdir = {tmp_path}\nseed = 3\nslack = 10\n", encoding="utf-8")
    config = load_config(path, {"seed": 9, "slack": None})
    assert config.seed == 9
    assert config.slack == 10


def test_workdir_environment_default(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(ENV_WORKDIR, "/tmp/extnfs-env")
    assert PipelineConfig().workdir == "/tmp/extnfs-env"


def test_dump_config_round_trip(tmp_path: Path) -> None:
    config = validate_config(PipelineConfig(workdir=str(tmp_path), box=(4, 4, 2, 2)))
    path = tmp_path / "dump.cfg"
    path.write_text(dump_config(config), encoding="utf-8")
    assert load_config(path) == config
