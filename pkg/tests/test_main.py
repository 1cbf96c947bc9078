from __future__ import annotations

from pathlib import Path

import pytest

from extnfs.main import _overrides, main, parse_args


def test_config_flags_become_overrides() -> None:
    args = parse_args(["sieve", "--box", "4,4,2,2", "--sieve-bound", "2048", "--type2-basis", "matrix"])
    assert args.command == "sieve"
    assert _overrides(args) == {"box": (4, 4, 2, 2), "sieve_bound": 2048, "type2_basis": "matrix"}


def test_unknown_command_is_rejected() -> None:
    with pytest.raises(SystemExit):
        parse_args(["factor"])


def test_count_options() -> None:
    args = parse_args(["count-fb", "--count-bound", "1000", "--count-side", "1"])
    assert (args.count_bound, args.count_side) == (1000, 1)


def test_invalid_config_exits_with_error(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    with pytest.raises(SystemExit) as info:
        main(["polyselect", "--workdir", str(tmp_path), "--ell", "7"])
    assert info.value.code == 1
    assert "ell must divide p^2 + 1." in capsys.readouterr().out


def test_missing_artifact_exits_with_error(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    with pytest.raises(SystemExit) as info:
        main(["dedup", "--workdir", str(tmp_path)])
    assert info.value.code == 1
    assert "setup.txt" in capsys.readouterr().out


def test_verify_record_command(capsys: pytest.CaptureFixture) -> None:
    assert main(["verify-record"]) == 0
    out = capsys.readouterr().out
    assert "PASS g^(C*vlog_t) = t^(C*vlog_g)" in out
    assert "FAIL" not in out
