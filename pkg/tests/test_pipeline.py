from __future__ import annotations

from pathlib import Path

import pytest

from extnfs import pipeline
from extnfs.arith import FactoredInteger
from extnfs.config import PipelineConfig, validate_config
from extnfs.descent import DlogResult, SplitResult, read_transcript_logs
from extnfs.errors import ContractViolation, MissingArtifact
from extnfs.logdb import LogDatabase, write_logdb
from extnfs.pipeline import (DESCENT, FB, LOGDB, MANIFEST, SETUP, Workdir, atomic_output, run_stage,
                             sha256)
from extnfs.polyselect import read_setup


@pytest.fixture(autouse=True)
def fixed_cpu(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(pipeline, "cpu_brand", lambda: "test-cpu")


def _config(tmp_path: Path, **changes) -> PipelineConfig:
    values = dict(workdir=str(tmp_path), lpb0=12, lpb1=12, sieve_bound=1024, workers=1)
    values.update(changes)
    return validate_config(PipelineConfig(**values))


def test_missing_artifact_names_the_file(tmp_path: Path) -> None:
    with pytest.raises(MissingArtifact, match="setup.txt"):
        run_stage("makefb", _config(tmp_path))
    with pytest.raises(MissingArtifact, match="chunk"):
        Workdir(_config(tmp_path)).chunks()


def test_unknown_stage(tmp_path: Path) -> None:
    with pytest.raises(ContractViolation, match="unknown stage"):
        run_stage("factor", _config(tmp_path))


def test_atomic_output_leaves_target_on_failure(tmp_path: Path) -> None:
    target = tmp_path / "out.txt"
    target.write_text("old\n", encoding="utf-8")
    with pytest.raises(RuntimeError):
        with atomic_output(target) as temp:
            temp.write_text("partial", encoding="utf-8")
            raise RuntimeError("stage crashed")
    assert target.read_text(encoding="utf-8") == "old\n"
    assert not (tmp_path / ".out.txt.tmp").exists()
    with atomic_output(target) as temp:
        temp.write_text("new\n", encoding="utf-8")
    assert target.read_text(encoding="utf-8") == "new\n"


def test_polyselect_and_makefb_record_the_manifest(tmp_path: Path) -> None:
    config = _config(tmp_path, seed=4)
    run_stage("polyselect", config)
    run_stage("makefb", config)
    setup_text = (tmp_path / SETUP).read_text(encoding="utf-8")
    assert "sm_alpha0 = " in setup_text and "sm_alpha1 = " in setup_text
    assert (tmp_path / "fb.0.txt").exists() and (tmp_path / "fb.1.txt").exists()
    entries = Workdir(config).manifest()
    assert list(entries) == ["polyselect", "makefb"]
    fields = entries["makefb"].split()
    assert fields[:1] == ["seed=4"]
    assert "cpu=test-cpu" in fields and "workers=1" in fields
    assert f"in:{SETUP}={sha256(tmp_path / SETUP)}" in fields
    assert f"out:fb.0.txt={sha256(tmp_path / 'fb.0.txt')}" in fields
    lines = (tmp_path / MANIFEST).read_text(encoding="utf-8").splitlines()
    assert [line.split()[0] for line in lines] == ["polyselect", "makefb"]


def test_verify_needs_a_transcript(tmp_path: Path) -> None:
    config = _config(tmp_path)
    run_stage("polyselect", config)
    with pytest.raises(MissingArtifact, match=DESCENT):
        run_stage("verify", config)


def test_descent_manifest_lists_every_input(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    config = _config(tmp_path)
    run_stage("polyselect", config)
    run_stage("makefb", config)
    setup = read_setup(tmp_path / SETUP)
    write_logdb(tmp_path / LOGDB, LogDatabase(setup.ell))
    split = SplitResult(0, (1, 0, 1, 0), FactoredInteger(1, ()), ())

    class FixedDescender:
        def __init__(self, setup, bases, db, specs, params, sieve_params):
            assert [base.side for base in bases] == [0, 1]

        def compute(self, g, t):
            return DlogResult(2, 1, 2, split, split, [])

    monkeypatch.setattr(pipeline, "Descender", FixedDescender)
    monkeypatch.setattr(pipeline, "_specs", lambda setup, config: ())
    run_stage("descent", config)
    fields = Workdir(config).manifest()["descent"].split()
    inputs = [field.split("=")[0] for field in fields if field.startswith("in:")]
    assert inputs == [f"in:{SETUP}", f"in:{FB.format(0)}", f"in:{FB.format(1)}", f"in:{LOGDB}"]
    assert f"in:{FB.format(1)}={sha256(tmp_path / FB.format(1))}" in fields
    assert read_transcript_logs(tmp_path / DESCENT)["log"] == 2
