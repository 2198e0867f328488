"""Tests for the ExLife facade, run configuration and command line."""

import json

import pytest

from exlife import ExLife, ExLifeError, RunConfig
from exlife.cli import main
from exlife.const import LIFECYCLE_FILE, LIFECYCLE_TEXT_FILE, MODE_INTRA, STATISTICS_FILE
from exlife.exceptions import ConfigError
from exlife.report import canonical_json, load_change_report, load_version_report
from exlife.summary import extract_summaries

from .conftest import HISTORY_VERSIONS, history_path, load_program


@pytest.mark.asyncio
async def test_extract_files():
    exlife = ExLife()
    reports = await exlife.extract_files([history_path(version) for version in HISTORY_VERSIONS])
    assert [report.version for report in reports] == list(HISTORY_VERSIONS)
    assert reports[3] == extract_summaries(load_program(history_path("2.9")))


@pytest.mark.asyncio
async def test_extract_files_labels():
    exlife = ExLife(RunConfig(mode=MODE_INTRA))
    (report,) = await exlife.extract_files([history_path("1.4")], ["first"])
    assert report.version == "first"
    assert report.mode == MODE_INTRA
    with pytest.raises(ExLifeError):
        await exlife.extract_files([history_path("1.4")], ["a", "b"])


@pytest.mark.parametrize(
    "kwargs",
    [{"mode": "both"}, {"path_cap": 0}, {"clause_limit": 0}, {"loop_unroll": 2}],
)
def test_run_config_validation(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_extract_command(tmp_path):
    inputs = [str(history_path("1.4")), str(history_path("2.0"))]
    assert main(["extract", "-o", str(tmp_path), *inputs]) == 0
    written = tmp_path / "1.4.summary.json"
    expected = extract_summaries(load_program(history_path("1.4"))).to_json()
    assert written.read_text(encoding="utf-8") == canonical_json(expected)
    assert load_version_report(tmp_path / "2.0.summary.json").version == "2.0"


def test_extract_version_labels(tmp_path):
    assert main(["extract", "--version-label", "old", "-o", str(tmp_path), str(history_path("1.4"))]) == 0
    assert (tmp_path / "old.summary.json").exists()


def test_diff_command(tmp_path):
    main(["extract", "-o", str(tmp_path), str(history_path("1.4")), str(history_path("2.0"))])
    output = tmp_path / "diff.json"
    reports = [str(tmp_path / "1.4.summary.json"), str(tmp_path / "2.0.summary.json")]
    assert main(["diff", "-o", str(output), *reports]) == 0
    change = load_change_report(output)
    assert (change.old_version, change.new_version) == ("1.4", "2.0")
    assert [event.kind.value for event in change.events] == ["exception-type-changed"]


def test_lifecycle_command(tmp_path):
    output, dots = tmp_path / "out", tmp_path / "dot"
    inputs = [str(history_path(version)) for version in HISTORY_VERSIONS]
    assert main(["lifecycle", "--pretty", "--dot-dump", str(dots), "-o", str(output), *inputs]) == 0
    lifecycle = json.loads((output / LIFECYCLE_FILE).read_text(encoding="utf-8"))
    assert lifecycle["versions"] == list(HISTORY_VERSIONS)
    statistics = json.loads((output / STATISTICS_FILE).read_text(encoding="utf-8"))
    assert statistics["exceptions"]["instances"] == 11
    assert (output / LIFECYCLE_TEXT_FILE).read_text(encoding="utf-8").startswith("versions: 1.4 -> 2.0")
    assert (dots / "2.9" / "FileUtils_moveFile_File_File.cfg.dot").exists()
    assert len(list((dots / "2.9").glob("*.cdg.dot"))) == 5


def test_lifecycle_mixes_reports_and_programs(tmp_path):
    main(["extract", "-o", str(tmp_path), str(history_path("1.4"))])
    output = tmp_path / "out"
    assert main(["lifecycle", "-o", str(output), str(tmp_path / "1.4.summary.json"), str(history_path("2.0"))]) == 0
    assert not (output / LIFECYCLE_TEXT_FILE).exists()
    statistics = json.loads((output / STATISTICS_FILE).read_text(encoding="utf-8"))
    assert statistics["events"]["exception-type-changed"] == 1


def test_lifecycle_output_is_deterministic(tmp_path):
    inputs = [str(history_path(version)) for version in HISTORY_VERSIONS]
    for name in ("a", "b"):
        assert main(["lifecycle", "--pretty", "-o", str(tmp_path / name), *inputs]) == 0
    for file_name in (LIFECYCLE_FILE, STATISTICS_FILE, LIFECYCLE_TEXT_FILE):
        assert (tmp_path / "a" / file_name).read_bytes() == (tmp_path / "b" / file_name).read_bytes()


def test_errors_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.exir"
    bad.write_text("method A::f() {\n  goto Nowhere\n}\n", encoding="utf-8")
    assert main(["extract", "-o", str(tmp_path), str(bad)]) == 1
    assert "bad.exir:2:" in capsys.readouterr().err

    assert main(["extract", "-o", str(tmp_path), str(tmp_path / "missing.exir")]) == 2

    labels = ["--version-label", "only"]
    assert main(["extract", *labels, "-o", str(tmp_path), str(history_path("1.4")), str(history_path("2.0"))]) == 1
    assert "version labels" in capsys.readouterr().err

    same = str(history_path("1.4"))
    assert main(["lifecycle", "-o", str(tmp_path / "out"), same, same]) == 1
    assert "duplicate version labels" in capsys.readouterr().err

    assert main(["extract", "--path-cap", "0", "-o", str(tmp_path), same]) == 1


def test_mode_mismatch_exit_code(tmp_path):
    main(["extract", "--mode", "intra", "-o", str(tmp_path), str(history_path("1.4"))])
    inputs = [str(tmp_path / "1.4.summary.json"), str(history_path("2.0"))]
    assert main(["lifecycle", "-o", str(tmp_path / "out"), *inputs]) == 1


def test_unreadable_inputs_exit_code(tmp_path, capsys):
    latin = tmp_path / "latin.exir"
    latin.write_bytes(b'method A::f() {\n  throw E "\xff"\n}\n')
    escape = tmp_path / "escape.exir"
    escape.write_text('method A::f() {\n  throw E "a\\q"\n}\n', encoding="utf-8")
    for path in (latin, escape):
        assert main(["extract", "-o", str(tmp_path / "out"), str(path)]) == 1
        assert f"{path.name}:2:" in capsys.readouterr().err
    report = tmp_path / "broken.summary.json"
    report.write_bytes(b"\xff")
    assert main(["diff", "-o", str(tmp_path / "changes.json"), str(report), str(report)]) == 1


def test_extract_rejects_clashing_stems(tmp_path, capsys):
    copy = tmp_path / "copy"
    copy.mkdir()
    (copy / "1.4.exir").write_text(history_path("1.4").read_text(encoding="utf-8"), encoding="utf-8")
    output = tmp_path / "out"
    assert main(["extract", "-o", str(output), str(history_path("1.4")), str(copy / "1.4.exir")]) == 1
    assert "duplicate version labels" in capsys.readouterr().err
    assert not output.exists()
    labels = ["--version-label", "a", "--version-label", "b"]
    assert main(["extract", *labels, "-o", str(output), str(history_path("1.4")), str(copy / "1.4.exir")]) == 0
    assert sorted(path.name for path in output.iterdir()) == ["a.summary.json", "b.summary.json"]
