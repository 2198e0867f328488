"""Shared fixtures for the exlife tests."""

from pathlib import Path

import pytest

from exlife.exir import ExirProgram, parse_program

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = Path(__file__).parent / "golden"
HISTORY_VERSIONS = ("1.4", "2.0", "2.7", "2.9", "2.13")


def load_program(path: Path, version_label: str | None = None) -> ExirProgram:
    return parse_program(path.read_text(encoding="utf-8"), version_label or path.stem, str(path))


def history_path(version: str) -> Path:
    return CORPUS / "fileutils" / f"{version}.exir"


@pytest.fixture
def history_programs() -> dict[str, ExirProgram]:
    return {version: load_program(history_path(version)) for version in HISTORY_VERSIONS}
