"""Canonical JSON reading and writing for summary, change and lifecycle reports."""

from __future__ import annotations

import json
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

from .exceptions import ReportFormatError
from .matching import ChangeReport
from .summary import VersionReport

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")


def canonical_json(data: Any) -> str:
    """Sorted keys, two-space indent, UTF-8 text and a single trailing newline."""
    return json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(canonical_json(data))
    _LOGGER.debug("Wrote %s", path)


def read_json(path: Path) -> Any:
    try:
        with path.open(encoding="utf-8") as handle:
            return json.load(handle)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise ReportFormatError(f"{path}: invalid JSON: {err}") from err


def _decode(path: Path | str, data: Any, loader: Callable[[Any], T]) -> T:
    try:
        return loader(data)
    except ReportFormatError as err:
        raise type(err)(f"{path}: {err}") from err
    except (KeyError, TypeError, ValueError, AttributeError, IndexError) as err:
        _LOGGER.error("%s does not follow the report schema", path)
        raise ReportFormatError(f"{path}: malformed report ({type(err).__name__}: {err})") from err


def parse_version_report(data: Any, source: str = "<memory>") -> VersionReport:
    if not isinstance(data, dict) or "apis" not in data:
        raise ReportFormatError(f"{source}: not a summary report")
    return _decode(source, data, VersionReport.from_json)


def parse_change_report(data: Any, source: str = "<memory>") -> ChangeReport:
    if not isinstance(data, dict) or "events" not in data:
        raise ReportFormatError(f"{source}: not a change report")
    return _decode(source, data, ChangeReport.from_json)


def load_version_report(path: Path) -> VersionReport:
    return parse_version_report(read_json(path), str(path))


def load_change_report(path: Path) -> ChangeReport:
    return parse_change_report(read_json(path), str(path))

