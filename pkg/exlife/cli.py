"""Command-line driver: ``exlife extract``, ``exlife diff`` and ``exlife lifecycle``."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from . import ExLife
from .config import RunConfig
from .const import (
    DEFAULT_CLAUSE_LIMIT,
    DEFAULT_LOOP_UNROLL,
    DEFAULT_MODE,
    DEFAULT_PATH_CAP,
    EXIR_SUFFIX,
    LIFECYCLE_FILE,
    LIFECYCLE_TEXT_FILE,
    MODES,
    STATISTICS_FILE,
    SUMMARY_SUFFIX,
    __version__,
)
from .exceptions import ExLifeError
from .lifecycle import render_lifecycle
from .report import load_version_report, write_json
from .summary import VersionReport

_LOGGER = logging.getLogger(__name__)


def _add_analysis_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=MODES, default=DEFAULT_MODE, help="analysis mode (default: %(default)s)")
    parser.add_argument("--path-cap", type=int, default=DEFAULT_PATH_CAP, help="pre-paths kept per site")
    parser.add_argument("--clause-limit", type=int, default=DEFAULT_CLAUSE_LIMIT, help="clauses kept per negation")
    parser.add_argument("--loop-unroll", type=int, choices=(0, 1), default=DEFAULT_LOOP_UNROLL)
    parser.add_argument("--dot-dump", metavar="DIR", help="write CFG/CDG DOT files below DIR")
    parser.add_argument(
        "--version-label",
        action="append",
        metavar="LABEL",
        help="version label of the next EXIR input (repeatable; default: file stem)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exlife", description="Exception-aware API lifecycle analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    extract = commands.add_parser("extract", help="write one summary report per EXIR file")
    _add_analysis_options(extract)
    extract.add_argument("-o", "--output", required=True, metavar="DIR", help="output directory")
    extract.add_argument("inputs", nargs="+", type=Path, metavar="FILE.exir")

    diff = commands.add_parser("diff", help="compare two summary reports")
    diff.add_argument("-o", "--output", required=True, metavar="FILE", help="change report path")
    diff.add_argument("old", type=Path)
    diff.add_argument("new", type=Path)

    lifecycle = commands.add_parser("lifecycle", help="lifecycle models over ordered versions")
    _add_analysis_options(lifecycle)
    lifecycle.add_argument("--pretty", action="store_true", help=f"also write {LIFECYCLE_TEXT_FILE}")
    lifecycle.add_argument("-o", "--output", required=True, metavar="DIR", help="output directory")
    lifecycle.add_argument("inputs", nargs="+", type=Path, metavar="FILE", help="summary reports or EXIR files, oldest first")
    return parser


def _labels(args: argparse.Namespace, count: int) -> list[str] | None:
    labels = args.version_label
    if labels is not None and len(labels) != count:
        raise ExLifeError(f"{len(labels)} version labels given for {count} EXIR inputs")
    return labels


def _check_unique(versions: Sequence[str]) -> None:
    if len(set(versions)) != len(versions):
        raise ExLifeError(f"duplicate version labels: {', '.join(versions)}")


def cmd_extract(args: argparse.Namespace, exlife: ExLife) -> int:
    inputs: list[Path] = args.inputs
    labels = _labels(args, len(inputs)) or [path.stem for path in inputs]
    _check_unique(labels)
    reports = asyncio.run(exlife.extract_files(inputs, labels))
    output = Path(args.output)
    for report in reports:
        write_json(output / f"{report.version}{SUMMARY_SUFFIX}", report.to_json())
    return 0


def cmd_diff(args: argparse.Namespace, exlife: ExLife) -> int:
    change = exlife.diff(load_version_report(args.old), load_version_report(args.new))
    write_json(Path(args.output), change.to_json())
    return 0


def _load_versions(args: argparse.Namespace, exlife: ExLife) -> list[VersionReport]:
    exir_inputs = [path for path in args.inputs if path.suffix == EXIR_SUFFIX]
    labels = _labels(args, len(exir_inputs)) or [path.stem for path in exir_inputs]
    extracted = iter(asyncio.run(exlife.extract_files(exir_inputs, labels)) if exir_inputs else [])
    reports = [next(extracted) if path.suffix == EXIR_SUFFIX else load_version_report(path) for path in args.inputs]
    _check_unique([report.version for report in reports])
    return reports


def cmd_lifecycle(args: argparse.Namespace, exlife: ExLife) -> int:
    lifecycle = exlife.lifecycle(_load_versions(args, exlife))
    output = Path(args.output)
    write_json(output / LIFECYCLE_FILE, lifecycle.to_json())
    write_json(output / STATISTICS_FILE, exlife.statistics(lifecycle))
    if exlife.config.pretty:
        output.mkdir(parents=True, exist_ok=True)
        (output / LIFECYCLE_TEXT_FILE).write_text(render_lifecycle(lifecycle), encoding="utf-8", newline="\n")
    return 0


_COMMANDS = {"extract": cmd_extract, "diff": cmd_diff, "lifecycle": cmd_lifecycle}


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line; returns the process exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        exlife = ExLife(RunConfig.from_args(args))
        return _COMMANDS[args.command](args, exlife)
    except ExLifeError as err:
        print(f"exlife: error: {err}", file=sys.stderr)  # noqa: T201
        return 1
    except OSError as err:
        print(f"exlife: error: {err}", file=sys.stderr)  # noqa: T201
        return 2
