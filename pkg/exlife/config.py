"""Run configuration."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from .const import DEFAULT_CLAUSE_LIMIT, DEFAULT_LOOP_UNROLL, DEFAULT_MODE, DEFAULT_PATH_CAP, MODES
from .exceptions import ConfigError


@dataclass(frozen=True)
class RunConfig:
    """Analysis mode, limits and output options shared by every stage.

    :param mode: ``inter`` or ``intra``.
    :param path_cap: Maximum number of pre-paths per throw or call site.
    :param loop_unroll: 1 explores loop bodies zero or one times, 0 never re-enters a loop.
    :param clause_limit: Largest clause count kept when negating a precondition.
    :param pretty: Also write the text rendering of a lifecycle.
    :param dot_dump: Directory receiving CFG/CDG DOT files, or None.
    """

    mode: str = DEFAULT_MODE
    path_cap: int = DEFAULT_PATH_CAP
    loop_unroll: int = DEFAULT_LOOP_UNROLL
    clause_limit: int = DEFAULT_CLAUSE_LIMIT
    pretty: bool = False
    dot_dump: Path | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.path_cap < 1:
            raise ConfigError(f"path cap must be at least 1, got {self.path_cap}")
        if self.clause_limit < 1:
            raise ConfigError(f"clause limit must be at least 1, got {self.clause_limit}")
        if self.loop_unroll not in (0, 1):
            raise ConfigError(f"loop unroll must be 0 or 1, got {self.loop_unroll}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        dot_dump = getattr(args, "dot_dump", None)
        return cls(
            mode=getattr(args, "mode", DEFAULT_MODE),
            path_cap=getattr(args, "path_cap", DEFAULT_PATH_CAP),
            loop_unroll=getattr(args, "loop_unroll", DEFAULT_LOOP_UNROLL),
            clause_limit=getattr(args, "clause_limit", DEFAULT_CLAUSE_LIMIT),
            pretty=getattr(args, "pretty", False),
            dot_dump=Path(dot_dump) if dot_dump else None,
        )
