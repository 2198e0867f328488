"""Exception-aware API lifecycle analysis for EXIR programs."""

import asyncio
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from .config import RunConfig
from .const import __version__
from .exceptions import ExLifeError
from .exir import ExirProgram, parse_program, read_program
from .lifecycle import Lifecycle, build_lifecycle, summarize_statistics
from .matching import ChangeReport, diff_reports
from .summary import SummaryExtractor, VersionReport

__all__ = ["ExLife", "ExLifeError", "RunConfig", "__version__"]

_LOGGER = logging.getLogger(__name__)


class ExLife:
    """Runs the extraction, diff and lifecycle stages with one configuration."""

    def __init__(self, config: RunConfig | None = None) -> None:
        """Initialize the analyzer.

        :param config: Mode and limits; the defaults when omitted.
        """
        self._config = config or RunConfig()

    @property
    def config(self) -> RunConfig:
        """Return the run configuration."""
        return self._config

    @property
    def mode(self) -> str:
        """Return the analysis mode."""
        return self._config.mode

    def parse(self, text: str, version_label: str, source: str = "<string>") -> ExirProgram:
        """Parse EXIR text.

        :param text: EXIR source.
        :param version_label: Release label of the program.
        :param source: Name used in diagnostics.
        """
        return parse_program(text, version_label, source)

    def parse_file(self, path: Path, version_label: str | None = None) -> ExirProgram:
        """Parse an EXIR file; the version label defaults to the file stem."""
        return read_program(path, version_label)

    def extractor(self, program: ExirProgram) -> SummaryExtractor:
        return SummaryExtractor(
            program,
            self._config.mode,
            path_cap=self._config.path_cap,
            clause_limit=self._config.clause_limit,
            loop_unroll=self._config.loop_unroll,
        )

    def extract(self, program: ExirProgram) -> VersionReport:
        """Summary report of one program, writing DOT dumps when configured."""
        extractor = self.extractor(program)
        report = extractor.run()
        if self._config.dot_dump is not None:
            target = self._config.dot_dump / program.version_label
            target.mkdir(parents=True, exist_ok=True)
            for name, text in extractor.dot_files().items():
                (target / name).write_text(text, encoding="utf-8")
        _LOGGER.debug("Extracted %s summaries for version %s", report.summary_count, program.version_label)
        return report

    async def extract_programs(self, programs: Sequence[ExirProgram]) -> list[VersionReport]:
        """Extract several versions concurrently."""
        return list(await asyncio.gather(*(asyncio.to_thread(self.extract, program) for program in programs)))

    async def extract_files(
        self,
        paths: Sequence[Path],
        version_labels: Sequence[str] | None = None,
    ) -> list[VersionReport]:
        """Parse every file first, then extract all of them concurrently.

        :param paths: EXIR files, one per version.
        :param version_labels: Labels overriding the file stems.
        """
        if version_labels is not None and len(version_labels) != len(paths):
            raise ExLifeError(f"{len(version_labels)} version labels given for {len(paths)} inputs")
        labels: Sequence[str | None] = version_labels or [None] * len(paths)
        programs = [self.parse_file(path, label) for path, label in zip(paths, labels, strict=True)]
        return await self.extract_programs(programs)

    def diff(self, old: VersionReport, new: VersionReport) -> ChangeReport:
        """Change report between two adjacent versions."""
        return diff_reports(old, new)

    def lifecycle(self, reports: Sequence[VersionReport]) -> Lifecycle:
        """Lifecycle models over summary reports given in version order."""
        if not reports:
            raise ExLifeError("at least one version is required")
        changes = [self.diff(old, new) for old, new in zip(reports, reports[1:], strict=False)]
        return build_lifecycle(reports[0], changes, [report.version for report in reports])

    def statistics(self, lifecycle: Lifecycle) -> dict[str, Any]:
        """Corpus statistics of a lifecycle."""
        return summarize_statistics(lifecycle)
