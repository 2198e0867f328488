"""Lifecycle models: API existence intervals and exception lineages across versions."""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from .const import LINEAGE_ID_LENGTH, OPEN_VERSION
from .exceptions import ModeMismatchError, ReportFormatError, VersionSequenceError
from .exir import MethodId
from .matching import ChangeKind, ChangeReport
from .summary import ExceptionSummary, VersionReport

_LOGGER = logging.getLogger(__name__)

_FIELD_OF_KIND = {
    ChangeKind.TYPE_CHANGED: "type",
    ChangeKind.MESSAGE_CHANGED: "message",
    ChangeKind.PRECONDITION_CHANGED: "precondition",
}
_KIND_OF_FIELD = {value: key for key, value in _FIELD_OF_KIND.items()}
_EXISTENCE_KINDS = frozenset({ChangeKind.API_ADDED.value, ChangeKind.API_REMOVED.value})


def _triple(summary: ExceptionSummary) -> dict[str, str]:
    return {
        "type": summary.exception,
        "message": summary.message_pattern,
        "precondition": str(summary.precondition.normalized()),
    }


def lineage_id(api: MethodId, version: str, summary: ExceptionSummary, index: int) -> str:
    payload = json.dumps(
        [
            str(api),
            version,
            str(summary.origin.method),
            summary.origin.stmt,
            [str(method) for method in summary.call_chain],
            index,
        ],
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:LINEAGE_ID_LENGTH]


@dataclass(frozen=True)
class LifecycleEvent:
    version: str
    kind: str
    old: str
    new: str

    def to_json(self) -> dict[str, Any]:
        return {"version": self.version, "kind": self.kind, "old": self.old, "new": self.new}


@dataclass
class ExceptionLifecycle:
    """One exception threaded through matched summaries."""

    lineage_id: str
    introduced: str
    origin: tuple[str, int]
    initial: dict[str, str]
    current: dict[str, str]
    removed: str = OPEN_VERSION
    events: list[LifecycleEvent] = field(default_factory=list)
    added_by_event: bool = False
    removed_by_event: bool = False

    def replay(self) -> dict[str, str]:
        """Apply the events to the introduction triple."""
        state = dict(self.initial)
        for event in self.events:
            if state[event.kind] != event.old:
                raise ValueError(f"lineage {self.lineage_id}: {event.kind} was {state[event.kind]!r}, event expects {event.old!r}")
            state[event.kind] = event.new
        return state

    @property
    def is_open(self) -> bool:
        return self.removed == OPEN_VERSION

    def to_json(self) -> dict[str, Any]:
        return {
            "lineage_id": self.lineage_id,
            "introduced": self.introduced,
            "removed": self.removed,
            "origin": {"method": self.origin[0], "stmt": self.origin[1]},
            "initial": dict(self.initial),
            "final": dict(self.current),
            "events": [event.to_json() for event in self.events],
        }


@dataclass
class LifecycleModel:
    api: MethodId
    intervals: list[list[str]] = field(default_factory=list)
    exceptions: list[ExceptionLifecycle] = field(default_factory=list)

    @property
    def is_present(self) -> bool:
        return bool(self.intervals) and self.intervals[-1][1] == OPEN_VERSION

    def to_json(self) -> dict[str, Any]:
        return {
            "signature": str(self.api),
            "intervals": [list(interval) for interval in self.intervals],
            "exceptions": [exception.to_json() for exception in self.exceptions],
        }


@dataclass
class Lifecycle:
    """Lifecycle models of every API seen in a version sequence."""

    versions: tuple[str, ...]
    mode: str
    models: dict[MethodId, LifecycleModel] = field(default_factory=dict)

    def model(self, api: MethodId) -> LifecycleModel:
        return self.models[api]

    def to_json(self) -> dict[str, Any]:
        return {
            "versions": list(self.versions),
            "mode": self.mode,
            "apis": [self.models[api].to_json() for api in sorted(self.models)],
        }


class _Builder:
    def __init__(self, versions: tuple[str, ...], mode: str) -> None:
        self.lifecycle = Lifecycle(versions, mode)
        self.live: dict[MethodId, dict[int, ExceptionLifecycle]] = {}

    def _model(self, api: MethodId) -> LifecycleModel:
        return self.lifecycle.models.setdefault(api, LifecycleModel(api))

    def _start(self, api: MethodId, version: str, index: int, summary: ExceptionSummary, *, by_event: bool) -> ExceptionLifecycle:
        lineage = ExceptionLifecycle(
            lineage_id=lineage_id(api, version, summary, index),
            introduced=version,
            origin=(str(summary.origin.method), summary.origin.stmt),
            initial=_triple(summary),
            current=_triple(summary),
            added_by_event=by_event,
        )
        self._model(api).exceptions.append(lineage)
        return lineage

    def open_api(self, api: MethodId, version: str, summaries: Sequence[ExceptionSummary]) -> None:
        self._model(api).intervals.append([version, OPEN_VERSION])
        self.live[api] = {index: self._start(api, version, index, summary, by_event=False) for index, summary in enumerate(summaries)}

    def close_api(self, api: MethodId, version: str) -> None:
        model = self._model(api)
        if not model.is_present:
            raise ReportFormatError(f"API {api} removed at {version} but it is not present")
        model.intervals[-1][1] = version
        for lineage in self.live.pop(api, {}).values():
            lineage.removed = version

    def apply(self, report: ChangeReport) -> None:
        version = report.new_version
        removed_apis = {event.api for event in report.events_of(ChangeKind.API_REMOVED)}
        next_live: dict[MethodId, dict[int, ExceptionLifecycle]] = {}
        covered: dict[MethodId, set[int]] = {}

        for match in report.matches:
            lineage = self.live.get(match.api, {}).get(match.old_index)
            if lineage is None:
                raise ReportFormatError(f"{report.old_version}->{version}: no summary {match.old_index} for {match.api}")
            next_live.setdefault(match.api, {})[match.new_index] = lineage
            covered.setdefault(match.api, set()).add(match.old_index)

        for event in report.events:
            if event.kind in _FIELD_OF_KIND:
                assert event.old is not None and event.new is not None
                lineage = next_live[event.api][event.new_index]  # type: ignore[index]
                name = _FIELD_OF_KIND[event.kind]
                old_value, new_value = _triple(event.old)[name], _triple(event.new)[name]
                lineage.events.append(LifecycleEvent(version, name, old_value, new_value))
                lineage.current[name] = new_value
            elif event.kind is ChangeKind.EXCEPTION_REMOVED:
                lineage = self.live[event.api][event.old_index]  # type: ignore[index]
                lineage.removed = version
                lineage.removed_by_event = True
                covered.setdefault(event.api, set()).add(event.old_index)  # type: ignore[arg-type]
            elif event.kind is ChangeKind.EXCEPTION_ADDED:
                assert event.new is not None and event.new_index is not None
                next_live.setdefault(event.api, {})[event.new_index] = self._start(
                    event.api,
                    version,
                    event.new_index,
                    event.new,
                    by_event=True,
                )

        for api, lineages in self.live.items():
            if api in removed_apis:
                continue
            missing = set(lineages) - covered.get(api, set())
            if missing:
                raise ReportFormatError(f"{report.old_version}->{version}: summaries {sorted(missing)} of {api} are unaccounted for")
            next_live.setdefault(api, {})

        for api in sorted(removed_apis):
            self.close_api(api, version)
        self.live = {api: lineages for api, lineages in next_live.items() if api not in removed_apis}
        for event in report.events_of(ChangeKind.API_ADDED):
            self.open_api(event.api, version, event.summaries)


def build_lifecycle(
    initial: VersionReport,
    reports: Sequence[ChangeReport] = (),
    versions: Sequence[str] | None = None,
) -> Lifecycle:
    """Thread lineages through consecutive change reports.

    :param initial: Summary report of the first version; its contents count as introduced there.
    :param reports: Change reports for (v0, v1), (v1, v2), ... in order.
    :param versions: Expected version order; derived from the reports when omitted.
    """
    derived = (initial.version, *(report.new_version for report in reports))
    expected = tuple(versions) if versions is not None else derived
    if len(expected) != len(reports) + 1 or expected[0] != initial.version:
        raise VersionSequenceError(f"{len(reports)} change reports do not cover versions {', '.join(expected)}")
    for position, report in enumerate(reports):
        if (report.old_version, report.new_version) != (expected[position], expected[position + 1]):
            raise VersionSequenceError(
                f"change report {report.old_version}->{report.new_version} is not "
                f"{expected[position]}->{expected[position + 1]}",
            )
        if report.mode != initial.mode:
            raise ModeMismatchError(f"change report {report.old_version}->{report.new_version} is {report.mode}, expected {initial.mode}")

    builder = _Builder(expected, initial.mode)
    for api in initial.apis:
        builder.open_api(api.id, initial.version, api.summaries)
    for report in reports:
        builder.apply(report)

    version_rank = {version: rank for rank, version in enumerate(expected)}
    for model in builder.lifecycle.models.values():
        model.exceptions.sort(key=lambda lineage: (version_rank[lineage.introduced], lineage.origin, lineage.lineage_id))
    _LOGGER.debug("Lifecycle over %s versions: %s APIs", len(expected), len(builder.lifecycle.models))
    return builder.lifecycle


def _fraction(count: int, total: int) -> float:
    return round(count / total, 6) if total else 0.0


def summarize_statistics(lifecycle: Lifecycle) -> dict[str, Any]:
    """Corpus measures: event counts, API change ratios and exception duplication.

    ``existence_changed`` counts APIs added or removed after the first version,
    which is all an existence-only model sees; ``lifecycle_changed`` adds the
    APIs whose exceptions changed.
    """
    events: Counter[str] = Counter({kind.value: 0 for kind in ChangeKind})
    independent: dict[str, set[tuple[Any, ...]]] = {kind.value: set() for kind in ChangeKind}
    apis_by_kind: Counter[str] = Counter({kind.value: 0 for kind in ChangeKind})
    apis_with_changes = existence_changed = lifecycle_changed = 0
    instances = 0
    origins: set[tuple[str, int]] = set()

    for api, model in sorted(lifecycle.models.items()):
        kinds: set[str] = set()
        for interval in model.intervals:
            if interval[0] != lifecycle.versions[0]:
                events[ChangeKind.API_ADDED.value] += 1
                independent[ChangeKind.API_ADDED.value].add((str(api), interval[0]))
                kinds.add(ChangeKind.API_ADDED.value)
            if interval[1] != OPEN_VERSION:
                events[ChangeKind.API_REMOVED.value] += 1
                independent[ChangeKind.API_REMOVED.value].add((str(api), interval[1]))
                kinds.add(ChangeKind.API_REMOVED.value)
        existence = bool(kinds)
        for lineage in model.exceptions:
            instances += 1
            origins.add(lineage.origin)
            if lineage.added_by_event:
                events[ChangeKind.EXCEPTION_ADDED.value] += 1
                independent[ChangeKind.EXCEPTION_ADDED.value].add((lineage.origin, lineage.introduced))
                kinds.add(ChangeKind.EXCEPTION_ADDED.value)
            if lineage.removed_by_event:
                events[ChangeKind.EXCEPTION_REMOVED.value] += 1
                independent[ChangeKind.EXCEPTION_REMOVED.value].add((lineage.origin, lineage.removed))
                kinds.add(ChangeKind.EXCEPTION_REMOVED.value)
            for event in lineage.events:
                kind = _KIND_OF_FIELD[event.kind].value
                events[kind] += 1
                independent[kind].add((lineage.origin, event.version, event.old, event.new))
                kinds.add(kind)
        apis_by_kind.update(kinds)
        existence_changed += existence
        apis_with_changes += len(kinds) > len(kinds & _EXISTENCE_KINDS)
        lifecycle_changed += bool(kinds)

    total = len(lifecycle.models)
    return {
        "versions": list(lifecycle.versions),
        "mode": lifecycle.mode,
        "events": dict(sorted(events.items())),
        "independent_events": {kind: len(keys) for kind, keys in sorted(independent.items())},
        "apis": {
            "total": total,
            "added": events[ChangeKind.API_ADDED.value],
            "removed": events[ChangeKind.API_REMOVED.value],
            "with_exception_changes": apis_with_changes,
            "changed_fraction": _fraction(apis_with_changes, total),
            "existence_changed": existence_changed,
            "existence_changed_fraction": _fraction(existence_changed, total),
            "lifecycle_changed": lifecycle_changed,
            "lifecycle_changed_fraction": _fraction(lifecycle_changed, total),
        },
        "apis_by_event": {
            kind: {"apis": count, "fraction": _fraction(count, total)} for kind, count in sorted(apis_by_kind.items())
        },
        "exceptions": {
            "instances": instances,
            "independent": len(origins),
            "duplicated": instances - len(origins),
        },
    }


def render_lifecycle(lifecycle: Lifecycle) -> str:
    """Plain-text table of every API and its exception lineages."""
    lines = [f"versions: {' -> '.join(lifecycle.versions)} ({lifecycle.mode})", ""]
    for api in sorted(lifecycle.models):
        model = lifecycle.models[api]
        spans = ", ".join(f"[{start}, {end}]" for start, end in model.intervals)
        lines.append(f"{api}  {spans}")
        for lineage in model.exceptions:
            initial = lineage.initial
            lines.append(
                f"  {lineage.lineage_id}  {lineage.introduced} .. {lineage.removed}  "
                f"{initial['type']} | {initial['message']} | {initial['precondition']}",
            )
            lines.extend(
                f"    {event.version:<10} {event.kind:<12} {event.old}  =>  {event.new}" for event in lineage.events
            )
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"
