"""Matching exception summaries across two versions of an API.

Summaries are compared on three fields: exception type, message pattern and
precondition. Exact matches are paired first; the remaining summaries go
through a filter chain that tolerates one differing field, and then through a
rescue step that pairs summaries sharing their type and key precondition. The
last two steps repeat until no new pair is found.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

from .exceptions import ModeMismatchError, ReportFormatError
from .exir import MethodId
from .summary import ApiSummaries, ExceptionSummary, VersionReport

_LOGGER = logging.getLogger(__name__)

SummaryKey = tuple[str, str, tuple[Any, ...]]


class MatchRule(StrEnum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R5 = "R5"
    R6 = "R6"
    R7 = "R7"
    R8 = "R8"

    @property
    def agreement(self) -> tuple[bool, bool, bool]:
        """Which of (type, description, precondition) agree under this rule."""
        return RULE_AGREEMENT[self]

    @property
    def matches(self) -> bool:
        return self in (MatchRule.R1, MatchRule.R2, MatchRule.R3, MatchRule.R4, MatchRule.R5)


RULE_AGREEMENT: dict[MatchRule, tuple[bool, bool, bool]] = {
    MatchRule.R1: (True, True, True),
    MatchRule.R2: (False, True, True),
    MatchRule.R3: (True, False, True),
    MatchRule.R4: (True, True, False),
    MatchRule.R5: (True, False, False),
    MatchRule.R6: (False, False, True),
    MatchRule.R7: (False, True, False),
    MatchRule.R8: (False, False, False),
}
_RULE_BY_AGREEMENT = {vector: rule for rule, vector in RULE_AGREEMENT.items()}


def rule_for(agreement: tuple[bool, bool, bool]) -> MatchRule:
    return _RULE_BY_AGREEMENT[agreement]


class ChangeKind(StrEnum):
    API_ADDED = "api-added"
    API_REMOVED = "api-removed"
    EXCEPTION_ADDED = "exception-added"
    EXCEPTION_REMOVED = "exception-removed"
    TYPE_CHANGED = "exception-type-changed"
    MESSAGE_CHANGED = "exception-message-changed"
    PRECONDITION_CHANGED = "exception-precondition-changed"


_RULE_EVENTS: dict[MatchRule, tuple[ChangeKind, ...]] = {
    MatchRule.R1: (),
    MatchRule.R2: (ChangeKind.TYPE_CHANGED,),
    MatchRule.R3: (ChangeKind.MESSAGE_CHANGED,),
    MatchRule.R4: (ChangeKind.PRECONDITION_CHANGED,),
    MatchRule.R5: (ChangeKind.MESSAGE_CHANGED, ChangeKind.PRECONDITION_CHANGED),
}


def normalize_summary(summary: ExceptionSummary) -> SummaryKey:
    """Comparison key (type, message pattern, canonical precondition)."""
    return (summary.exception, summary.message_pattern, summary.precondition.normalized().canonical_key())


def _key_precondition(summary: ExceptionSummary) -> tuple[Any, ...]:
    return summary.key_precondition.normalized().canonical_key()


def agreement(old: SummaryKey, new: SummaryKey) -> tuple[bool, bool, bool]:
    return (old[0] == new[0], old[1] == new[1], old[2] == new[2])


@dataclass(frozen=True, order=True)
class MatchedPair:
    old: int
    new: int
    rule: MatchRule


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one API: pairs, leftovers and the number of rounds used."""

    pairs: tuple[MatchedPair, ...]
    removed: tuple[int, ...]
    added: tuple[int, ...]
    rounds: int = 0


class _Matcher:
    """One fixpoint matching run over the summaries of a single API."""

    def __init__(self, old: Sequence[ExceptionSummary], new: Sequence[ExceptionSummary]) -> None:
        self.old = old
        self.new = new
        self.old_keys = [normalize_summary(summary) for summary in old]
        self.new_keys = [normalize_summary(summary) for summary in new]
        self.old_key_pre = [_key_precondition(summary) for summary in old]
        self.new_key_pre = [_key_precondition(summary) for summary in new]
        self.old_left = set(range(len(old)))
        self.new_left = set(range(len(new)))
        self.pairs: list[MatchedPair] = []

    def _ordered(self, side: str, indices: set[int]) -> list[int]:
        keys, summaries = (self.old_keys, self.old) if side == "old" else (self.new_keys, self.new)
        return sorted(indices, key=lambda index: (repr(keys[index]), summaries[index].sort_key, index))

    def exact(self) -> None:
        """Pair summaries with identical keys as a multiset."""
        buckets: dict[SummaryKey, list[int]] = defaultdict(list)
        for index in self._ordered("new", self.new_left):
            buckets[self.new_keys[index]].append(index)
        for index in self._ordered("old", self.old_left):
            bucket = buckets.get(self.old_keys[index])
            if bucket:
                self._pair(index, bucket.pop(0), MatchRule.R1)

    def _pair(self, old: int, new: int, rule: MatchRule) -> None:
        self.pairs.append(MatchedPair(old, new, rule))
        self.old_left.discard(old)
        self.new_left.discard(new)

    @staticmethod
    def _filter_chain(key: SummaryKey, candidates: list[int], candidate_keys: list[SummaryKey]) -> list[int]:
        pool = candidates
        for position in range(3):
            narrowed = [index for index in pool if candidate_keys[index][position] == key[position]]
            if narrowed:
                pool = narrowed
        return pool

    def adaptive(self) -> int:
        """Filter-chain step; returns the number of pairs found."""
        olds = self._ordered("old", self.old_left)
        news = self._ordered("new", self.new_left)
        found: list[MatchedPair] = []
        for old in olds:
            pool = self._filter_chain(self.old_keys[old], news, self.new_keys)
            if len(pool) != 1:
                continue
            new = pool[0]
            vector = agreement(self.old_keys[old], self.new_keys[new])
            if sum(vector) != 2:
                continue
            if self._filter_chain(self.new_keys[new], olds, self.old_keys) != [old]:
                continue
            found.append(MatchedPair(old, new, rule_for(vector)))
        for pair in found:
            self._pair(pair.old, pair.new, pair.rule)
        return len(found)

    def rescue(self) -> int:
        """Key-precondition step; returns the number of pairs found."""
        olds = self._ordered("old", self.old_left)
        news = self._ordered("new", self.new_left)
        found: list[MatchedPair] = []
        for old in olds:
            same = [
                new
                for new in news
                if self.new_keys[new][0] == self.old_keys[old][0] and self.new_key_pre[new] == self.old_key_pre[old]
            ]
            if len(same) != 1:
                continue
            new = same[0]
            back = [
                other
                for other in olds
                if self.old_keys[other][0] == self.new_keys[new][0] and self.old_key_pre[other] == self.new_key_pre[new]
            ]
            if back != [old]:
                continue
            found.append(MatchedPair(old, new, rule_for(agreement(self.old_keys[old], self.new_keys[new]))))
        for pair in found:
            self._pair(pair.old, pair.new, pair.rule)
        return len(found)


def fixpoint_match(old: Sequence[ExceptionSummary], new: Sequence[ExceptionSummary]) -> MatchResult:
    """Match the summaries of one API across two versions.

    Exact matches are paired first. Then, until a round finds nothing, the
    filter chain pairs summaries that differ in exactly one field and the rescue
    step pairs summaries that agree on type and key precondition. A pair is only
    made when each side is the other's single remaining candidate, so the result
    does not depend on which version is called old.

    :param old: Summaries of the API in the older version.
    :param new: Summaries of the API in the newer version.
    """
    matcher = _Matcher(old, new)
    matcher.exact()
    rounds = 0
    while True:
        rounds += 1
        found = matcher.adaptive()
        found += matcher.rescue()
        if not found:
            break
    pairs = tuple(sorted(matcher.pairs))
    for pair in pairs:
        assert agreement(matcher.old_keys[pair.old], matcher.new_keys[pair.new]) == pair.rule.agreement
    return MatchResult(pairs, tuple(sorted(matcher.old_left)), tuple(sorted(matcher.new_left)), rounds)


@dataclass(frozen=True)
class ApiPairing:
    paired: tuple[tuple[ApiSummaries, ApiSummaries], ...]
    removed: tuple[ApiSummaries, ...]
    added: tuple[ApiSummaries, ...]


def _index_apis(report: VersionReport) -> dict[MethodId, ApiSummaries]:
    index: dict[MethodId, ApiSummaries] = {}
    for api in report.apis:
        if api.id in index:
            raise ReportFormatError(f"API {api.id} listed twice in version {report.version}")
        index[api.id] = api
    return index


def match_apis(old: VersionReport, new: VersionReport) -> ApiPairing:
    """Pair APIs by exact signature."""
    old_apis = _index_apis(old)
    new_apis = _index_apis(new)
    paired = tuple((old_apis[key], new_apis[key]) for key in sorted(old_apis.keys() & new_apis.keys()))
    removed = tuple(old_apis[key] for key in sorted(old_apis.keys() - new_apis.keys()))
    added = tuple(new_apis[key] for key in sorted(new_apis.keys() - old_apis.keys()))
    return ApiPairing(paired, removed, added)


@dataclass(frozen=True)
class ChangeEvent:
    kind: ChangeKind
    api: MethodId
    old_version: str
    new_version: str
    old: ExceptionSummary | None = None
    new: ExceptionSummary | None = None
    rule: MatchRule | None = None
    old_index: int | None = None
    new_index: int | None = None
    summaries: tuple[ExceptionSummary, ...] = ()

    @property
    def origin(self) -> tuple[str, int]:
        summary = self.new or self.old
        if summary is None:
            return ("", -1)
        return (str(summary.origin.method), summary.origin.stmt)

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind.value, "api": str(self.api)}
        if self.rule is not None:
            data["rule"] = self.rule.value
        if self.old is not None:
            data["old"] = self.old.to_json()
            data["old_index"] = self.old_index
        if self.new is not None:
            data["new"] = self.new.to_json()
            data["new_index"] = self.new_index
        if self.kind in (ChangeKind.API_ADDED, ChangeKind.API_REMOVED):
            data["summaries"] = [summary.to_json() for summary in self.summaries]
        return data

    @property
    def sort_key(self) -> tuple[Any, ...]:
        return (str(self.api), self.origin, self.kind.value, json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def from_json(cls, data: dict[str, Any], old_version: str, new_version: str) -> ChangeEvent:
        api = MethodId.parse(data["api"])
        kind = ChangeKind(data["kind"])
        version = new_version if kind is ChangeKind.API_ADDED else old_version
        return cls(
            kind=kind,
            api=api,
            old_version=old_version,
            new_version=new_version,
            old=ExceptionSummary.from_json(data["old"], api, old_version) if "old" in data else None,
            new=ExceptionSummary.from_json(data["new"], api, new_version) if "new" in data else None,
            rule=MatchRule(data["rule"]) if "rule" in data else None,
            old_index=data.get("old_index"),
            new_index=data.get("new_index"),
            summaries=tuple(ExceptionSummary.from_json(item, api, version) for item in data.get("summaries", [])),
        )


@dataclass(frozen=True, order=True)
class PairRecord:
    """A matched pair of summary indices within one API."""

    api: MethodId
    old_index: int
    new_index: int
    rule: MatchRule = field(compare=False)

    def to_json(self) -> dict[str, Any]:
        return {"api": str(self.api), "rule": self.rule.value, "old_index": self.old_index, "new_index": self.new_index}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> PairRecord:
        return cls(MethodId.parse(data["api"]), int(data["old_index"]), int(data["new_index"]), MatchRule(data["rule"]))


@dataclass(frozen=True)
class ChangeReport:
    old_version: str
    new_version: str
    mode: str
    events: tuple[ChangeEvent, ...] = ()
    matches: tuple[PairRecord, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "old_version": self.old_version,
            "new_version": self.new_version,
            "mode": self.mode,
            "events": [event.to_json() for event in self.events],
            "matches": [match.to_json() for match in self.matches],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> ChangeReport:
        old_version = str(data["old_version"])
        new_version = str(data["new_version"])
        events = tuple(ChangeEvent.from_json(item, old_version, new_version) for item in data["events"])
        matches = tuple(PairRecord.from_json(item) for item in data.get("matches", []))
        return cls(old_version, new_version, str(data["mode"]), events, matches)

    def events_of(self, kind: ChangeKind) -> tuple[ChangeEvent, ...]:
        return tuple(event for event in self.events if event.kind is kind)


def classify_changes(
    old: ApiSummaries,
    new: ApiSummaries,
    result: MatchResult,
    old_version: str,
    new_version: str,
) -> list[ChangeEvent]:
    """Change events for one signature-paired API."""
    events: list[ChangeEvent] = []
    common = {"api": old.id, "old_version": old_version, "new_version": new_version}
    for pair in result.pairs:
        for kind in _RULE_EVENTS[pair.rule]:
            events.append(
                ChangeEvent(
                    kind=kind,
                    old=old.summaries[pair.old],
                    new=new.summaries[pair.new],
                    rule=pair.rule,
                    old_index=pair.old,
                    new_index=pair.new,
                    **common,
                ),
            )
    events.extend(
        ChangeEvent(kind=ChangeKind.EXCEPTION_REMOVED, old=old.summaries[index], old_index=index, **common)
        for index in result.removed
    )
    events.extend(
        ChangeEvent(kind=ChangeKind.EXCEPTION_ADDED, new=new.summaries[index], new_index=index, **common)
        for index in result.added
    )
    return events


def diff_reports(old: VersionReport, new: VersionReport) -> ChangeReport:
    """Compare two version reports of the same analysis mode."""
    if old.mode != new.mode:
        raise ModeMismatchError(f"cannot compare a {old.mode} report ({old.version}) with a {new.mode} report ({new.version})")
    pairing = match_apis(old, new)
    events: list[ChangeEvent] = []
    matches: list[PairRecord] = []
    common = {"old_version": old.version, "new_version": new.version}
    for api in pairing.removed:
        events.append(ChangeEvent(kind=ChangeKind.API_REMOVED, api=api.id, summaries=api.summaries, **common))
    for api in pairing.added:
        events.append(ChangeEvent(kind=ChangeKind.API_ADDED, api=api.id, summaries=api.summaries, **common))
    for old_api, new_api in pairing.paired:
        result = fixpoint_match(old_api.summaries, new_api.summaries)
        matches.extend(PairRecord(old_api.id, pair.old, pair.new, pair.rule) for pair in result.pairs)
        events.extend(classify_changes(old_api, new_api, result, old.version, new.version))
        if result.removed or result.added or any(pair.rule is not MatchRule.R1 for pair in result.pairs):
            _LOGGER.debug(
                "%s %s->%s: %s pairs, %s removed, %s added in %s rounds",
                old_api.id,
                old.version,
                new.version,
                len(result.pairs),
                len(result.removed),
                len(result.added),
                result.rounds,
            )
    return ChangeReport(
        old.version,
        new.version,
        old.mode,
        tuple(sorted(events, key=lambda event: event.sort_key)),
        tuple(sorted(matches)),
    )
