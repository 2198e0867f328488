"""Exception summary extraction.

For every throw site the extractor records the exception type, a regular
expression for the message and the parameter-level precondition under which the
throw is reached. Conditions come from the control dependences of the site on
each pre-path; internal variables are then replaced by their reaching
definitions along that path until only parameters, constants and opaque calls
remain. In inter-procedural mode callee summaries are lifted into their callers
bottom-up over the call graph.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from .callgraph import CallGraph, build_call_graph
from .const import (
    DEFAULT_CLAUSE_LIMIT,
    DEFAULT_LOOP_UNROLL,
    DEFAULT_MODE,
    DEFAULT_PATH_CAP,
    FLAG_CLAUSE_LIMIT,
    FLAG_CONTRADICTORY,
    FLAG_IMPRECISE,
    FLAG_INFEASIBLE,
    FLAG_RECURSIVE,
    FLAG_TRUNCATED,
    FLAG_UNCONDITIONAL,
    FLAG_UNREACHABLE,
    MODE_INTER,
    MODES,
)
from .constraints import Clause, Literal, Precondition, conjoin, negate_precondition, normalize_literal
from .exceptions import ReportFormatError
from .exir import ExirMethod, ExirProgram, MethodId, Statement, StatementKind
from .expr import (
    BinOp,
    Call,
    Concat,
    Const,
    Expr,
    FieldRef,
    Operand,
    Param,
    UnOp,
    Unknown,
    Var,
    has_unknown,
    parse_atom,
    transform,
)
from .graphs import (
    Cdg,
    Cfg,
    PrePath,
    PrePathSet,
    build_cfg,
    cdg_to_dot,
    cfg_to_dot,
    control_dependence,
    enumerate_prepaths,
)

_LOGGER = logging.getLogger(__name__)

WILDCARD = ".*"
_REGEX_META = frozenset("\\.^$*+?()[]{}|")
_FORMAT_RE = re.compile(r"%(?:\d+\$)?[-#+ 0,(<]*\d*(?:\.\d+)?([a-zA-Z%])")
_INHERITED_FLAGS = frozenset({FLAG_TRUNCATED, FLAG_CLAUSE_LIMIT, FLAG_IMPRECISE, FLAG_RECURSIVE})


def escape_fragment(text: str) -> str:
    """Escape regex metacharacters only; other characters stay verbatim."""
    return "".join(f"\\{char}" if char in _REGEX_META else char for char in text)


@dataclass(frozen=True, order=True)
class Origin:
    """Declaring method and statement index of a throw."""

    method: MethodId
    stmt: int

    def to_json(self) -> dict[str, Any]:
        return {"method": str(self.method), "stmt": self.stmt}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Origin:
        return cls(MethodId.parse(data["method"]), int(data["stmt"]))


@dataclass(frozen=True)
class ThrowSite:
    method: MethodId
    index: int
    exception: str
    message: tuple[Operand, ...]


@dataclass(frozen=True)
class RawLiteral:
    """Unrefined control dependence: the condition of statement ``stmt`` and the branch taken."""

    stmt: int
    atom: Expr
    polarity: bool
    position: int = field(default=0, compare=False)

    def to_json(self) -> dict[str, Any]:
        return {"stmt": self.stmt, "atom": str(self.atom), "polarity": self.polarity}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> RawLiteral:
        return cls(int(data["stmt"]), parse_atom(data["atom"]), bool(data["polarity"]))


RawClause = tuple[RawLiteral, ...]


def _raw_key(literal: RawLiteral) -> tuple[int, str, bool]:
    return (literal.stmt, str(literal.atom), literal.polarity)


@dataclass(frozen=True)
class ExceptionSummary:
    api: MethodId
    version: str
    exception: str
    message_pattern: str
    precondition: Precondition
    key_precondition: Precondition
    origin: Origin
    condition: tuple[RawClause, ...] = ()
    call_chain: tuple[MethodId, ...] = ()
    flags: tuple[str, ...] = ()

    @property
    def sort_key(self) -> tuple[Any, ...]:
        return (
            str(self.origin.method),
            self.origin.stmt,
            tuple(str(method) for method in self.call_chain),
            self.exception,
            self.message_pattern,
            str(self.precondition),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "type": self.exception,
            "message_pattern": self.message_pattern,
            "precondition": self.precondition.to_json(),
            "key_precondition": self.key_precondition.to_json(),
            "condition": [[literal.to_json() for literal in clause] for clause in self.condition],
            "origin": self.origin.to_json(),
            "call_chain": [str(method) for method in self.call_chain],
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any], api: MethodId, version: str) -> ExceptionSummary:
        return cls(
            api=api,
            version=version,
            exception=str(data["type"]),
            message_pattern=str(data["message_pattern"]),
            precondition=Precondition.from_json(data["precondition"]),
            key_precondition=Precondition.from_json(data["key_precondition"]),
            origin=Origin.from_json(data["origin"]),
            condition=tuple(tuple(RawLiteral.from_json(item) for item in clause) for clause in data.get("condition", [])),
            call_chain=tuple(MethodId.parse(text) for text in data["call_chain"]),
            flags=tuple(data["flags"]),
        )


@dataclass(frozen=True)
class ApiSummaries:
    id: MethodId
    summaries: tuple[ExceptionSummary, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {"id": self.id.to_json(), "summaries": [summary.to_json() for summary in self.summaries]}


@dataclass(frozen=True)
class VersionReport:
    """All public APIs of one version with their exception summaries."""

    version: str
    mode: str = DEFAULT_MODE
    apis: tuple[ApiSummaries, ...] = ()
    limits: dict[str, int] = field(default_factory=dict, compare=False)

    def api(self, method_id: MethodId) -> ApiSummaries | None:
        for api in self.apis:
            if api.id == method_id:
                return api
        return None

    @property
    def summary_count(self) -> int:
        return sum(len(api.summaries) for api in self.apis)

    def to_json(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "mode": self.mode,
            "limits": dict(self.limits),
            "apis": [api.to_json() for api in self.apis],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> VersionReport:
        version = str(data["version"])
        mode = data["mode"]
        if mode not in MODES:
            raise ReportFormatError(f"unknown mode {mode!r}")
        apis: list[ApiSummaries] = []
        seen: set[MethodId] = set()
        for entry in data["apis"]:
            method_id = MethodId.from_json(entry["id"])
            if method_id in seen:
                raise ReportFormatError(f"API {method_id} listed twice in version {version}")
            seen.add(method_id)
            summaries = tuple(ExceptionSummary.from_json(item, method_id, version) for item in entry["summaries"])
            apis.append(ApiSummaries(method_id, summaries))
        limits = {key: int(value) for key, value in data.get("limits", {}).items()}
        return cls(version, mode, tuple(sorted(apis, key=lambda api: api.id)), limits)


# --- basic information -------------------------------------------------------------


def locate_throws(method: ExirMethod) -> list[ThrowSite]:
    """List the throw statements of ``method`` in statement order."""
    return [
        ThrowSite(method.id, statement.index, statement.exception or "", statement.operands)
        for statement in method.body
        if statement.kind is StatementKind.THROW
    ]


def _definitions(method: ExirMethod) -> dict[str, list[Statement]]:
    definitions: dict[str, list[Statement]] = {}
    for statement in method.body:
        if statement.target is not None:
            definitions.setdefault(statement.target, []).append(statement)
    return definitions


class _MessageBuilder:
    """Backward trace of a message expression into literal and wildcard segments."""

    def __init__(self, method: ExirMethod, program: ExirProgram | None) -> None:
        self._definitions = _definitions(method)
        self._program = program
        self.segments: list[str | None] = []

    def _single_definition(self, operand: Operand) -> Statement | None:
        if not isinstance(operand, Var):
            return None
        definitions = self._definitions.get(operand.name, [])
        return definitions[0] if len(definitions) == 1 else None

    def constant_string(self, operand: Operand, seen: frozenset[str] = frozenset()) -> str | None:
        if isinstance(operand, Const):
            return operand.value if isinstance(operand.value, str) else None
        definition = self._single_definition(operand)
        if definition is None or definition.target in seen:
            return None
        if definition.kind is StatementKind.ASSIGN_CONST:
            return self.constant_string(definition.operands[0], seen | {definition.target or ""})
        if definition.kind is StatementKind.ASSIGN_FIELDGET and definition.owner is not None and self._program:
            static = self._program.static(f"{definition.owner}::{definition.member}")
            if static is not None and not static.mutable and static.value is not None:
                return static.value.value if isinstance(static.value.value, str) else None
        return None

    def emit(self, operand: Operand, seen: frozenset[str] = frozenset()) -> None:
        if isinstance(operand, Const):
            value = operand.value
            self.segments.append(value if isinstance(value, str) else str(operand))
            return
        definition = self._single_definition(operand)
        if definition is None or operand.name in seen:
            self.segments.append(None)
            return
        seen = seen | {operand.name}
        match definition.kind:
            case StatementKind.ASSIGN_STRCAT:
                for part in definition.operands:
                    self.emit(part, seen)
            case StatementKind.ASSIGN_CONST:
                self.emit(definition.operands[0], seen)
            case StatementKind.ASSIGN_CALL if definition.owner == "String" and definition.member == "format":
                template = self.constant_string(definition.operands[0], seen) if definition.operands else None
                if template is None:
                    self.segments.append(None)
                else:
                    self._emit_format(template)
            case _:
                text = self.constant_string(operand)
                self.segments.append(text)

    def _emit_format(self, template: str) -> None:
        position = 0
        for match in _FORMAT_RE.finditer(template):
            self.segments.append(template[position : match.start()])
            conversion = match.group(1)
            if conversion == "%":
                self.segments.append("%")
            elif conversion == "n":
                self.segments.append("\n")
            else:
                self.segments.append(None)
            position = match.end()
        self.segments.append(template[position:])

    def pattern(self) -> str:
        parts: list[str] = []
        literal: list[str] = []
        for segment in self.segments:
            if segment is None:
                if literal:
                    parts.append(escape_fragment("".join(literal)))
                    literal = []
                if not parts or parts[-1] != WILDCARD:
                    parts.append(WILDCARD)
            else:
                literal.append(segment)
        if literal:
            parts.append(escape_fragment("".join(literal)))
        return "".join(parts)


def reconstruct_message(method: ExirMethod, site: ThrowSite, program: ExirProgram | None = None) -> str:
    """Turn the message expression of a throw into a full-match regular expression.

    Constant fragments are kept with regex metacharacters escaped, anything
    computed at run time becomes ``.*``. Variables are traced back only when they
    have exactly one definition in the method.
    """
    builder = _MessageBuilder(method, program)
    for operand in site.message:
        builder.emit(operand)
    return builder.pattern()


# --- path constraints --------------------------------------------------------------


def condition_atom(statement: Statement) -> Expr:
    """The tested expression of an ``if-goto``."""
    if statement.op is None:
        return statement.operands[0]
    return BinOp(statement.op, statement.operands[0], statement.operands[1])


def extract_constraints(cdg: Cdg, site: int, paths: PrePathSet | Sequence[PrePath]) -> list[RawClause]:
    """Per pre-path, the conditions on the path that ``site`` is control-dependent on.

    Conditions on a path that are not control-dependence ancestors of the site
    are left out.
    """
    body = cdg.cfg.method.body
    ancestors = cdg.ancestors(site)
    path_list = paths.paths if isinstance(paths, PrePathSet) else paths
    result: list[RawClause] = []
    for path in path_list:
        literals = [
            RawLiteral(node, condition_atom(body[node]), bool(path.taken[position]), position)
            for position, node in enumerate(path.nodes[:-1])
            if node in ancestors and body[node].kind is StatementKind.IF_GOTO
        ]
        result.append(tuple(literals))
    return result


class PathEnvironment:
    """Resolves variables to their reaching definitions along one pre-path."""

    def __init__(self, method: ExirMethod, path: PrePath, program: ExirProgram | None = None) -> None:
        self._body = method.body
        self._nodes = path.nodes
        self._program = program

    def value_of(self, operand: Expr, position: int) -> Expr:
        if not isinstance(operand, Var):
            return operand
        for pos in range(position - 1, -1, -1):
            statement = self._body[self._nodes[pos]]
            if statement.target == operand.name:
                return self._definition(statement, pos)
        _LOGGER.debug("No definition of %s on path before position %s", operand.name, position)
        return Unknown()

    def refine(self, atom: Expr, position: int) -> Expr:
        """Replace every internal variable of ``atom`` by its defining expression."""
        return transform(atom, lambda node: self.value_of(node, position) if isinstance(node, Var) else None)

    def arguments(self, statement: Statement, position: int) -> tuple[Expr, ...]:
        return tuple(self.value_of(operand, position) for operand in statement.operands)

    def _definition(self, statement: Statement, pos: int) -> Expr:
        operands = [self.value_of(operand, pos) for operand in statement.operands]
        match statement.kind:
            case StatementKind.PARAM_BIND:
                return Param(statement.param or 0)
            case StatementKind.ASSIGN_CONST:
                return operands[0]
            case StatementKind.ASSIGN_BINOP:
                return BinOp(statement.op or "", operands[0], operands[1])
            case StatementKind.ASSIGN_UNOP:
                return UnOp(statement.op or "", operands[0])
            case StatementKind.ASSIGN_STRCAT:
                return Concat(tuple(operands))
            case StatementKind.ASSIGN_FIELDGET:
                if statement.owner is None:
                    return FieldRef(self.value_of(statement.receiver, pos), statement.member or "")  # type: ignore[arg-type]
                return self._static_value(f"{statement.owner}::{statement.member}")
            case StatementKind.ASSIGN_CALL:
                if statement.owner is None:
                    receiver = self.value_of(statement.receiver, pos)  # type: ignore[arg-type]
                    return Call(statement.member or "", tuple(operands), receiver=receiver)
                return Call(statement.member or "", tuple(operands), owner=statement.owner)
        return Unknown()

    def _static_value(self, key: str) -> Expr:
        static = self._program.static(key) if self._program is not None else None
        if static is None or static.mutable or static.value is None:
            return Unknown()
        return static.value


@dataclass(frozen=True)
class RefinedConstraint:
    """Refined conjunction; ``literals`` is None when the path is self-contradictory."""

    literals: Clause | None
    imprecise: bool = False


def _refine_literal(environment: PathEnvironment, literal: RawLiteral) -> Literal | bool:
    return normalize_literal(environment.refine(literal.atom, literal.position), literal.polarity)


def refine_constraint(
    method: ExirMethod,
    path: PrePath,
    constraint: Sequence[RawLiteral],
    program: ExirProgram | None = None,
) -> RefinedConstraint:
    """Rewrite path literals over parameters, constants and opaque calls.

    :param method: Method the path belongs to.
    :param path: Pre-path on which variables are resolved.
    :param constraint: Raw literals collected on ``path``.
    :param program: Program used to read static field initializers.
    """
    environment = PathEnvironment(method, path, program)
    literals: list[Literal] = []
    for raw in constraint:
        refined = _refine_literal(environment, raw)
        if refined is False:
            return RefinedConstraint(None)
        if isinstance(refined, Literal):
            literals.append(refined)
    clause = Precondition.of([literals])
    if clause.is_false:
        return RefinedConstraint(None)
    imprecise = any(has_unknown(literal.atom) for literal in literals)
    return RefinedConstraint(clause.clauses[0], imprecise)


# --- extraction --------------------------------------------------------------------


@dataclass
class _PathContext:
    path: PrePath
    raw: RawClause
    cons2: Clause | None
    cons3: Precondition
    key: Clause | None
    environment: PathEnvironment


def _flags(*, precondition: Precondition, paths: PrePathSet, contradictory: int, extra: set[str]) -> tuple[str, ...]:
    flags = set(extra)
    if paths.unreachable:
        flags.add(FLAG_UNREACHABLE)
    elif precondition.is_false:
        flags.add(FLAG_INFEASIBLE)
    elif contradictory:
        flags.add(f"{FLAG_CONTRADICTORY}:{contradictory}")
    if precondition.is_true:
        flags.add(FLAG_UNCONDITIONAL)
    if precondition.truncated or paths.truncated:
        flags.add(FLAG_TRUNCATED)
    if precondition.clause_limit_hit:
        flags.add(FLAG_CLAUSE_LIMIT)
    if any(has_unknown(literal.atom) for clause in precondition.clauses for literal in clause):
        flags.add(FLAG_IMPRECISE)
    return tuple(sorted(flags))


class SummaryExtractor:
    """Bottom-up summary computation for one program.

    ``visits`` counts how often each method was analysed.
    """

    def __init__(
        self,
        program: ExirProgram,
        mode: str = DEFAULT_MODE,
        *,
        path_cap: int = DEFAULT_PATH_CAP,
        clause_limit: int = DEFAULT_CLAUSE_LIMIT,
        loop_unroll: int = DEFAULT_LOOP_UNROLL,
        call_graph: CallGraph | None = None,
    ) -> None:
        self.program = program
        self.mode = mode
        self.path_cap = path_cap
        self.clause_limit = clause_limit
        self.loop_unroll = loop_unroll
        self.summaries: dict[MethodId, tuple[ExceptionSummary, ...]] = {}
        self.graphs: dict[MethodId, tuple[Cfg, Cdg]] = {}
        self.visits: Counter[MethodId] = Counter()
        self._call_graph = call_graph

    @property
    def inter(self) -> bool:
        return self.mode == MODE_INTER

    @property
    def call_graph(self) -> CallGraph:
        if self._call_graph is None:
            self._call_graph = build_call_graph(self.program)
        return self._call_graph

    def run(self) -> VersionReport:
        for component in self.call_graph.order:
            for method_id in component:
                method = self.program.method(method_id)
                if method is not None:
                    self.analyze(method)
        return self.report()

    def report(self) -> VersionReport:
        apis = tuple(
            ApiSummaries(method.id, self.summaries.get(method.id, ()))
            for method in sorted(self.program.public_methods, key=lambda method: method.id)
        )
        limits = {"path_cap": self.path_cap, "clause_limit": self.clause_limit, "loop_unroll": self.loop_unroll}
        return VersionReport(self.program.version_label, self.mode, apis, limits)

    def analyze(self, method: ExirMethod) -> tuple[ExceptionSummary, ...]:
        """Compute the summaries of one method.

        Callees outside the method's call-graph component must already be analysed. Inside a
        recursive component only members analysed earlier are lifted; calls to the others are
        dropped and flag the method ``recursive-approx``.
        """
        self.visits[method.id] += 1
        cfg = build_cfg(method)
        cdg = control_dependence(cfg)
        self.graphs[method.id] = (cfg, cdg)

        call_summaries: dict[int, tuple[ExceptionSummary, ...]] = {}
        recursive = False
        if self.inter:
            for statement in method.body:
                if not statement.is_call:
                    continue
                edge = self.program.call_at(method.id, statement.index)
                if edge is None or edge.callee is None:
                    continue
                if edge.callee in self.summaries:
                    call_summaries[statement.index] = self.summaries[edge.callee]
                else:
                    recursive = True
            if recursive:
                _LOGGER.warning("%s: recursive calls approximated, back-edge exceptions dropped", method.id)

        extra = {FLAG_RECURSIVE} if recursive else set()
        results: list[ExceptionSummary] = []
        for site in locate_throws(method):
            results.append(self._own_summary(method, cfg, cdg, site, call_summaries, extra))
        for index in sorted(call_summaries):
            results.extend(self._lifted_summaries(method, cfg, cdg, index, call_summaries, extra))

        summaries = tuple(sorted(results, key=lambda summary: summary.sort_key))
        self.summaries[method.id] = summaries
        _LOGGER.debug("%s: %s summaries", method.id, len(summaries))
        return summaries

    def _contexts(
        self,
        method: ExirMethod,
        cdg: Cdg,
        site: int,
        paths: PrePathSet,
        call_summaries: dict[int, tuple[ExceptionSummary, ...]],
    ) -> list[_PathContext]:
        raw_clauses = extract_constraints(cdg, site, paths)
        parents = cdg.parents(site)
        ancestors = cdg.ancestors(site)
        contexts: list[_PathContext] = []
        for path, raw in zip(paths.paths, raw_clauses, strict=True):
            environment = PathEnvironment(method, path, self.program)
            refined = refine_constraint(method, path, raw, self.program)
            cons3 = Precondition.true()
            for position, node in enumerate(path.nodes[:-1]):
                for callee_summary in call_summaries.get(node, ()):
                    arguments = environment.arguments(method.body[node], position)
                    negated = negate_precondition(callee_summary.precondition.map_parameters(arguments), self.clause_limit)
                    cons3 = conjoin(cons3, negated, self.clause_limit)
            contexts.append(_PathContext(path, raw, refined.literals, cons3, self._key_clause(environment, raw, parents, ancestors), environment))
        return contexts

    @staticmethod
    def _key_clause(
        environment: PathEnvironment,
        raw: RawClause,
        parents: frozenset[int],
        ancestors: frozenset[int],
    ) -> Clause | None:
        """Refined literal of the innermost condition the site depends on; () when there is none."""
        direct = [literal for literal in raw if literal.stmt in parents]
        candidates = direct or [literal for literal in raw if literal.stmt in ancestors]
        if not candidates:
            return ()
        innermost = max(candidates, key=lambda literal: literal.position)
        refined = _refine_literal(environment, innermost)
        if refined is False:
            return None
        if refined is True:
            return ()
        return (refined,)

    def _own_summary(
        self,
        method: ExirMethod,
        cfg: Cfg,
        cdg: Cdg,
        site: ThrowSite,
        call_summaries: dict[int, tuple[ExceptionSummary, ...]],
        extra: set[str],
    ) -> ExceptionSummary:
        paths = enumerate_prepaths(cfg, site.index, self.path_cap, self.loop_unroll)
        clauses: list[Clause] = []
        keys: list[Clause] = []
        contradictory = 0
        limit_hit = False
        contexts = self._contexts(method, cdg, site.index, paths, call_summaries)
        for context in contexts:
            if context.cons2 is None:
                contradictory += 1
                continue
            precondition = conjoin(Precondition.of([context.cons2]), context.cons3)
            limit_hit = limit_hit or precondition.clause_limit_hit
            if precondition.is_false:
                contradictory += 1
                continue
            clauses.extend(precondition.clauses)
            if context.key is not None:
                keys.append(context.key)
        precondition = Precondition.of(clauses, truncated=paths.truncated, clause_limit_hit=limit_hit)
        if paths.unreachable:
            _LOGGER.debug("%s: throw at %s is unreachable", method.id, site.index)
        raw_conditions = sorted(
            {tuple(sorted(set(context.raw), key=_raw_key)) for context in contexts},
            key=lambda clause: [_raw_key(item) for item in clause],
        )
        return ExceptionSummary(
            api=method.id,
            version=self.program.version_label,
            exception=site.exception,
            message_pattern=reconstruct_message(method, site, self.program),
            precondition=precondition,
            key_precondition=Precondition.of(keys),
            origin=Origin(method.id, site.index),
            condition=tuple(raw_conditions),
            flags=_flags(precondition=precondition, paths=paths, contradictory=contradictory, extra=extra),
        )

    def _lifted_summaries(
        self,
        method: ExirMethod,
        cfg: Cfg,
        cdg: Cdg,
        index: int,
        call_summaries: dict[int, tuple[ExceptionSummary, ...]],
        extra: set[str],
    ) -> list[ExceptionSummary]:
        paths = enumerate_prepaths(cfg, index, self.path_cap, self.loop_unroll)
        contexts = self._contexts(method, cdg, index, paths, call_summaries)
        callee = self.program.call_at(method.id, index)
        assert callee is not None and callee.callee is not None
        lifted: list[ExceptionSummary] = []
        for summary in call_summaries[index]:
            clauses: list[Clause] = []
            keys: list[Clause] = []
            contradictory = 0
            limit_hit = summary.precondition.clause_limit_hit
            truncated = summary.precondition.truncated or paths.truncated
            for context in contexts:
                if context.cons2 is None:
                    contradictory += 1
                    continue
                arguments = context.environment.arguments(method.body[index], len(context.path.nodes) - 1)
                cons1 = summary.precondition.map_parameters(arguments)
                local = conjoin(cons1, Precondition.of([context.cons2]))
                precondition = conjoin(local, context.cons3, self.clause_limit)
                limit_hit = limit_hit or precondition.clause_limit_hit
                if precondition.is_false:
                    contradictory += 1
                    continue
                clauses.extend(precondition.clauses)
                mapped_key = summary.key_precondition.map_parameters(arguments)
                if summary.key_precondition.is_true:
                    if context.key is not None:
                        keys.append(context.key)
                else:
                    keys.extend(mapped_key.clauses)
            precondition = Precondition.of(clauses, truncated=truncated, clause_limit_hit=limit_hit)
            if precondition.is_false:
                _LOGGER.debug(
                    "%s: dropping infeasible %s from %s at statement %s",
                    method.id,
                    summary.exception,
                    callee.callee,
                    index,
                )
                continue
            chain = (method.id, *summary.call_chain) if summary.call_chain else (method.id, callee.callee)
            inherited = {flag for flag in summary.flags if flag in _INHERITED_FLAGS} | extra
            lifted.append(
                ExceptionSummary(
                    api=method.id,
                    version=self.program.version_label,
                    exception=summary.exception,
                    message_pattern=summary.message_pattern,
                    precondition=precondition,
                    key_precondition=Precondition.of(keys),
                    origin=summary.origin,
                    condition=summary.condition,
                    call_chain=chain,
                    flags=_flags(precondition=precondition, paths=paths, contradictory=contradictory, extra=inherited),
                ),
            )
        return lifted

    def dot_files(self) -> dict[str, str]:
        """DOT text of every analysed CFG and CDG keyed by file name."""
        files: dict[str, str] = {}
        for method_id, (cfg, cdg) in sorted(self.graphs.items()):
            stem = re.sub(r"[^\w.-]+", "_", str(method_id)).strip("_")
            files[f"{stem}.cfg.dot"] = cfg_to_dot(cfg)
            files[f"{stem}.cdg.dot"] = cdg_to_dot(cdg)
        return files


def propagate_interprocedural(
    program: ExirProgram,
    order: CallGraph | None = None,
    *,
    path_cap: int = DEFAULT_PATH_CAP,
    clause_limit: int = DEFAULT_CLAUSE_LIMIT,
    loop_unroll: int = DEFAULT_LOOP_UNROLL,
) -> dict[MethodId, tuple[ExceptionSummary, ...]]:
    """Summaries of every method (private ones included), lifted callee-first."""
    extractor = SummaryExtractor(
        program,
        MODE_INTER,
        path_cap=path_cap,
        clause_limit=clause_limit,
        loop_unroll=loop_unroll,
        call_graph=order,
    )
    extractor.run()
    return dict(extractor.summaries)


def extract_summaries(
    program: ExirProgram,
    mode: str = DEFAULT_MODE,
    *,
    path_cap: int = DEFAULT_PATH_CAP,
    clause_limit: int = DEFAULT_CLAUSE_LIMIT,
    loop_unroll: int = DEFAULT_LOOP_UNROLL,
) -> VersionReport:
    """Summary report of the public APIs of ``program``.

    :param program: Parsed program.
    :param mode: ``inter`` lifts callee exceptions into callers, ``intra`` does not.
    """
    extractor = SummaryExtractor(program, mode, path_cap=path_cap, clause_limit=clause_limit, loop_unroll=loop_unroll)
    return extractor.run()


# --- text rendering ----------------------------------------------------------------


def format_summary(summary: ExceptionSummary) -> str:
    text = f"{summary.exception} | {summary.message_pattern} | {summary.precondition}"
    if summary.flags:
        text += f" [{', '.join(summary.flags)}]"
    return text


def render_summary_report(report: VersionReport) -> str:
    """One line per summary, grouped under the API signature."""
    lines = [f"# {report.version} ({report.mode})"]
    for api in report.apis:
        lines.append(str(api.id))
        lines.extend(f"  {format_summary(summary)}" for summary in api.summaries)
    return "\n".join(lines) + "\n"
