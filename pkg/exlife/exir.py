"""EXIR: the three-address intermediate representation analysed by exlife.

Grammar (one construct per line, ``#`` starts a comment)::

    static [mutable] Owner::name [= const]
    [public|private] method Owner::name(Type, ...) {
        [Label:] statement
    }

Statements::

    v := param K                    param-bind
    v := operand                    assign-const (a constant, or a copy of a variable)
    v := a OP b                     assign-binop   OP in + - * / % == != < <= > >= && ||
    v := !a | v := -a               assign-unop
    v := field Owner::name          assign-fieldget (static field)
    v := field r.name               assign-fieldget (instance field)
    v := a ++ b ++ ...              assign-strcat
    v := call Owner::m(args)        assign-call (direct call)
    v := call r.m(args)             assign-call (receiver call, always external)
    call ...                        call-void
    if a REL b goto L | if a goto L if-goto
    goto L
    throw Type [a ++ b ++ ...]      throw with a message expression
    return [a]

Direct calls resolve against the program by owner, name and arity; calls that
match nothing are external.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

from .exceptions import (
    AmbiguousCallError,
    DuplicateMethodError,
    ExirError,
    ExirSyntaxError,
    UnresolvedLabelError,
)
from .expr import BINARY_PRECEDENCE, RELATIONAL_OPS, UNARY_OPS, Const, Operand, TokenStream, Var, tokenize

_LOGGER = logging.getLogger(__name__)

_QNAME = r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*::[A-Za-z_$<][\w$<>]*"
_TYPE_RE = re.compile(r"[A-Za-z_$][\w$.]*(?:\[\])*(?:\.\.\.)?\Z")
_HEADER_RE = re.compile(rf"(?:(public|private)\s+)?method\s+({_QNAME})\s*\((.*)\)\s*\{{\s*\Z")
_STATIC_RE = re.compile(rf"static\s+(mutable\s+)?({_QNAME})(?:\s*=\s*(.+))?\Z")
_RESERVED_VARIABLE_RE = re.compile(r"(?:parameter\d+|unknown|concat|param|field|call|if|goto|throw|return)\Z")


class StatementKind(StrEnum):
    PARAM_BIND = "param-bind"
    ASSIGN_CONST = "assign-const"
    ASSIGN_BINOP = "assign-binop"
    ASSIGN_UNOP = "assign-unop"
    ASSIGN_FIELDGET = "assign-fieldget"
    ASSIGN_STRCAT = "assign-strcat"
    ASSIGN_CALL = "assign-call"
    IF_GOTO = "if-goto"
    GOTO = "goto"
    THROW = "throw"
    RETURN = "return"
    CALL_VOID = "call-void"


CALL_KINDS = frozenset({StatementKind.ASSIGN_CALL, StatementKind.CALL_VOID})


@dataclass(frozen=True, order=True, slots=True)
class MethodId:
    """Method signature: declaring class, method name and parameter types."""

    owner: str
    name: str
    params: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.owner}::{self.name}({','.join(self.params)})"

    @property
    def arity(self) -> int:
        return len(self.params)

    def to_json(self) -> dict[str, Any]:
        return {"class": self.owner, "name": self.name, "params": list(self.params)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> MethodId:
        return cls(data["class"], data["name"], tuple(data["params"]))

    @classmethod
    def parse(cls, text: str) -> MethodId:
        """Parse ``Owner::name(T1,T2)``."""
        owner, rest = text.split("::", 1)
        name, params = rest.split("(", 1)
        params = params.rstrip(")")
        return cls(owner, name, tuple(p for p in params.split(",") if p))


@dataclass(frozen=True, slots=True)
class Statement:
    """One EXIR statement; ``index`` is its 0-based position in the method body."""

    index: int
    kind: StatementKind
    line: int = field(default=0, compare=False)
    labels: tuple[str, ...] = ()
    target: str | None = None
    operands: tuple[Operand, ...] = ()
    op: str | None = None
    owner: str | None = None
    member: str | None = None
    receiver: Operand | None = None
    jump: str | None = None
    exception: str | None = None
    param: int | None = None

    @property
    def is_branch(self) -> bool:
        return self.kind is StatementKind.IF_GOTO

    @property
    def is_call(self) -> bool:
        return self.kind in CALL_KINDS

    @property
    def is_terminal(self) -> bool:
        return self.kind in (StatementKind.THROW, StatementKind.RETURN)

    @property
    def call_text(self) -> str:
        """Callee as written, ``Owner::m`` or ``r.m``."""
        if self.owner is not None:
            return f"{self.owner}::{self.member}"
        return f"{self.receiver}.{self.member}"


@dataclass(frozen=True, slots=True)
class StaticField:
    owner: str
    name: str
    mutable: bool = False
    value: Const | None = None

    @property
    def key(self) -> str:
        return f"{self.owner}::{self.name}"


@dataclass(frozen=True)
class ExirMethod:
    id: MethodId
    body: tuple[Statement, ...]
    public: bool = True
    line: int = field(default=0, compare=False)
    labels: dict[str, int] = field(default_factory=dict)

    @property
    def params(self) -> tuple[tuple[int, str], ...]:
        """Parameter declarations as (index, type)."""
        return tuple(enumerate(self.id.params))

    def target_of(self, label: str) -> int:
        return self.labels[label]

    def __hash__(self) -> int:
        return hash(self.id)


@dataclass(frozen=True, slots=True)
class CallEdge:
    """Direct call from ``caller`` at statement ``index``; ``callee`` is None when external."""

    caller: MethodId
    index: int
    callee: MethodId | None
    target: str

    @property
    def external(self) -> bool:
        return self.callee is None


@dataclass(frozen=True)
class ExirProgram:
    version_label: str
    methods: tuple[ExirMethod, ...] = ()
    statics: tuple[StaticField, ...] = ()
    call_edges: tuple[CallEdge, ...] = ()
    _by_id: dict[MethodId, ExirMethod] = field(init=False, repr=False, compare=False)
    _edges_by_site: dict[tuple[MethodId, int], CallEdge] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_id", {method.id: method for method in self.methods})
        object.__setattr__(
            self,
            "_edges_by_site",
            {(edge.caller, edge.index): edge for edge in self.call_edges},
        )

    def method(self, method_id: MethodId) -> ExirMethod | None:
        return self._by_id.get(method_id)

    def call_at(self, caller: MethodId, index: int) -> CallEdge | None:
        return self._edges_by_site.get((caller, index))

    def static(self, key: str) -> StaticField | None:
        for static in self.statics:
            if static.key == key:
                return static
        return None

    @property
    def public_methods(self) -> tuple[ExirMethod, ...]:
        return tuple(method for method in self.methods if method.public)


# --- parser ------------------------------------------------------------------------


def _strip_comment(line: str) -> str:
    in_string = False
    escaped = False
    for pos, char in enumerate(line):
        if escaped:
            escaped = False
        elif char == "\\" and in_string:
            escaped = True
        elif char == '"':
            in_string = not in_string
        elif char == "#" and not in_string:
            return line[:pos]
    return line


@dataclass
class _MethodBuilder:
    id: MethodId
    public: bool
    line: int
    statements: list[Statement] = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)
    pending: list[tuple[str, int, int]] = field(default_factory=list)


class _Parser:
    """Line-oriented EXIR parser; one instance per source text."""

    def __init__(self, text: str, version_label: str, source: str) -> None:
        self._text = text
        self._version = version_label
        self._source = source
        self._methods: list[ExirMethod] = []
        self._statics: list[StaticField] = []
        self._current: _MethodBuilder | None = None
        self._method_lines: dict[MethodId, int] = {}

    def parse(self) -> ExirProgram:
        line_no = 0
        for line_no, raw in enumerate(self._text.splitlines(), start=1):
            line = _strip_comment(raw).strip()
            if not line:
                continue
            if self._current is None:
                self._parse_toplevel(line, line_no)
            elif line == "}":
                self._finish_method(line_no)
            else:
                self._parse_body_line(raw, line_no)
        if self._current is not None:
            raise ExirSyntaxError(f"method {self._current.id} is not closed", line_no + 1, 1, self._source)
        methods = tuple(self._methods)
        edges = self._resolve_calls(methods)
        return ExirProgram(self._version, methods, tuple(self._statics), edges)

    def _error(self, cls: type[ExirError], message: str, line: int, column: int = 1) -> ExirError:
        return cls(message, line, column, self._source)

    def _parse_toplevel(self, line: str, line_no: int) -> None:
        if match := _HEADER_RE.match(line):
            visibility, qname, param_text = match.groups()
            owner, name = qname.split("::", 1)
            params = tuple(p.strip() for p in param_text.split(",")) if param_text.strip() else ()
            for param_type in params:
                if not _TYPE_RE.match(param_type):
                    raise self._error(ExirSyntaxError, f"bad parameter type {param_type!r}", line_no)
            method_id = MethodId(owner, name, params)
            if method_id in self._method_lines:
                raise DuplicateMethodError(
                    f"method {method_id} already declared on line {self._method_lines[method_id]}",
                    line_no,
                    1,
                    self._source,
                )
            self._method_lines[method_id] = line_no
            self._current = _MethodBuilder(method_id, visibility != "private", line_no)
            return
        if match := _STATIC_RE.match(line):
            mutable, qname, value_text = match.groups()
            owner, name = qname.split("::", 1)
            value = None
            if value_text is not None:
                stream = TokenStream(tokenize(value_text, line_no, self._source), line_no, self._source)
                operand = _parse_operand(stream)
                stream.expect_end()
                if not isinstance(operand, Const):
                    raise self._error(ExirSyntaxError, "static initializer must be a constant", line_no)
                value = operand
            self._statics.append(StaticField(owner, name, mutable is not None, value))
            return
        raise self._error(ExirSyntaxError, f"expected a method or static declaration, got {line!r}", line_no)

    def _parse_body_line(self, raw: str, line_no: int) -> None:
        builder = self._current
        assert builder is not None
        text = _strip_comment(raw)
        stream = TokenStream(tokenize(text, line_no, self._source), line_no, self._source, len(text))
        while stream.peek(1) is not None and stream.peek_text(1) == ":" and stream.peek().kind == "ident":  # type: ignore[union-attr]
            token = stream.next()
            stream.next()
            builder.pending.append((token.text, line_no, token.column))
        if stream.at_end:
            return
        index = len(builder.statements)
        labels = tuple(label for label, _, _ in builder.pending)
        for label, label_line, column in builder.pending:
            if label in builder.labels:
                raise UnresolvedLabelError(f"label {label!r} declared twice", label_line, column, self._source)
            builder.labels[label] = index
        builder.pending.clear()
        statement = _parse_statement(stream, index, line_no, labels)
        if statement.kind is StatementKind.PARAM_BIND and statement.param is not None:
            if statement.param >= builder.id.arity:
                raise self._error(
                    ExirSyntaxError,
                    f"parameter {statement.param} out of range for {builder.id}",
                    line_no,
                )
        builder.statements.append(statement)

    def _finish_method(self, line_no: int) -> None:
        builder = self._current
        assert builder is not None
        if builder.pending:
            label, label_line, column = builder.pending[0]
            raise UnresolvedLabelError(f"label {label!r} is not followed by a statement", label_line, column, self._source)
        for statement in builder.statements:
            if statement.jump is not None and statement.jump not in builder.labels:
                raise UnresolvedLabelError(f"unknown label {statement.jump!r}", statement.line, 1, self._source)
        self._methods.append(
            ExirMethod(builder.id, tuple(builder.statements), builder.public, builder.line, dict(builder.labels)),
        )
        _LOGGER.debug("Parsed %s with %s statements (line %s-%s)", builder.id, len(builder.statements), builder.line, line_no)
        self._current = None

    def _resolve_calls(self, methods: tuple[ExirMethod, ...]) -> tuple[CallEdge, ...]:
        overloads: dict[tuple[str, str, int], list[MethodId]] = {}
        for method in methods:
            overloads.setdefault((method.id.owner, method.id.name, method.id.arity), []).append(method.id)
        edges: list[CallEdge] = []
        for method in methods:
            for statement in method.body:
                if not statement.is_call:
                    continue
                callee = None
                if statement.owner is not None:
                    candidates = overloads.get((statement.owner, statement.member or "", len(statement.operands)), [])
                    if len(candidates) > 1:
                        raise AmbiguousCallError(
                            f"call {statement.call_text} matches {len(candidates)} overloads",
                            statement.line,
                            1,
                            self._source,
                        )
                    callee = candidates[0] if candidates else None
                edges.append(CallEdge(method.id, statement.index, callee, statement.call_text))
        return tuple(edges)


def _parse_operand(stream: TokenStream) -> Operand:
    token = stream.peek()
    if token is None:
        raise stream.error("expected an operand")
    if token.text == "-" and stream.peek(1) is not None and stream.peek(1).kind == "int":  # type: ignore[union-attr]
        stream.next()
        return Const(-int(stream.next().text))
    stream.next()
    if token.kind == "int":
        return Const(int(token.text))
    if token.kind == "string":
        return Const(stream.string_value(token))
    if token.kind == "ident":
        if token.text == "true":
            return Const(True)
        if token.text == "false":
            return Const(False)
        if token.text == "null":
            return Const(None)
        if _RESERVED_VARIABLE_RE.match(token.text):
            raise ExirSyntaxError(f"{token.text!r} is reserved", stream.line, token.column, stream.source)
        return Var(token.text)
    raise ExirSyntaxError(f"expected an operand, got {token.text!r}", stream.line, token.column, stream.source)


def _parse_variable(stream: TokenStream) -> str:
    operand = _parse_operand(stream)
    if not isinstance(operand, Var):
        raise stream.error("expected a variable")
    return operand.name


def _parse_type_name(stream: TokenStream) -> str:
    parts = [stream.expect_kind("ident", "an exception type").text]
    while stream.peek_text() == "." and stream.peek(1) is not None and stream.peek(1).kind == "ident":  # type: ignore[union-attr]
        stream.next()
        parts.append(stream.next().text)
    return ".".join(parts)


def _parse_arguments(stream: TokenStream) -> tuple[Operand, ...]:
    stream.expect("(")
    arguments: list[Operand] = []
    if not stream.accept(")"):
        while True:
            arguments.append(_parse_operand(stream))
            if stream.accept(")"):
                break
            stream.expect(",")
    return tuple(arguments)


def _parse_concat(stream: TokenStream) -> tuple[Operand, ...]:
    parts = [_parse_operand(stream)]
    while stream.accept("++"):
        parts.append(_parse_operand(stream))
    return tuple(parts)


def _parse_call(stream: TokenStream) -> dict[str, Any]:
    token = stream.peek()
    if token is not None and token.kind == "qname":
        stream.next()
        owner, member = token.text.split("::", 1)
        return {"owner": owner, "member": member, "operands": _parse_arguments(stream)}
    receiver = _parse_operand(stream)
    stream.expect(".")
    member = stream.expect_kind("ident", "a method name").text
    return {"receiver": receiver, "member": member, "operands": _parse_arguments(stream)}


def _parse_statement(stream: TokenStream, index: int, line: int, labels: tuple[str, ...]) -> Statement:
    head = stream.peek()
    assert head is not None
    common: dict[str, Any] = {"index": index, "line": line, "labels": labels}
    if head.kind == "ident" and head.text == "goto":
        stream.next()
        statement = Statement(kind=StatementKind.GOTO, jump=stream.expect_kind("ident", "a label").text, **common)
    elif head.kind == "ident" and head.text == "if":
        stream.next()
        left = _parse_operand(stream)
        op = None
        operands: tuple[Operand, ...] = (left,)
        if stream.peek_text() in RELATIONAL_OPS:
            op = stream.next().text
            operands = (left, _parse_operand(stream))
        stream.expect("goto")
        jump = stream.expect_kind("ident", "a label").text
        statement = Statement(kind=StatementKind.IF_GOTO, operands=operands, op=op, jump=jump, **common)
    elif head.kind == "ident" and head.text == "throw":
        stream.next()
        exception = _parse_type_name(stream)
        message = () if stream.at_end else _parse_concat(stream)
        statement = Statement(kind=StatementKind.THROW, exception=exception, operands=message, **common)
    elif head.kind == "ident" and head.text == "return":
        stream.next()
        value = () if stream.at_end else (_parse_operand(stream),)
        statement = Statement(kind=StatementKind.RETURN, operands=value, **common)
    elif head.kind == "ident" and head.text == "call":
        stream.next()
        statement = Statement(kind=StatementKind.CALL_VOID, **_parse_call(stream), **common)
    else:
        target = _parse_variable(stream)
        stream.expect(":=")
        statement = _parse_assignment(stream, target, common)
    stream.expect_end()
    return statement


def _parse_assignment(stream: TokenStream, target: str, common: dict[str, Any]) -> Statement:
    head = stream.peek()
    if head is None:
        raise stream.error("expected an expression")
    if head.kind == "ident" and head.text == "param":
        stream.next()
        index = int(stream.expect_kind("int", "a parameter index").text)
        return Statement(kind=StatementKind.PARAM_BIND, target=target, param=index, **common)
    if head.kind == "ident" and head.text == "call":
        stream.next()
        return Statement(kind=StatementKind.ASSIGN_CALL, target=target, **_parse_call(stream), **common)
    if head.kind == "ident" and head.text == "field":
        stream.next()
        token = stream.peek()
        if token is not None and token.kind == "qname":
            stream.next()
            owner, member = token.text.split("::", 1)
            return Statement(kind=StatementKind.ASSIGN_FIELDGET, target=target, owner=owner, member=member, **common)
        receiver = _parse_operand(stream)
        stream.expect(".")
        member = stream.expect_kind("ident", "a field name").text
        return Statement(kind=StatementKind.ASSIGN_FIELDGET, target=target, receiver=receiver, member=member, **common)
    following = stream.peek(1)
    negative_literal = head.text == "-" and following is not None and following.kind == "int"
    if head.text in UNARY_OPS and not negative_literal:
        stream.next()
        operand = _parse_operand(stream)
        return Statement(kind=StatementKind.ASSIGN_UNOP, target=target, op=head.text, operands=(operand,), **common)
    left = _parse_operand(stream)
    if stream.at_end:
        return Statement(kind=StatementKind.ASSIGN_CONST, target=target, operands=(left,), **common)
    if stream.peek_text() == "++":
        stream.next()
        parts = (left, *_parse_concat(stream))
        return Statement(kind=StatementKind.ASSIGN_STRCAT, target=target, operands=parts, **common)
    op = stream.next().text
    if op not in BINARY_PRECEDENCE:
        raise stream.error(f"unknown operator {op!r}")
    right = _parse_operand(stream)
    return Statement(kind=StatementKind.ASSIGN_BINOP, target=target, op=op, operands=(left, right), **common)


def parse_program(text: str, version_label: str, source: str = "<string>") -> ExirProgram:
    """Parse and validate one version's EXIR text.

    :param text: EXIR source.
    :param version_label: Release label recorded in every summary.
    :param source: File name used in diagnostics.
    """
    program = _Parser(text, version_label, source).parse()
    _LOGGER.debug(
        "Parsed version %s: %s methods, %s call edges",
        version_label,
        len(program.methods),
        len(program.call_edges),
    )
    return program


def read_program(path: Path, version_label: str | None = None) -> ExirProgram:
    """Parse an EXIR file; the version label defaults to the file stem."""
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        line = data.count(b"\n", 0, err.start) + 1
        column = err.start - data.rfind(b"\n", 0, err.start)
        raise ExirSyntaxError("input is not UTF-8 text", line, column, str(path)) from err
    return parse_program(text, version_label or path.stem, str(path))


# --- printer -----------------------------------------------------------------------


def _call_text(statement: Statement) -> str:
    args = ", ".join(str(arg) for arg in statement.operands)
    return f"call {statement.call_text}({args})"


def format_statement(statement: Statement) -> str:
    """Render one statement (without labels) in EXIR syntax."""
    kind = statement.kind
    ops = statement.operands
    match kind:
        case StatementKind.PARAM_BIND:
            return f"{statement.target} := param {statement.param}"
        case StatementKind.ASSIGN_CONST:
            return f"{statement.target} := {ops[0]}"
        case StatementKind.ASSIGN_BINOP:
            return f"{statement.target} := {ops[0]} {statement.op} {ops[1]}"
        case StatementKind.ASSIGN_UNOP:
            return f"{statement.target} := {statement.op}{ops[0]}"
        case StatementKind.ASSIGN_FIELDGET:
            if statement.owner is not None:
                return f"{statement.target} := field {statement.owner}::{statement.member}"
            return f"{statement.target} := field {statement.receiver}.{statement.member}"
        case StatementKind.ASSIGN_STRCAT:
            return f"{statement.target} := " + " ++ ".join(str(op) for op in ops)
        case StatementKind.ASSIGN_CALL:
            return f"{statement.target} := {_call_text(statement)}"
        case StatementKind.CALL_VOID:
            return _call_text(statement)
        case StatementKind.IF_GOTO:
            if statement.op is None:
                return f"if {ops[0]} goto {statement.jump}"
            return f"if {ops[0]} {statement.op} {ops[1]} goto {statement.jump}"
        case StatementKind.GOTO:
            return f"goto {statement.jump}"
        case StatementKind.THROW:
            if not ops:
                return f"throw {statement.exception}"
            return f"throw {statement.exception} " + " ++ ".join(str(op) for op in ops)
        case StatementKind.RETURN:
            return "return" if not ops else f"return {ops[0]}"
    raise ValueError(kind)


def format_program(program: ExirProgram) -> str:
    """Print a program back to EXIR text."""
    lines: list[str] = []
    for static in program.statics:
        text = f"static {'mutable ' if static.mutable else ''}{static.key}"
        if static.value is not None:
            text += f" = {static.value}"
        lines.append(text)
    for method in program.methods:
        if lines:
            lines.append("")
        visibility = "public" if method.public else "private"
        lines.append(f"{visibility} method {method.id.owner}::{method.id.name}({', '.join(method.id.params)}) {{")
        for statement in method.body:
            prefix = "".join(f"{label}: " for label in statement.labels)
            lines.append(f"  {prefix}{format_statement(statement)}")
        lines.append("}")
    return "\n".join(lines) + "\n" if lines else ""
