"""Expression trees for EXIR operands and constraint atoms.

The same small expression language is used for three things: the operands of
EXIR statements, the atoms of refined constraint literals, and the atom strings
stored in JSON reports. ``str()`` renders the canonical text and ``parse_atom``
reads it back.
"""

from __future__ import annotations

import json
import re
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

from .exceptions import ExirSyntaxError

BINARY_PRECEDENCE: dict[str, int] = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
RELATIONAL_OPS = frozenset({"==", "!=", "<", "<=", ">", ">="})
UNARY_OPS = frozenset({"!", "-"})
KEYWORD_CONSTANTS: dict[str, bool | None] = {"true": True, "false": False, "null": None}

_PARAMETER_RE = re.compile(r"parameter(\d+)\Z")


@dataclass(frozen=True, slots=True)
class Param:
    """Method parameter ``parameterK``."""

    index: int

    def __str__(self) -> str:
        return f"parameter{self.index}"


@dataclass(frozen=True, slots=True, eq=False)
class Const:
    """Literal constant: int, string, boolean or null."""

    value: int | str | bool | None
    kind: str = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", type(self.value).__name__)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Const) and (self.kind, self.value) == (other.kind, other.value)

    def __hash__(self) -> int:
        return hash((Const, self.kind, self.value))

    def __str__(self) -> str:
        if self.value is None:
            return "null"
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        if isinstance(self.value, str):
            return json.dumps(self.value, ensure_ascii=False)
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Var:
    """Internal (unrefined) local variable."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Unknown:
    """A value the analysis could not resolve."""

    def __str__(self) -> str:
        return "unknown"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: Expr
    right: Expr

    def __str__(self) -> str:
        prec = BINARY_PRECEDENCE[self.op]
        left = _wrap(self.left, lambda inner: inner < prec)
        right = _wrap(self.right, lambda inner: inner <= prec)
        return f"{left} {self.op} {right}"


@dataclass(frozen=True, slots=True)
class UnOp:
    op: str
    operand: Expr

    def __str__(self) -> str:
        return f"{self.op}{_wrap(self.operand, lambda _: True)}"


@dataclass(frozen=True, slots=True)
class Call:
    """Opaque call; rendered ``recv.name(args)`` or ``Owner::name(args)``."""

    name: str
    args: tuple[Expr, ...] = ()
    receiver: Expr | None = None
    owner: str | None = None

    def __str__(self) -> str:
        args = ", ".join(str(arg) for arg in self.args)
        if self.receiver is not None:
            return f"{_wrap(self.receiver, lambda _: True)}.{self.name}({args})"
        return f"{self.owner}::{self.name}({args})"


@dataclass(frozen=True, slots=True)
class FieldRef:
    """Instance field read ``recv.name``."""

    receiver: Expr
    name: str

    def __str__(self) -> str:
        return f"{_wrap(self.receiver, lambda _: True)}.{self.name}"


@dataclass(frozen=True, slots=True)
class Concat:
    parts: tuple[Expr, ...]

    def __str__(self) -> str:
        return "concat(" + ", ".join(str(part) for part in self.parts) + ")"


Expr = Param | Const | Var | Unknown | BinOp | UnOp | Call | FieldRef | Concat
Operand = Var | Const


def _wrap(expr: Expr, needs_parens: Callable[[int], bool]) -> str:
    if isinstance(expr, BinOp) and needs_parens(BINARY_PRECEDENCE[expr.op]):
        return f"({expr})"
    if isinstance(expr, UnOp) and needs_parens(7):
        return f"({expr})"
    return str(expr)


def children(expr: Expr) -> tuple[Expr, ...]:
    """Return the direct sub-expressions of ``expr``."""
    if isinstance(expr, BinOp):
        return (expr.left, expr.right)
    if isinstance(expr, UnOp):
        return (expr.operand,)
    if isinstance(expr, Call):
        return expr.args if expr.receiver is None else (expr.receiver, *expr.args)
    if isinstance(expr, FieldRef):
        return (expr.receiver,)
    if isinstance(expr, Concat):
        return expr.parts
    return ()


def walk(expr: Expr) -> Iterator[Expr]:
    """Yield ``expr`` and all of its sub-expressions, pre-order."""
    yield expr
    for child in children(expr):
        yield from walk(child)


def transform(expr: Expr, rewrite: Callable[[Expr], Expr | None]) -> Expr:
    """Rebuild ``expr`` bottom-up, replacing nodes for which ``rewrite`` returns a value."""
    if isinstance(expr, BinOp):
        rebuilt: Expr = BinOp(expr.op, transform(expr.left, rewrite), transform(expr.right, rewrite))
    elif isinstance(expr, UnOp):
        rebuilt = UnOp(expr.op, transform(expr.operand, rewrite))
    elif isinstance(expr, Call):
        rebuilt = Call(
            expr.name,
            tuple(transform(arg, rewrite) for arg in expr.args),
            None if expr.receiver is None else transform(expr.receiver, rewrite),
            expr.owner,
        )
    elif isinstance(expr, FieldRef):
        rebuilt = FieldRef(transform(expr.receiver, rewrite), expr.name)
    elif isinstance(expr, Concat):
        rebuilt = Concat(tuple(transform(part, rewrite) for part in expr.parts))
    else:
        rebuilt = expr
    replacement = rewrite(rebuilt)
    return rebuilt if replacement is None else replacement


def substitute_params(expr: Expr, arguments: tuple[Expr, ...]) -> Expr:
    """Rewrite ``parameterK`` into the K-th argument expression of a call site."""

    def _rewrite(node: Expr) -> Expr | None:
        if isinstance(node, Param):
            if node.index < len(arguments):
                return arguments[node.index]
            return Unknown()
        return None

    return transform(expr, _rewrite)


def has_unknown(expr: Expr) -> bool:
    return any(isinstance(node, Unknown) for node in walk(expr))


def has_variables(expr: Expr) -> bool:
    return any(isinstance(node, Var) for node in walk(expr))


def is_parameter_rooted(expr: Expr) -> bool:
    """Return True when every leaf is a parameter, a constant or ``unknown``."""
    return not has_variables(expr)


# --- tokenizer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>\d+)
  | (?P<qname>[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*::[A-Za-z_$<][\w$<>]*)
  | (?P<ident>[A-Za-z_$][\w$]*)
  | (?P<op>:=|\+\+|==|!=|<=|>=|&&|\|\||[-+*/%!<>(),.:{}=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str, line: int = 0, source: str = "<string>") -> list[Token]:
    """Split one line of EXIR (or one atom) into tokens; columns are 1-based."""
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExirSyntaxError(f"unexpected character {text[pos]!r}", line, pos + 1, source)
        kind = match.lastgroup or ""
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos + 1))
        pos = match.end()
    return tokens


class TokenStream:
    """Cursor over the tokens of one line."""

    def __init__(self, tokens: list[Token], line: int = 0, source: str = "<string>", width: int = 0) -> None:
        self._tokens = tokens
        self._pos = 0
        self.line = line
        self.source = source
        self._width = width

    @property
    def at_end(self) -> bool:
        return self._pos >= len(self._tokens)

    def peek(self, offset: int = 0) -> Token | None:
        index = self._pos + offset
        return self._tokens[index] if index < len(self._tokens) else None

    def peek_text(self, offset: int = 0) -> str | None:
        token = self.peek(offset)
        return None if token is None else token.text

    def next(self) -> Token:
        token = self.peek()
        if token is None:
            raise self.error("unexpected end of line")
        self._pos += 1
        return token

    def accept(self, text: str) -> bool:
        if self.peek_text() == text:
            self._pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token is None or token.text != text:
            raise self.error(f"expected {text!r}")
        self._pos += 1
        return token

    def expect_kind(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token is None or token.kind != kind:
            raise self.error(f"expected {what}")
        self._pos += 1
        return token

    def expect_end(self) -> None:
        if not self.at_end:
            raise self.error(f"unexpected {self.peek_text()!r}")

    def string_value(self, token: Token) -> str:
        """Decoded value of a string literal token."""
        try:
            return json.loads(token.text)
        except json.JSONDecodeError as err:
            column = token.column + err.pos
            raise ExirSyntaxError(f"invalid string literal: {err.msg}", self.line, column, self.source) from err

    def error(self, message: str) -> ExirSyntaxError:
        token = self.peek()
        column = token.column if token is not None else self._width + 1
        return ExirSyntaxError(message, self.line, column, self.source)


# --- expression parser -------------------------------------------------------------


def parse_expression(stream: TokenStream, min_precedence: int = 1) -> Expr:
    """Precedence-climbing parser for the atom grammar."""
    left = _parse_unary(stream)
    while True:
        op = stream.peek_text()
        token = stream.peek()
        if token is None or token.kind != "op" or op not in BINARY_PRECEDENCE:
            return left
        precedence = BINARY_PRECEDENCE[op]
        if precedence < min_precedence:
            return left
        stream.next()
        right = parse_expression(stream, precedence + 1)
        left = BinOp(op, left, right)


def _parse_unary(stream: TokenStream) -> Expr:
    if stream.accept("!"):
        return UnOp("!", _parse_unary(stream))
    if stream.accept("-"):
        operand = _parse_unary(stream)
        if isinstance(operand, Const) and operand.kind == "int":
            return Const(-operand.value)  # type: ignore[operator]
        return UnOp("-", operand)
    return _parse_postfix(stream)


def _parse_postfix(stream: TokenStream) -> Expr:
    expr = _parse_primary(stream)
    while stream.peek_text() == "." and stream.peek(1) is not None and stream.peek(1).kind == "ident":  # type: ignore[union-attr]
        stream.next()
        name = stream.next().text
        if stream.peek_text() == "(":
            expr = Call(name, _parse_arguments(stream), receiver=expr)
        else:
            expr = FieldRef(expr, name)
    return expr


def _parse_arguments(stream: TokenStream) -> tuple[Expr, ...]:
    stream.expect("(")
    arguments: list[Expr] = []
    if not stream.accept(")"):
        while True:
            arguments.append(parse_expression(stream))
            if stream.accept(")"):
                break
            stream.expect(",")
    return tuple(arguments)


def _parse_primary(stream: TokenStream) -> Expr:
    token = stream.peek()
    if token is None:
        raise stream.error("expected an expression")
    if token.kind == "int":
        stream.next()
        return Const(int(token.text))
    if token.kind == "string":
        stream.next()
        return Const(stream.string_value(token))
    if token.kind == "qname":
        stream.next()
        owner, name = token.text.split("::", 1)
        return Call(name, _parse_arguments(stream), owner=owner)
    if token.kind == "ident":
        stream.next()
        return _identifier(token.text, stream)
    if token.text == "(":
        stream.next()
        inner = parse_expression(stream)
        stream.expect(")")
        return inner
    raise stream.error(f"unexpected {token.text!r}")


def _identifier(text: str, stream: TokenStream) -> Expr:
    if text in KEYWORD_CONSTANTS:
        return Const(KEYWORD_CONSTANTS[text])
    if text == "unknown":
        return Unknown()
    if text == "concat" and stream.peek_text() == "(":
        return Concat(_parse_arguments(stream))
    if match := _PARAMETER_RE.match(text):
        return Param(int(match.group(1)))
    return Var(text)


def parse_atom(text: str) -> Expr:
    """Parse the canonical text of an atom back into an expression tree."""
    stream = TokenStream(tokenize(text), width=len(text))
    expr = parse_expression(stream)
    stream.expect_end()
    return expr
