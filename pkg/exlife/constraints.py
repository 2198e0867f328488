"""Condition literals and preconditions in disjunction-of-conjunctions form."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from functools import cached_property
from typing import Any

from .const import DEFAULT_CLAUSE_LIMIT
from .expr import BinOp, Const, Expr, UnOp, has_unknown, parse_atom, substitute_params

_LOGGER = logging.getLogger(__name__)

_FLIPPED = {"!=": "==", ">=": "<", "<=": ">"}
_MIRRORED = {"==": "==", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}


@dataclass(frozen=True)
class Literal:
    """One condition with the branch taken: ``atom`` holds when ``polarity`` is True."""

    atom: Expr
    polarity: bool = True

    @cached_property
    def key(self) -> tuple[str, bool]:
        return (str(self.atom), self.polarity)

    @cached_property
    def opaque(self) -> bool:
        return has_unknown(self.atom)

    def negated(self) -> Literal:
        return Literal(self.atom, not self.polarity)

    def __str__(self) -> str:
        return str(self.atom) if self.polarity else f"!({self.atom})"

    def to_json(self) -> dict[str, Any]:
        return {"atom": str(self.atom), "polarity": self.polarity}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Literal:
        polarity = data["polarity"]
        if not isinstance(polarity, bool):
            raise TypeError("polarity must be a boolean")
        return cls(parse_atom(data["atom"]), polarity)


def _is_const(expr: Expr) -> bool:
    return isinstance(expr, Const)


def _fold(op: str, left: Const, right: Const) -> bool | None:
    if op == "==":
        return left == right
    if left.kind == "int" and right.kind == "int":
        a, b = left.value, right.value
        return {"<": a < b, ">": a > b}.get(op)  # type: ignore[operator]
    return None


def normalize_literal(atom: Expr, polarity: bool = True) -> Literal | bool:
    """Bring a literal into canonical form.

    Returns a bool when the literal is decided by constants alone: True when it
    always holds, False when it never does.
    """
    while True:
        if isinstance(atom, UnOp) and atom.op == "!":
            atom, polarity = atom.operand, not polarity
            continue
        if isinstance(atom, Const):
            if atom.kind == "bool":
                return atom.value == polarity
            return Literal(atom, polarity)
        if not isinstance(atom, BinOp):
            return Literal(atom, polarity)
        op, left, right = atom.op, atom.left, atom.right
        if op in ("==", "!=") and isinstance(right, Const) and right.kind == "bool" and not _is_const(left):
            truth = right.value if op == "==" else not right.value
            atom, polarity = left, polarity if truth else not polarity
            continue
        if op in _FLIPPED:
            atom, polarity = BinOp(_FLIPPED[op], left, right), not polarity
            continue
        if op in _MIRRORED and _is_const(left) and not _is_const(right):
            atom = BinOp(_MIRRORED[op], right, left)
            continue
        if isinstance(left, Const) and isinstance(right, Const):
            folded = _fold(op, left, right)
            if folded is not None:
                return folded == polarity
        return Literal(atom, polarity)


Clause = tuple[Literal, ...]


def canonical_clause(literals: Iterable[Literal]) -> Clause | None:
    """Sort and deduplicate a conjunction; None when it holds a literal and its negation.

    Literals over ``unknown`` denote unrelated values: they never cancel or merge.
    """
    by_key: dict[tuple[str, bool], Literal] = {}
    opaque: list[Literal] = []
    for literal in literals:
        if literal.opaque:
            opaque.append(literal)
            continue
        if (literal.key[0], not literal.polarity) in by_key:
            return None
        by_key[literal.key] = literal
    return tuple(sorted([*by_key.values(), *opaque], key=lambda literal: literal.key))


def _clause_key(clause: Clause) -> tuple[tuple[str, bool], ...]:
    return tuple(literal.key for literal in clause)


def format_clause(clause: Clause) -> str:
    return " && ".join(str(literal) for literal in clause) if clause else "TRUE"


@dataclass(frozen=True)
class Precondition:
    """Disjunction of conjunctions over parameter-rooted literals.

    TRUE is the single empty clause, FALSE has no clauses. Build instances with
    :meth:`of` so the clauses stay canonical.
    """

    clauses: tuple[Clause, ...]
    truncated: bool = False
    clause_limit_hit: bool = False

    @classmethod
    def of(
        cls,
        clauses: Iterable[Iterable[Literal]],
        *,
        truncated: bool = False,
        clause_limit_hit: bool = False,
    ) -> Precondition:
        canonical: dict[tuple[tuple[str, bool], ...], Clause] = {}
        for literals in clauses:
            clause = canonical_clause(literals)
            if clause is None:
                continue
            if not clause:
                return cls(((),), truncated, clause_limit_hit)
            canonical.setdefault(_clause_key(clause), clause)
        return cls(tuple(canonical[key] for key in sorted(canonical)), truncated, clause_limit_hit)

    @classmethod
    def true(cls) -> Precondition:
        return cls(((),))

    @classmethod
    def false(cls) -> Precondition:
        return cls(())

    @property
    def is_true(self) -> bool:
        return self.clauses == ((),)

    @property
    def is_false(self) -> bool:
        return not self.clauses

    @property
    def atoms(self) -> frozenset[str]:
        return frozenset(literal.key[0] for clause in self.clauses for literal in clause)

    def canonical_key(self) -> tuple[tuple[tuple[str, bool], ...], ...]:
        """Comparison key; ignores the precision flags."""
        return tuple(_clause_key(clause) for clause in self.clauses)

    def with_flags(self, *, truncated: bool = False, clause_limit_hit: bool = False) -> Precondition:
        return Precondition(self.clauses, self.truncated or truncated, self.clause_limit_hit or clause_limit_hit)

    def __str__(self) -> str:
        if self.is_false:
            return "FALSE"
        if len(self.clauses) == 1:
            return format_clause(self.clauses[0])
        return " || ".join(f"({format_clause(clause)})" for clause in self.clauses)

    def to_json(self) -> dict[str, Any]:
        return {
            "clauses": [[literal.to_json() for literal in clause] for clause in self.clauses],
            "truncated": self.truncated,
            "clause_limit_hit": self.clause_limit_hit,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Precondition:
        clauses = [[Literal.from_json(item) for item in clause] for clause in data["clauses"]]
        return cls.of(clauses, truncated=bool(data["truncated"]), clause_limit_hit=bool(data["clause_limit_hit"]))

    def map_parameters(self, arguments: tuple[Expr, ...]) -> Precondition:
        """Rewrite ``parameterK`` atoms through call arguments, re-normalizing every literal."""
        return self._rewrite(lambda atom: substitute_params(atom, arguments))

    def normalized(self) -> Precondition:
        """Re-apply the literal canonical form, e.g. to preconditions read from JSON."""
        return self._rewrite(lambda atom: atom)

    def _rewrite(self, rewrite: Callable[[Expr], Expr]) -> Precondition:
        clauses: list[list[Literal]] = []
        for clause in self.clauses:
            mapped: list[Literal] = []
            feasible = True
            for literal in clause:
                result = normalize_literal(rewrite(literal.atom), literal.polarity)
                if result is False:
                    feasible = False
                    break
                if isinstance(result, Literal):
                    mapped.append(result)
            if feasible:
                clauses.append(mapped)
        return Precondition.of(clauses, truncated=self.truncated, clause_limit_hit=self.clause_limit_hit)


def conjoin(left: Precondition, right: Precondition, clause_limit: int | None = None) -> Precondition:
    """Conjunction of two preconditions, pairing clauses and dropping contradictions.

    With ``clause_limit`` set, a product larger than the limit yields ``left``
    unchanged with ``clause_limit_hit`` set, which over-approximates toward TRUE.
    """
    truncated = left.truncated or right.truncated
    limit_hit = left.clause_limit_hit or right.clause_limit_hit
    products = [(*a, *b) for a in left.clauses for b in right.clauses]
    result = Precondition.of(products, truncated=truncated, clause_limit_hit=limit_hit)
    if clause_limit is not None and len(result.clauses) > clause_limit:
        _LOGGER.warning("Conjunction exceeds %s clauses, dropping one side", clause_limit)
        return left.with_flags(truncated=truncated, clause_limit_hit=True)
    return result


def negate_precondition(precondition: Precondition, clause_limit: int = DEFAULT_CLAUSE_LIMIT) -> Precondition:
    """Negate a precondition with De Morgan expansion.

    Contradictory partial products are pruned as they are built. When the
    expansion grows beyond ``clause_limit`` clauses the result is TRUE with
    ``clause_limit_hit`` set.

    :param precondition: Canonical precondition.
    :param clause_limit: Largest number of clauses kept.
    """
    flags = {"truncated": precondition.truncated}
    if precondition.is_false:
        return Precondition.true().with_flags(**flags)
    result = Precondition.true()
    for clause in precondition.clauses:
        negated = Precondition.of([[literal.negated()] for literal in clause])
        result = Precondition.of(
            [(*a, *b) for a in result.clauses for b in negated.clauses],
        )
        if len(result.clauses) > clause_limit:
            _LOGGER.warning("Negation of a %s-clause precondition exceeds %s clauses", len(precondition.clauses), clause_limit)
            return Precondition.true().with_flags(clause_limit_hit=True, **flags)
        if result.is_false:
            break
    return result.with_flags(**flags)


def evaluate(precondition: Precondition, assignment: dict[str, bool]) -> bool:
    """Truth value under an assignment of atom texts."""
    return any(all(assignment[literal.key[0]] == literal.polarity for literal in clause) for clause in precondition.clauses)
