"""LTL abstract syntax, text parser/printer and normal-form rewriting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

ATOMS = "abcdefghijklmnopqrstuvwxyz"

# unary temporal/boolean prefixes and binary temporal operators, as written
UNARY_SYMBOLS = ("!", "G", "F", "X")
TEMPORAL_SYMBOLS = ("U", "R", "W", "M")


class Formula:
    """Base class of all LTL formulas.  Instances are immutable."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return print_ltl(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str

    def __post_init__(self) -> None:
        if len(self.name) != 1 or self.name not in ATOMS:
            raise ValueError(f"atom name must be one of a..z, got {self.name!r}")


@dataclass(frozen=True, slots=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True, slots=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True, slots=True)
class _Unary(Formula):
    child: Formula

    def children(self) -> tuple[Formula, ...]:
        return (self.child,)


@dataclass(frozen=True, slots=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


class Not(_Unary):
    __slots__ = ()
    symbol = "!"


class Next(_Unary):
    __slots__ = ()
    symbol = "X"


class Globally(_Unary):
    __slots__ = ()
    symbol = "G"


class Finally(_Unary):
    __slots__ = ()
    symbol = "F"


class And(_Binary):
    __slots__ = ()
    symbol = "&"


class Or(_Binary):
    __slots__ = ()
    symbol = "|"


class Until(_Binary):
    __slots__ = ()
    symbol = "U"


class Release(_Binary):
    __slots__ = ()
    symbol = "R"


class WeakUntil(_Binary):
    __slots__ = ()
    symbol = "W"


class StrongRelease(_Binary):
    __slots__ = ()
    symbol = "M"


TRUE = TrueF()
FALSE = FalseF()

UNARY_BY_SYMBOL: dict[str, type[_Unary]] = {c.symbol: c for c in (Not, Next, Globally, Finally)}
BINARY_BY_SYMBOL: dict[str, type[_Binary]] = {
    c.symbol: c for c in (And, Or, Until, Release, WeakUntil, StrongRelease)
}
CORE_KINDS = (Atom, TrueF, FalseF, Not, And, Or, Next, Until, Release)


class LtlSyntaxError(ValueError):
    """Raised on malformed formula text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN_CHARS = set(ATOMS) | set("!GFXURWM&|()10N")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    raw = text.encode("utf-8")
    i = 0
    while i < len(raw):
        ch = chr(raw[i]) if raw[i] < 128 else None
        if ch is not None and ch.isspace():
            i += 1
            continue
        if ch == "-" and raw[i + 1 : i + 2] == b">":
            tokens.append(("->", i))
            i += 2
            continue
        if ch is None or ch not in _TOKEN_CHARS:
            bad = raw[i:].decode("utf-8", errors="replace")[:1]
            raise LtlSyntaxError(f"unknown token {bad!r}", i)
        tokens.append((ch, i))
        i += 1
    return tokens


class _Parser:
    # precedence climbing over the tiers: -> < | < & < {U,R,W,M} < unary
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.end = len(text.encode("utf-8"))

    def peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def offset(self) -> int:
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else self.end

    def take(self) -> str:
        tok = self.tokens[self.pos][0]
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        if not self.tokens:
            raise LtlSyntaxError("empty input", 0)
        f = self.implication()
        if self.peek() is not None:
            raise LtlSyntaxError(f"unexpected {self.peek()!r}", self.offset())
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Or(Not(left), self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        if self.peek() == "|":
            self.take()
            return Or(left, self.disjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.temporal()
        if self.peek() == "&":
            self.take()
            return And(left, self.conjunction())
        return left

    def temporal(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok in TEMPORAL_SYMBOLS:
            self.take()
            return BINARY_BY_SYMBOL[tok](left, self.temporal())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise LtlSyntaxError("unexpected end of input", self.offset())
        at = self.offset()
        if tok in UNARY_SYMBOLS:
            self.take()
            return UNARY_BY_SYMBOL[tok](self.unary())
        if tok == "(":
            self.take()
            inner = self.implication()
            if self.peek() != ")":
                raise LtlSyntaxError("expected ')'", self.offset())
            self.take()
            return inner
        if tok in ATOMS:
            self.take()
            return Atom(tok)
        if tok == "1":
            self.take()
            return TRUE
        if tok in ("0", "N"):
            self.take()
            return FALSE
        raise LtlSyntaxError(f"unexpected {tok!r}", at)


def parse_ltl(text: str) -> Formula:
    """Parse formula text.

    Unary operators bind tightest, then U/R/W/M, then ``&``, then ``|``;
    every binary operator is right-associative.  ``a -> b`` is accepted and
    rewritten to ``!a | b``.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _level(f: Formula) -> int:
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    if isinstance(f, (Until, Release, WeakUntil, StrongRelease)):
        return 3
    return 4


def print_ltl(f: Formula) -> str:
    """Canonical text with the fewest parentheses that still re-parses to ``f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, TrueF):
        return "1"
    if isinstance(f, FalseF):
        return "0"
    if isinstance(f, _Unary):
        inner = print_ltl(f.child)
        if _level(f.child) < 4:
            inner = f"({inner})"
        return f.symbol + inner
    if isinstance(f, _Binary):
        lvl = _level(f)
        left, right = print_ltl(f.left), print_ltl(f.right)
        # right-associative: a same-tier left operand needs parentheses
        if _level(f.left) <= lvl:
            left = f"({left})"
        if _level(f.right) < lvl:
            right = f"({right})"
        return f"{left} {f.symbol} {right}"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# traversal helpers
# ---------------------------------------------------------------------------

def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order walk over every node of the expression tree."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def tree_size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def atoms_of(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def is_nnf(f: Formula) -> bool:
    return all(
        not isinstance(g, Not) or isinstance(g.child, Atom) for g in subformulas(f)
    )


def is_core(f: Formula) -> bool:
    return is_nnf(f) and all(isinstance(g, CORE_KINDS) for g in subformulas(f))


# ---------------------------------------------------------------------------
# rewriting
# ---------------------------------------------------------------------------

_DUAL: dict[type[Formula], type[Formula]] = {
    And: Or,
    Or: And,
    Until: Release,
    Release: Until,
    WeakUntil: StrongRelease,
    StrongRelease: WeakUntil,
    Globally: Finally,
    Finally: Globally,
    Next: Next,
}


def to_nnf(f: Formula) -> Formula:
    """Push negations down to the atoms using the operator dualities."""
    return _nnf(f, negated=False)


def _nnf(f: Formula, negated: bool) -> Formula:
    if isinstance(f, Atom):
        return Not(f) if negated else f
    if isinstance(f, TrueF):
        return FALSE if negated else TRUE
    if isinstance(f, FalseF):
        return TRUE if negated else FALSE
    if isinstance(f, Not):
        return _nnf(f.child, not negated)
    cls = _DUAL[type(f)] if negated else type(f)
    return cls(*(_nnf(c, negated) for c in f.children()))


def negate(f: Formula) -> Formula:
    return to_nnf(Not(f))


def to_core(f: Formula) -> Formula:
    """Rewrite an NNF formula onto {literals, constants, &, |, X, U, R}."""
    if isinstance(f, (Atom, TrueF, FalseF, Not)):
        return f
    if isinstance(f, Finally):
        return Until(TRUE, to_core(f.child))
    if isinstance(f, Globally):
        return Release(FALSE, to_core(f.child))
    if isinstance(f, WeakUntil):
        a, b = to_core(f.left), to_core(f.right)
        return Release(b, Or(a, b))
    if isinstance(f, StrongRelease):
        a, b = to_core(f.left), to_core(f.right)
        return Until(b, And(a, b))
    return type(f)(*(to_core(c) for c in f.children()))
