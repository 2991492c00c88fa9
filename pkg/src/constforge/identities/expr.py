"""Expression trees, a recursive-descent parser and a round-tripping printer.

Grammar (``^`` binds tightest and is right-associative, then unary minus,
then ``*`` ``/``, then ``+`` ``-``)::

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := "-" factor | primary ("^" factor)?
    primary := number | "pi" | "e" | "i" | ident "(" expr ("," expr)* ")"
             | "(" expr ")"
    number  := digits ("/" digits)? ("." digits)?

A number written ``p/q`` with no spaces is a single rational literal, so
``(3*e)^(1/3)`` raises to an exact third. ``gamma(s, x)`` is the upper
incomplete gamma; the lower one is ``gammainc_lower(s, x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from ..numkern import ConstforgeError


class ParseError(ConstforgeError, ValueError):
    reason = "parse"

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")
        self.message = message


# -- nodes ------------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class RatLit:
    p: int
    q: int


@dataclass(frozen=True)
class Const:
    name: str  # "pi", "e" or "i"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Func:
    kind: str
    args: tuple


Expression = Union[IntLit, RatLit, Const, Var, Neg, BinOp, Func]

CONSTANTS = ("pi", "e", "i")

# surface name -> {arity: node kind}
FUNCTIONS = {
    "sqrt": {1: "Sqrt"},
    "exp": {1: "Exp"},
    "ln": {1: "Ln"},
    "gamma": {1: "Gamma", 2: "GammaUpper"},
    "gammainc_lower": {2: "GammaLower"},
    "erf": {1: "Erf"},
    "erfc": {1: "Erfc"},
    "dblfact_series": {1: "DblFactSeries"},
    "ramanujan_cf": {1: "RamanujanCF"},
    "encode_A": {2: "EncodeA"},
    "closed_A": {2: "ClosedA"},
    "root": {2: "Root"},
}

SURFACE_NAME = {kind: name for name, arities in FUNCTIONS.items() for kind in arities.values()}
ARITY = {kind: arity for arities in FUNCTIONS.values() for arity, kind in arities.items()}


def func(kind: str, *args) -> Func:
    if ARITY.get(kind) != len(args):
        raise ValueError(f"{kind} takes {ARITY.get(kind)} arguments, got {len(args)}")
    return Func(kind, tuple(args))


# -- tokens -----------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int
    value: object = None


_OPS = set("+-*/^(),")


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        start = i
        if c.isdigit():
            i, whole = _digits(text, i)
            lit = IntLit(whole)
            if _starts(text, i, "/"):
                i, den = _digits(text, i + 1)
                lit = RatLit(whole, den)
                divisor = Fraction(den)
                if _starts(text, i, "."):
                    i, frac = _fraction_part(text, i + 1)
                    divisor += frac
                    if divisor:
                        value = whole / divisor
                        lit = RatLit(value.numerator, value.denominator)
                if divisor == 0:
                    raise ParseError("zero denominator in literal", _byte_offset(text, start))
            elif _starts(text, i, "."):
                i, frac = _fraction_part(text, i + 1)
                value = whole + frac
                lit = RatLit(value.numerator, value.denominator)
            tokens.append(Token("num", text[start:i], _byte_offset(text, start), lit))
            continue
        if c.isalpha() or c == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(Token("ident", text[start:i], _byte_offset(text, start)))
            continue
        if c in _OPS:
            tokens.append(Token("op", c, _byte_offset(text, start)))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", _byte_offset(text, start))
    tokens.append(Token("end", "", _byte_offset(text, n)))
    return tokens


def _digits(text, i):
    j = i
    while j < len(text) and text[j].isdigit():
        j += 1
    return j, int(text[i:j])


def _starts(text, i, sep) -> bool:
    """True when ``sep`` at ``i`` is immediately followed by a digit."""
    return i + 1 < len(text) and text[i] == sep and text[i + 1].isdigit()


def _fraction_part(text, i):
    j, value = _digits(text, i)
    return j, Fraction(value, 10 ** (j - i))


# -- parser -----------------------------------------------------------------

_PRIMARY_START = ("number", "identifier", "'('", "'-'")


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.variables = frozenset(variables)

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, op):
        if not self.at_op(op):
            self.fail(f"expected {op!r}", [f"'{op}'"])
        return self.advance()

    def fail(self, message, expected=()):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.offset, expected)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("unexpected trailing input", ["'+'", "'-'", "'*'", "'/'", "'^'", "end"])
        return node

    def expr(self):
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.at_op("-"):
            self.advance()
            return Neg(self.factor())
        node = self.primary()
        if self.at_op("^"):
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return tok.value
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            if self.at_op("("):
                return self.call(tok)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in self.variables:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                self.fail(f"function {tok.text!r} needs arguments", ["'('"])
            raise ParseError(f"unknown name {tok.text!r}", tok.offset,
                             list(CONSTANTS) + sorted(self.variables))
        self.fail("expected an operand", _PRIMARY_START)

    def call(self, name_tok):
        arities = FUNCTIONS.get(name_tok.text)
        if arities is None:
            raise ParseError(f"unknown function {name_tok.text!r}", name_tok.offset,
                             sorted(FUNCTIONS))
        self.expect("(")
        args = [self.expr()]
        while self.at_op(","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        kind = arities.get(len(args))
        if kind is None:
            counts = " or ".join(str(k) for k in sorted(arities))
            raise ParseError(f"{name_tok.text} takes {counts} argument(s), got {len(args)}",
                             name_tok.offset)
        return Func(kind, tuple(args))


def parse_expr(text: str, variables: Iterable[str] = ()) -> Expression:
    """Parse ``text``; bare identifiers listed in ``variables`` become Var nodes."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, _PRIMARY_START)
    return _Parser(text, variables).parse()


# -- printer ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(node, min_prec) -> str:
    text = to_text(node)
    return f"({text})" if _prec(node) < min_prec else text


def to_text(node: Expression) -> str:
    """Render ``node`` so that ``parse_expr(to_text(node)) == node``."""
    if isinstance(node, IntLit):
        return str(node.value)
    if isinstance(node, RatLit):
        return f"{node.p}/{node.q}"
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _NEG_PREC)
    if isinstance(node, Func):
        args = ", ".join(to_text(a) for a in node.args)
        return f"{SURFACE_NAME[node.kind]}({args})"
    if node.op == "^":
        return f"{_wrap(node.left, _ATOM_PREC)}^{_wrap(node.right, _NEG_PREC)}"
    level = _PREC[node.op]
    # left-associative: the right operand must bind strictly tighter
    right_min = _NEG_PREC if level == 2 else level + 1
    return f"{_wrap(node.left, level)} {node.op} {_wrap(node.right, right_min)}"


def walk(node: Expression):
    yield node
    if isinstance(node, Neg):
        yield from walk(node.arg)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Func):
        for arg in node.args:
            yield from walk(arg)
