"""Closed-form expressions over chart coordinates.

Grammar (whitespace is ignored)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' exponent)?
    exponent:= ('-' | '+') exponent | power
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``^`` is right associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``. An exponent that is a constant integer is stored exactly as
:class:`Pow`; anything else is rewritten as ``exp(exponent*log(base))``.

Functions: sin cos tan sinh cosh exp log sqrt. The constant ``pi`` is
predefined unless it is declared as a coordinate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "exp", "log", "sqrt")
NAMED_CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} (at offset {offset})")


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, offset: int, text: str = ""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, text)


class DomainError(ExprError, ArithmeticError):
    def __init__(self, subexpr: str, point: Sequence[float], reason: str = ""):
        self.subexpr = subexpr
        self.point = tuple(float(x) for x in point)
        detail = f": {reason}" if reason else ""
        super().__init__(f"domain error in {subexpr!r} at point {self.point}{detail}")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Var:
    name: str
    index: int

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int

    def __str__(self):
        return to_text(self)


Expr = Union[Const, Var, Neg, Call, Add, Sub, Mul, Div, Pow]
BINARY = (Add, Sub, Mul, Div)

ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# Smart constructors: constant folding and 0/1 identities only.
# ---------------------------------------------------------------------------


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a) and not (a.value == 0.0 and n < 0):
        return Const(a.value**n)
    return Pow(a, n)


def call(fn: str, a: Expr) -> Expr:
    return Call(fn, a)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[^\W\d]\w*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.lastgroup is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        start = m.start(m.lastgroup)
        toks.append(_Tok(m.lastgroup, m.group(m.lastgroup), _byte_offset(text, start)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(text, n)))
    return toks


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, coords: Sequence[str]):
        self.text = text
        self.coords = {name: i for i, name in enumerate(coords)}
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(f"{message}, got {what}", tok.offset, self.text)

    def accept(self, *ops: str) -> _Tok | None:
        tok = self.tok
        if tok.kind == "op" and tok.text in ops:
            self.i += 1
            return tok
        return None

    def expect(self, op: str) -> None:
        if not self.accept(op):
            raise self.error(f"expected {op!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error("unexpected token")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            tok = self.accept("+", "-")
            if tok is None:
                return e
            rhs = self.term()
            e = Add(e, rhs) if tok.text == "+" else Sub(e, rhs)

    def term(self) -> Expr:
        e = self.unary()
        while True:
            tok = self.accept("*", "/")
            if tok is None:
                return e
            rhs = self.unary()
            e = Mul(e, rhs) if tok.text == "*" else Div(e, rhs)

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if not self.accept("^"):
            return base
        exponent = self.exponent()
        return _make_power(base, exponent)

    def exponent(self) -> Expr:
        if self.accept("-"):
            return Neg(self.exponent())
        if self.accept("+"):
            return self.exponent()
        return self.power()

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in self.coords:
                return Var(tok.text, self.coords[tok.text])
            if tok.text in FUNCTIONS:
                if not self.accept("("):
                    raise self.error(f"expected '(' after {tok.text}")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in NAMED_CONSTANTS:
                return Const(NAMED_CONSTANTS[tok.text])
            raise UnknownIdentifierError(tok.text, tok.offset, self.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error("expected a number, identifier or '('")


def _constant_value(e: Expr) -> float | None:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        v = _constant_value(e.arg)
        return None if v is None else -v
    if _free_indices(e):
        return None
    try:
        return evaluate(e, ())
    except DomainError:
        return None


def _make_power(base: Expr, exponent: Expr) -> Expr:
    value = _constant_value(exponent)
    if value is not None and math.isfinite(value) and float(value).is_integer():
        return Pow(base, int(value))
    return Call("exp", Mul(exponent, Call("log", base)))


def parse_expression(text: str, coords: Sequence[str]) -> Expr:
    """Parse ``text`` into an expression tree over ``coords``."""
    return _Parser(text, list(coords)).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _const_text(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        s = str(int(v))
    else:
        s = repr(v)
    return s


def _prec(e: Expr) -> int:
    if isinstance(e, Const):
        return 5 if e.value >= 0 and math.isfinite(e.value) else 0
    return _PREC.get(type(e), 5)


def to_text(e: Expr) -> str:
    """Print ``e`` as parseable text that rebuilds the same tree."""
    if isinstance(e, Const):
        if not math.isfinite(e.value):
            raise ExprError(f"cannot print non-finite constant {e.value}")
        s = _const_text(abs(e.value))
        return f"(-{s})" if math.copysign(1.0, e.value) < 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        # Neg(Const) must not collapse into a negative literal on re-parse.
        if isinstance(e.arg, Const) or _prec(e.arg) < _PREC[Neg]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if _prec(e.base) <= _PREC[Pow]:
            base = f"({base})"
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{base}^{exp}"
    p = _PREC[type(e)]
    left = to_text(e.left)
    right = to_text(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left}{_SYMBOL[type(e)]}{right}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _free_indices(e: Expr) -> set[int]:
    out: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.index)
        elif isinstance(node, (Neg, Call)):
            stack.append(node.arg)
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, BINARY):
            stack.extend((node.left, node.right))
    return out


def variables(e: Expr) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, (Neg, Call)):
            stack.append(node.arg)
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, BINARY):
            stack.extend((node.left, node.right))
    return out


def apply_function(fn: str, x: float) -> float:
    """Evaluate a named unary function, raising ValueError off its domain."""
    if fn == "log":
        if x <= 0.0:
            raise ValueError("log of non-positive value")
        return math.log(x)
    if fn == "sqrt":
        if x < 0.0:
            raise ValueError("sqrt of negative value")
        return math.sqrt(x)
    return getattr(math, fn)(x)


def evaluate(e: Expr, point: Sequence[float]) -> float:
    """Evaluate ``e`` at ``point`` (coordinates in chart order)."""

    def ev(node: Expr) -> float:
        try:
            if isinstance(node, Const):
                return node.value
            if isinstance(node, Var):
                return float(point[node.index])
            if isinstance(node, Neg):
                return -ev(node.arg)
            if isinstance(node, Call):
                value = apply_function(node.fn, ev(node.arg))
            elif isinstance(node, Pow):
                b = ev(node.base)
                if b == 0.0 and node.exponent < 0:
                    raise ValueError("zero to a negative power")
                value = b**node.exponent
            else:
                a, b = ev(node.left), ev(node.right)
                if isinstance(node, Add):
                    value = a + b
                elif isinstance(node, Sub):
                    value = a - b
                elif isinstance(node, Mul):
                    value = a * b
                else:
                    if b == 0.0:
                        raise ValueError("division by zero")
                    value = a / b
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise DomainError(to_text(node), point, str(exc)) from None
        if not math.isfinite(value):
            raise DomainError(to_text(node), point, "non-finite result")
        return value

    return ev(e)


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def _d_call(fn: str, u: Expr) -> Expr:
    if fn == "sin":
        return call("cos", u)
    if fn == "cos":
        return neg(call("sin", u))
    if fn == "tan":
        return power(call("cos", u), -2)
    if fn == "sinh":
        return call("cosh", u)
    if fn == "cosh":
        return call("sinh", u)
    if fn == "exp":
        return call("exp", u)
    if fn == "log":
        return div(ONE, u)
    if fn == "sqrt":
        return div(ONE, mul(Const(2.0), call("sqrt", u)))
    raise ExprError(f"unknown function {fn!r}")


def differentiate(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to coordinate ``v``."""
    memo: dict[int, Expr] = {}

    def d(node: Expr) -> Expr:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            out: Expr = ZERO
        elif isinstance(node, Var):
            out = ONE if node.name == v else ZERO
        elif isinstance(node, Neg):
            out = neg(d(node.arg))
        elif isinstance(node, Add):
            out = add(d(node.left), d(node.right))
        elif isinstance(node, Sub):
            out = sub(d(node.left), d(node.right))
        elif isinstance(node, Mul):
            out = add(mul(d(node.left), node.right), mul(node.left, d(node.right)))
        elif isinstance(node, Div):
            da, db = d(node.left), d(node.right)
            if _is_const(db, 0.0):
                out = div(da, node.right)
            else:
                out = div(sub(mul(da, node.right), mul(node.left, db)), power(node.right, 2))
        elif isinstance(node, Pow):
            n = node.exponent
            out = mul(mul(Const(float(n)), power(node.base, n - 1)), d(node.base)) if n else ZERO
        elif isinstance(node, Call):
            du = d(node.arg)
            out = ZERO if _is_const(du, 0.0) else mul(_d_call(node.fn, node.arg), du)
        else:
            raise ExprError(f"not an expression node: {node!r}")
        memo[key] = out
        return out

    return d(e)
