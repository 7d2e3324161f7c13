"""Scalar expressions over chart coordinates.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Exponents of ``^`` and the second argument of ``pow`` must be constant
(no coordinate names). Expressions evaluate to jets at a point, which is how
every derivative in the package is obtained.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .jets import Jet, jet_apply_unary, jet_constant, jet_variable

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")

# name -> arity
FUNCTIONS = {"exp": 1, "ln": 1, "sin": 1, "cos": 1, "sqrt": 1, "pow": 2}


class ExprError(ValueError):
    def __init__(self, message: str, offset: int | None = None, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifier(ExprError):
    pass


class ArityError(ExprError):
    pass


@dataclass(frozen=True)
class Chart:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 2:
            raise ValueError(f"chart dimension must be >= 2, got {len(names)}")
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be distinct: {names}")
        for n in names:
            if not IDENT.fullmatch(n) or n in FUNCTIONS:
                raise ValueError(f"invalid coordinate name {n!r}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


# AST nodes -----------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    axis: int


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Sub:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Div:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exponent: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expression", ...]


Expression = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]

_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}


# tokenizer / parser --------------------------------------------------------


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        m = NUMBER.match(text, i)
        if m:
            tokens.append(("num", m.group(), i))
            i = m.end()
            continue
        m = IDENT.match(text, i)
        if m:
            tokens.append(("name", m.group(), i))
            i = m.end()
            continue
        if ch in "+-*/^(),":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i, ("number", "name", "operator"))
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind: str):
        tok = self.peek()
        if tok[0] != kind:
            label = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {kind!r}, found {label}", tok[2], (kind,))
        self.pos += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take(self.peek()[0])[0]
            node = _BINARY[op](node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take(self.peek()[0])[0]
            node = _BINARY[op](node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.take("-")
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            offset = self.take("^")[2]
            exponent = self.unary()
            if _free_names(exponent):
                raise ExprSyntaxError("exponent must be a constant", offset, ("number",))
            return Pow(base, exponent)
        return base

    def atom(self):
        kind, text, offset = self.peek()
        if kind == "num":
            self.pos += 1
            return Num(float(text))
        if kind == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        if kind == "name":
            self.pos += 1
            if self.peek()[0] == "(":
                return self.call(text, offset)
            if text not in self.chart.names:
                raise UnknownIdentifier(f"unknown identifier {text!r}", offset)
            return Var(text, self.chart.index(text))
        label = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {label}", offset, ("number", "name", "(", "-"))

    def call(self, name: str, offset: int):
        if name not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name!r}", offset)
        self.take("(")
        args = [self.expr()]
        while self.peek()[0] == ",":
            self.take(",")
            args.append(self.expr())
        self.take(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", offset)
        if name == "pow" and _free_names(args[1]):
            raise ExprSyntaxError("pow exponent must be a constant", offset, ("number",))
        return Call(name, tuple(args))


def _free_names(node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return _free_names(node.operand)
    if isinstance(node, Pow):
        return _free_names(node.base) | _free_names(node.exponent)
    if isinstance(node, Call):
        return set().union(*(_free_names(a) for a in node.args))
    return _free_names(node.left) | _free_names(node.right)


def parse(text: str, chart: Chart) -> Expression:
    p = _Parser(text, chart)
    node = p.expr()
    p.take("end")
    return node


# printing / evaluation ------------------------------------------------------

_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def to_text(node: Expression) -> str:
    """Fully parenthesized source text; ``parse(to_text(e)) == e``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{to_text(node.exponent)})"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_text(a) for a in node.args)})"
    return f"({to_text(node.left)}{_SYMBOL[type(node)]}{to_text(node.right)})"


def evaluate(node: Expression, point: Sequence[float]) -> float:
    """Plain floating-point value at ``point`` (no derivatives)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(point[node.axis])
    if isinstance(node, Neg):
        return -evaluate(node.operand, point)
    if isinstance(node, Add):
        return evaluate(node.left, point) + evaluate(node.right, point)
    if isinstance(node, Sub):
        return evaluate(node.left, point) - evaluate(node.right, point)
    if isinstance(node, Mul):
        return evaluate(node.left, point) * evaluate(node.right, point)
    if isinstance(node, Div):
        return evaluate(node.left, point) / evaluate(node.right, point)
    if isinstance(node, Pow):
        return evaluate(node.base, point) ** evaluate(node.exponent, point)
    args = [evaluate(a, point) for a in node.args]
    if node.func == "ln":
        return math.log(args[0])
    if node.func == "pow":
        return args[0] ** args[1]
    return getattr(math, node.func)(args[0])


def eval_jet(node: Expression, point: Sequence[float], trunc: int) -> Jet:
    """Jet of the expression at ``point`` truncated at order ``trunc``."""
    dim = len(point)
    cache: dict[int, Jet] = {}

    def var(axis: int) -> Jet:
        if axis not in cache:
            cache[axis] = jet_variable(axis, float(point[axis]), dim, trunc)
        return cache[axis]

    def walk(n) -> Jet:
        if isinstance(n, Num):
            return jet_constant(n.value, dim, trunc)
        if isinstance(n, Var):
            if n.axis >= dim:
                raise ValueError(f"point has {dim} coordinates, expression uses axis {n.axis}")
            return var(n.axis)
        if isinstance(n, Neg):
            return -walk(n.operand)
        if isinstance(n, Add):
            return walk(n.left) + walk(n.right)
        if isinstance(n, Sub):
            return walk(n.left) - walk(n.right)
        if isinstance(n, Mul):
            return walk(n.left) * walk(n.right)
        if isinstance(n, Div):
            return walk(n.left) / walk(n.right)
        if isinstance(n, Pow):
            return jet_apply_unary("pow", walk(n.base), evaluate(n.exponent, ()))
        if n.func == "pow":
            return jet_apply_unary("pow", walk(n.args[0]), evaluate(n.args[1], ()))
        return jet_apply_unary(n.func, walk(n.args[0]))

    return walk(node)
