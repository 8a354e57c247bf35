"""
    Scalar field expressions for user defined coefficients and sources.

    Grammar:
        expr    := term (("+" | "-") term)*
        term    := unary (("*" | "/") unary)*
        unary   := ("-" | "+") unary | power
        power   := atom ("^" unary)?          (right associative, -x^2 == -(x^2))
        atom    := number | "pi" | variable | name "(" expr ("," expr)* ")" | "(" expr ")"
    Variables are x (and y in 2-D). Functions: sin cos exp abs sqrt (one argument), sgnpow(t, p).
"""

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from vmm_solver.exceptions import ExpressionSyntaxError, FieldEvaluationError
from vmm_solver.utils import sgnpow

_TOKEN_PATTERN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)

FUNCTIONS: Dict[str, Tuple[int, Callable]] = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "abs": (1, np.abs),
    "sqrt": (1, np.sqrt),
    "sgnpow": (2, sgnpow),
}
CONSTANTS = {"pi": np.pi}

_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, position: int) -> int:
    # Offsets are reported in UTF-8 bytes of the source expression.
    return len(text[:position].encode("utf-8"))


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN_PATTERN.match(text, position)
        if match is None:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise ExpressionSyntaxError(
                f"Unexpected character {text[offset]!r}", offset=_byte_offset(text, offset)
            )
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), _byte_offset(text, match.start(kind))))
        position = match.end()
    tokens.append(_Token("end", "", _byte_offset(text, len(text))))
    return tokens


# AST nodes. Every node evaluates over a dict of coordinate arrays and prints fully parenthesized.


@dataclass(frozen=True)
class Number:
    value: float

    def evaluate(self, variables):
        return self.value

    def to_text(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Symbol:
    name: str

    def evaluate(self, variables):
        if self.name in CONSTANTS:
            return CONSTANTS[self.name]
        return variables[self.name]

    def to_text(self) -> str:
        return self.name


@dataclass(frozen=True)
class Negate:
    operand: object

    def evaluate(self, variables):
        return -self.operand.evaluate(variables)

    def to_text(self) -> str:
        return f"(-{self.operand.to_text()})"


@dataclass(frozen=True)
class BinaryOp:
    operator: str
    left: object
    right: object

    def evaluate(self, variables):
        return _BINARY[self.operator](
            self.left.evaluate(variables), self.right.evaluate(variables)
        )

    def to_text(self) -> str:
        return f"({self.left.to_text()} {self.operator} {self.right.to_text()})"


@dataclass(frozen=True)
class Call:
    function: str
    arguments: Tuple[object, ...]

    def evaluate(self, variables):
        _, implementation = FUNCTIONS[self.function]
        return implementation(*(argument.evaluate(variables) for argument in self.arguments))

    def to_text(self) -> str:
        inner = ", ".join(argument.to_text() for argument in self.arguments)
        return f"{self.function}({inner})"


class _Parser:
    """
    Recursive descent parser over the token list.
    """

    def __init__(self, text: str, variables: Tuple[str, ...]):
        self.tokens = _tokenize(text)
        self.index = 0
        self.variables = variables

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def _expect(self, text: str) -> _Token:
        if self.current.text != text or self.current.kind == "end":
            found = self.current.text or "end of input"
            raise ExpressionSyntaxError(
                f"Expected {text!r}, found {found!r}", offset=self.current.offset
            )
        return self._advance()

    def parse(self):
        node = self._expression()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(
                f"Unexpected token {self.current.text!r}", offset=self.current.offset
            )
        return node

    def _expression(self):
        node = self._term()
        while self.current.text in ("+", "-") and self.current.kind == "op":
            operator = self._advance().text
            node = BinaryOp(operator, node, self._term())
        return node

    def _term(self):
        node = self._unary()
        while self.current.text in ("*", "/") and self.current.kind == "op":
            operator = self._advance().text
            node = BinaryOp(operator, node, self._unary())
        return node

    def _unary(self):
        if self.current.kind == "op" and self.current.text in ("-", "+"):
            sign = self._advance().text
            operand = self._unary()
            return Negate(operand) if sign == "-" else operand
        return self._power()

    def _power(self):
        base = self._atom()
        if self.current.kind == "op" and self.current.text == "^":
            self._advance()
            return BinaryOp("^", base, self._unary())
        return base

    def _atom(self):
        token = self.current
        if token.kind == "number":
            self._advance()
            return Number(float(token.text))
        if token.kind == "name":
            self._advance()
            if token.text in FUNCTIONS:
                return self._call(token)
            if token.text in CONSTANTS or token.text in self.variables:
                return Symbol(token.text)
            raise ExpressionSyntaxError(
                f"Unknown name {token.text!r}", offset=token.offset
            )
        if token.kind == "op" and token.text == "(":
            self._advance()
            node = self._expression()
            self._expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"Unexpected {found!r}", offset=token.offset)

    def _call(self, name_token: _Token):
        arity, _ = FUNCTIONS[name_token.text]
        self._expect("(")
        arguments = [self._expression()]
        while self.current.kind == "op" and self.current.text == ",":
            self._advance()
            arguments.append(self._expression())
        self._expect(")")
        if len(arguments) != arity:
            raise ExpressionSyntaxError(
                f"Function {name_token.text} takes {arity} argument(s), got {len(arguments)}",
                offset=name_token.offset,
            )
        return Call(name_token.text, tuple(arguments))


class ScalarFieldExpression:
    """
    Parsed scalar field, callable on points of shape (n, dimension).
    """

    def __init__(self, text: str, dimension: int = 2):
        """
        :param text: Expression text.
        :param dimension: 1 (variable x) or 2 (variables x, y).
        """
        self.text = text
        self.dimension = dimension
        self.variables = ("x",) if dimension == 1 else ("x", "y")
        self.tree = _Parser(text, self.variables).parse()

    def pretty(self) -> str:
        """
        Fully parenthesized text that parses back to an equivalent expression.
        """
        return self.tree.to_text()

    def evaluate_raw(self, points: np.ndarray) -> np.ndarray:
        """
        Evaluates without checking; domain errors give NaN or inf.
        """
        points = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        variables = {name: points[:, k] for k, name in enumerate(self.variables)}
        with np.errstate(all="ignore"):
            values = self.tree.evaluate(variables)
        return np.broadcast_to(np.asarray(values, dtype=float), (points.shape[0],)).copy()

    def __call__(self, points: np.ndarray) -> np.ndarray:
        values = self.evaluate_raw(points)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise FieldEvaluationError(
                f"Expression {self.text!r} is not finite at {bad.size} point(s)!",
                failed_points=bad,
            )
        return values

    def __repr__(self) -> str:
        return f"ScalarFieldExpression({self.text!r})"


def parse_scalar_field(expr: str, dimension: int = 2) -> ScalarFieldExpression:
    """
    Parses a scalar field expression.

    :param expr: Expression text.
    :param dimension: Spatial dimension of the evaluation points.
    """
    return ScalarFieldExpression(expr, dimension=dimension)


__all__ = ["ScalarFieldExpression", "parse_scalar_field", "FUNCTIONS", "CONSTANTS"]
