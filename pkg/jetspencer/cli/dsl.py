"""The `.pde` system-description language.

A source reads::

    system contact;
    vars x1 x2 x3;
    unknowns u1 u2 u3;
    eq d(u1; 2) - x3*d(u2; 2) + x3*d(u1; 1) - x3^2*d(u2; 1) - u3 = 0;
    eq d(u1; 3) - x3*d(u2; 3) = 0;

Each equation is a sum of terms ``[POLY *] d(U; i1 i2 ...)`` or ``[POLY *] U``
whose coefficients are polynomials with rational coefficients in the declared
variables. Whitespace is free, ``= 0`` and the final ``;`` are optional and
``#`` starts a comment.
"""

import logging
import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Final

from sympy import QQ
from sympy.polys.rings import PolyElement, PolyRing

from jetspencer.core.errors import (
    DslSyntaxError,
    NonPolynomialCoefficientError,
    UndeclaredVariableError,
)
from jetspencer.core.exactalg import coefficient_ring, constant_value
from jetspencer.core.formal import JetSystem
from jetspencer.core.jetcalc import DiffOperator, Jet, JetForm, MultiIndex, render_form

__all__ = ["SystemSource", "parse_element", "parse_system", "render_system"]

_logger = logging.getLogger(__name__)

_TOKEN: Final[re.Pattern[str]] = re.compile(
    r"""
    (?P<space>[ \t\r]+)
    | (?P<newline>\n)
    | (?P<comment>\#[^\n]*)
    | (?P<number>\d+)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<symbol>[-+*/^();=])
    """,
    re.VERBOSE,
)

_KEYWORDS: Final[frozenset[str]] = frozenset({"system", "vars", "unknowns", "eq", "d"})

# A linear expression: jets -> coefficients, with None holding the scalar part.
_Linear = dict[Jet | None, PolyElement]


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start, position = 1, 0, 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        column = position - line_start + 1
        if match is None:
            error_msg = f"Unexpected character {text[position]!r}"
            raise DslSyntaxError(error_msg, line, column)
        kind = match.lastgroup or ""
        if kind == "newline":
            line, line_start = line + 1, match.end()
        elif kind not in {"space", "comment"}:
            tokens.append(_Token(kind, match.group(), line, column))
        position = match.end()
    tokens.append(_Token("end", "", line, position - line_start + 1))
    return tokens


@dataclass(frozen=True)
class SystemSource:
    """A parsed `.pde` source.

    Attributes:
        name: System name.
        variables: Independent variable names, x1 … xn in order.
        unknowns: Dependent variable names.
        equations: One jet form per equation, coefficients in `coefficient_ring(n)`.
    """

    name: str
    variables: tuple[str, ...]
    unknowns: tuple[str, ...]
    equations: tuple[JetForm, ...] = field(default_factory=tuple)

    @property
    def operator(self) -> DiffOperator:
        """The equations as an operator."""
        return DiffOperator(len(self.variables), len(self.unknowns), self.equations)

    def to_system(self) -> JetSystem:
        """A `JetSystem` carrying the source's names."""
        return JetSystem(
            self.operator, name=self.name, variables=self.variables, unknowns=self.unknowns
        )

    @classmethod
    def from_system(cls, system: JetSystem) -> "SystemSource":
        """The source of an existing system."""
        return cls(system.name, system.variables, system.unknowns, system.op.rows)


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.index = 0
        self.ring: PolyRing | None = None
        self.variables: dict[str, int] = {}
        self.unknowns: dict[str, int] = {}

    # *====[ Token access ]====*

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def fail(self, message: str, token: _Token | None = None) -> DslSyntaxError:
        token = token or self.current
        return DslSyntaxError(message, token.line, token.column)

    def expect(self, text: str) -> _Token:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise self.fail(f"Expected '{text}', found '{found}'")
        return self.advance()

    def expect_name(self, what: str) -> str:
        if self.current.kind != "name":
            raise self.fail(f"Expected {what}")
        return self.advance().text

    def end_statement(self) -> None:
        if self.current.text == ";":
            self.advance()
        elif self.current.kind != "end":
            raise self.fail("Expected ';'")

    # *====[ Header ]====*

    def names(self, keyword: str) -> list[str]:
        self.expect(keyword)
        found: list[str] = []
        while self.current.kind == "name":
            token = self.current
            name = self.advance().text
            if name in _KEYWORDS or name in found or name in self.variables:
                raise self.fail(f"Name '{name}' is reserved or declared twice", token)
            found.append(name)
        if not found:
            raise self.fail(f"'{keyword}' needs at least one name")
        self.end_statement()
        return found

    def source(self) -> SystemSource:
        self.expect("system")
        name = self.expect_name("a system name")
        self.end_statement()
        variables = self.names("vars")
        self.variables = {name: i for i, name in enumerate(variables)}
        unknowns = self.names("unknowns")
        self.unknowns = {name: k for k, name in enumerate(unknowns)}
        self.ring = coefficient_ring(len(variables))
        equations: list[JetForm] = []
        while self.current.text == "eq":
            self.advance()
            equations.append(self.equation())
            self.end_statement()
        if self.current.kind != "end":
            raise self.fail("Expected 'eq' or end of input")
        return SystemSource(name, tuple(variables), tuple(unknowns), tuple(equations))

    # *====[ Expressions ]====*

    def equation(self) -> JetForm:
        start = self.current
        form = self.linear_form(start)
        if self.current.text == "=":
            self.advance()
            zero = self.current
            if self.advance().text != "0":
                raise self.fail("Only '= 0' is allowed on the right-hand side", zero)
        return form

    def linear_form(self, start: _Token) -> JetForm:
        value = self.expression()
        if value.get(None):
            raise self.fail("Every term must contain an unknown", start)
        return {jet: coefficient for jet, coefficient in value.items() if jet is not None}

    def expression(self) -> _Linear:
        sign = 1
        if self.current.text in {"+", "-"}:
            sign = -1 if self.advance().text == "-" else 1
        total = _scaled(self.term(), sign)
        while self.current.text in {"+", "-"}:
            sign = -1 if self.advance().text == "-" else 1
            total = _sum(total, _scaled(self.term(), sign))
        return total

    def term(self) -> _Linear:
        value = self.power()
        while self.current.text in {"*", "/"}:
            operator = self.advance()
            right_token = self.current
            right = self.power()
            if operator.text == "*":
                value = self._product(value, right, operator)
            else:
                value = self._quotient(value, right, right_token)
        return value

    def power(self) -> _Linear:
        base = self.atom()
        if self.current.text != "^":
            return base
        caret = self.advance()
        if self.current.text == "-":
            error_msg = "Negative exponents are not polynomial"
            raise NonPolynomialCoefficientError(error_msg, caret.line, caret.column)
        if self.current.kind != "number":
            raise self.fail("Expected an integer exponent")
        exponent = int(self.advance().text)
        if set(base) - {None}:
            raise self.fail("Unknowns cannot be raised to a power", caret)
        scalar = base.get(None, self._ring.zero)
        return {None: scalar**exponent} if scalar**exponent else {}

    def atom(self) -> _Linear:
        token = self.current
        if token.kind == "number":
            self.advance()
            value = self._ring(int(token.text))
            return {None: value} if value else {}
        if token.text == "(":
            self.advance()
            value = self.expression()
            self.expect(")")
            return value
        if token.kind == "name":
            if token.text == "d" and self.tokens[self.index + 1].text == "(":
                return self.derivative()
            self.advance()
            if token.text in self.variables:
                return {None: self._ring.gens[self.variables[token.text]]}
            if token.text in self.unknowns:
                jet = (self.unknowns[token.text], MultiIndex.zero(len(self.variables)))
                return {jet: self._ring.one}
            error_msg = f"Undeclared name '{token.text}'"
            raise UndeclaredVariableError(error_msg, token.line, token.column)
        raise self.fail(f"Unexpected '{token.text or 'end of input'}'")

    def derivative(self) -> _Linear:
        self.expect("d")
        self.expect("(")
        token = self.current
        name = self.expect_name("an unknown")
        if name not in self.unknowns:
            error_msg = f"Undeclared unknown '{name}'"
            raise UndeclaredVariableError(error_msg, token.line, token.column)
        self.expect(";")
        n = len(self.variables)
        indices: list[int] = []
        while self.current.kind == "number":
            index_token = self.advance()
            index = int(index_token.text)
            if not 1 <= index <= n:
                raise self.fail(f"Derivative index {index} is outside 1..{n}", index_token)
            indices.append(index)
        self.expect(")")
        return {(self.unknowns[name], MultiIndex.from_derivatives(n, indices)): self._ring.one}

    # *====[ Arithmetic ]====*

    @property
    def _ring(self) -> PolyRing:
        if self.ring is None:
            raise self.fail("Expressions need a declared 'vars' list")
        return self.ring

    def _product(self, left: _Linear, right: _Linear, token: _Token) -> _Linear:
        if set(left) - {None} and set(right) - {None}:
            raise self.fail("Products of unknowns are not linear", token)
        if set(left) - {None}:
            left, right = right, left
        scalar = left.get(None, self._ring.zero)
        return {key: scalar * value for key, value in right.items() if scalar * value}

    def _quotient(self, left: _Linear, right: _Linear, token: _Token) -> _Linear:
        divisor = right.get(None, self._ring.zero)
        if set(right) - {None} or not divisor.is_ground:
            error_msg = "Division is allowed by nonzero rational constants only"
            raise NonPolynomialCoefficientError(error_msg, token.line, token.column)
        if not divisor:
            raise self.fail("Division by zero", token)
        inverse = QQ.one / constant_value(divisor)
        return {key: value.mul_ground(inverse) for key, value in left.items()}


def _scaled(value: _Linear, sign: int) -> _Linear:
    return value if sign == 1 else {key: -entry for key, entry in value.items()}


def _sum(left: _Linear, right: _Linear) -> _Linear:
    total = dict(left)
    for key, value in right.items():
        updated = total[key] + value if key in total else value
        if updated:
            total[key] = updated
        else:
            total.pop(key, None)
    return total


def parse_system(text: str) -> SystemSource:
    """Parse a `.pde` source.

    Raises:
        DslSyntaxError: With the line and column of the offending token.
        UndeclaredVariableError: For names that were never declared.
        NonPolynomialCoefficientError: For divisions by variables or negative exponents.

    Examples:
        >>> source = parse_system("system s; vars x y; unknowns u; eq d(u; 1 1 2) - 1/2*y*u = 0")
        >>> render_system(source).splitlines()[-1]
        'eq d(u; 1 1 2) - 1/2*y*u = 0;'
    """
    source = _Parser(text).source()
    _logger.debug(
        "Parsed system %s.",
        source.name,
        extra={"extra_data": {"equations": len(source.equations)}},
    )
    return source


def parse_element(text: str, source: SystemSource) -> JetForm:
    """Parse a linear expression in the jets of `source`, e.g. ``d(u1; 2 2)``.

    Examples:
        >>> source = parse_system("system s; vars x y; unknowns u;")
        >>> element = parse_element("x*d(u; 2)", source)
        >>> [(k, mu.exponents) for k, mu in element]
        [(0, (0, 1))]
    """
    parser = _Parser(text)
    parser.variables = {name: i for i, name in enumerate(source.variables)}
    parser.unknowns = {name: k for k, name in enumerate(source.unknowns)}
    parser.ring = coefficient_ring(len(source.variables))
    form = parser.linear_form(parser.current)
    if parser.current.kind != "end":
        raise parser.fail("Unexpected trailing input")
    return form


def _lines(source: SystemSource) -> Iterator[str]:
    yield f"system {source.name};"
    yield f"vars {' '.join(source.variables)};"
    yield f"unknowns {' '.join(source.unknowns)};"
    for form in source.equations:
        yield f"eq {render_form(form, source.unknowns, source.variables)} = 0;"


def render_system(source: SystemSource) -> str:
    """The `.pde` text of a source; `parse_system` reads it back unchanged."""
    return "\n".join(_lines(source)) + "\n"
