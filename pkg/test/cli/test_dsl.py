# test/cli/test_dsl.py

# ruff: noqa: S101
"""Tests for the `.pde` system-description language."""

from pathlib import Path

import pytest
from sympy import QQ

from jetspencer.cli.dsl import SystemSource, parse_element, parse_system, render_system
from jetspencer.core.catalog import catalog
from jetspencer.core.errors import (
    DslSyntaxError,
    NonPolynomialCoefficientError,
    UndeclaredVariableError,
)
from jetspencer.core.exactalg import coefficient_ring
from jetspencer.core.jetcalc import MultiIndex
from jetspencer.core.paths import SYSTEM_SUFFIX, SYSTEMS_DIR

CONTACT = """\
system contact;
vars x1 x2 x3;
unknowns u1 u2 u3;
eq d(u1; 2) - x3*d(u2; 2) + x3*d(u1; 1) - x3^2*d(u2; 1) - u3 = 0;
eq d(u1; 3) - x3*d(u2; 3) = 0;
"""

SAMPLES = sorted(SYSTEMS_DIR.glob(f"*{SYSTEM_SUFFIX}"))


class TestParse:
    """Tests for parsing well-formed sources."""

    def test_contact(self) -> None:
        """Verify the contact source matches the catalog operator."""
        source = parse_system(CONTACT)
        assert source.name == "contact"
        assert source.variables == ("x1", "x2", "x3")
        assert source.unknowns == ("u1", "u2", "u3")
        assert source.operator == catalog("contact").op

    def test_free_layout(self) -> None:
        """Verify comments, line breaks and the optional '= 0' and final ';'."""
        text = "# header\nsystem s;\nvars x y;   unknowns u;\neq d(u;\n 1 2) # mixed\n"
        source = parse_system(text)
        assert source.equations == ({(0, MultiIndex((1, 1))): coefficient_ring(2).one},)

    def test_rational_coefficients(self) -> None:
        """Verify division by constants and parenthesised products."""
        source = parse_system("system s; vars x; unknowns u; eq (x + 1)*u/3 - 2/4*d(u; 1);")
        (form,) = source.equations
        (x,) = coefficient_ring(1).gens
        assert form[0, MultiIndex((0,))] == (x + 1).mul_ground(QQ(1, 3))
        assert form[0, MultiIndex((1,))] == coefficient_ring(1)(QQ(-1, 2))

    def test_cancelling_terms(self) -> None:
        """Verify like terms are merged and zero terms dropped."""
        source = parse_system("system s; vars x; unknowns u v; eq u + v - u;")
        assert list(source.equations[0]) == [(1, MultiIndex((0,)))]

    def test_no_equations(self) -> None:
        """Verify a source may declare an empty system."""
        source = parse_system("system empty; vars x y z; unknowns u;")
        assert source.equations == ()
        assert source.operator.p == 0

    def test_to_system_names(self) -> None:
        """Verify the built system carries the declared names."""
        system = parse_system(CONTACT).to_system()
        assert system.name == "contact"
        assert system.unknowns == ("u1", "u2", "u3")
        assert system.variables == ("x1", "x2", "x3")


class TestRender:
    """Tests for the canonical text form."""

    def test_contact_round_trip(self) -> None:
        """Verify rendering then parsing gives the same equations."""
        source = parse_system(CONTACT)
        assert parse_system(render_system(source)) == source

    @pytest.mark.parametrize("path", SAMPLES, ids=lambda path: path.stem)
    def test_samples_round_trip(self, path: Path) -> None:
        """Verify every bundled sample parses and renders back to itself."""
        source = parse_system(path.read_text(encoding="utf-8"))
        rendered = render_system(source)
        assert render_system(parse_system(rendered)) == rendered

    def test_from_catalog_system(self) -> None:
        """Verify a catalog system with named variables renders and parses back."""
        system = catalog("screw")
        source = SystemSource("screw", ("x1", "x2"), system.unknowns, system.op.rows)
        assert parse_system(render_system(source)).operator == system.op


class TestElements:
    """Tests for parsing jet expressions against a source."""

    def test_element(self) -> None:
        """Verify an element uses the source's variables and unknowns."""
        source = parse_system("system s; vars x y; unknowns u v;")
        element = parse_element("d(v; 2 2) - y*u", source)
        ring = coefficient_ring(2)
        y = ring.gens[1]
        assert element == {(1, MultiIndex((0, 2))): ring.one, (0, MultiIndex((0, 0))): -y}

    def test_trailing_input(self) -> None:
        """Verify text after the expression is refused."""
        source = parse_system("system s; vars x; unknowns u;")
        with pytest.raises(DslSyntaxError, match="trailing"):
            parse_element("u; u", source)


class TestErrors:
    """Tests for located diagnostics."""

    @pytest.mark.parametrize(
        ("text", "error", "line", "column"),
        [
            ("system s; vars x; unknowns u;\neq w = 0;", UndeclaredVariableError, 2, 4),
            ("system s; vars x; unknowns u;\neq d(w; 1);", UndeclaredVariableError, 2, 6),
            ("system s; vars x; unknowns u;\neq u/x;", NonPolynomialCoefficientError, 2, 6),
            ("system s; vars x; unknowns u;\neq x^-1*u;", NonPolynomialCoefficientError, 2, 5),
            ("system s; vars x; unknowns u;\neq u*u;", DslSyntaxError, 2, 5),
            ("system s; vars x; unknowns u;\neq d(u; 2);", DslSyntaxError, 2, 9),
            ("system s; vars x; unknowns u;\neq u = 1;", DslSyntaxError, 2, 8),
            ("system s; vars x; unknowns u;\neq x;", DslSyntaxError, 2, 4),
            ("system s; vars x; unknowns u;\neq u $ 1;", DslSyntaxError, 2, 6),
            ("system s; vars x d; unknowns u;", DslSyntaxError, 1, 18),
            ("system s; vars x; unknowns u x;", DslSyntaxError, 1, 30),
        ],
    )
    def test_located(self, text: str, error: type[DslSyntaxError], line: int, column: int) -> None:
        """Verify the error type and the position of the offending token."""
        with pytest.raises(error) as info:
            parse_system(text)
        assert (info.value.line, info.value.column) == (line, column)
        assert f"line {line}, column {column}" in str(info.value)

    def test_empty_declaration(self) -> None:
        """Verify a declaration needs at least one name."""
        with pytest.raises(DslSyntaxError, match="at least one name"):
            parse_system("system s; vars; unknowns u;")

    def test_division_by_zero(self) -> None:
        """Verify a zero divisor is refused."""
        with pytest.raises(DslSyntaxError, match="Division by zero"):
            parse_system("system s; vars x; unknowns u; eq u/0;")
