# test/core/test_formal.py

# ruff: noqa: S101
"""Tests for completion, characters, Hilbert polynomials, CC, parametrization and purity."""

import random

import pytest
from pydantic import ValidationError

from jetspencer.core.catalog import catalog
from jetspencer.core.errors import PreconditionError, RegularityNotFoundError
from jetspencer.core.exactalg import coefficient_ring, total_degree
from jetspencer.core.formal import (
    AnalysisBounds,
    JetSystem,
    analyze,
    characters,
    check_formal_integrability,
    compatibility_conditions,
    hilbert_polynomial,
    parametrization_test,
    polynomial_solutions,
    purity_classify,
    symbol_dimension,
    system_dims,
)
from jetspencer.core.jetcalc import DiffOperator, JetForm, MultiIndex, compose
from test.core.factories import random_operator

GRADIENT = DiffOperator.build(3, 1, [{(0, (i,)): 1} for i in (1, 2, 3)])
CURL = DiffOperator.build(
    3,
    3,
    [
        {(2, (2,)): 1, (1, (3,)): -1},
        {(0, (3,)): 1, (2, (1,)): -1},
        {(1, (1,)): 1, (0, (2,)): -1},
    ],
)
MIXED = DiffOperator.build(2, 1, [{(0, (2, 2)): 1}, {(0, (1, 2)): 1}])


def _matches_up_to_sign(got: DiffOperator, want: DiffOperator) -> bool:
    negated = [{jet: -value for jet, value in row.items()} for row in want.rows]
    return list(got.rows) in (list(want.rows), negated)


class TestBoundsAndDims:
    """Tests for bounds, systems and dimension tables."""

    def test_bounds_defaults(self) -> None:
        """Verify unset order and degree bounds follow the operator."""
        ring = coefficient_ring(2)
        x1, _ = ring.gens
        op = DiffOperator.build(2, 1, [{(0, (1, 2)): x1**3}])
        bounds = AnalysisBounds().for_operator(op)
        assert (bounds.order_max, bounds.deg_max) == (4, 5)
        assert AnalysisBounds(order_max=1).for_operator(op).order_max == 1

    def test_bounds_validation(self) -> None:
        """Verify negative bounds are rejected."""
        with pytest.raises(ValidationError):
            AnalysisBounds(r_max=-1)

    def test_system_order_below_operator(self) -> None:
        """Verify a system cannot have a lower order than its operator."""
        with pytest.raises(PreconditionError, match="below"):
            JetSystem(MIXED, order=1)

    def test_killing_dims(self) -> None:
        """Verify the plane Killing system has three parameters at every order."""
        assert system_dims(catalog("killing", 2), 3) == (3, 3, 3, 3)

    def test_free_system_dims(self) -> None:
        """Verify an unconstrained system fills the jet space."""
        assert system_dims(JetSystem(DiffOperator(2, 1, ()), order=1), 2) == (3, 6, 10)

    def test_mixed_second_order_dims(self) -> None:
        """Verify dim R2 = 4 for y22 = y12 = 0."""
        system = JetSystem(MIXED)
        assert system.dim_r(2) == 4
        assert symbol_dimension(system) == 1

    def test_negative_r_max(self) -> None:
        """Verify a negative table length is refused."""
        with pytest.raises(PreconditionError):
            system_dims(JetSystem(MIXED), -1)


class TestIntegrability:
    """Tests for the completion loop."""

    @pytest.mark.parametrize(("name", "n"), [("killing", 2), ("screw", 2), ("translations", 3)])
    def test_already_integrable(self, name: str, n: int) -> None:
        """Verify catalog systems need no completion."""
        result = check_formal_integrability(catalog(name, n))
        assert result.formally_integrable
        assert result.trace == ()

    def test_mixed_second_order_is_integrable(self) -> None:
        """Verify y22 = y12 = 0 is already formally integrable."""
        assert check_formal_integrability(JetSystem(MIXED)).status == "integrable"

    def test_completion_to_trivial(self) -> None:
        """Verify y2 = 0, y1 = x2·y is completed to the zero solution only."""
        ring = coefficient_ring(2)
        _, x2 = ring.gens
        op = DiffOperator.build(2, 1, [{(0, (2,)): 1}, {(0, (1,)): 1, (0, ()): -x2}])
        result = check_formal_integrability(JetSystem(op))
        assert result.status == "trivial"
        assert not result.formally_integrable
        assert len(result.trace) >= 1
        assert all(step.order == 1 for step in result.trace[:1])
        assert check_formal_integrability(result.system).trace == ()


class TestCharacters:
    """Tests for Janet characters and the Cartan test."""

    def test_single_class_two_equation(self) -> None:
        """Verify y2 = 0 has β = (0, 1), α = (1, 0) and is involutive."""
        table = characters(JetSystem(DiffOperator.build(2, 1, [{(0, (2,)): 1}])))
        assert table.betas == (0, 1)
        assert table.alphas == (1, 0)
        assert table.involutive
        assert table.coordinate_change == ((1, 0), (0, 1))

    def test_screw_characters(self) -> None:
        """Verify the screw system is involutive with dim g2 = α¹ = 2."""
        table = characters(catalog("screw", 2))
        assert table.involutive
        assert table.alphas == (2, 0)
        assert table.symbol_dim_next == table.cartan_sum == 2
        assert table.alpha_sum == 2

    def test_killing_not_involutive(self) -> None:
        """Verify the plane Killing system fails the Cartan test with a cohomology certificate."""
        table = characters(catalog("killing", 2))
        assert table.verdict == "not_involutive"
        assert table.symbol_dim_next == 0
        assert table.cohomology

    def test_regular_coordinates_found(self) -> None:
        """Verify y12 = 0 needs a coordinate change to reach δ-regularity."""
        system = JetSystem(DiffOperator.build(2, 1, [{(0, (1, 2)): 1}]))
        table = characters(system)
        assert table.involutive
        assert table.coordinate_change != ((1, 0), (0, 1))
        assert table.betas == (0, 1)
        assert table.cartan_sum == system.dim_g(3) == 2

    def test_regularity_budget(self) -> None:
        """Verify a zero retry budget reports missing δ-regularity."""
        system = JetSystem(DiffOperator.build(2, 1, [{(0, (1, 2)): 1}]))
        with pytest.raises(RegularityNotFoundError, match="retries"):
            characters(system, AnalysisBounds(regularity_retries=0))

    def test_order_zero_refused(self) -> None:
        """Verify characters need an order-1 system."""
        op = DiffOperator.build(2, 1, [{(0, ()): 1}])
        with pytest.raises(PreconditionError, match="order at least 1"):
            characters(JetSystem(op))


class TestHilbertPolynomial:
    """Tests for character-derived Hilbert polynomials."""

    @pytest.mark.parametrize(
        ("name", "n"),
        [
            ("killing", 1),
            ("translations", 1),
            ("translations", 2),
            ("translations", 3),
            ("translations", 4),
            ("affine_line", 1),
            ("projective_line", 1),
            ("screw", 2),
            ("complex", 2),
            ("conformal_killing", 2),
            ("elasticity_cc", 2),
            ("stress_div", 2),
        ],
    )
    def test_matches_dims(self, name: str, n: int) -> None:
        """Verify the Cartan equality and dim R_{q+r} for r ≤ 4."""
        system = catalog(name, n)
        table = characters(system)
        assert table.involutive
        assert table.cartan_sum == table.symbol_dim_next
        polynomial = hilbert_polynomial(system, table, check_through=4)
        assert tuple(polynomial(r) for r in range(5)) == system_dims(system, 4)

    @pytest.mark.parametrize(
        ("name", "coefficients"),
        [("screw", (4, 2)), ("elasticity_cc", (17, 9, 1)), ("projective_line", (3,))],
    )
    def test_coefficients(self, name: str, coefficients: tuple[int, ...]) -> None:
        """Verify known polynomials, constant term first."""
        assert hilbert_polynomial(catalog(name)).coefficients == coefficients

    def test_single_equation(self) -> None:
        """Verify y2 = 0 has dim R_{1+r} = r + 2."""
        polynomial = hilbert_polynomial(JetSystem(DiffOperator.build(2, 1, [{(0, (2,)): 1}])))
        assert str(polynomial.poly.as_expr()) == "r + 2"

    def test_not_involutive_refused(self) -> None:
        """Verify the precondition on involutivity."""
        with pytest.raises(PreconditionError, match="not involutive"):
            hilbert_polynomial(catalog("killing", 2))


class TestCompatibilityConditions:
    """Tests for CC synthesis."""

    @pytest.mark.parametrize(("n", "count"), [(2, 1), (3, 6), (4, 20)])
    def test_killing_counts(self, n: int, count: int) -> None:
        """Verify n²(n²−1)/12 generating CC of order 2."""
        system = catalog("killing", n)
        result = compatibility_conditions(system.op)
        assert result.complete
        assert result.operator.p == count
        assert set(result.generator_orders) == {2}
        assert compose(result.operator, system.op).is_zero

    def test_killing_plane_generator(self) -> None:
        """Verify the plane CC is the strain compatibility up to scale."""
        result = compatibility_conditions(catalog("killing", 2).op)
        row = result.operator.rows[0]
        values = {(k, mu.exponents): value for (k, mu), value in row.items()}
        assert set(values) == {(0, (0, 2)), (1, (1, 1)), (2, (2, 0))}
        assert values[0, (0, 2)] == values[2, (2, 0)]
        assert values[1, (1, 1)] == -2 * values[0, (0, 2)]

    @pytest.mark.parametrize(
        "rows",
        [
            [{(0, (3, 3)): 1}, {(0, (2, 3)): 1, (0, (1, 1)): -1}, {(0, (2, 2)): 1}],
            [
                {(0, (3, 3)): 1, (0, (1, 1)): -1},
                {(0, (2, 3)): 1},
                {(0, (2, 2)): 1, (0, (1, 1)): -1},
            ],
        ],
    )
    def test_three_second_order_cc(
        self, rows: list[dict[tuple[int, tuple[int, ...]], int]]
    ) -> None:
        """Verify both second-order systems in three variables have three CC of order 2."""
        op = DiffOperator.build(3, 1, rows)
        result = compatibility_conditions(op)
        assert result.complete
        assert result.generator_orders == (2, 2, 2)

    def test_gradient_and_curl(self) -> None:
        """Verify the CC of the gradient are three first-order rows and the curl has one."""
        gradient_cc = compatibility_conditions(GRADIENT)
        assert gradient_cc.generator_orders == (1, 1, 1)
        assert compose(gradient_cc.operator, GRADIENT).is_zero
        curl_cc = compatibility_conditions(CURL)
        assert curl_cc.generator_orders == (1,)
        assert curl_cc.certified_through == 3

    def test_incomplete_at_low_bound(self) -> None:
        """Verify a bound below the CC order reports an incomplete search."""
        result = compatibility_conditions(catalog("killing", 2).op, s_max=2)
        assert not result.complete
        assert result.certificates[-1].new_generators == 1

    def test_cc_annihilates(self, rng: random.Random) -> None:
        """Verify compose(CC(D), D) = 0 on random first-order operators."""
        op = random_operator(rng, 2, rng.randint(1, 2), 3, order=1, degree=rng.randint(0, 1))
        result = compatibility_conditions(op, s_max=2)
        assert compose(result.operator, op).is_zero


class TestParametrization:
    """Tests for the adjoint-based parametrization test."""

    def test_airy(self) -> None:
        """Verify plane stress equilibrium is parametrized by the Airy function."""
        result = parametrization_test(catalog("stress_div", 2).op)
        assert result.verdict == "parametrizable"
        assert result.residual_zero
        assert result.parametrization is not None
        airy = DiffOperator.build(2, 1, [{(0, (2, 2)): 1}, {(0, (1, 2)): -1}, {(0, (1, 1)): 1}])
        assert _matches_up_to_sign(result.parametrization, airy)

    def test_contact(self) -> None:
        """Verify the contact system is parametrized by a single potential."""
        system = catalog("contact", 3)
        result = parametrization_test(system.op)
        assert result.parametrizable
        assert result.parametrization is not None
        ring = coefficient_ring(3)
        _, _, x3 = ring.gens
        expected = DiffOperator.build(
            3,
            1,
            [
                {(0, (3,)): x3, (0, ()): -1},
                {(0, (3,)): 1},
                {(0, (2,)): -1, (0, (1,)): -x3},
            ],
        )
        assert _matches_up_to_sign(result.parametrization, expected)
        assert compose(system.op, result.parametrization).is_zero

    def test_curl_by_gradient(self) -> None:
        """Verify the curl is parametrized by a gradient."""
        result = parametrization_test(CURL)
        assert result.verdict == "parametrizable"
        assert result.parametrization is not None
        assert result.parametrization.m == 1
        assert result.parametrization.order == 1

    def test_gradient_not_parametrizable(self) -> None:
        """Verify the gradient has no potential: its kernel is the constants."""
        result = parametrization_test(GRADIENT)
        assert result.verdict == "not_parametrizable"
        assert result.parametrizable is False


class TestPolynomialSolutions:
    """Tests for polynomial solution bases."""

    def test_second_derivative(self) -> None:
        """Verify y'' = 0 has the solutions 1 and x."""
        op = DiffOperator.build(1, 1, [{(0, (1, 1)): 1}])
        assert len(polynomial_solutions(op, 4)) == 2

    def test_killing_plane(self) -> None:
        """Verify the plane Killing fields are two translations and a rotation."""
        system = catalog("killing", 2)
        solutions = polynomial_solutions(system.op, 2)
        assert len(solutions) == 3
        assert all(total_degree(f) <= 1 for solution in solutions for f in solution)


class TestPurity:
    """Tests for purity classification."""

    @staticmethod
    def _jet(*exponents: int, scale: int = 1) -> JetForm:
        return {(0, MultiIndex(exponents)): coefficient_ring(len(exponents))(scale)}

    def test_y2_in_t1(self) -> None:
        """Verify y2 lies in t1(M) for y22 = y12 = 0."""
        result = purity_classify(JetSystem(MIXED), self._jet(0, 1))
        assert result.r == 1
        assert result.torsion

    def test_y1_in_t0_only(self) -> None:
        """Verify y1 lies in t0(M) but not in t1(M)."""
        result = purity_classify(JetSystem(MIXED), self._jet(1, 0))
        assert result.r == 0
        assert result.alphas[0] != 0

    def test_scaling_invariance(self) -> None:
        """Verify a rational multiple of the element has the same class."""
        assert purity_classify(JetSystem(MIXED), self._jet(0, 1, scale=-3)).r == 1

    def test_free_unknown(self) -> None:
        """Verify an unconstrained unknown is not torsion."""
        free = JetSystem(DiffOperator(2, 1, ()), order=1)
        result = purity_classify(free, self._jet(0, 0))
        assert result.r == -1
        assert not result.torsion

    def test_zero_element(self) -> None:
        """Verify the zero element is classified with r = n."""
        assert purity_classify(JetSystem(MIXED), {}).r == 2


class TestAnalyze:
    """Tests for the full analysis."""

    def test_single_equation(self) -> None:
        """Verify dims, characters and Hilbert polynomial of y2 = 0."""
        report = analyze(JetSystem(DiffOperator.build(2, 1, [{(0, (2,)): 1}])))
        assert report.formally_integrable
        assert report.dims == (2, 3, 4)
        assert report.characters is not None
        assert report.characters.involutive
        assert report.hilbert is not None

    def test_killing_plane(self) -> None:
        """Verify the Hilbert polynomial is omitted for a non-involutive system."""
        report = analyze(catalog("killing", 2))
        assert report.dims == (3, 3, 3)
        assert report.hilbert is None
        assert "not involutive" in report.note
        assert report.completion_trace == ()

    def test_empty_system_analyzed_at_order_one(self) -> None:
        """Verify a system without equations is analysed in J1."""
        report = analyze(JetSystem(DiffOperator(2, 1, ())))
        assert report.order == 1
        assert report.dims == (3, 6, 10)
