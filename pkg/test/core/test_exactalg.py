# test/core/test_exactalg.py

# ruff: noqa: S101
"""Tests for the exact polynomial and linear-algebra substrate."""

import random
from collections.abc import Callable
from typing import Any

import pytest
from sympy import QQ, Matrix
from sympy.polys.rings import PolyElement

from jetspencer.core.errors import PreconditionError
from jetspencer.core.exactalg import (
    PolyMatrix,
    RowSpace,
    coefficient_ring,
    constant_value,
    format_rational,
    left_nullspace,
    nullspace,
    operator_ring,
    poly_diff,
    primitive_vector,
    rank,
    rational_roots,
    rref_fraction_free,
    smith_decomposition,
    smith_form,
    total_degree,
    univariate_ring,
)
from test.core.factories import random_poly


class TestRings:
    """Tests for ring construction and scalar helpers."""

    def test_coefficient_ring_is_cached(self) -> None:
        """Verify the same ring object is returned for the same n."""
        assert coefficient_ring(4) is coefficient_ring(4)
        assert [str(g) for g in coefficient_ring(2).gens] == ["x1", "x2"]

    @pytest.mark.parametrize("n", [0, -1])
    def test_coefficient_ring_rejects_small_n(self, n: int) -> None:
        """Verify a ring without variables is refused."""
        with pytest.raises(PreconditionError, match="At least one"):
            coefficient_ring(n)

    def test_operator_ring(self) -> None:
        """Verify the operator ring is ℚ[d] and shared with univariate_ring."""
        assert operator_ring() is univariate_ring("d")
        assert str(operator_ring().gens[0]) == "d"

    def test_total_degree_and_constant(self) -> None:
        """Verify degree of zero and constants, and constant extraction."""
        ring = coefficient_ring(2)
        x1, x2 = ring.gens
        assert total_degree(ring.zero) == 0
        assert total_degree(x1 * x2**3 + 1) == 4
        assert constant_value(ring(QQ(7, 3))) == QQ(7, 3)
        assert constant_value(ring.zero) == 0

    def test_poly_diff(self) -> None:
        """Verify partial derivatives and the index range check."""
        ring = coefficient_ring(2)
        x1, x2 = ring.gens
        assert poly_diff(x1**3 * x2, 1) == 3 * x1**2 * x2
        assert poly_diff(x1**3, 2) == ring.zero
        with pytest.raises(PreconditionError, match="outside"):
            poly_diff(x1, 3)
        with pytest.raises(PreconditionError):
            poly_diff(x1, 0)

    @pytest.mark.parametrize(
        ("value", "expected"),
        [(QQ(1, 2), "1/2"), (QQ(-6, 4), "-3/2"), (QQ(0), "0"), (QQ(12, 3), "4")],
    )
    def test_format_rational(self, value: object, expected: str) -> None:
        """Verify rationals render as p or p/q in lowest terms."""
        assert format_rational(value) == expected


class TestPrimitiveVector:
    """Tests for denominator and content clearing."""

    def test_clears_denominators(self) -> None:
        """Verify rational entries become coprime integers."""
        ring = coefficient_ring(1)
        vector = primitive_vector({0: ring(QQ(1, 2)), 1: ring(QQ(1, 3))})
        assert vector == {0: ring(3), 1: ring(2)}

    def test_removes_polynomial_content(self) -> None:
        """Verify a common polynomial factor is divided out."""
        ring = coefficient_ring(2)
        x1, x2 = ring.gens
        vector = primitive_vector({0: x1 * x2, 1: x1**2})
        assert vector == {0: x2, 1: x1}

    def test_sign_follows_sort_key(self) -> None:
        """Verify the first entry by sort_key ends up positive."""
        ring = coefficient_ring(1)
        vector = primitive_vector({"b": ring(-2), "a": ring(4)}, sort_key=str)
        assert list(vector) == ["a", "b"]
        assert vector == {"a": ring(2), "b": ring(-1)}

    def test_zero_vector(self) -> None:
        """Verify the zero vector reduces to an empty mapping."""
        ring = coefficient_ring(1)
        assert primitive_vector({0: ring.zero}) == {}


class TestPolyMatrix:
    """Tests for the sparse matrix container."""

    def test_dense_round_trip(self) -> None:
        """Verify zeros are not stored and the dense grid is recovered."""
        ring = coefficient_ring(1)
        (x1,) = ring.gens
        matrix = PolyMatrix.from_dense(ring, [[x1, 0], [0, 1]])
        assert len(matrix.entries) == 2
        assert matrix.to_dense() == [[x1, ring.zero], [ring.zero, ring.one]]
        assert not matrix.is_constant
        assert matrix.transpose()[1, 1] == ring.one

    def test_matmul(self) -> None:
        """Verify the product of two small matrices."""
        ring = coefficient_ring(1)
        (x1,) = ring.gens
        left = PolyMatrix.from_dense(ring, [[1, x1]])
        right = PolyMatrix.from_dense(ring, [[x1], [-1]])
        assert left.matmul(right).is_zero
        assert right.matmul(left).to_dense() == [[x1, x1**2], [ring(-1), -x1]]

    def test_matmul_shape_mismatch(self) -> None:
        """Verify incompatible shapes are refused."""
        ring = coefficient_ring(1)
        matrix = PolyMatrix.from_dense(ring, [[1, 2]])
        with pytest.raises(PreconditionError, match="Cannot multiply"):
            matrix.matmul(matrix)


class TestElimination:
    """Tests for fraction-free reduction, rank and nullspaces."""

    def test_constant_rank_matches_sympy(self, rng: random.Random) -> None:
        """Verify constant ranks agree with sympy on random low-rank matrices."""
        nrows, ncols, inner = rng.randint(1, 6), rng.randint(1, 6), rng.randint(1, 4)
        left = [[rng.randint(-3, 3) for _ in range(inner)] for _ in range(nrows)]
        right = [[rng.randint(-3, 3) for _ in range(ncols)] for _ in range(inner)]
        grid = [[int(entry) for entry in row] for row in (Matrix(left) * Matrix(right)).tolist()]
        matrix = PolyMatrix.from_dense(coefficient_ring(1), grid)
        assert rank(matrix) == Matrix(grid).rank()

    def test_polynomial_nullspace_annihilates(self, rng: random.Random) -> None:
        """Verify M·v = 0 and rank + nullity = ncols on random polynomial matrices."""
        ring = coefficient_ring(2)
        nrows, ncols = rng.randint(1, 3), rng.randint(2, 4)
        grid = [[random_poly(rng, ring) for _ in range(ncols)] for _ in range(nrows)]
        matrix = PolyMatrix.from_dense(ring, grid)
        result = rref_fraction_free(matrix)
        assert result.rank + len(result.nullspace) == ncols
        for vector in result.nullspace:
            column = PolyMatrix.from_dense(ring, [[entry] for entry in vector])
            assert matrix.matmul(column).is_zero

    def test_left_nullspace(self) -> None:
        """Verify v·M = 0 for the left nullspace of a rank-deficient matrix."""
        ring = coefficient_ring(1)
        (x1,) = ring.gens
        matrix = PolyMatrix.from_dense(ring, [[1, x1], [x1, x1**2], [0, 1]])
        basis = left_nullspace(matrix)
        assert len(basis) == 1
        row = PolyMatrix.from_dense(ring, [list(basis[0])])
        assert row.matmul(matrix).is_zero

    def test_excluded_locus(self) -> None:
        """Verify non-constant pivots are reported."""
        ring = coefficient_ring(1)
        (x1,) = ring.gens
        result = rref_fraction_free(PolyMatrix.from_dense(ring, [[x1]]))
        assert result.rank == 1
        assert result.excluded_locus == (x1,)
        assert nullspace(PolyMatrix.from_dense(ring, [[x1]])) == ()

    def test_zero_matrix(self) -> None:
        """Verify a zero matrix has rank 0 and the standard nullspace basis."""
        ring = coefficient_ring(1)
        result = rref_fraction_free(PolyMatrix(ring, 2, 2))
        assert result.rank == 0
        assert result.nullspace == ((ring.one, ring.zero), (ring.zero, ring.one))

    def test_column_order_preference(self) -> None:
        """Verify pivots follow column_order and a non-permutation is refused."""
        ring = coefficient_ring(1)
        matrix = PolyMatrix.from_dense(ring, [[1, 1]])
        assert rref_fraction_free(matrix).pivots == (0,)
        assert rref_fraction_free(matrix, column_order=[1, 0]).pivots == (1,)
        with pytest.raises(PreconditionError, match="permutation"):
            rref_fraction_free(matrix, column_order=[0, 0])


class TestRowSpace:
    """Tests for incremental spans."""

    def test_membership(self) -> None:
        """Verify reduction, membership and rank growth."""
        ring = coefficient_ring(1)
        (x1,) = ring.gens
        space: RowSpace[str] = RowSpace(ring)
        assert space.add({"a": x1, "b": ring.one})
        assert space.contains({"a": x1**2, "b": x1})
        assert not space.contains({"a": ring.one})
        assert space.add({"a": ring.one})
        assert space.rank == 2
        assert space.reduce({"b": ring(5)}) == {}


class TestSmith:
    """Tests for the univariate Smith form."""

    @pytest.mark.parametrize(
        ("build", "expected"),
        [
            (lambda d: [[d**2, 0], [0, d]], ["d", "d**2"]),
            (lambda d: [[d**2 - 1, 0], [0, d]], ["1", "d**3 - d"]),
            (lambda d: [[d, d**2], [d**2 - 1, 0]], ["1", "d**4 - d**2"]),
            (lambda d: [[d - 1, d + 1]], ["1"]),
            (lambda d: [[2 * d, 0], [0, 3]], ["1", "d"]),
        ],
    )
    def test_transforms_diagonalize(
        self, build: Callable[[PolyElement], list[list[Any]]], expected: list[str]
    ) -> None:
        """Verify U·M·V is diagonal with the invariant factors on the diagonal."""
        ring = operator_ring()
        values = [[ring(entry) for entry in row] for row in build(ring.gens[0])]
        decomposition = smith_decomposition(values)
        assert [str(f) for f in decomposition.invariant_factors] == expected
        product = (
            PolyMatrix.from_dense(ring, decomposition.left)
            .matmul(PolyMatrix.from_dense(ring, values))
            .matmul(PolyMatrix.from_dense(ring, decomposition.right))
        )
        diagonal = {(t, t): f for t, f in enumerate(decomposition.invariant_factors)}
        assert dict(product.entries) == diagonal

    def test_zero_matrix(self) -> None:
        """Verify a zero matrix has no invariant factors."""
        assert smith_form([[0, 0]]) == ()

    def test_rank_deficient(self) -> None:
        """Verify dependent rows leave one factor and square transforms."""
        (d,) = operator_ring().gens
        decomposition = smith_decomposition([[d, d**2], [2 * d, 2 * d**2]])
        assert [str(f) for f in decomposition.invariant_factors] == ["d"]
        assert len(decomposition.left) == len(decomposition.right) == 2

    def test_no_rows(self) -> None:
        """Verify an empty grid keeps its column count in V."""
        decomposition = smith_decomposition([], ncols=3)
        assert decomposition.invariant_factors == ()
        assert decomposition.left == ()
        assert len(decomposition.right) == 3


class TestRationalRoots:
    """Tests for rational root extraction."""

    def test_multiplicities(self) -> None:
        """Verify multiplicities and ordering of rational roots."""
        (d,) = operator_ring().gens
        roots, splits = rational_roots((2 * d - 1) ** 2 * (d + 3))
        assert splits
        assert [(format_rational(r), k) for r, k in roots] == [("-3", 1), ("1/2", 2)]

    def test_irreducible_factor(self) -> None:
        """Verify a quadratic factor without rational roots breaks splitting."""
        (d,) = operator_ring().gens
        roots, splits = rational_roots(d * (d**2 - 2))
        assert not splits
        assert [format_rational(r) for r, _ in roots] == ["0"]
