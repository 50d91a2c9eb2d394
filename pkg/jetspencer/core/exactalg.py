"""Exact arithmetic substrate: rationals, polynomials and linear algebra over ℚ(x).

Coefficients live in sympy's sparse polynomial rings ℚ[x1, …, xn]. Linear
algebra is carried out over the rational-function field ℚ(x1, …, xn) without
ever forming fractions: constant matrices go through sympy's `DomainMatrix`
over `QQ`, polynomial matrices through a sparse fraction-free elimination whose
pivot rule is "lowest total degree, then lowest column". Smith forms over ℚ[d]
come from sympy's `smith_normal_decomp`.

Variable indices are 1-based in the public API (`poly_diff(p, 1)` is ∂/∂x1).
"""

import logging
import math
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cache, reduce
from typing import Any, Literal

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp
from sympy.polys.rings import PolyElement, PolyRing

from jetspencer.core.errors import PreconditionError

__all__ = [
    "PolyMatrix",
    "RowSpace",
    "RrefResult",
    "SmithDecomposition",
    "coefficient_ring",
    "constant_value",
    "format_rational",
    "left_nullspace",
    "nullspace",
    "operator_ring",
    "poly_diff",
    "primitive_vector",
    "rank",
    "rational_roots",
    "rref_fraction_free",
    "smith_decomposition",
    "smith_form",
    "total_degree",
    "univariate_ring",
]

_logger = logging.getLogger(__name__)

Pivoting = Literal["degree", "column"]


# *====[ Rings and scalars ]====*


@cache
def coefficient_ring(n: int) -> PolyRing:
    """Return the shared coefficient ring ℚ[x1, …, xn].

    Args:
        n: Number of independent variables (at least 1).

    Returns:
        The cached sympy polynomial ring.

    Raises:
        PreconditionError: If `n` is smaller than 1.

    Examples:
        >>> coefficient_ring(3).ngens
        3
        >>> coefficient_ring(2) is coefficient_ring(2)
        True
    """
    if n < 1:
        error_msg = f"At least one independent variable is required, got n={n}."
        raise PreconditionError(error_msg)
    names = ",".join(f"x{i}" for i in range(1, n + 1))
    return PolyRing(names, QQ)


@cache
def univariate_ring(name: str) -> PolyRing:
    """Return ℚ[name], used for ℚ[d] presentations and ℚ[x] solution parts."""
    return PolyRing(name, QQ)


def operator_ring() -> PolyRing:
    """Return the operator ring ℚ[d] of constant-coefficient ODE operators."""
    return univariate_ring("d")


def total_degree(p: PolyElement) -> int:
    """Total degree of a polynomial; the zero polynomial has degree 0.

    Examples:
        >>> R = coefficient_ring(2)
        >>> x1, x2 = R.gens
        >>> total_degree(x1**2 * x2 + x1)
        3
    """
    return max((sum(monom) for monom in p.itermonoms()), default=0)


def constant_value(p: PolyElement) -> Any:
    """Return the ℚ value of a ground polynomial (zero for the zero polynomial)."""
    return p.get(p.ring.zero_monom, p.ring.domain.zero)


def poly_diff(p: PolyElement, i: int) -> PolyElement:
    """Formal partial derivative ∂p/∂x_i.

    Args:
        p: A polynomial of `coefficient_ring(n)`.
        i: 1-based variable index.

    Returns:
        The derivative, in the same ring.

    Raises:
        PreconditionError: If `i` is outside 1..n.

    Examples:
        >>> R = coefficient_ring(3)
        >>> x1, x2, x3 = R.gens
        >>> poly_diff(x1 * x2, 1) == x2
        True
        >>> poly_diff(x3**2, 3) == 2 * x3
        True
    """
    ring = p.ring
    if not 1 <= i <= ring.ngens:
        error_msg = f"Variable index {i} is outside 1..{ring.ngens}."
        raise PreconditionError(error_msg)
    return p.diff(ring.gens[i - 1])


def format_rational(value: Any) -> str:
    """Render a rational as `p` or `p/q`.

    Examples:
        >>> format_rational(QQ(3, 6))
        '1/2'
        >>> format_rational(QQ(-4))
        '-4'
    """
    numerator = int(QQ.numer(QQ.convert(value)))
    denominator = int(QQ.denom(QQ.convert(value)))
    return str(numerator) if denominator == 1 else f"{numerator}/{denominator}"


def _rational_scale(values: Iterable[PolyElement]) -> Any:
    """The positive rational that makes every coefficient integral with gcd 1."""
    numerators: list[int] = []
    denominators: list[int] = []
    for value in values:
        for coeff in value.itercoeffs():
            numerators.append(abs(int(QQ.numer(coeff))))
            denominators.append(int(QQ.denom(coeff)))
    if not numerators:
        return QQ.one
    return QQ(math.lcm(*denominators), math.gcd(*numerators))


def primitive_vector[K: Hashable](
    vector: Mapping[K, PolyElement],
    *,
    sort_key: Callable[[K], Any] | None = None,
) -> dict[K, PolyElement]:
    """Clear denominators and content of a vector over ℚ[x].

    The result spans the same line over ℚ(x); its entries have integer
    coefficients without common polynomial or integer factor, and its first
    entry (by `sort_key`, or insertion order) has a positive leading coefficient.

    Examples:
        >>> R = coefficient_ring(1)
        >>> (x1,) = R.gens
        >>> v = primitive_vector({"a": x1**2 / 2, "b": -x1 / 4})
        >>> v["a"] == 2 * x1, v["b"] == R(-1)
        (True, True)
    """
    entries = {key: value for key, value in vector.items() if value}
    if not entries:
        return {}
    content = reduce(lambda acc, value: acc.gcd(value), entries.values())
    if not content.is_ground:
        entries = {key: value.exquo(content) for key, value in entries.items()}
    scale = _rational_scale(entries.values())
    keys = sorted(entries, key=sort_key) if sort_key is not None else list(entries)
    if entries[keys[0]].LC < 0:
        scale = -scale
    return {key: entries[key].mul_ground(scale) for key in keys}


# *====[ Matrices ]====*


@dataclass(frozen=True)
class PolyMatrix:
    """A rectangular matrix over ℚ[x], stored sparsely.

    Attributes:
        ring: The coefficient ring shared by every entry.
        nrows: Number of rows.
        ncols: Number of columns.
        entries: Map from (row, column) to a nonzero polynomial; absent
            positions are zero.
    """

    ring: PolyRing
    nrows: int
    ncols: int
    entries: Mapping[tuple[int, int], PolyElement] = field(default_factory=dict)

    @classmethod
    def from_rows(
        cls,
        ring: PolyRing,
        rows: Sequence[Mapping[int, Any]],
        ncols: int,
    ) -> "PolyMatrix":
        """Build a matrix from sparse rows (column -> value)."""
        entries: dict[tuple[int, int], PolyElement] = {}
        for i, row in enumerate(rows):
            for j, value in row.items():
                element = ring(value)
                if element:
                    entries[i, j] = element
        return cls(ring, len(rows), ncols, entries)

    @classmethod
    def from_dense(cls, ring: PolyRing, grid: Sequence[Sequence[Any]]) -> "PolyMatrix":
        """Build a matrix from a dense grid of values convertible into `ring`.

        Examples:
            >>> R = coefficient_ring(1)
            >>> PolyMatrix.from_dense(R, [[1, 0], [0, 2]]).nrows
            2
        """
        ncols = len(grid[0]) if grid else 0
        rows = [dict(enumerate(row)) for row in grid]
        return cls.from_rows(ring, rows, ncols)

    def __getitem__(self, key: tuple[int, int]) -> PolyElement:
        """Entry at (row, column), zero when not stored."""
        return self.entries.get(key, self.ring.zero)

    def rows(self) -> list[dict[int, PolyElement]]:
        """Sparse rows in order."""
        rows: list[dict[int, PolyElement]] = [{} for _ in range(self.nrows)]
        for (i, j), value in self.entries.items():
            rows[i][j] = value
        return rows

    def to_dense(self) -> list[list[PolyElement]]:
        """Dense grid of entries."""
        return [[self[i, j] for j in range(self.ncols)] for i in range(self.nrows)]

    def transpose(self) -> "PolyMatrix":
        """The transposed matrix."""
        entries = {(j, i): value for (i, j), value in self.entries.items()}
        return PolyMatrix(self.ring, self.ncols, self.nrows, entries)

    def matmul(self, other: "PolyMatrix") -> "PolyMatrix":
        """Matrix product self·other."""
        if self.ncols != other.nrows:
            error_msg = f"Cannot multiply {self.nrows}x{self.ncols} by {other.nrows}x{other.ncols}."
            raise PreconditionError(error_msg)
        right_rows = other.rows()
        product: dict[tuple[int, int], PolyElement] = {}
        for i, row in enumerate(self.rows()):
            for k, left in row.items():
                for j, right in right_rows[k].items():
                    product[i, j] = product.get((i, j), self.ring.zero) + left * right
        return PolyMatrix(
            self.ring,
            self.nrows,
            other.ncols,
            {key: value for key, value in product.items() if value},
        )

    @property
    def is_constant(self) -> bool:
        """Whether every entry is a rational constant."""
        return all(value.is_ground for value in self.entries.values())

    @property
    def is_zero(self) -> bool:
        """Whether the matrix has no nonzero entry."""
        return not self.entries


@dataclass(frozen=True)
class RrefResult:
    """Outcome of `rref_fraction_free`.

    Attributes:
        rank: Rank over ℚ(x).
        pivots: Pivot columns in selection order.
        pivot_rows: For each pivot, the fully reduced row (column -> entry),
            holding the pivot entry and entries in free columns only.
        nullspace: Right-nullspace basis, one dense tuple per free column,
            primitive over ℚ[x].
        excluded_locus: Non-constant pivot polynomials; ranks are valid off
            their common zero set.
    """

    rank: int
    pivots: tuple[int, ...]
    pivot_rows: tuple[Mapping[int, PolyElement], ...]
    nullspace: tuple[tuple[PolyElement, ...], ...]
    excluded_locus: tuple[PolyElement, ...] = ()


def _eliminate(
    row: Mapping[Any, PolyElement],
    pivot_row: Mapping[Any, PolyElement],
    pivot: PolyElement,
    factor: PolyElement,
) -> dict[Any, PolyElement]:
    """Cancel `factor` (the row's entry in the pivot column) against `pivot_row`."""
    if pivot.is_ground:
        multiplier = factor.quo_ground(constant_value(pivot))
        result = dict(row)
        for key, value in pivot_row.items():
            updated = result.get(key, factor.ring.zero) - multiplier * value
            if updated:
                result[key] = updated
            else:
                result.pop(key, None)
        return result
    result = {key: pivot * value for key, value in row.items()}
    for key, value in pivot_row.items():
        updated = result.get(key, factor.ring.zero) - factor * value
        if updated:
            result[key] = updated
        else:
            result.pop(key, None)
    content = reduce(lambda acc, value: acc.gcd(value), result.values(), factor.ring.zero)
    if result and not content.is_ground:
        result = {key: value.exquo(content) for key, value in result.items()}
    return result


def _positions(ncols: int, column_order: Sequence[int] | None) -> list[int]:
    """Map each column to its rank in the preferred pivot order."""
    if column_order is None:
        return list(range(ncols))
    if sorted(column_order) != list(range(ncols)):
        error_msg = "column_order must be a permutation of the column indices."
        raise PreconditionError(error_msg)
    position = [0] * ncols
    for rank_in_order, column in enumerate(column_order):
        position[column] = rank_in_order
    return position


def _nullspace_from_rows(
    ring: PolyRing,
    ncols: int,
    pivots: Sequence[int],
    pivot_rows: Sequence[Mapping[int, PolyElement]],
) -> tuple[tuple[PolyElement, ...], ...]:
    """Nullspace basis from a fully reduced echelon form, one vector per free column."""
    pivot_set = set(pivots)
    basis: list[tuple[PolyElement, ...]] = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        involved = [
            (column, row) for column, row in zip(pivots, pivot_rows, strict=True) if free in row
        ]
        common = reduce(lambda acc, item: acc.lcm(item[1][item[0]]), involved, ring.one)
        vector = {free: common}
        for column, row in involved:
            vector[column] = -row[free] * common.exquo(row[column])
        clean = primitive_vector(vector, sort_key=lambda column: column)
        basis.append(tuple(clean.get(j, ring.zero) for j in range(ncols)))
    return tuple(basis)


def _rref_constant(matrix: PolyMatrix, position: Sequence[int]) -> RrefResult:
    """Gauss–Jordan over ℚ through `DomainMatrix`, columns permuted by preference."""
    ring = matrix.ring
    order = sorted(range(matrix.ncols), key=lambda column: position[column])
    sparse: dict[int, dict[int, Any]] = {}
    for (i, j), value in matrix.entries.items():
        sparse.setdefault(i, {})[position[j]] = constant_value(value)
    reduced, permuted_pivots = DomainMatrix(
        sparse, (matrix.nrows, matrix.ncols), QQ
    ).rref()
    reduced_rows = reduced.to_sparse().rep
    pivots: list[int] = []
    pivot_rows: list[dict[int, PolyElement]] = []
    for index, permuted in enumerate(permuted_pivots):
        pivots.append(order[permuted])
        pivot_rows.append(
            {order[j]: ring.ground_new(value) for j, value in reduced_rows.get(index, {}).items()}
        )
    nullspace_basis = _nullspace_from_rows(ring, matrix.ncols, pivots, pivot_rows)
    return RrefResult(len(pivots), tuple(pivots), tuple(pivot_rows), nullspace_basis)


def _rref_polynomial(
    matrix: PolyMatrix,
    position: Sequence[int],
    pivoting: Pivoting,
) -> RrefResult:
    """Sparse fraction-free Gauss–Jordan elimination over ℚ[x]."""
    work = matrix.rows()
    active = set(range(len(work)))
    pivots: list[int] = []
    pivot_indices: list[int] = []
    excluded: list[PolyElement] = []
    while True:
        best: tuple[tuple[int, int, int], int, int] | None = None
        for i in active:
            for column, value in work[i].items():
                degree = total_degree(value)
                key = (
                    (degree, position[column], i)
                    if pivoting == "degree"
                    else (position[column], degree, i)
                )
                if best is None or key < best[0]:
                    best = (key, i, column)
        if best is None:
            break
        _, pivot_index, pivot_column = best
        active.discard(pivot_index)
        pivot_row = work[pivot_index]
        pivot = pivot_row[pivot_column]
        if not pivot.is_ground:
            excluded.append(pivot)
        for i, row in enumerate(work):
            if i != pivot_index and pivot_column in row:
                work[i] = _eliminate(row, pivot_row, pivot, row[pivot_column])
        pivots.append(pivot_column)
        pivot_indices.append(pivot_index)
    pivot_rows = [work[i] for i in pivot_indices]
    nullspace_basis = _nullspace_from_rows(matrix.ring, matrix.ncols, pivots, pivot_rows)
    return RrefResult(
        len(pivots),
        tuple(pivots),
        tuple(pivot_rows),
        nullspace_basis,
        tuple(excluded),
    )


def rref_fraction_free(
    matrix: PolyMatrix,
    *,
    pivoting: Pivoting = "degree",
    column_order: Sequence[int] | None = None,
) -> RrefResult:
    """Fully reduced echelon form of a polynomial matrix over ℚ(x).

    Args:
        matrix: The matrix to reduce.
        pivoting: "degree" picks the entry of lowest total degree, ties broken
            by column preference; "column" picks the most preferred column
            first, giving a true echelon form along `column_order`.
        column_order: Preferred column order for pivots (defaults to the
            natural order).

    Returns:
        Rank, pivots, reduced pivot rows, a primitive nullspace basis and the
        excluded locus.

    Examples:
        >>> R = coefficient_ring(1)
        >>> (x,) = R.gens
        >>> result = rref_fraction_free(PolyMatrix.from_dense(R, [[x, x**2], [1, x]]))
        >>> result.rank
        1
        >>> [str(entry) for entry in result.nullspace[0]]
        ['x1', '-1']
    """
    position = _positions(matrix.ncols, column_order)
    if matrix.nrows == 0 or matrix.ncols == 0 or matrix.is_zero:
        basis = tuple(
            tuple(matrix.ring.one if j == free else matrix.ring.zero for j in range(matrix.ncols))
            for free in range(matrix.ncols)
        )
        return RrefResult(0, (), (), basis)
    if matrix.is_constant:
        result = _rref_constant(matrix, position)
    else:
        result = _rref_polynomial(matrix, position, pivoting)
    _logger.debug(
        "Reduced %dx%d matrix to rank %d.",
        matrix.nrows,
        matrix.ncols,
        result.rank,
        extra={"extra_data": {"excluded_locus": [str(p) for p in result.excluded_locus]}},
    )
    return result


def rank(matrix: PolyMatrix) -> int:
    """Generic rank over ℚ(x)."""
    return rref_fraction_free(matrix).rank


def nullspace(matrix: PolyMatrix) -> tuple[tuple[PolyElement, ...], ...]:
    """Primitive right-nullspace basis over ℚ(x)."""
    return rref_fraction_free(matrix).nullspace


def left_nullspace(matrix: PolyMatrix) -> tuple[tuple[PolyElement, ...], ...]:
    """Primitive left-nullspace basis (vectors v with v·M = 0)."""
    return rref_fraction_free(matrix.transpose()).nullspace


class RowSpace[K: Hashable]:
    """An incrementally grown span of sparse vectors over ℚ(x).

    Vectors are mappings from arbitrary hashable keys to polynomials. New
    pivots are chosen by lowest total degree, then by `position(key)`; with
    `degree_first=False` the position alone decides.

    Examples:
        >>> R = coefficient_ring(1)
        >>> space = RowSpace(R)
        >>> space.add({"a": R(1), "b": R(2)}), space.add({"a": R(2), "b": R(4)})
        (True, False)
        >>> space.rank
        1
    """

    def __init__(
        self,
        ring: PolyRing,
        position: Callable[[K], Any] | None = None,
        *,
        degree_first: bool = True,
    ) -> None:
        """Create an empty space over `ring`."""
        self._ring = ring
        self._position = position
        self._degree_first = degree_first
        self._pivots: dict[K, dict[K, PolyElement]] = {}

    @property
    def rank(self) -> int:
        """Dimension of the span."""
        return len(self._pivots)

    def reduce(self, vector: Mapping[K, PolyElement]) -> dict[K, PolyElement]:
        """Reduce a vector modulo the span; an empty result means membership."""
        row = {key: value for key, value in vector.items() if value}
        for key, pivot_row in self._pivots.items():
            factor = row.get(key)
            if factor:
                row = _eliminate(row, pivot_row, pivot_row[key], factor)
        return row

    def contains(self, vector: Mapping[K, PolyElement]) -> bool:
        """Whether the vector lies in the span."""
        return not self.reduce(vector)

    def add(self, vector: Mapping[K, PolyElement]) -> bool:
        """Add a vector; return whether it enlarged the span."""
        row = self.reduce(vector)
        if not row:
            return False
        position = self._position

        def preference(key: K) -> tuple[int, Any]:
            degree = total_degree(row[key]) if self._degree_first else 0
            return (degree, position(key) if position else 0)

        self._pivots[min(row, key=preference)] = row
        return True


# *====[ Univariate Smith form ]====*


@dataclass(frozen=True)
class SmithDecomposition:
    """U·M·V = diagonal, with U and V invertible over ℚ[d].

    Attributes:
        invariant_factors: Monic nonzero diagonal entries d1 | d2 | … | dr.
        left: The row transform U (square, rows of M).
        right: The column transform V (square, columns of M).
    """

    invariant_factors: tuple[PolyElement, ...]
    left: tuple[tuple[PolyElement, ...], ...]
    right: tuple[tuple[PolyElement, ...], ...]


def smith_decomposition(
    grid: Sequence[Sequence[Any]],
    ring: PolyRing | None = None,
    ncols: int | None = None,
) -> SmithDecomposition:
    """Smith normal form over ℚ[d] with its unimodular transforms.

    Args:
        grid: Matrix rows of univariate polynomials (or values convertible
            into `ring`).
        ring: The univariate ring; defaults to `operator_ring()`.
        ncols: Column count, needed when `grid` has no rows.

    Returns:
        The invariant factors and transforms U, V with U·M·V diagonal.
    """
    ring = ring or operator_ring()
    width = ncols if ncols is not None else (len(grid[0]) if grid else 0)
    values = [[ring(value) for value in row] for row in grid]
    matrix = DomainMatrix(values, (len(grid), width), ring.to_domain())
    diagonal, left, right = smith_normal_decomp(matrix)
    entries, rows = diagonal.to_list(), left.to_list()
    factors: list[PolyElement] = []
    for t in range(min(len(grid), width)):
        factor = entries[t][t]
        if not factor:
            break
        inverse = ring.domain.quo(ring.domain.one, factor.LC)
        rows[t] = [value.mul_ground(inverse) for value in rows[t]]
        factors.append(factor.mul_ground(inverse))
    _logger.debug(
        "Smith form of a %dx%d matrix.",
        len(grid),
        width,
        extra={"extra_data": {"factors": [str(factor) for factor in factors]}},
    )
    return SmithDecomposition(
        tuple(factors),
        tuple(tuple(row) for row in rows),
        tuple(tuple(row) for row in right.to_list()),
    )


def smith_form(grid: Sequence[Sequence[Any]], ring: PolyRing | None = None) -> tuple[Any, ...]:
    """Monic invariant factors d1 | d2 | … | dr of a matrix over ℚ[d].

    Examples:
        >>> R = operator_ring()
        >>> (d,) = R.gens
        >>> [str(f) for f in smith_form([[d**2, 0], [0, d]])]
        ['d', 'd**2']
        >>> [str(f) for f in smith_form([[d**2 - 1, 0], [0, d]])]
        ['1', 'd**3 - d']
    """
    return smith_decomposition(grid, ring).invariant_factors


def rational_roots(p: PolyElement) -> tuple[list[tuple[Any, int]], bool]:
    """Rational roots of a univariate polynomial with multiplicities.

    Returns:
        The (root, multiplicity) pairs in increasing order and whether the
        polynomial splits into linear factors over ℚ.

    Examples:
        >>> (d,) = operator_ring().gens
        >>> roots, splits = rational_roots(d**3 - d)
        >>> [format_rational(r) for r, _ in roots], splits
        (['-1', '0', '1'], True)
        >>> rational_roots(d**2 + 1)[1]
        False
    """
    _, factors = p.factor_list()
    roots: list[tuple[Any, int]] = []
    splits = True
    for factor, multiplicity in factors:
        if factor.degree() != 1:
            splits = False
            continue
        slope = factor.get((1,), QQ.zero)
        offset = factor.get((0,), QQ.zero)
        roots.append((-offset / slope, multiplicity))
    roots.sort(key=lambda item: item[0])
    return roots, splits
