"""Jet-space combinatorics and the core linear differential operators.

A jet coordinate y^k_μ is the pair ``(k, μ)`` of a 0-based unknown index and a
`MultiIndex`; a linear form in jet coordinates is a plain ``dict`` from jets to
nonzero polynomials of `coefficient_ring(n)`. Rows of a `DiffOperator` are such
forms. Every matrix layout follows `jet_key`: graded by order, then class
descending, then the exponent tuple, then the unknown.

Variable indices are 1-based in the public API; unknowns and rows are 0-based.
"""

import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from math import comb, prod
from typing import Any

from sympy.polys.rings import PolyElement, PolyRing

from jetspencer.core.errors import DimensionMismatchError, PreconditionError
from jetspencer.core.exactalg import (
    PolyMatrix,
    RowSpace,
    coefficient_ring,
    format_rational,
    nullspace,
    poly_diff,
    rank,
    total_degree,
)

__all__ = [
    "DiffOperator",
    "Jet",
    "JetForm",
    "JetSection",
    "MultiIndex",
    "PolyForm",
    "Prolongation",
    "SymbolBasis",
    "SymbolMatrix",
    "adjoint",
    "cohomology_dimension",
    "compose",
    "delta_apply",
    "delta_map",
    "delta_matrix",
    "derive_form",
    "ext_derivative",
    "exterior_wedge",
    "forms_matrix",
    "forms_rank",
    "holonomic_lift",
    "identity_operator",
    "jet_columns",
    "jet_key",
    "jet_preference",
    "multi_indices",
    "multi_indices_upto",
    "prolong",
    "prolongation_matrix",
    "prolonged_forms",
    "render_form",
    "render_operator",
    "render_poly",
    "spencer_apply",
    "spencer_components",
    "symbol",
    "symbol_at",
    "symbol_basis",
    "top_columns",
    "wedge_indices",
]

_logger = logging.getLogger(__name__)


# *====[ Multi-indices and jets ]====*


@dataclass(frozen=True, slots=True)
class MultiIndex:
    """Exponent vector μ = (μ1, …, μn) of a derivative ∂^μ.

    Examples:
        >>> mu = MultiIndex((0, 2, 1))
        >>> mu.length, mu.cls
        (3, 2)
        >>> MultiIndex.zero(3).cls
        4
        >>> mu.raised(1).exponents
        (1, 2, 1)
    """

    exponents: tuple[int, ...]

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        """The zero multi-index of n variables."""
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, i: int) -> "MultiIndex":
        """The unit multi-index 1_i (1-based i)."""
        return cls.zero(n).raised(i)

    @classmethod
    def from_derivatives(cls, n: int, indices: Iterable[int]) -> "MultiIndex":
        """Multi-index of ∂_{i1}∂_{i2}… from 1-based variable indices.

        Examples:
            >>> MultiIndex.from_derivatives(2, [1, 1, 2]).exponents
            (2, 1)
        """
        exponents = [0] * n
        for i in indices:
            if not 1 <= i <= n:
                error_msg = f"Derivative index {i} is outside 1..{n}."
                raise PreconditionError(error_msg)
            exponents[i - 1] += 1
        return cls(tuple(exponents))

    @property
    def n(self) -> int:
        """Number of variables."""
        return len(self.exponents)

    @property
    def length(self) -> int:
        """|μ| = Σ μ_i."""
        return sum(self.exponents)

    @property
    def cls(self) -> int:
        """Smallest 1-based i with μ_i ≠ 0; n + 1 for the zero index."""
        for i, exponent in enumerate(self.exponents, start=1):
            if exponent:
                return i
        return self.n + 1

    def raised(self, i: int) -> "MultiIndex":
        """μ + 1_i."""
        exponents = list(self.exponents)
        exponents[i - 1] += 1
        return MultiIndex(tuple(exponents))

    def lowered(self, i: int) -> "MultiIndex":
        """μ − 1_i; requires μ_i ≥ 1."""
        exponents = list(self.exponents)
        exponents[i - 1] -= 1
        return MultiIndex(tuple(exponents))

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        """Componentwise sum."""
        pairs = zip(self.exponents, other.exponents, strict=True)
        return MultiIndex(tuple(a + b for a, b in pairs))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        """Componentwise difference; requires `other` ≤ `self`."""
        pairs = zip(self.exponents, other.exponents, strict=True)
        return MultiIndex(tuple(a - b for a, b in pairs))

    def dominates(self, other: "MultiIndex") -> bool:
        """Whether other ≤ self componentwise."""
        return all(a >= b for a, b in zip(self.exponents, other.exponents, strict=True))

    def binomial(self, other: "MultiIndex") -> int:
        """Multi-binomial C(μ, ν) = Π C(μ_i, ν_i)."""
        return prod(comb(a, b) for a, b in zip(self.exponents, other.exponents, strict=True))

    def derivatives(self) -> tuple[int, ...]:
        """Expanded 1-based derivative list, e.g. (2, 1) ↦ (1, 1, 2)."""
        return tuple(
            i for i, exponent in enumerate(self.exponents, start=1) for _ in range(exponent)
        )

    @property
    def sort_key(self) -> tuple[int, int, tuple[int, ...]]:
        """Graded order, class descending, then exponents."""
        return (self.length, -self.cls, self.exponents)


Jet = tuple[int, MultiIndex]
JetForm = dict[Jet, PolyElement]


def jet_key(jet: Jet) -> tuple[int, int, tuple[int, ...], int]:
    """Deterministic ordering key of jet coordinates."""
    k, mu = jet
    return (*mu.sort_key, k)


def jet_preference(jet: Jet) -> tuple[int, int, tuple[int, ...], int]:
    """Pivot preference: highest order first, then highest class, then jet order."""
    k, mu = jet
    return (-mu.length, -mu.cls, mu.exponents, k)


def multi_indices(n: int, order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of exact length `order`, in jet order.

    Examples:
        >>> [mu.exponents for mu in multi_indices(2, 2)]
        [(0, 2), (1, 1), (2, 0)]
    """
    if order < 0:
        return ()
    found = []
    for choice in combinations_with_replacement(range(1, n + 1), order):
        found.append(MultiIndex.from_derivatives(n, choice))
    return tuple(sorted(found, key=lambda mu: mu.sort_key))


def multi_indices_upto(n: int, order: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length at most `order`, in jet order."""
    return tuple(mu for length in range(order + 1) for mu in multi_indices(n, length))


def top_columns(m: int, n: int, order: int) -> tuple[Jet, ...]:
    """Jet coordinates of exact order, i.e. a basis of S_order T*⊗E."""
    return tuple(sorted(((k, mu) for mu in multi_indices(n, order) for k in range(m)), key=jet_key))


def jet_columns(m: int, n: int, order: int) -> tuple[Jet, ...]:
    """Jet coordinates of order at most `order`, i.e. a basis of the fibre of J_order(E).

    Examples:
        >>> len(jet_columns(2, 2, 1))
        6
    """
    return tuple(jet for length in range(order + 1) for jet in top_columns(m, n, length))


def wedge_indices(n: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing 1-based index tuples of size `degree`."""
    if degree < 0 or degree > n:
        return ()
    return tuple(combinations(range(1, n + 1), degree))


# *====[ Linear forms in jet coordinates ]====*


def _accumulate[K](
    target: dict[K, PolyElement],
    source: Mapping[K, PolyElement],
    factor: PolyElement | int = 1,
) -> None:
    """target += factor·source, dropping cancelled entries."""
    for key, value in source.items():
        updated = target[key] + factor * value if key in target else factor * value
        if updated:
            target[key] = updated
        else:
            target.pop(key, None)


def derive_form(form: Mapping[Jet, PolyElement], i: int) -> JetForm:
    """Total derivative d_i(Σ a·y^k_μ) = Σ a·y^k_{μ+1_i} + ∂_i a·y^k_μ.

    Examples:
        >>> R = coefficient_ring(3)
        >>> x1, x2, x3 = R.gens
        >>> form = {(0, MultiIndex((1, 0, 0))): x3, (0, MultiIndex.zero(3)): R(-1)}
        >>> result = derive_form(form, 3)
        >>> sorted((k, mu.exponents, str(a)) for (k, mu), a in result.items())
        [(0, (0, 0, 1), '-1'), (0, (1, 0, 0), '1'), (0, (1, 0, 1), 'x3')]
    """
    result: JetForm = {}
    for (k, mu), coefficient in form.items():
        _accumulate(result, {(k, mu.raised(i)): coefficient})
        derivative = poly_diff(coefficient, i)
        if derivative:
            _accumulate(result, {(k, mu): derivative})
    return result


class _DerivativeCache:
    """Memoized total derivatives D_ν of a list of forms."""

    def __init__(self, forms: Sequence[Mapping[Jet, PolyElement]], n: int) -> None:
        self._forms = forms
        self._zero = MultiIndex.zero(n)
        self._cache: dict[tuple[int, MultiIndex], JetForm] = {}

    def get(self, index: int, nu: MultiIndex) -> JetForm:
        key = (index, nu)
        if key not in self._cache:
            if nu == self._zero:
                self._cache[key] = dict(self._forms[index])
            else:
                i = nu.cls
                self._cache[key] = derive_form(self.get(index, nu.lowered(i)), i)
        return self._cache[key]


def form_order(form: Mapping[Jet, PolyElement]) -> int:
    """Highest derivative order appearing in a form; 0 for the zero form."""
    return max((mu.length for _, mu in form), default=0)


def forms_matrix(
    forms: Sequence[Mapping[Any, PolyElement]],
    ring: PolyRing,
    columns: Sequence[Any],
) -> PolyMatrix:
    """Coefficient matrix of forms over the given column keys."""
    index = {column: j for j, column in enumerate(columns)}
    rows = []
    for form in forms:
        row = {}
        for key, value in form.items():
            if key not in index:
                error_msg = f"Form references a column {key!r} outside the layout."
                raise DimensionMismatchError(error_msg)
            row[index[key]] = value
        rows.append(row)
    return PolyMatrix.from_rows(ring, rows, len(columns))


def forms_rank(forms: Sequence[Mapping[Jet, PolyElement]], ring: PolyRing) -> int:
    """Generic rank of a family of jet forms."""
    columns = sorted({jet for form in forms for jet in form}, key=jet_key)
    return rank(forms_matrix(forms, ring, columns))


# *====[ Operators ]====*


@dataclass(frozen=True, eq=False)
class DiffOperator:
    """A p×m matrix of linear differential operators with ℚ[x] coefficients.

    Row τ is the linear form Φ^τ = Σ a^{τμ}_k(x)·y^k_μ. Zero coefficients are
    dropped on construction; rows are never mutated afterwards.

    Attributes:
        n: Number of independent variables.
        m: Number of unknowns (columns).
        rows: One jet form per equation.
    """

    n: int
    m: int
    rows: tuple[JetForm, ...] = ()

    def __post_init__(self) -> None:
        """Validate jets and normalize coefficients into the shared ring."""
        ring = coefficient_ring(self.n)
        cleaned = []
        for tau, row in enumerate(self.rows):
            clean: JetForm = {}
            for (k, mu), value in row.items():
                if not 0 <= k < self.m or mu.n != self.n:
                    error_msg = (
                        f"Row {tau} references jet ({k}, {mu.exponents}) "
                        f"outside m={self.m}, n={self.n}."
                    )
                    raise DimensionMismatchError(error_msg)
                coefficient = ring(value)
                if coefficient:
                    clean[k, mu] = coefficient
            cleaned.append(clean)
        object.__setattr__(self, "rows", tuple(cleaned))

    @classmethod
    def build(
        cls,
        n: int,
        m: int,
        rows: Sequence[Mapping[tuple[int, tuple[int, ...]], Any]],
    ) -> "DiffOperator":
        """Build from rows keyed by (unknown, 1-based derivative tuple).

        Examples:
            >>> grad = DiffOperator.build(2, 1, [{(0, (1,)): 1}, {(0, (2,)): 1}])
            >>> grad.p, grad.order
            (2, 1)
        """
        forms = [
            {
                (k, MultiIndex.from_derivatives(n, derivatives)): value
                for (k, derivatives), value in row.items()
            }
            for row in rows
        ]
        return cls(n, m, tuple(forms))

    def __eq__(self, other: object) -> bool:
        """Entry-by-entry equality."""
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return (self.n, self.m, self.rows) == (other.n, other.m, other.rows)

    __hash__ = None  # type: ignore[assignment]

    @property
    def ring(self) -> PolyRing:
        """Coefficient ring ℚ[x1, …, xn]."""
        return coefficient_ring(self.n)

    @property
    def p(self) -> int:
        """Number of equations."""
        return len(self.rows)

    @property
    def order(self) -> int:
        """Highest derivative order q."""
        return max((form_order(row) for row in self.rows), default=0)

    def row_order(self, tau: int) -> int:
        """Order of row τ."""
        return form_order(self.rows[tau])

    @property
    def is_zero(self) -> bool:
        """Whether every row is the zero form."""
        return not any(self.rows)

    @property
    def max_coefficient_degree(self) -> int:
        """Largest total degree among coefficients."""
        return max((total_degree(a) for row in self.rows for a in row.values()), default=0)

    def with_rows(self, rows: Iterable[Mapping[Jet, PolyElement]]) -> "DiffOperator":
        """Same shape, different rows."""
        return DiffOperator(self.n, self.m, tuple(dict(row) for row in rows))

    def stack(self, other: "DiffOperator") -> "DiffOperator":
        """Rows of self followed by rows of other."""
        if (self.n, self.m) != (other.n, other.m):
            error_msg = "Cannot stack operators on different jet spaces."
            raise DimensionMismatchError(error_msg)
        return self.with_rows((*self.rows, *other.rows))

    def scale_rows(self, factors: Sequence[int | PolyElement]) -> "DiffOperator":
        """Multiply row τ by factors[τ]."""
        return self.with_rows(
            {jet: factor * value for jet, value in row.items()}
            for row, factor in zip(self.rows, factors, strict=True)
        )


def identity_operator(m: int, n: int) -> DiffOperator:
    """The order-0 identity on m unknowns."""
    zero = MultiIndex.zero(n)
    ring = coefficient_ring(n)
    return DiffOperator(n, m, tuple({(k, zero): ring.one} for k in range(m)))


def compose(outer: DiffOperator, inner: DiffOperator) -> DiffOperator:
    """Normal form of outer∘inner, Leibniz rule applied to coefficients.

    Raises:
        DimensionMismatchError: If outer acts on a different number of
            equations than inner produces.

    Examples:
        >>> grad = DiffOperator.build(2, 1, [{(0, (1,)): 1}, {(0, (2,)): 1}])
        >>> curl = DiffOperator.build(2, 2, [{(0, (2,)): 1, (1, (1,)): -1}])
        >>> compose(curl, grad).is_zero
        True
    """
    if outer.n != inner.n or outer.m != inner.p:
        error_msg = (
            f"Cannot compose a {outer.p}x{outer.m} operator with a {inner.p}x{inner.m} operator."
        )
        raise DimensionMismatchError(error_msg)
    cache = _DerivativeCache(inner.rows, inner.n)
    rows = []
    for row in outer.rows:
        result: JetForm = {}
        for (tau, mu), coefficient in row.items():
            _accumulate(result, cache.get(tau, mu), coefficient)
        rows.append(result)
    return DiffOperator(inner.n, inner.m, tuple(rows))


def adjoint(operator: DiffOperator) -> DiffOperator:
    """Formal adjoint obtained by integration by parts.

    The term a·d_μ on unknown k of row τ becomes (−1)^{|μ|} d_μ∘(a·) on the
    test unknown λ^τ in row k, expanded with coefficients on the left.

    Examples:
        >>> grad = DiffOperator.build(2, 1, [{(0, (1,)): 1}, {(0, (2,)): 1}])
        >>> div = adjoint(grad)
        >>> div.p, div.m
        (1, 2)
        >>> adjoint(div) == grad
        True
    """
    n = operator.n
    zero = MultiIndex.zero(n)
    rows: list[JetForm] = [{} for _ in range(operator.m)]
    for tau, row in enumerate(operator.rows):
        for (k, mu), coefficient in row.items():
            expanded: JetForm = {(tau, zero): coefficient}
            for i in mu.derivatives():
                expanded = derive_form(expanded, i)
            _accumulate(rows[k], expanded, -1 if mu.length % 2 else 1)
    return DiffOperator(n, operator.p, tuple(rows))


# *====[ Prolongation ]====*


@dataclass(frozen=True)
class Prolongation:
    """Undeduplicated prolongation rows d_ν Φ^τ with their labels.

    Attributes:
        labels: (τ, ν) per row.
        forms: The prolonged forms, aligned with `labels`.
        columns: Jet layout of the matrix.
        matrix: Coefficient matrix of `forms` over `columns`.
    """

    labels: tuple[tuple[int, MultiIndex], ...]
    forms: tuple[JetForm, ...]
    columns: tuple[Jet, ...]
    matrix: PolyMatrix


def prolongation_matrix(operator: DiffOperator, t: int) -> Prolongation:
    """All d_ν Φ^τ with |ν| ≤ t over the jets of order ≤ q + t."""
    cache = _DerivativeCache(operator.rows, operator.n)
    labels = []
    forms = []
    for tau in range(operator.p):
        for nu in multi_indices_upto(operator.n, t):
            labels.append((tau, nu))
            forms.append(cache.get(tau, nu))
    columns = jet_columns(operator.m, operator.n, operator.order + t)
    matrix = forms_matrix(forms, operator.ring, columns)
    return Prolongation(tuple(labels), tuple(forms), columns, matrix)


def prolonged_forms(operator: DiffOperator, target: int) -> list[JetForm]:
    """Equations of R_target: d_ν Φ^τ for |ν| ≤ target − ord Φ^τ."""
    cache = _DerivativeCache(operator.rows, operator.n)
    forms = []
    for tau in range(operator.p):
        for nu in multi_indices_upto(operator.n, target - operator.row_order(tau)):
            forms.append(cache.get(tau, nu))
    return forms


def prolong(operator: DiffOperator, r: int) -> DiffOperator:
    """The r-th prolongation with linearly dependent rows removed.

    Original rows come first; derivatives are added by increasing order and
    kept only when independent over ℚ(x) of the rows already kept.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (2, 2)): 1}, {(0, (1, 2)): 1}])
        >>> prolong(D, 1).p
        5
        >>> prolong(D, 0) == D
        True
    """
    if r < 0:
        error_msg = f"Prolongation order must be nonnegative, got {r}."
        raise PreconditionError(error_msg)
    space: RowSpace[Jet] = RowSpace(operator.ring, position=jet_preference)
    kept = [row for row in operator.rows if space.add(row)]
    cache = _DerivativeCache(operator.rows, operator.n)
    for length in range(1, r + 1):
        for tau in range(operator.p):
            for nu in multi_indices(operator.n, length):
                form = cache.get(tau, nu)
                if space.add(form):
                    kept.append(form)
    return operator.with_rows(kept)


# *====[ Symbols and the δ-complex ]====*


@dataclass(frozen=True)
class SymbolMatrix:
    """Top-order coefficients of a system at a given order.

    Attributes:
        order: The order N of the symbol component g_N.
        m: Number of unknowns.
        n: Number of variables.
        columns: Basis jets of S_N T*⊗E.
        matrix: One row per equation, over `columns`.
    """

    order: int
    m: int
    n: int
    columns: tuple[Jet, ...]
    matrix: PolyMatrix

    @property
    def rank(self) -> int:
        """Rank of the symbol map."""
        return rank(self.matrix)

    @property
    def dimension(self) -> int:
        """dim g_N."""
        return len(self.columns) - self.rank


def _top_part(form: Mapping[Jet, PolyElement], order: int) -> JetForm:
    return {(k, mu): value for (k, mu), value in form.items() if mu.length == order}


def symbol(operator: DiffOperator) -> SymbolMatrix:
    """Coefficients a^{τμ}_k with |μ| = q of the operator itself.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (2,)): 1}])
        >>> symbol(D).dimension
        1
    """
    q = operator.order
    columns = top_columns(operator.m, operator.n, q)
    forms = [_top_part(row, q) for row in operator.rows]
    matrix = forms_matrix(forms, operator.ring, columns)
    return SymbolMatrix(q, operator.m, operator.n, columns, matrix)


def symbol_at(operator: DiffOperator, order: int) -> SymbolMatrix:
    """Symbol g_order of the system, from the shifted top parts of its rows."""
    n = operator.n
    columns = top_columns(operator.m, n, order)
    forms: list[JetForm] = []
    for row in operator.rows:
        row_order = form_order(row)
        if row_order > order or not row:
            continue
        top = _top_part(row, row_order)
        for nu in multi_indices(n, order - row_order):
            forms.append({(k, mu + nu): value for (k, mu), value in top.items()})
    return SymbolMatrix(order, operator.m, n, columns, forms_matrix(forms, operator.ring, columns))


@dataclass(frozen=True)
class SymbolBasis:
    """A basis of a symbol component g_N ⊂ S_N T*⊗E."""

    order: int
    m: int
    n: int
    vectors: tuple[JetForm, ...] = field(default_factory=tuple)

    @property
    def dimension(self) -> int:
        """dim g_N."""
        return len(self.vectors)

    @classmethod
    def full(cls, m: int, n: int, order: int) -> "SymbolBasis":
        """The unit basis of S_N T*⊗E."""
        ring = coefficient_ring(n)
        return cls(order, m, n, tuple({jet: ring.one} for jet in top_columns(m, n, order)))


def symbol_basis(matrix: SymbolMatrix) -> SymbolBasis:
    """Kernel basis of a symbol matrix."""
    vectors = []
    for vector in nullspace(matrix.matrix):
        pairs = zip(matrix.columns, vector, strict=True)
        vectors.append({jet: value for jet, value in pairs if value})
    return SymbolBasis(matrix.order, matrix.m, matrix.n, tuple(vectors))


def _shuffle_sign(position: int) -> int:
    return -1 if position % 2 else 1


def delta_apply(
    element: Mapping[tuple[tuple[int, ...], Jet], PolyElement],
    n: int,
) -> dict[tuple[tuple[int, ...], Jet], PolyElement]:
    """Spencer map δ on a form-valued symbol element.

    The component ω^k_{μ,I} contributes (−1)^{pos(i)}·ω to (δω)^k_{μ−1_i, I∪{i}}
    for every i ∉ I with μ_i ≥ 1, pos(i) being the place of i in I∪{i}.
    """
    result: dict[tuple[tuple[int, ...], Jet], PolyElement] = {}
    for (indices, (k, mu)), value in element.items():
        for i in range(1, n + 1):
            if i in indices or mu.exponents[i - 1] == 0:
                continue
            target = tuple(sorted((*indices, i)))
            sign = _shuffle_sign(target.index(i))
            _accumulate(result, {(target, (k, mu.lowered(i))): value}, sign)
    return result


def delta_matrix(m: int, n: int, order: int, degree: int) -> PolyMatrix:
    """Ambient δ: ∧^degree T*⊗S_order T*⊗E → ∧^{degree+1} T*⊗S_{order−1} T*⊗E."""
    ring = coefficient_ring(n)
    sources = [
        (indices, jet) for indices in wedge_indices(n, degree) for jet in top_columns(m, n, order)
    ]
    targets = [
        (indices, jet)
        for indices in wedge_indices(n, degree + 1)
        for jet in top_columns(m, n, order - 1)
    ]
    index = {target: row for row, target in enumerate(targets)}
    entries = {}
    for column, source in enumerate(sources):
        for target, value in delta_apply({source: ring.one}, n).items():
            entries[index[target], column] = value
    return PolyMatrix(ring, len(targets), len(sources), entries)


def delta_map(basis: SymbolBasis, degree: int) -> PolyMatrix:
    """Matrix of δ on ∧^degree T*⊗g_N, columns indexed by (I, basis vector).

    For degree ≥ n the target is zero and the matrix has no rows.
    """
    n = basis.n
    ring = coefficient_ring(n)
    targets = [
        (indices, jet)
        for indices in wedge_indices(n, degree + 1)
        for jet in top_columns(basis.m, n, basis.order - 1)
    ]
    index = {target: row for row, target in enumerate(targets)}
    columns = [(indices, j) for indices in wedge_indices(n, degree) for j in range(basis.dimension)]
    entries = {}
    for column, (indices, j) in enumerate(columns):
        element = {(indices, jet): value for jet, value in basis.vectors[j].items()}
        for target, value in delta_apply(element, n).items():
            entries[index[target], column] = value
    return PolyMatrix(ring, len(targets), len(columns), entries)


def cohomology_dimension(operator: DiffOperator, order: int, degree: int) -> int:
    """dim H^degree(g_order) of the system's symbol δ-complex."""
    n = operator.n
    if not 0 <= degree <= n:
        error_msg = f"Form degree {degree} is outside 0..{n}."
        raise PreconditionError(error_msg)
    here = symbol_basis(symbol_at(operator, order))
    cycles = comb(n, degree) * here.dimension - rank(delta_map(here, degree))
    if degree == 0:
        return cycles
    above = symbol_basis(symbol_at(operator, order + 1))
    boundaries = rank(delta_map(above, degree - 1))
    _logger.debug(
        "H^%d(g_%d): cycles %d, boundaries %d.",
        degree,
        order,
        cycles,
        boundaries,
    )
    return cycles - boundaries


# *====[ Jet sections and the Spencer operator ]====*


@dataclass(frozen=True)
class JetSection:
    """Polynomial jet section f^k_μ(x), |μ| ≤ order; missing entries are zero."""

    n: int
    m: int
    order: int
    components: Mapping[Jet, PolyElement] = field(default_factory=dict)


def holonomic_lift(functions: Sequence[PolyElement], order: int) -> JetSection:
    """j_order(f): the section f^k_μ = ∂^μ f^k."""
    ring = functions[0].ring
    n = ring.ngens
    components: JetForm = {}
    for k, function in enumerate(functions):
        for mu in multi_indices_upto(n, order):
            value = function
            for i in mu.derivatives():
                value = poly_diff(value, i)
            if value:
                components[k, mu] = value
    return JetSection(n, len(functions), order, components)


def spencer_components[T](
    components: Mapping[Jet, T],
    shape: tuple[int, int, int],
    derive: Callable[[T, int], T],
    zero: T,
) -> dict[tuple[int, MultiIndex, int], Any]:
    """Components ∂_i f^k_μ − f^k_{μ+1_i} for |μ| < order.

    Args:
        components: Jet components of a section.
        shape: (m, n, order) of the section.
        derive: Partial derivative ∂_i on component values.
        zero: The zero component value.

    Returns:
        A map (k, μ, i) -> component, including zero components.
    """
    m, n, order = shape
    result = {}
    for k in range(m):
        for mu in multi_indices_upto(n, order - 1):
            for i in range(1, n + 1):
                own = components.get((k, mu), zero)
                lifted = components.get((k, mu.raised(i)), zero)
                result[k, mu, i] = derive(own, i) - lifted
    return result


def spencer_apply(section: JetSection) -> dict[tuple[int, MultiIndex, int], PolyElement]:
    """Spencer operator D f_{q+1} = j_1(f_q) − f_{q+1} in components.

    Examples:
        >>> R = coefficient_ring(2)
        >>> x1, x2 = R.gens
        >>> values = spencer_apply(holonomic_lift([x1 * x2], 2)).values()
        >>> all(not value for value in values)
        True
    """
    ring = coefficient_ring(section.n)
    return spencer_components(
        section.components,
        (section.m, section.n, section.order),
        poly_diff,
        ring.zero,
    )


# *====[ Exterior forms ]====*


@dataclass(frozen=True)
class PolyForm:
    """Exterior form Σ ω_I dx^I with polynomial components, I strictly increasing."""

    n: int
    degree: int
    components: Mapping[tuple[int, ...], PolyElement] = field(default_factory=dict)

    @property
    def is_zero(self) -> bool:
        """Whether every component vanishes."""
        return not any(self.components.values())


def ext_derivative(form: PolyForm) -> PolyForm:
    """Exterior derivative dω = ∂_iω_I dx^i∧dx^I.

    Examples:
        >>> R = coefficient_ring(2)
        >>> x1, x2 = R.gens
        >>> result = ext_derivative(PolyForm(2, 1, {(1,): x2}))
        >>> {key: str(value) for key, value in result.components.items()}
        {(1, 2): '-1'}
    """
    result: dict[tuple[int, ...], PolyElement] = {}
    if form.degree >= form.n:
        return PolyForm(form.n, form.degree + 1, result)
    for indices, value in form.components.items():
        for i in range(1, form.n + 1):
            if i in indices:
                continue
            derivative = poly_diff(value, i)
            if not derivative:
                continue
            target = tuple(sorted((*indices, i)))
            _accumulate(result, {target: derivative}, _shuffle_sign(target.index(i)))
    return PolyForm(form.n, form.degree + 1, result)


def _permutation_sign(sequence: Sequence[int]) -> int:
    inversions = sum(1 for a, b in combinations(sequence, 2) if a > b)
    return -1 if inversions % 2 else 1


def exterior_wedge(left: PolyForm, right: PolyForm) -> PolyForm:
    """Wedge product α∧β."""
    result: dict[tuple[int, ...], PolyElement] = {}
    for first, a in left.components.items():
        for second, b in right.components.items():
            if set(first) & set(second):
                continue
            merged = (*first, *second)
            _accumulate(result, {tuple(sorted(merged)): a * b}, _permutation_sign(merged))
    return PolyForm(left.n, left.degree + right.degree, result)


# *====[ Rendering ]====*


def _monomial_text(monom: tuple[int, ...], names: Sequence[str]) -> str:
    factors = []
    for name, exponent in zip(names, monom, strict=True):
        if exponent == 1:
            factors.append(name)
        elif exponent > 1:
            factors.append(f"{name}^{exponent}")
    return "*".join(factors)


def render_poly(p: PolyElement, names: Sequence[str]) -> str:
    """Render a polynomial in DSL syntax, e.g. ``x3^2 - 1/2*x1``.

    Examples:
        >>> R = coefficient_ring(2)
        >>> x1, x2 = R.gens
        >>> render_poly(x1**2 - x2 / 2, ["x", "y"])
        'x^2 - 1/2*y'
    """
    if not p:
        return "0"
    pieces: list[str] = []
    for monom, coeff in p.terms():
        monomial = _monomial_text(monom, names)
        magnitude = format_rational(abs(coeff))
        if monomial and magnitude == "1":
            body = monomial
        elif monomial:
            body = f"{magnitude}*{monomial}"
        else:
            body = magnitude
        if not pieces:
            pieces.append(f"-{body}" if coeff < 0 else body)
        else:
            pieces.append(f"- {body}" if coeff < 0 else f"+ {body}")
    return " ".join(pieces)


def _jet_text(jet: Jet, unknowns: Sequence[str]) -> str:
    k, mu = jet
    if mu.length == 0:
        return unknowns[k]
    return f"d({unknowns[k]}; {' '.join(map(str, mu.derivatives()))})"


def render_form(
    form: Mapping[Jet, PolyElement],
    unknowns: Sequence[str],
    variables: Sequence[str],
) -> str:
    """Render a jet form in DSL syntax, highest jets first."""
    if not form:
        return "0"
    pieces: list[str] = []
    for jet in sorted(form, key=jet_key, reverse=True):
        coefficient = form[jet]
        negative = len(coefficient) == 1 and coefficient.LC < 0
        magnitude = -coefficient if negative else coefficient
        jet_text = _jet_text(jet, unknowns)
        if magnitude == magnitude.ring.one:
            body = jet_text
        elif len(magnitude) == 1:
            body = f"{render_poly(magnitude, variables)}*{jet_text}"
        else:
            body = f"({render_poly(magnitude, variables)})*{jet_text}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(pieces)


def render_operator(
    operator: DiffOperator,
    unknowns: Sequence[str] | None = None,
    variables: Sequence[str] | None = None,
) -> list[str]:
    """Render each row as ``EXPR = 0``.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (1, 2)): 1, (0, ()): -2}])
        >>> render_operator(D)
        ['d(u1; 1 2) - 2*u1 = 0']
    """
    unknowns = unknowns or [f"u{k}" for k in range(1, operator.m + 1)]
    variables = variables or [f"x{i}" for i in range(1, operator.n + 1)]
    return [f"{render_form(row, unknowns, variables)} = 0" for row in operator.rows]
