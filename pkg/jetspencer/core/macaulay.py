"""Differential modules over ℚ[d] and the solution spaces of their inverse systems.

A presentation holds relations A(d)·y = 0 on m unknowns of one variable x.
The Smith form U·A·V = diag(d_1, …, d_r) splits the module into cyclic parts
ℚ[d]/(d_t); solutions are y = V·w with d_t(∂)w_t = 0, written as exponential
polynomials Σ p_λ(x)·e^{λx} with rational λ.
"""

import logging
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement

from jetspencer.core.errors import IrrationalEigenvalueError, NotTorsionError, PreconditionError
from jetspencer.core.exactalg import (
    PolyMatrix,
    constant_value,
    format_rational,
    operator_ring,
    rank,
    rational_roots,
    smith_decomposition,
    univariate_ring,
)
from jetspencer.core.jetcalc import DiffOperator, MultiIndex, render_poly, spencer_components

__all__ = [
    "ExpPoly",
    "GenerationCertificate",
    "ModuleDecomposition",
    "ModulePresentation",
    "SolutionSpace",
    "decompose",
    "min_generators",
    "presentation_from_operator",
    "solution_basis",
    "spencer_residual",
    "verify_generators",
]

_logger = logging.getLogger(__name__)

ExpVector = tuple["ExpPoly", ...]


# *====[ Presentations ]====*


@dataclass(frozen=True)
class ModulePresentation:
    """M = ℚ[d]^m / (rows of `relations`).

    Attributes:
        m: Number of unknowns.
        relations: Rows of operators in `operator_ring()`, zero rows dropped.
    """

    m: int
    relations: tuple[tuple[PolyElement, ...], ...] = ()

    def __post_init__(self) -> None:
        """Normalize entries into ℚ[d] and drop zero rows."""
        ring = operator_ring()
        rows = []
        for row in self.relations:
            if len(row) != self.m:
                error_msg = f"Relation {row} does not have {self.m} entries."
                raise PreconditionError(error_msg)
            converted = tuple(ring(value) for value in row)
            if any(converted):
                rows.append(converted)
        object.__setattr__(self, "relations", tuple(rows))


def presentation_from_operator(operator: DiffOperator) -> ModulePresentation:
    """Read a constant-coefficient operator in one variable as a presentation.

    Examples:
        >>> D = DiffOperator.build(1, 1, [{(0, (1, 1, 1)): 1, (0, (1,)): -1}])
        >>> [str(entry) for entry in presentation_from_operator(D).relations[0]]
        ['d**3 - d']
    """
    if operator.n != 1:
        error_msg = f"Module presentations need one independent variable, got n={operator.n}."
        raise PreconditionError(error_msg)
    ring = operator_ring()
    (d,) = ring.gens
    rows = []
    for row in operator.rows:
        entries = [ring.zero] * operator.m
        for (k, mu), coefficient in row.items():
            if not coefficient.is_ground:
                error_msg = "Module presentations need constant coefficients."
                raise PreconditionError(error_msg)
            entries[k] += ring.ground_new(constant_value(coefficient)) * d**mu.length
        rows.append(tuple(entries))
    return ModulePresentation(operator.m, tuple(rows))


@dataclass(frozen=True)
class ModuleDecomposition:
    """M ≅ ⊕ ℚ[d]/(d_t) ⊕ ℚ[d]^free_rank.

    Attributes:
        invariant_factors: Monic d_1 | d_2 | … | d_r, units included.
        free_rank: m − r.
        right: The column transform V of the Smith form.
    """

    invariant_factors: tuple[PolyElement, ...]
    free_rank: int
    right: tuple[tuple[PolyElement, ...], ...] = field(default=(), repr=False)

    @property
    def torsion(self) -> bool:
        """Whether the module has no free part."""
        return self.free_rank == 0

    @property
    def nontrivial_factors(self) -> tuple[PolyElement, ...]:
        """Invariant factors that are not units."""
        return tuple(factor for factor in self.invariant_factors if factor.degree() > 0)

    @property
    def dimension(self) -> int:
        """dim_ℚ of the torsion part, Σ deg d_t."""
        return sum(factor.degree() for factor in self.nontrivial_factors)


def decompose(presentation: ModulePresentation) -> ModuleDecomposition:
    """Smith invariant factors of the relation matrix.

    Examples:
        >>> (d,) = operator_ring().gens
        >>> result = decompose(ModulePresentation(2, ((d**2, 0), (0, d))))
        >>> [str(f) for f in result.invariant_factors], result.free_rank
        (['d', 'd**2'], 0)
        >>> decompose(ModulePresentation(2)).free_rank
        2
    """
    smith = smith_decomposition(presentation.relations, operator_ring(), presentation.m)
    free_rank = presentation.m - len(smith.invariant_factors)
    _logger.debug(
        "Decomposed a presentation on %d unknowns.",
        presentation.m,
        extra={"extra_data": {"factors": [str(f) for f in smith.invariant_factors]}},
    )
    return ModuleDecomposition(smith.invariant_factors, free_rank, smith.right)


def _require_torsion(decomposition: ModuleDecomposition) -> None:
    if not decomposition.torsion:
        error_msg = (
            f"Module has a free part of rank {decomposition.free_rank}: "
            "module not pure/torsion, the generator count does not apply."
        )
        raise NotTorsionError(error_msg)


def min_generators(presentation: ModulePresentation) -> int:
    """Largest number of invariant factors divisible by one irreducible polynomial.

    Raises:
        NotTorsionError: When the module has a free part.

    Examples:
        >>> (d,) = operator_ring().gens
        >>> min_generators(ModulePresentation(2, ((d**2, 0), (0, d))))
        2
        >>> min_generators(ModulePresentation(2, ((d**2 - 1, 0), (0, d))))
        1
    """
    decomposition = decompose(presentation)
    _require_torsion(decomposition)
    irreducibles: list[PolyElement] = []
    counts: list[int] = []
    for factor in decomposition.nontrivial_factors:
        _, pieces = factor.factor_list()
        for piece, _ in pieces:
            monic = piece.monic()
            if monic in irreducibles:
                counts[irreducibles.index(monic)] += 1
            else:
                irreducibles.append(monic)
                counts.append(1)
    return max(counts, default=0)


# *====[ Exponential polynomials ]====*


def _x_ring() -> Any:
    return univariate_ring("x")


@dataclass(frozen=True)
class ExpPoly:
    """Σ_λ p_λ(x)·e^{λx} with rational λ and p_λ ∈ ℚ[x], zero parts dropped.

    Examples:
        >>> f = ExpPoly.exponential(QQ(1)) + ExpPoly.exponential(QQ(-1))
        >>> f.render()
        '2*ch(x)'
        >>> f.diff().render()
        '2*sh(x)'
    """

    terms: Mapping[Any, PolyElement] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Drop zero parts."""
        ring = _x_ring()
        cleaned = {QQ.convert(key): ring(value) for key, value in self.terms.items() if value}
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def zero(cls) -> "ExpPoly":
        """The zero function."""
        return cls()

    @classmethod
    def exponential(cls, eigenvalue: Any, power: int = 0) -> "ExpPoly":
        """x^power·e^{eigenvalue·x}."""
        (x,) = _x_ring().gens
        return cls({eigenvalue: x**power})

    @classmethod
    def constant(cls, value: Any) -> "ExpPoly":
        """A rational constant."""
        return cls({QQ.zero: _x_ring()(value)})

    @property
    def is_zero(self) -> bool:
        """Whether the function vanishes."""
        return not self.terms

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        """Sum."""
        ring = _x_ring()
        merged = dict(self.terms)
        for key, value in other.terms.items():
            merged[key] = merged.get(key, ring.zero) + value
        return ExpPoly(merged)

    def __neg__(self) -> "ExpPoly":
        """Negation."""
        return ExpPoly({key: -value for key, value in self.terms.items()})

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        """Difference."""
        return self + (-other)

    def scale(self, factor: Any) -> "ExpPoly":
        """Multiply by a rational."""
        value = QQ.convert(factor)
        return ExpPoly({key: poly.mul_ground(value) for key, poly in self.terms.items()})

    def diff(self) -> "ExpPoly":
        """d/dx: (p' + λp)·e^{λx}."""
        (x,) = _x_ring().gens
        return ExpPoly(
            {key: poly.diff(x) + poly.mul_ground(key) for key, poly in self.terms.items()}
        )

    def apply(self, operator: PolyElement) -> "ExpPoly":
        """Apply an operator of ℚ[d]."""
        derivatives = [self]
        for _ in range(max(operator.degree(), 0)):
            derivatives.append(derivatives[-1].diff())
        result = ExpPoly.zero()
        for (power,), coefficient in operator.terms():
            result = result + derivatives[power].scale(coefficient)
        return result

    def at_origin(self) -> Any:
        """Value at x = 0."""
        return sum((poly.get((0,), QQ.zero) for poly in self.terms.values()), QQ.zero)

    def coefficients(self) -> dict[tuple[Any, int], Any]:
        """Coordinates in the basis x^j·e^{λx}."""
        return {
            (key, monom[0]): coeff
            for key, poly in self.terms.items()
            for monom, coeff in poly.terms()
        }

    def render(self) -> str:
        """Readable form; conjugate pairs e^{±λx} are shown through ch and sh.

        Exponential parts come first, the polynomial part last.
        """
        pieces: list[str] = []
        done: set[Any] = set()
        for key in sorted(self.terms, key=lambda value: (not value, abs(value), value)):
            if key in done:
                continue
            done.add(key)
            poly = self.terms[key]
            if key and -key in self.terms:
                done.add(-key)
                rate = abs(key)
                positive, negative = self.terms[rate], self.terms[-rate]
                pieces.extend(
                    _scaled(half, f"{name}({_rate_text(rate)})")
                    for half, name in ((positive + negative, "ch"), (positive - negative, "sh"))
                    if half
                )
            elif key:
                pieces.append(_scaled(poly, f"e^({_rate_text(key)})"))
            else:
                pieces.append(_scaled(poly, ""))
        return _join(pieces) if pieces else "0"


def _rate_text(rate: Any) -> str:
    text = format_rational(rate)
    if text == "1":
        return "x"
    if text == "-1":
        return "-x"
    return f"{text}*x"


def _scaled(poly: PolyElement, function: str) -> str:
    body = render_poly(poly, ["x"])
    if not function:
        return body
    if body == "1":
        return function
    if body == "-1":
        return f"-{function}"
    if len(poly) > 1:
        return f"({body})*{function}"
    return f"{body}*{function}"


def _join(pieces: Sequence[str]) -> str:
    text = pieces[0]
    for piece in pieces[1:]:
        text += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
    return text


# *====[ Solution spaces ]====*


@dataclass(frozen=True)
class GenerationCertificate:
    """Evidence that a set of solutions generates the solution space.

    Attributes:
        solutions_ok: Whether every generator solves the relations.
        closure_rank: ℚ-rank of the generators and their derivatives.
        dimension: dim of the solution space.
    """

    solutions_ok: bool
    closure_rank: int
    dimension: int

    @property
    def verified(self) -> bool:
        """Whether the generators are solutions spanning everything."""
        return self.solutions_ok and self.closure_rank == self.dimension


@dataclass(frozen=True)
class SolutionSpace:
    """A ℚ-basis of the solutions and a minimal generator set.

    Attributes:
        decomposition: The Smith decomposition used.
        basis: Solution vectors, one ExpPoly per unknown.
        generators: One generator per non-unit invariant factor.
        certificate: Verification of `generators`.
    """

    decomposition: ModuleDecomposition
    basis: tuple[ExpVector, ...]
    generators: tuple[ExpVector, ...] = ()
    certificate: GenerationCertificate | None = None


def _is_solution(presentation: ModulePresentation, vector: Sequence[ExpPoly]) -> bool:
    for row in presentation.relations:
        total = ExpPoly.zero()
        for entry, function in zip(row, vector, strict=True):
            total = total + function.apply(entry)
        if not total.is_zero:
            return False
    return True


def _eigenvalues(factor: PolyElement) -> list[tuple[Any, int]]:
    roots, splits = rational_roots(factor)
    if not splits:
        error_msg = (
            f"Invariant factor {factor} has irrational eigenvalues: basis not representable."
        )
        raise IrrationalEigenvalueError(error_msg)
    return roots


def _impulse_response(factor: PolyElement) -> ExpPoly:
    """The solution h of factor(∂)h = 0 with h^(j)(0) = 0 for j < k − 1 and h^(k−1)(0) = 1.

    Examples:
        >>> (d,) = operator_ring().gens
        >>> _impulse_response(d**3 - d).render()
        'ch(x) - 1'
        >>> _impulse_response(d**2).render()
        'x'
    """
    candidates = [
        ExpPoly.exponential(eigenvalue, power)
        for eigenvalue, multiplicity in _eigenvalues(factor)
        for power in range(multiplicity)
    ]
    order = len(candidates)
    jets = []
    for candidate in candidates:
        values, current = [], candidate
        for _ in range(order):
            values.append(current.at_origin())
            current = current.diff()
        jets.append(values)
    wronskian = DomainMatrix(
        [[jet[i] for jet in jets] for i in range(order)], (order, order), QQ
    )
    target = DomainMatrix(
        [[QQ.one if i == order - 1 else QQ.zero] for i in range(order)], (order, 1), QQ
    )
    weights = wronskian.lu_solve(target).to_list()
    response = ExpPoly.zero()
    for candidate, (weight,) in zip(candidates, weights, strict=True):
        response = response + candidate.scale(weight)
    return response


@dataclass(frozen=True)
class _CyclicChart:
    """A constant row ℓ whose image generates a cyclic module ℚ[d]/(d_t).

    Attributes:
        slot: Index t of the only non-unit invariant factor.
        functional: The row ℓ.
        inverse: Inverse modulo d_t of ℓ·V_t, the image of ℓ in Smith coordinates.
    """

    slot: int
    functional: tuple[int, ...]
    inverse: PolyElement


def _constant_rows(m: int) -> Iterator[tuple[int, ...]]:
    """e_k, then e_i − e_j and e_i + e_j for i < j."""
    for k in range(m):
        yield tuple(int(i == k) for i in range(m))
    for sign in (-1, 1):
        for i, j in combinations(range(m), 2):
            yield tuple(1 if k == i else sign if k == j else 0 for k in range(m))


def _cyclic_chart(decomposition: ModuleDecomposition) -> _CyclicChart | None:
    slots = [t for t, factor in enumerate(decomposition.invariant_factors) if factor.degree() > 0]
    if len(slots) != 1:
        return None
    (slot,) = slots
    factor = decomposition.invariant_factors[slot]
    ring = operator_ring()
    for functional in _constant_rows(len(decomposition.right)):
        pairs = zip(functional, decomposition.right, strict=True)
        image = sum((ring(weight) * row[slot] for weight, row in pairs), ring.zero)
        inverse, _, gcd = image.gcdex(factor)
        if image and gcd.degree() == 0:
            scale = ring.domain.quo(ring.domain.one, gcd.LC)
            return _CyclicChart(slot, functional, (inverse % factor).mul_ground(scale))
    return None


def _lift(
    right: Sequence[Sequence[PolyElement]],
    t: int,
    function: ExpPoly,
    chart: _CyclicChart | None = None,
) -> ExpVector:
    """V·(function in slot t); through a chart, the solution g with ℓ·g = function."""
    if chart is not None and chart.slot == t:
        function = function.apply(chart.inverse)
    return tuple(function.apply(row[t]) for row in right)


def verify_generators(
    presentation: ModulePresentation,
    generators: Sequence[Sequence[ExpPoly]],
) -> GenerationCertificate:
    """Check that the generators are solutions whose derivatives span every solution.

    Examples:
        >>> (d,) = operator_ring().gens
        >>> P = ModulePresentation(1, ((d**3 - d,),))
        >>> ch = ExpPoly.exponential(QQ(1)) + ExpPoly.exponential(QQ(-1))
        >>> verify_generators(P, [(ch.scale(QQ(1, 2)) - ExpPoly.constant(1),)]).verified
        True
    """
    decomposition = decompose(presentation)
    _require_torsion(decomposition)
    dimension = decomposition.dimension
    solutions_ok = all(
        len(vector) == presentation.m and _is_solution(presentation, vector)
        for vector in generators
    )
    rows: list[dict[tuple[int, Any, int], Any]] = []
    for vector in generators:
        current = list(vector)
        for _ in range(max(dimension, 1)):
            rows.append(
                {
                    (k, *key): value
                    for k, function in enumerate(current)
                    for key, value in function.coefficients().items()
                }
            )
            current = [f.diff() for f in current]
    keys = sorted({key for row in rows for key in row})
    index = {key: j for j, key in enumerate(keys)}
    ring = operator_ring()
    entries = {
        (i, index[key]): ring.ground_new(value)
        for i, row in enumerate(rows)
        for key, value in row.items()
    }
    closure_rank = rank(PolyMatrix(ring, len(rows), len(keys), entries)) if rows else 0
    certificate = GenerationCertificate(solutions_ok, closure_rank, dimension)
    _logger.debug(
        "Generator check: rank %d of %d.",
        closure_rank,
        dimension,
        extra={"extra_data": {"solutions_ok": solutions_ok}},
    )
    return certificate


def solution_basis(presentation: ModulePresentation, *, generators: bool = True) -> SolutionSpace:
    """Exponential-polynomial basis of the solutions, with a minimal generator set.

    Each non-unit invariant factor d_t contributes the solutions x^j·e^{λx} of
    d_t(∂)w = 0 and one generator, the impulse response of d_t. A cyclic module
    is read through the first constant row ℓ that generates it (unit rows, then
    differences, then sums), so that ℓ·y equals those functions whatever
    transforms the Smith form used.

    Raises:
        NotTorsionError: When the solution space is infinite-dimensional.
        IrrationalEigenvalueError: When an invariant factor does not split over ℚ.

    Examples:
        >>> (d,) = operator_ring().gens
        >>> space = solution_basis(ModulePresentation(1, ((d**3 - d,),)))
        >>> [vector[0].render() for vector in space.basis]
        ['e^(-x)', '1', 'e^(x)']
        >>> [vector[0].render() for vector in space.generators], space.certificate.verified
        (['ch(x) - 1'], True)
    """
    decomposition = decompose(presentation)
    _require_torsion(decomposition)
    right = decomposition.right
    chart = _cyclic_chart(decomposition)
    basis: list[ExpVector] = []
    found: list[ExpVector] = []
    for t, factor in enumerate(decomposition.invariant_factors):
        if factor.degree() <= 0:
            continue
        for eigenvalue, multiplicity in _eigenvalues(factor):
            for power in range(multiplicity):
                basis.append(_lift(right, t, ExpPoly.exponential(eigenvalue, power), chart))
        found.append(_lift(right, t, _impulse_response(factor), chart))
    if not generators:
        return SolutionSpace(decomposition, tuple(basis))
    certificate = verify_generators(presentation, found)
    _logger.info(
        "Solution space of dimension %d with %d generator(s).",
        len(basis),
        len(found),
        extra={
            "extra_data": {
                "verified": certificate.verified,
                "cyclic_row": chart.functional if chart else None,
            }
        },
    )
    return SolutionSpace(decomposition, tuple(basis), tuple(found), certificate)


def _derive(value: ExpPoly, _: int) -> ExpPoly:
    return value.diff()


def spencer_residual(function: ExpPoly, order: int) -> dict[tuple[int, MultiIndex, int], ExpPoly]:
    """Spencer components of the jet section (f, f′, …, f^(order)).

    Examples:
        >>> f = ExpPoly.exponential(QQ(2), 1)
        >>> all(value.is_zero for value in spencer_residual(f, 3).values())
        True
    """
    components: dict[tuple[int, MultiIndex], ExpPoly] = {}
    current = function
    for length in range(order + 1):
        components[0, MultiIndex((length,))] = current
        current = current.diff()
    return spencer_components(components, (1, 1, order), _derive, ExpPoly.zero())
