"""Janet and Spencer sequences of involutive and finite-type systems.

Bundle dimensions are ranks of δ-maps; the explicit first and second Spencer
operators are built from a solved chart of R_{q+1}, whose parametric jets of
order ≤ q serve as fibre coordinates of R_q.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from math import comb
from typing import Any

from sympy import Matrix, Rational, eye
from sympy.polys.rings import PolyElement

from jetspencer.core.catalog import catalog
from jetspencer.core.errors import DimensionMismatchError, NotFiniteTypeError, PreconditionError
from jetspencer.core.exactalg import RowSpace, constant_value, rank, rref_fraction_free
from jetspencer.core.formal import AnalysisBounds, JetSystem, characters
from jetspencer.core.jetcalc import (
    DiffOperator,
    Jet,
    JetForm,
    MultiIndex,
    SymbolBasis,
    adjoint,
    cohomology_dimension,
    compose,
    delta_map,
    forms_matrix,
    jet_columns,
    jet_key,
    jet_preference,
    prolonged_forms,
    symbol_at,
    symbol_basis,
)

__all__ = [
    "CosseratCheck",
    "ElationCheck",
    "JetChart",
    "RiemannCheck",
    "SequenceDims",
    "SpencerOperators",
    "SplitTensors",
    "WeylCheck",
    "coordinate_name",
    "cosserat_check",
    "delta_cohomology_dim",
    "elation_field_check",
    "first_spencer_operator",
    "janet_spencer_dims",
    "jet_chart",
    "ricci_weyl_split",
    "riemann_dimension_check",
    "spencer_operators_finite_type",
    "weyl_dimension",
]

_logger = logging.getLogger(__name__)


# *====[ Bundle dimensions ]====*


@dataclass(frozen=True)
class SequenceDims:
    """Dimensions of the Janet bundles F_r and Spencer bundles C_r, C_r(E).

    Attributes:
        n: Number of variables.
        q: System order.
        janet: dim F_r for 0 ≤ r ≤ n.
        spencer: dim C_r for 0 ≤ r ≤ n.
        spencer_jets: dim C_r(E) for 0 ≤ r ≤ n.
    """

    n: int
    q: int
    janet: tuple[int, ...]
    spencer: tuple[int, ...]
    spencer_jets: tuple[int, ...]

    @property
    def exact_columns(self) -> bool:
        """Whether dim C_r(E) = dim C_r + dim F_r for every r."""
        return all(
            whole == part + quotient
            for whole, part, quotient in zip(
                self.spencer_jets, self.spencer, self.janet, strict=True
            )
        )


def _spencer_bundle_dims(basis: SymbolBasis, fibre: int, n: int) -> tuple[int, ...]:
    """C(n, r)·fibre − rank δ(∧^{r−1} T*⊗basis) for 0 ≤ r ≤ n."""
    dims = [fibre]
    for r in range(1, n + 1):
        dims.append(comb(n, r) * fibre - rank(delta_map(basis, r - 1)))
    return tuple(dims)


def janet_spencer_dims(system: JetSystem, bounds: AnalysisBounds | None = None) -> SequenceDims:
    """Bundle dimensions of the Janet and Spencer sequences of an involutive system.

    Raises:
        PreconditionError: When the system is not involutive.

    Examples:
        >>> dims = janet_spencer_dims(catalog("screw", 2))
        >>> dims.janet, dims.spencer
        ((2, 0, 0), (4, 6, 2))
    """
    table = characters(system, bounds)
    if not table.involutive:
        error_msg = f"System {system.name} is not involutive; the sequences are undefined."
        raise PreconditionError(error_msg)
    n, q = system.n, system.q
    next_symbol = symbol_basis(symbol_at(system.op, q + 1))
    spencer = _spencer_bundle_dims(next_symbol, system.dim_r(q), n)
    full = SymbolBasis.full(system.m, n, q + 1)
    spencer_jets = _spencer_bundle_dims(full, system.dim_jets(q), n)
    janet = tuple(whole - part for whole, part in zip(spencer_jets, spencer, strict=True))
    _logger.info(
        "Sequence dimensions of %s computed.",
        system.name,
        extra={"extra_data": {"janet": janet, "spencer": spencer}},
    )
    return SequenceDims(n, q, janet, spencer, spencer_jets)


def delta_cohomology_dim(system: JetSystem, s: int, r: int = 0) -> int:
    """dim H^s(g_{q+r}).

    Examples:
        >>> delta_cohomology_dim(catalog("killing", 2), 2)
        1
    """
    if r < 0:
        error_msg = f"Prolongation index must be nonnegative, got {r}."
        raise PreconditionError(error_msg)
    return cohomology_dimension(system.op, system.q + r, s)


# *====[ Charts of R_{q+1} ]====*


@dataclass(frozen=True)
class JetChart:
    """R_{q+1} solved for its principal jets.

    Attributes:
        order: The system order q.
        parametric: Parametric jets of order ≤ q, the fibre coordinates of R_q.
        free_top: Parametric jets of order q + 1.
        principal: Principal jet -> (numerator over parametric jets, denominator).
    """

    order: int
    parametric: tuple[Jet, ...]
    free_top: tuple[Jet, ...]
    principal: Mapping[Jet, tuple[JetForm, PolyElement]] = field(default_factory=dict)

    def express(self, jet: Jet, one: PolyElement) -> tuple[JetForm, PolyElement]:
        """A jet of order ≤ q + 1 as numerator / denominator over parametric jets."""
        if jet in self.principal:
            return self.principal[jet]
        return {jet: one}, one


def jet_chart(system: JetSystem, parametric: Sequence[Jet] | None = None) -> JetChart:
    """Solve the equations of R_{q+1} for principal jets.

    Principal jets are taken in `jet_preference` order; jets listed in
    `parametric` are pushed to the end so that they stay parametric.

    Raises:
        PreconditionError: When R_{q+1} does not project onto R_q, or when the
            requested jets are not a set of parametric jets.
    """
    q, ring = system.q, system.op.ring
    if system.projection_dim(q) != system.dim_r(q):
        error_msg = f"System {system.name} is not formally integrable at order {q}."
        raise PreconditionError(error_msg)
    requested = tuple(parametric or ())
    kept = set(requested)
    preferred = [
        jet for jet in sorted(jet_columns(system.m, system.n, q + 1), key=jet_preference)
        if jet not in kept
    ]
    preferred.extend(requested)
    forms = prolonged_forms(system.op, q + 1)
    result = rref_fraction_free(forms_matrix(forms, ring, preferred), pivoting="column")
    principal: dict[Jet, tuple[JetForm, PolyElement]] = {}
    for pivot, row in zip(result.pivots, result.pivot_rows, strict=True):
        denominator = row[pivot]
        numerator = {preferred[j]: -value for j, value in row.items() if j != pivot}
        if denominator.is_ground:
            scale = constant_value(denominator)
            numerator = {jet: value.quo_ground(scale) for jet, value in numerator.items()}
            denominator = ring.one
        principal[preferred[pivot]] = (numerator, denominator)
    free = [jet for jet in preferred if jet not in principal]
    low = sorted((jet for jet in free if jet[1].length <= q), key=jet_key)
    if requested:
        if set(low) != kept:
            error_msg = "The requested jets are not a parametric set of R_q."
            raise PreconditionError(error_msg)
        low = list(requested)
    top = sorted((jet for jet in free if jet[1].length == q + 1), key=jet_key)
    _logger.debug(
        "Chart of %s: %d coordinates, %d free jets of order %d.",
        system.name,
        len(low),
        len(top),
        q + 1,
    )
    return JetChart(q, tuple(low), tuple(top), principal)


def coordinate_name(jet: Jet, unknowns: Sequence[str]) -> str:
    """Display name of a fibre coordinate, e.g. ``xi1_12`` for ξ¹₁₂.

    Examples:
        >>> coordinate_name((0, MultiIndex((1, 1))), ["xi1"])
        'xi1_12'
    """
    k, mu = jet
    if mu.length == 0:
        return unknowns[k]
    return f"{unknowns[k]}_{''.join(map(str, mu.derivatives()))}"


# *====[ Spencer operators ]====*


@dataclass(frozen=True)
class SpencerOperators:
    """The first Spencer operator, and the second one in finite type.

    Attributes:
        coordinates: Fibre coordinates of R_q; unknown z of D1 is coordinates[z].
        names: Display names of the coordinates.
        d1: First-order operator D1 on the coordinates.
        labels: (coordinate, i) of each D1 row, i 1-based.
        d2: Second operator on the D1 rows (unknown z·n + i − 1 is row (z, i)),
            present for finite-type systems only.
        d2_labels: (coordinate, i, j) of each D2 row, i < j.
    """

    coordinates: tuple[Jet, ...]
    names: tuple[str, ...]
    d1: DiffOperator
    labels: tuple[tuple[int, int], ...]
    d2: DiffOperator | None = None
    d2_labels: tuple[tuple[int, int, int], ...] = ()

    @property
    def finite_type(self) -> bool:
        """Whether the second operator was built."""
        return self.d2 is not None


def _add(form: JetForm, key: Jet, value: Any) -> None:
    updated = form.get(key, value * 0) + value
    if updated:
        form[key] = updated
    else:
        form.pop(key, None)


def _lift_components(
    system: JetSystem,
    chart: JetChart,
) -> list[tuple[tuple[int, int], JetForm]]:
    """den·∂_i z − numerator of the lift of z along x_i, for every coordinate z.

    Free jets of order q + 1 become extra unknowns numbered after the coordinates.
    """
    n, ring = system.n, system.op.ring
    zero = MultiIndex.zero(n)
    index = {jet: z for z, jet in enumerate(chart.parametric)}
    offset = len(chart.parametric)
    index.update({jet: offset + w for w, jet in enumerate(chart.free_top)})
    components = []
    for z, (k, mu) in enumerate(chart.parametric):
        for i in range(1, n + 1):
            numerator, denominator = chart.express((k, mu.raised(i)), ring.one)
            form: JetForm = {(z, MultiIndex.unit(n, i)): denominator}
            for jet, value in numerator.items():
                _add(form, (index[jet], zero), -value)
            components.append(((z, i), form))
    return components


def first_spencer_operator(
    system: JetSystem,
    parametric: Sequence[Jet] | None = None,
) -> SpencerOperators:
    """D1: components ∂_i z − lift, with the free jets of order q + 1 eliminated.

    Examples:
        >>> ops = first_spencer_operator(catalog("screw", 2))
        >>> ops.d1.p, ops.names
        (6, ('xi1', 'xi2', 'xi1_1', 'xi2_1'))
    """
    chart = jet_chart(system, parametric)
    offset = len(chart.parametric)
    space: RowSpace[Jet] = RowSpace(
        system.op.ring,
        position=lambda key: (key[0] < offset, jet_key(key)),
        degree_first=False,
    )
    rows: list[JetForm] = []
    labels: list[tuple[int, int]] = []
    for label, form in _lift_components(system, chart):
        reduced = space.reduce(form)
        if any(key[0] >= offset for key in reduced):
            space.add(reduced)
        elif reduced:
            rows.append(reduced)
            labels.append(label)
    names = tuple(coordinate_name(jet, system.unknowns) for jet in chart.parametric)
    d1 = DiffOperator(system.n, offset, tuple(rows))
    _logger.info(
        "First Spencer operator of %s has %d rows on %d coordinates.",
        system.name,
        d1.p,
        offset,
    )
    return SpencerOperators(chart.parametric, names, d1, tuple(labels))


def spencer_operators_finite_type(
    system: JetSystem,
    parametric: Sequence[Jet] | None = None,
) -> SpencerOperators:
    """D1 and D2 for a system with g_{q+1} = 0.

    Row (z, i) of D1 reads ∂_i z − Σ L_i[z][z']·z'. Row (z, i, j) of D2 reads
    ∂_i A(z, j) − ∂_j A(z, i) − Σ L_i[z][z']·A(z', j) + Σ L_j[z][z']·A(z', i).

    Raises:
        NotFiniteTypeError: When g_{q+1} ≠ 0.
        PreconditionError: When a lift has a non-constant denominator.

    Examples:
        >>> ops = spencer_operators_finite_type(catalog("affine_line"))
        >>> ops.names, compose(ops.d2, ops.d1).is_zero
        (('xi', 'xi_1'), True)
    """
    q, n = system.q, system.n
    if system.dim_g(q + 1):
        error_msg = f"System {system.name} is not of finite type at order {q + 1}."
        raise NotFiniteTypeError(error_msg)
    first = first_spencer_operator(system, parametric)
    ring = system.op.ring
    zero = MultiIndex.zero(n)
    lifts: dict[tuple[int, int], dict[int, PolyElement]] = {}
    for (z, i), row in zip(first.labels, first.d1.rows, strict=True):
        lead = row[z, MultiIndex.unit(n, i)]
        if not lead.is_ground:
            error_msg = "The second Spencer operator needs lifts with constant denominators."
            raise PreconditionError(error_msg)
        scale = constant_value(lead)
        lifts[z, i] = {
            other: -value.quo_ground(scale) for (other, mu), value in row.items() if mu == zero
        }
    rows: list[JetForm] = []
    labels: list[tuple[int, int, int]] = []
    for z in range(len(first.coordinates)):
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                row: JetForm = {}
                _add(row, (z * n + j - 1, MultiIndex.unit(n, i)), ring.one)
                _add(row, (z * n + i - 1, MultiIndex.unit(n, j)), -ring.one)
                for other, value in lifts[z, i].items():
                    _add(row, (other * n + j - 1, zero), -value)
                for other, value in lifts[z, j].items():
                    _add(row, (other * n + i - 1, zero), value)
                rows.append(row)
                labels.append((z, i, j))
    d2 = DiffOperator(n, first.d1.p, tuple(rows))
    return SpencerOperators(
        first.coordinates, first.names, first.d1, first.labels, d2, tuple(labels)
    )


# *====[ Cosserat equations ]====*


@dataclass(frozen=True)
class CosseratCheck:
    """The adjoint of D1 for the Killing system in stress/couple-stress variables.

    Attributes:
        n: Dimension.
        operators: Spencer operators on the coordinates ξ^k, ξ^i_j (i < j).
        dual: adjoint(D1), one row per coordinate.
        dual_names: sigma{k}{r} / mu{i}{j}{r} names of the unknowns of `dual`.
        rows_match: Whether every row equals ∂_rσ^{k,r}, respectively
            ∂_rμ^{ij,r} + σ^{i,j} − σ^{j,i}, up to sign.
        residual_zero: Whether the stress-function parametrization composes to
            zero (n = 2 only).
        airy_ok: Whether the Airy specialization gives a symmetric stress and
            a vanishing couple-stress (n = 2 only).
    """

    n: int
    operators: SpencerOperators
    dual: DiffOperator
    dual_names: tuple[str, ...]
    rows_match: bool
    residual_zero: bool | None = None
    airy_ok: bool | None = None

    @property
    def verified(self) -> bool:
        """Whether every check that ran succeeded."""
        return self.rows_match and self.residual_zero is not False and self.airy_ok is not False


def _equal_up_to_sign(left: Mapping[Jet, PolyElement], right: Mapping[Jet, PolyElement]) -> bool:
    return dict(left) == dict(right) or dict(left) == {jet: -value for jet, value in right.items()}


def _stress_parametrization() -> DiffOperator:
    """σ, μ of the plane in terms of three stress functions."""
    return DiffOperator.build(
        2,
        3,
        [
            {(0, (2,)): 1},
            {(0, (1,)): -1},
            {(1, (2,)): -1},
            {(1, (1,)): 1},
            {(2, (2,)): 1, (0, ()): 1},
            {(2, (1,)): -1, (1, ()): -1},
        ],
    )


def cosserat_check(n: int) -> CosseratCheck:
    """Build and verify the Cosserat equations as the adjoint of D1.

    Examples:
        >>> check = cosserat_check(2)
        >>> check.rows_match, check.residual_zero, check.airy_ok
        (True, True, True)
    """
    if n not in (2, 3):
        error_msg = f"The Cosserat check is defined for n = 2 or 3, got {n}."
        raise PreconditionError(error_msg)
    system = catalog("killing", n)
    rotations = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    zero = MultiIndex.zero(n)
    parametric = [(k, zero) for k in range(n)]
    parametric.extend((i - 1, MultiIndex.unit(n, j)) for i, j in rotations)
    operators = spencer_operators_finite_type(system, parametric)
    dual = adjoint(operators.d1)
    names = [f"sigma{k}{r}" for k in range(1, n + 1) for r in range(1, n + 1)]
    names.extend(f"mu{i}{j}{r}" for i, j in rotations for r in range(1, n + 1))

    one = system.op.ring.one
    expected: list[JetForm] = []
    for k in range(n):
        expected.append({(k * n + r - 1, MultiIndex.unit(n, r)): one for r in range(1, n + 1)})
    for c, (i, j) in enumerate(rotations, start=n):
        row: JetForm = {(c * n + r - 1, MultiIndex.unit(n, r)): one for r in range(1, n + 1)}
        _add(row, ((i - 1) * n + j - 1, zero), one)
        _add(row, ((j - 1) * n + i - 1, zero), -one)
        expected.append(row)
    rows_match = dual.p == len(expected) and all(
        _equal_up_to_sign(got, want) for got, want in zip(dual.rows, expected, strict=True)
    )
    residual_zero = airy_ok = None
    if n == 2:  # noqa: PLR2004
        stress = _stress_parametrization()
        residual_zero = compose(dual, stress).is_zero
        airy_function = DiffOperator.build(2, 1, [{(0, (2,)): 1}, {(0, (1,)): 1}, {(0, ()): -1}])
        airy = compose(stress, airy_function)
        airy_ok = (
            airy.rows[1] == airy.rows[2]
            and not airy.rows[4]
            and not airy.rows[5]
            and compose(dual, airy).is_zero
        )
    _logger.info(
        "Cosserat check for n=%d: rows match %s.",
        n,
        rows_match,
        extra={"extra_data": {"residual_zero": residual_zero, "airy_ok": airy_ok}},
    )
    return CosseratCheck(n, operators, dual, tuple(names), rows_match, residual_zero, airy_ok)


# *====[ Ricci and Weyl ]====*


@dataclass(frozen=True)
class SplitTensors:
    """The curvature-type tensor ρ^k_{l,ij} rebuilt from a Ricci-type tensor.

    Attributes:
        metric: ω_ij.
        ricci: ρ_ij.
        scalar: ρ = ω^{ij}ρ_ij.
        tau: τ_ij with (n − 2)τ_ij = nρ_ij − n/(2(n − 1))·ω_ij ρ.
        components: Nonzero ρ^k_{l,ij}, keyed by 0-based (k, l, i, j).
    """

    metric: Matrix
    ricci: Matrix
    scalar: Rational
    tau: Matrix
    components: Mapping[tuple[int, int, int, int], Rational] = field(default_factory=dict)

    @property
    def n(self) -> int:
        """Dimension."""
        return self.metric.rows

    def component(self, k: int, l: int, i: int, j: int) -> Rational:  # noqa: E741
        """ρ^k_{l,ij} with 0-based indices."""
        return self.components.get((k, l, i, j), Rational(0))

    def trace(self) -> Matrix:
        """ρ^r_{i,rj}, which equals ρ_ij."""
        n = self.n
        return Matrix(n, n, lambda i, j: sum(self.component(r, i, r, j) for r in range(n)))

    @property
    def trace_ok(self) -> bool:
        """Whether the trace gives back the Ricci-type tensor."""
        return self.trace() == self.ricci


def _rational_matrix(rows: Sequence[Sequence[Any]] | Matrix) -> Matrix:
    return Matrix(rows).applyfunc(Rational)


def ricci_weyl_split(
    metric: Sequence[Sequence[Any]] | Matrix,
    ricci: Sequence[Sequence[Any]] | Matrix,
) -> SplitTensors:
    """Split ρ_ij into the tensor ρ^k_{l,ij} whose trace it is.

    Raises:
        PreconditionError: For n ≤ 2, a singular or non-symmetric metric, or a
            non-symmetric ρ.
        DimensionMismatchError: When the shapes differ.

    Examples:
        >>> split = ricci_weyl_split(
        ...     [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[2, 0, 0], [0, 2, 0], [0, 0, 2]]
        ... )
        >>> split.scalar, split.component(0, 1, 0, 1), split.trace_ok
        (6, 1, True)
    """
    omega = _rational_matrix(metric)
    rho = _rational_matrix(ricci)
    n = omega.rows
    if omega.shape != (n, n) or rho.shape != (n, n):
        error_msg = f"Metric {omega.shape} and Ricci tensor {rho.shape} must be square of one size."
        raise DimensionMismatchError(error_msg)
    if n <= 2:  # noqa: PLR2004
        error_msg = f"The split needs n ≥ 3, got {n}."
        raise PreconditionError(error_msg)
    if omega != omega.T or omega.det() == 0:
        error_msg = "The metric must be symmetric and invertible."
        raise PreconditionError(error_msg)
    if rho != rho.T:
        error_msg = "The Ricci tensor must be symmetric."
        raise PreconditionError(error_msg)
    inverse = omega.inv()
    delta = eye(n)
    scalar = sum(inverse[i, j] * rho[i, j] for i in range(n) for j in range(n))
    raised = inverse * rho
    tau = (n * rho - Rational(n, 2 * (n - 1)) * scalar * omega) / (n - 2)
    first, second = Rational(1, n - 2), Rational(1, (n - 1) * (n - 2))
    components: dict[tuple[int, int, int, int], Rational] = {}
    for k in range(n):
        for l in range(n):  # noqa: E741
            for i in range(n):
                for j in range(n):
                    value = first * (
                        delta[k, i] * rho[l, j]
                        - delta[k, j] * rho[l, i]
                        + omega[l, j] * raised[k, i]
                        - omega[l, i] * raised[k, j]
                    ) - second * (delta[k, i] * omega[l, j] - delta[k, j] * omega[l, i]) * scalar
                    if value:
                        components[k, l, i, j] = value
    split = SplitTensors(omega, rho, Rational(scalar), tau, components)
    _logger.debug(
        "Split a Ricci tensor of dimension %d.",
        n,
        extra={"extra_data": {"scalar": str(scalar)}},
    )
    return split


# *====[ Dimension checks ]====*


@dataclass(frozen=True)
class RiemannCheck:
    """dim F₁ of the Killing system computed two ways.

    Attributes:
        n: Dimension.
        cokernel: Cokernel dimension of the prolonged symbol S₃T*⊗T → S₂T*⊗F₀.
        cycles: dim Z²(g₁).
        expected: n²(n²−1)/12.
    """

    n: int
    cokernel: int
    cycles: int
    expected: int

    @property
    def agrees(self) -> bool:
        """Whether both computations give the expected count."""
        return self.cokernel == self.cycles == self.expected


def riemann_dimension_check(n: int) -> RiemannCheck:
    """Count the Riemann-tensor components of the Killing system by ranks.

    Examples:
        >>> riemann_dimension_check(3).agrees
        True
    """
    system = catalog("killing", n)
    q = system.q
    prolonged = symbol_at(system.op, q + 2)
    cokernel = prolonged.matrix.nrows - prolonged.rank
    first = symbol_basis(symbol_at(system.op, q))
    cycles = comb(n, 2) * first.dimension - rank(delta_map(first, 2))
    return RiemannCheck(n, cokernel, cycles, n * n * (n * n - 1) // 12)


@dataclass(frozen=True)
class WeylCheck:
    """dim H²(ĝ₁) of the conformal Killing symbol against n²(n²−1)/12 − n(n+1)/2."""

    n: int
    dimension: int
    expected: int

    @property
    def agrees(self) -> bool:
        """Whether the counts coincide."""
        return self.dimension == self.expected


def weyl_dimension(n: int) -> WeylCheck:
    """Count the Weyl-tensor components as a δ-cohomology group.

    Examples:
        >>> weyl_dimension(4).dimension
        10
    """
    if n < 3:  # noqa: PLR2004
        error_msg = f"The Weyl count needs n ≥ 3, got {n}."
        raise PreconditionError(error_msg)
    dimension = delta_cohomology_dim(catalog("conformal_killing", n), 2)
    return WeylCheck(n, dimension, n * n * (n * n - 1) // 12 - n * (n + 1) // 2)


@dataclass(frozen=True)
class ElationCheck:
    """Whether ∂_iA_j − ∂_jA_i, A_i = ξ^r_{ri}, lies in the span of D1.

    Attributes:
        n: Dimension.
        potential: A_i as forms over the fibre coordinates.
        contained: Per pair (i, j), i < j, whether the row is in the span.
    """

    n: int
    potential: tuple[JetForm, ...]
    contained: Mapping[tuple[int, int], bool] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        """Whether every row is in the span."""
        return all(self.contained.values())


def elation_field_check(n: int) -> ElationCheck:
    """Project the conformal Spencer operator at order 2 onto a field strength.

    Examples:
        >>> elation_field_check(3).holds
        True
    """
    conformal = catalog("conformal_killing", n)
    system = conformal.with_operator(conformal.op, 2)
    operators = spencer_operators_finite_type(system)
    ring = system.op.ring
    zero = MultiIndex.zero(n)
    chart = jet_chart(system, operators.coordinates)
    index = {jet: z for z, jet in enumerate(operators.coordinates)}
    potential: list[JetForm] = []
    for i in range(1, n + 1):
        form: JetForm = {}
        for r in range(n):
            jet = (r, MultiIndex.unit(n, r + 1).raised(i))
            numerator, denominator = chart.express(jet, ring.one)
            if not denominator.is_ground:
                error_msg = "The elation potential needs lifts with constant denominators."
                raise PreconditionError(error_msg)
            scale = constant_value(denominator)
            for jet, value in numerator.items():
                _add(form, (index[jet], zero), value.quo_ground(scale))
        potential.append(form)
    space: RowSpace[Jet] = RowSpace(ring, position=jet_key)
    for row in operators.d1.rows:
        space.add(row)
    contained = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            row: JetForm = {}
            for (z, _), value in potential[j - 1].items():
                _add(row, (z, MultiIndex.unit(n, i)), value)
            for (z, _), value in potential[i - 1].items():
                _add(row, (z, MultiIndex.unit(n, j)), -value)
            contained[i, j] = space.contains(row)
    return ElationCheck(n, tuple(potential), contained)
