"""Formal analysis of linear systems R_q ⊂ J_q(E).

Dimensions are generic ranks over ℚ(x). The analysis functions read and fill
the per-system dimension cache of a `JetSystem`; a system is meant to be
analysed by one caller at a time, and the cache is guarded by a lock for the
rare case where it is not.
"""

import logging
import random
import threading
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field
from sympy import QQ, Poly, Rational, Symbol
from sympy.polys.rings import PolyElement, PolyRing

from jetspencer.core.errors import (
    BoundsExhaustedError,
    DimensionMismatchError,
    PreconditionError,
    RegularityNotFoundError,
)
from jetspencer.core.exactalg import (
    PolyMatrix,
    RowSpace,
    nullspace,
    primitive_vector,
    rank,
    rref_fraction_free,
    total_degree,
)
from jetspencer.core.jetcalc import (
    DiffOperator,
    Jet,
    JetForm,
    MultiIndex,
    adjoint,
    cohomology_dimension,
    compose,
    derive_form,
    form_order,
    forms_matrix,
    forms_rank,
    jet_key,
    jet_preference,
    multi_indices_upto,
    prolong,
    prolonged_forms,
    symbol_at,
    top_columns,
)

__all__ = [
    "AnalysisBounds",
    "AnalysisReport",
    "CharacterTable",
    "CompatibilityResult",
    "CompletionStep",
    "HilbertPolynomial",
    "IntegrabilityResult",
    "JetSystem",
    "OrderCertificate",
    "ParametrizationResult",
    "PurityResult",
    "analyze",
    "characters",
    "check_formal_integrability",
    "compatibility_conditions",
    "hilbert_polynomial",
    "parametrization_test",
    "polynomial_solutions",
    "projected_equations",
    "purity_classify",
    "symbol_dimension",
    "system_dims",
]

_logger = logging.getLogger(__name__)

Verdict = Literal["involutive", "not_involutive"]


# *====[ Bounds ]====*


class AnalysisBounds(BaseModel):
    """Search bounds shared by every analysis.

    Attributes:
        order_max: Highest CC / annihilator order tried (default q + 2).
        deg_max: Highest coefficient degree accepted for generators (default
            max coefficient degree + 2).
        r_max: Prolongations checked for formal integrability.
        seed: Seed of the δ-regularity search.
        regularity_retries: Random coordinate changes tried.
        entry_range: Entries of the random changes lie in [−entry_range, entry_range].
        completion_budget: Completion rounds before giving up.
    """

    model_config = ConfigDict(frozen=True)

    order_max: int | None = Field(default=None, ge=0)
    deg_max: int | None = Field(default=None, ge=0)
    r_max: int = Field(default=2, ge=0)
    seed: int = 0
    regularity_retries: int = Field(default=25, ge=0)
    entry_range: int = Field(default=3, ge=1)
    completion_budget: int = Field(default=8, ge=1)

    def for_operator(self, operator: DiffOperator) -> "AnalysisBounds":
        """Fill unset order/degree bounds from the operator.

        Examples:
            >>> grad = DiffOperator.build(2, 1, [{(0, (1,)): 1}, {(0, (2,)): 1}])
            >>> bounds = AnalysisBounds().for_operator(grad)
            >>> bounds.order_max, bounds.deg_max
            (3, 2)
        """
        return self.model_copy(
            update={
                "order_max": operator.order + 2 if self.order_max is None else self.order_max,
                "deg_max": (
                    operator.max_coefficient_degree + 2 if self.deg_max is None else self.deg_max
                ),
            }
        )


# *====[ Systems ]====*


@dataclass(eq=False)
class JetSystem:
    """A linear system R_q given by an operator, with cached dimensions.

    Attributes:
        op: The defining operator.
        order: System order q; at least the operator order (an empty system
            still lives in some J_q(E)).
        name: Display name.
        variables: Names of the independent variables.
        unknowns: Names of the unknowns.
    """

    op: DiffOperator
    order: int | None = None
    name: str = "system"
    variables: tuple[str, ...] = ()
    unknowns: tuple[str, ...] = ()
    _dims: dict[int, int] = field(default_factory=dict, init=False, repr=False)
    _symbol_dims: dict[int, int] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self) -> None:
        """Resolve the order and default names."""
        if self.order is None:
            self.order = self.op.order
        elif self.order < self.op.order:
            error_msg = f"System order {self.order} is below the operator order {self.op.order}."
            raise PreconditionError(error_msg)
        self.variables = self.variables or tuple(f"x{i}" for i in range(1, self.op.n + 1))
        self.unknowns = self.unknowns or tuple(f"u{k}" for k in range(1, self.op.m + 1))
        if len(self.variables) != self.op.n or len(self.unknowns) != self.op.m:
            error_msg = "Variable and unknown names must match the operator shape."
            raise DimensionMismatchError(error_msg)

    @property
    def n(self) -> int:
        """Number of independent variables."""
        return self.op.n

    @property
    def m(self) -> int:
        """Number of unknowns."""
        return self.op.m

    @property
    def q(self) -> int:
        """System order."""
        return self.order if self.order is not None else self.op.order

    def with_operator(self, operator: DiffOperator, order: int | None = None) -> "JetSystem":
        """A new system with the same names and a different operator."""
        new_order = max(self.q if order is None else order, operator.order)
        return JetSystem(operator, new_order, self.name, self.variables, self.unknowns)

    def dim_jets(self, target: int) -> int:
        """dim J_target(E) = m·C(target + n, n)."""
        return self.m * comb(target + self.n, self.n)

    def dim_r(self, target: int) -> int:
        """dim R_target for target ≥ q, from the prolonged equations."""
        with self._lock:
            if target not in self._dims:
                forms = prolonged_forms(self.op, target)
                self._dims[target] = self.dim_jets(target) - forms_rank(forms, self.op.ring)
            return self._dims[target]

    def dim_g(self, target: int) -> int:
        """dim g_target of the symbol."""
        with self._lock:
            if target not in self._symbol_dims:
                self._symbol_dims[target] = symbol_at(self.op, target).dimension
            return self._symbol_dims[target]

    def projection_dim(self, target: int) -> int:
        """dim π^{target+1}_{target}(R_{target+1})."""
        return self.dim_r(target + 1) - self.dim_g(target + 1)


def system_dims(system: JetSystem, r_max: int) -> tuple[int, ...]:
    """dim R_{q+r} for 0 ≤ r ≤ r_max.

    Examples:
        >>> free = JetSystem(DiffOperator(2, 1, ()), order=1)
        >>> system_dims(free, 2)
        (3, 6, 10)
    """
    if r_max < 0:
        error_msg = f"r_max must be nonnegative, got {r_max}."
        raise PreconditionError(error_msg)
    return tuple(system.dim_r(system.q + r) for r in range(r_max + 1))


def symbol_dimension(system: JetSystem, r: int = 0) -> int:
    """dim g_{q+r}."""
    return system.dim_g(system.q + r)


# *====[ Formal integrability ]====*


@dataclass(frozen=True)
class CompletionStep:
    """Equations of order ≤ `order` adjoined in one completion round."""

    step: int
    order: int
    equations: tuple[JetForm, ...]


@dataclass(frozen=True)
class IntegrabilityResult:
    """Outcome of the completion loop.

    Attributes:
        status: "integrable", "trivial" (only the zero solution) or
            "undetermined" (completion budget exhausted).
        trace: Equations adjoined per round; empty when already integrable.
        system: The completed system.
    """

    status: Literal["integrable", "trivial", "undetermined"]
    trace: tuple[CompletionStep, ...]
    system: JetSystem

    @property
    def formally_integrable(self) -> bool:
        """Whether the input needed no completion."""
        return self.status != "undetermined" and not self.trace


def projected_equations(operator: DiffOperator, order: int) -> list[JetForm]:
    """Equations of order ≤ `order` implied by R_{order+1} but missing from R_order."""
    ring = operator.ring
    forms = prolonged_forms(operator, order + 1)
    columns = sorted({jet for form in forms for jet in form}, key=jet_preference)
    result = rref_fraction_free(forms_matrix(forms, ring, columns), pivoting="column")
    known: RowSpace[Jet] = RowSpace(ring, position=jet_preference)
    for form in prolonged_forms(operator, order):
        known.add(form)
    found = []
    for pivot, row in zip(result.pivots, result.pivot_rows, strict=True):
        if columns[pivot][1].length > order:
            continue
        form = {columns[j]: value for j, value in row.items()}
        if known.add(form):
            found.append(primitive_vector(form, sort_key=jet_preference))
    return found


def check_formal_integrability(
    system: JetSystem,
    r_max: int = 2,
    budget: int = 8,
) -> IntegrabilityResult:
    """Complete a system by adjoining projected equations until it stabilizes.

    Each round compares dim π(R_{q+r+1}) with dim R_{q+r} for r ≤ r_max; the
    first drop adjoins the missing lower-order equations and restarts.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (2, 2)): 1}, {(0, (1, 2)): 1}])
        >>> check_formal_integrability(JetSystem(D)).formally_integrable
        True
    """
    current = system
    trace: list[CompletionStep] = []
    for step in range(budget):
        added: CompletionStep | None = None
        for r in range(r_max + 1):
            target = current.q + r
            if current.projection_dim(target) < current.dim_r(target):
                equations = projected_equations(current.op, target)
                added = CompletionStep(step, target, tuple(equations))
                break
        if added is None:
            status: Literal["integrable", "trivial"] = (
                "trivial" if current.dim_r(current.q) == 0 else "integrable"
            )
            _logger.debug(
                "Completion of %s finished after %d round(s).",
                system.name,
                len(trace),
                extra={"extra_data": {"status": status}},
            )
            return IntegrabilityResult(status, tuple(trace), current)
        trace.append(added)
        current = current.with_operator(current.op.with_rows((*current.op.rows, *added.equations)))
    _logger.warning(
        "Completion of %s did not stabilize within %d rounds.",
        system.name,
        budget,
        extra={"extra_data": {"budget": budget}},
    )
    return IntegrabilityResult("undetermined", tuple(trace), current)


# *====[ Characters ]====*


@dataclass(frozen=True)
class CharacterTable:
    """Janet characters of the symbol g_q.

    Attributes:
        order: q.
        betas: β^1_q … β^n_q (principal top jets per class).
        alphas: α^1_q … α^n_q (parametric top jets per class).
        verdict: "involutive" or "not_involutive".
        coordinate_change: Integer matrix B with χ = B·χ̄ used to reach
            δ-regularity; the identity when none was needed.
        symbol_dim: dim g_q.
        symbol_dim_next: dim g_{q+1}.
        cohomology: Nonzero δ-cohomology groups found, as (degree, order, dim);
            the certificate of a "not_involutive" verdict.
    """

    order: int
    betas: tuple[int, ...]
    alphas: tuple[int, ...]
    verdict: Verdict
    coordinate_change: tuple[tuple[int, ...], ...]
    symbol_dim: int
    symbol_dim_next: int
    cohomology: tuple[tuple[int, int, int], ...] = ()

    @property
    def involutive(self) -> bool:
        """Whether the Cartan test passed."""
        return self.verdict == "involutive"

    @property
    def cartan_sum(self) -> int:
        """Σ_i i·α^i_q, the bound for dim g_{q+1}."""
        return sum(i * alpha for i, alpha in enumerate(self.alphas, start=1))

    @property
    def alpha_sum(self) -> int:
        """Σ_i α^i_q."""
        return sum(self.alphas)


def _identity_matrix(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _random_unimodular(n: int, rng: random.Random, bound: int) -> tuple[tuple[int, ...], ...]:
    """L·U with unit triangular L, U: an integer matrix of determinant 1."""
    lower = [[int(i == j) for j in range(n)] for i in range(n)]
    upper = [[int(i == j) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            lower[i][j] = rng.randint(-bound, bound)
            upper[j][i] = rng.randint(-bound, bound)
    return tuple(
        tuple(sum(lower[i][k] * upper[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


def _expand_monomial(mu: MultiIndex, change: Sequence[Sequence[int]]) -> dict[MultiIndex, int]:
    """Expand Π_i (Σ_j B_ij χ̄_j)^{μ_i} into monomials of χ̄."""
    n = mu.n
    expansion = {MultiIndex.zero(n): 1}
    for i, exponent in enumerate(mu.exponents):
        for _ in range(exponent):
            product: dict[MultiIndex, int] = {}
            for nu, value in expansion.items():
                for j, entry in enumerate(change[i], start=1):
                    if entry:
                        key = nu.raised(j)
                        product[key] = product.get(key, 0) + value * entry
            expansion = {key: value for key, value in product.items() if value}
    return expansion


def _change_coordinates(
    form: Mapping[Jet, PolyElement], change: Sequence[Sequence[int]]
) -> JetForm:
    result: JetForm = {}
    for (k, mu), coefficient in form.items():
        for nu, value in _expand_monomial(mu, change).items():
            updated = result.get((k, nu), coefficient.ring.zero) + coefficient * value
            if updated:
                result[k, nu] = updated
            else:
                result.pop((k, nu), None)
    return result


def _betas(
    forms: Sequence[JetForm],
    columns: Sequence[Jet],
    n: int,
    ring: PolyRing,
) -> tuple[int, ...]:
    """β^i = rank on the jets of class ≥ i minus rank on the jets of class ≥ i + 1."""
    ranks = [0] * (n + 2)
    for i in range(n, 0, -1):
        subset = [jet for jet in columns if jet[1].cls >= i]
        restricted = [
            {jet: value for jet, value in form.items() if jet[1].cls >= i} for form in forms
        ]
        ranks[i] = rank(forms_matrix(restricted, ring, subset))
    return tuple(ranks[i] - ranks[i + 1] for i in range(1, n + 1))


def _alphas(betas: Sequence[int], m: int, n: int, q: int) -> tuple[int, ...]:
    return tuple(m * comb(q + n - i - 1, q - 1) - betas[i - 1] for i in range(1, n + 1))


def _cohomology_certificate(system: JetSystem) -> tuple[tuple[int, int, int], ...]:
    for order in (system.q, system.q + 1):
        for degree in range(1, system.n + 1):
            dimension = cohomology_dimension(system.op, order, degree)
            if dimension:
                return ((degree, order, dimension),)
    return ()


def characters(system: JetSystem, bounds: AnalysisBounds | None = None) -> CharacterTable:
    """Janet characters and the Cartan involutivity test.

    Characters are computed in the given coordinates first. When the Cartan
    equality dim g_{q+1} = Σ i·α^i fails, a nonzero δ-cohomology group of g_q
    or g_{q+1} (or a failing projection) certifies non-involutivity; otherwise
    seeded random unimodular coordinate changes are tried.

    Raises:
        PreconditionError: For systems of order 0.
        RegularityNotFoundError: When no δ-regular coordinates were found
            within the retry budget.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (2,)): 1}])
        >>> table = characters(JetSystem(D))
        >>> table.betas, table.alphas, table.verdict
        ((0, 1), (1, 0), 'involutive')
    """
    bounds = bounds or AnalysisBounds()
    q, n, m = system.q, system.n, system.m
    if q < 1:
        error_msg = "Characters are defined for systems of order at least 1."
        raise PreconditionError(error_msg)
    ring = system.op.ring
    matrix = symbol_at(system.op, q)
    columns = top_columns(m, n, q)
    forms = [{columns[j]: value for j, value in row.items()} for row in matrix.matrix.rows()]
    next_dim = system.dim_g(q + 1)
    here_dim = system.dim_g(q)
    betas = _betas(forms, columns, n, ring)
    alphas = _alphas(betas, m, n, q)
    identity = _identity_matrix(n)

    if sum(i * a for i, a in enumerate(alphas, start=1)) == next_dim:
        return CharacterTable(q, betas, alphas, "involutive", identity, here_dim, next_dim)
    certificate = _cohomology_certificate(system)
    if certificate or system.projection_dim(q) < system.dim_r(q):
        _logger.info(
            "System %s is not involutive.",
            system.name,
            extra={"extra_data": {"cohomology": certificate}},
        )
        return CharacterTable(
            q, betas, alphas, "not_involutive", identity, here_dim, next_dim, certificate
        )
    rng = random.Random(bounds.seed)  # noqa: S311
    for attempt in range(bounds.regularity_retries):
        change = _random_unimodular(n, rng, bounds.entry_range)
        moved = [_change_coordinates(form, change) for form in forms]
        moved_betas = _betas(moved, columns, n, ring)
        moved_alphas = _alphas(moved_betas, m, n, q)
        _logger.debug(
            "Regularity attempt %d gives alphas %s.",
            attempt,
            moved_alphas,
            extra={"extra_data": {"change": change}},
        )
        if sum(i * a for i, a in enumerate(moved_alphas, start=1)) == next_dim:
            return CharacterTable(
                q, moved_betas, moved_alphas, "involutive", change, here_dim, next_dim
            )
    error_msg = (
        f"δ-regular coordinates not found within {bounds.regularity_retries} retries "
        f"(seed {bounds.seed})."
    )
    raise RegularityNotFoundError(error_msg)


# *====[ Hilbert polynomial ]====*


@dataclass(frozen=True)
class HilbertPolynomial:
    """dim R_{q+r} as a polynomial in r over ℚ."""

    poly: Poly

    def __call__(self, r: int) -> object:
        """Evaluate at r."""
        return self.poly.eval(r)

    @property
    def coefficients(self) -> tuple[object, ...]:
        """Coefficients from the constant term upwards."""
        return tuple(reversed(self.poly.all_coeffs()))


def hilbert_polynomial(
    system: JetSystem,
    table: CharacterTable | None = None,
    check_through: int = 2,
) -> HilbertPolynomial:
    """Hilbert polynomial dim R_q + Σ_i α^i·(C(r+i, i) − 1) of an involutive system.

    The result is cross-checked against `system_dims` for r ≤ check_through.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (2,)): 1}])
        >>> str(hilbert_polynomial(JetSystem(D)).poly.as_expr())
        'r + 2'
    """
    table = table or characters(system)
    if not table.involutive:
        error_msg = f"System {system.name} is not involutive; its characters do not give dims."
        raise PreconditionError(error_msg)
    r = Symbol("r")
    total = Poly(system.dim_r(system.q), r, domain=QQ)
    for i, alpha in enumerate(table.alphas, start=1):
        if not alpha:
            continue
        binomial = Poly(1, r, domain=QQ)
        for j in range(1, i + 1):
            binomial = binomial * Poly(r + j, r, domain=QQ)
        binomial = binomial * Poly(Rational(1, factorial(i)), r, domain=QQ)
        total = total + (binomial - Poly(1, r, domain=QQ)) * alpha
    result = HilbertPolynomial(total)
    for step, expected in enumerate(system_dims(system, check_through)):
        if result(step) != expected:
            error_msg = f"Character count disagrees with dim R_{system.q + step} = {expected}."
            raise PreconditionError(error_msg)
    return result


# *====[ Compatibility conditions ]====*


@dataclass(frozen=True)
class OrderCertificate:
    """Per-order bookkeeping of a relation search.

    Attributes:
        order: The checked order t.
        relations: Dimension of the relation space at order t.
        spanned: Dimension spanned by prolongations of the generators found
            up to and including order t.
        new_generators: Generators first found at order t.
    """

    order: int
    relations: int
    spanned: int
    new_generators: int


@dataclass(frozen=True)
class CompatibilityResult:
    """Generating compatibility conditions with their certificate.

    Attributes:
        operator: The CC operator (its unknowns are the equations of D).
        certificates: One entry per checked order.
        complete: False when generators still appeared at the last checked
            order or exceeded the coefficient degree bound.
        certified_through: Highest order checked.
        excluded_locus: Rendered pivot polynomials whose zero set is excluded.
    """

    operator: DiffOperator
    certificates: tuple[OrderCertificate, ...]
    complete: bool
    certified_through: int
    excluded_locus: tuple[str, ...] = ()

    @property
    def generator_orders(self) -> tuple[int, ...]:
        """Order of each generator."""
        return tuple(form_order(row) for row in self.operator.rows)


def _relations(
    ring: PolyRing,
    lhs: Sequence[JetForm],
    rhs: Sequence[JetForm],
) -> tuple[list[dict[int, PolyElement]], tuple[PolyElement, ...]]:
    """Coefficient vectors v with Σ v_i·lhs_i in the span of rhs."""
    forms = [*lhs, *rhs]
    columns = sorted({jet for form in forms for jet in form}, key=jet_key)
    matrix = forms_matrix(forms, ring, columns)
    result = rref_fraction_free(matrix.transpose())
    vectors = []
    for vector in result.nullspace:
        projected = {i: value for i, value in enumerate(vector[: len(lhs)]) if value}
        if projected:
            vectors.append(projected)
    return vectors, result.excluded_locus


def _derivatives_upto(form: JetForm, n: int, length: int) -> Iterable[JetForm]:
    """D_ν(form) for every |ν| ≤ length, each ν produced once."""
    if length < 0:
        return
    frontier = {MultiIndex.zero(n): form}
    yield form
    for _ in range(length):
        grown: dict[MultiIndex, JetForm] = {}
        for nu, value in frontier.items():
            for i in range(nu.cls if nu.length else n, 0, -1):
                grown.setdefault(nu.raised(i), derive_form(value, i))
        yield from grown.values()
        frontier = grown


def compatibility_conditions(
    operator: DiffOperator,
    s_max: int | None = None,
    d_max: int | None = None,
) -> CompatibilityResult:
    """Generating operators Λ with Λ∘D = 0, order by order up to s_max.

    At each order t the relations among d_ν Φ^τ (|ν| ≤ t) are computed as a
    left nullspace; a relation is a new generator only when it is independent
    of the prolongations of the generators found at lower orders.

    Examples:
        >>> grad = DiffOperator.build(2, 1, [{(0, (1,)): 1}, {(0, (2,)): 1}])
        >>> result = compatibility_conditions(grad)
        >>> result.operator.p, result.generator_orders, result.complete
        (1, (1,), True)
    """
    s_max = operator.order + 2 if s_max is None else s_max
    d_max = operator.max_coefficient_degree + 2 if d_max is None else d_max
    n, ring = operator.n, operator.ring
    generators: list[JetForm] = []
    certificates: list[OrderCertificate] = []
    excluded: set[str] = set()
    too_wide = False
    for t in range(s_max + 1):
        labels = [(tau, nu) for tau in range(operator.p) for nu in multi_indices_upto(n, t)]
        lhs = [_label_form(operator, label) for label in labels]
        vectors, locus = _relations(ring, lhs, [])
        excluded.update(str(p) for p in locus)
        space: RowSpace[Jet] = RowSpace(ring, position=jet_preference)
        for generator in generators:
            for derived in _derivatives_upto(generator, n, t - form_order(generator)):
                space.add(derived)
        new = []
        for vector in vectors:
            relation = {labels[i]: value for i, value in vector.items()}
            if space.add(relation):
                new.append(primitive_vector(relation, sort_key=jet_preference))
        too_wide = too_wide or any(total_degree(a) > d_max for form in new for a in form.values())
        generators.extend(new)
        certificates.append(OrderCertificate(t, len(vectors), space.rank, len(new)))
        _logger.debug(
            "CC search at order %d: %d relation(s), %d new generator(s).",
            t,
            len(vectors),
            len(new),
        )
    complete = not certificates[-1].new_generators and not too_wide
    if not complete:
        _logger.warning(
            "CC search bounds exhausted at order %d.",
            s_max,
            extra={"extra_data": {"s_max": s_max, "d_max": d_max}},
        )
    cc = DiffOperator(n, operator.p, tuple(generators))
    return CompatibilityResult(cc, tuple(certificates), complete, s_max, tuple(sorted(excluded)))


def _label_form(operator: DiffOperator, label: tuple[int, MultiIndex]) -> JetForm:
    """d_ν Φ^τ for the label (τ, ν)."""
    tau, nu = label
    form: JetForm = dict(operator.rows[tau])
    for i in nu.derivatives():
        form = derive_form(form, i)
    return form


# *====[ Parametrization ]====*


@dataclass(frozen=True)
class ParametrizationResult:
    """Verdict of the adjoint-based parametrization test.

    Attributes:
        verdict: "parametrizable", "not_parametrizable" or "inconclusive".
        parametrization: The candidate potential operator, when one was built.
        residual_zero: Whether D1∘candidate vanishes identically.
        certificates: Per order t, (t, dim of CC(candidate) at t, dim spanned
            by prolongations of D1).
        certified_through: Highest order compared.
    """

    verdict: Literal["parametrizable", "not_parametrizable", "inconclusive"]
    parametrization: DiffOperator | None
    residual_zero: bool
    certificates: tuple[tuple[int, int, int], ...]
    certified_through: int

    @property
    def parametrizable(self) -> bool | None:
        """True, False, or None when inconclusive."""
        return {"parametrizable": True, "not_parametrizable": False}.get(self.verdict)


def parametrization_test(
    operator: DiffOperator,
    bounds: AnalysisBounds | None = None,
) -> ParametrizationResult:
    """Decide whether the solutions of D1 are the image of a potential operator.

    The candidate is ad(CC(ad(D1))); it parametrizes D1 when D1∘candidate = 0
    and the relations of the candidate are spanned, order by order, by the
    prolongations of D1.

    Examples:
        >>> curl = DiffOperator.build(2, 2, [{(0, (2,)): 1, (1, (1,)): -1}])
        >>> parametrization_test(curl).verdict
        'parametrizable'
    """
    bounds = bounds or AnalysisBounds()
    dual = adjoint(operator)
    dual_bounds = bounds.for_operator(dual)
    cc = compatibility_conditions(dual, dual_bounds.order_max, dual_bounds.deg_max)
    candidate = adjoint(cc.operator)
    residual_zero = compose(operator, candidate).is_zero
    t_max = bounds.for_operator(candidate).order_max or 0
    certificates = []
    exceeded = False
    n, ring = operator.n, operator.ring
    for t in range(t_max + 1):
        labels = [(tau, nu) for tau in range(candidate.p) for nu in multi_indices_upto(n, t)]
        lhs = [_label_form(candidate, label) for label in labels]
        vectors, _ = _relations(ring, lhs, [])
        spanned_forms = [
            _label_form(operator, (tau, nu))
            for tau in range(operator.p)
            for nu in multi_indices_upto(n, t - operator.row_order(tau))
        ]
        spanned = forms_rank(spanned_forms, ring) if spanned_forms else 0
        certificates.append((t, len(vectors), spanned))
        if len(vectors) > spanned:
            exceeded = True
            break
    verdict: Literal["parametrizable", "not_parametrizable", "inconclusive"]
    if not residual_zero or (exceeded and cc.complete):
        verdict = "not_parametrizable"
    elif exceeded:
        verdict = "inconclusive"
    else:
        verdict = "parametrizable"
    _logger.info(
        "Parametrization test: %s.",
        verdict,
        extra={"extra_data": {"potentials": candidate.m, "certificates": certificates}},
    )
    return ParametrizationResult(verdict, candidate, residual_zero, tuple(certificates), t_max)


# *====[ Polynomial solutions ]====*


def polynomial_solutions(operator: DiffOperator, degree: int) -> list[tuple[PolyElement, ...]]:
    """ℚ-basis of the polynomial solutions of total degree ≤ degree.

    Examples:
        >>> D = DiffOperator.build(1, 1, [{(0, (1, 1)): 1}])
        >>> len(polynomial_solutions(D, 3))
        2
    """
    ring = operator.ring
    n = operator.n
    monomials = [mu.exponents for mu in multi_indices_upto(n, degree)]
    unknowns = [(k, monom) for k in range(operator.m) for monom in monomials]
    images: list[dict[tuple[int, tuple[int, ...]], object]] = []
    for k, monom in unknowns:
        basis_function = ring({monom: QQ.one})
        image: dict[tuple[int, tuple[int, ...]], object] = {}
        for tau, row in enumerate(operator.rows):
            value = ring.zero
            for (unknown, mu), coefficient in row.items():
                if unknown != k:
                    continue
                derivative = basis_function
                for i in mu.derivatives():
                    derivative = derivative.diff(ring.gens[i - 1])
                value += coefficient * derivative
            for term_monom, coeff in value.terms():
                image[tau, term_monom] = coeff
        images.append(image)
    rows_keys = sorted({key for image in images for key in image})
    index = {key: i for i, key in enumerate(rows_keys)}
    grid = {
        (index[key], j): ring.ground_new(value)
        for j, image in enumerate(images)
        for key, value in image.items()
    }
    matrix = PolyMatrix(ring, len(rows_keys), len(unknowns), grid)
    solutions = []
    for vector in nullspace(matrix):
        functions = [ring.zero] * operator.m
        for (k, monom), value in zip(unknowns, vector, strict=True):
            if value:
                functions[k] += value * ring({monom: QQ.one})
        solutions.append(tuple(functions))
    return solutions


# *====[ Purity ]====*


@dataclass(frozen=True)
class PurityResult:
    """Purity class of an element of the differential module.

    Attributes:
        r: Largest r with the element in t_r(M); −1 when it is not torsion,
            n when the element vanishes in M.
        annihilator: The completed annihilating system on z = element.
        alphas: Characters of the annihilator (empty when not computed).
        certified_through: Annihilator search order bound.
    """

    r: int
    annihilator: DiffOperator
    alphas: tuple[int, ...]
    certified_through: int

    @property
    def torsion(self) -> bool:
        """Whether the element is a torsion element."""
        return self.r >= 0


def purity_classify(
    system: JetSystem,
    element: Mapping[Jet, PolyElement],
    bound: int | None = None,
    bounds: AnalysisBounds | None = None,
) -> PurityResult:
    """Classify z = element in the purity filtration t_n(M) ⊂ … ⊂ t_0(M).

    The annihilator collects every operator A of order ≤ bound with A(element)
    in the prolonged system; its characters give the answer.

    Raises:
        BoundsExhaustedError: When new annihilating relations still appear at
            the bound.

    Examples:
        >>> D = DiffOperator.build(2, 1, [{(0, (2, 2)): 1}, {(0, (1, 2)): 1}])
        >>> y2 = {(0, MultiIndex((0, 1))): D.ring.one}
        >>> purity_classify(JetSystem(D), y2).r
        1
    """
    bounds = bounds or AnalysisBounds()
    bound = system.q + 2 if bound is None else bound
    n, ring = system.n, system.op.ring
    element = {jet: ring(value) for jet, value in element.items() if value}
    for k, mu in element:
        if not 0 <= k < system.m or mu.n != n:
            error_msg = f"Element references jet ({k}, {mu.exponents}) outside the system."
            raise DimensionMismatchError(error_msg)
    base_order = form_order(element)
    relations: list[JetForm] = []
    last_new = 0
    for t in range(bound + 1):
        nus = multi_indices_upto(n, t)
        lhs = []
        for nu in nus:
            form = dict(element)
            for i in nu.derivatives():
                form = derive_form(form, i)
            lhs.append(form)
        rhs = prolonged_forms(system.op, max(system.q, base_order + t))
        vectors, _ = _relations(ring, lhs, rhs)
        space: RowSpace[Jet] = RowSpace(ring, position=jet_preference)
        for relation in relations:
            for derived in _derivatives_upto(relation, n, t - form_order(relation)):
                space.add(derived)
        for vector in vectors:
            relation = {(0, nus[i]): value for i, value in vector.items()}
            if space.add(relation):
                relations.append(primitive_vector(relation, sort_key=jet_preference))
                last_new = t
    annihilator = DiffOperator(n, 1, tuple(relations))
    if not element:
        return PurityResult(n, annihilator, (), bound)
    if relations and last_new == bound and bound > 0:
        error_msg = f"Annihilator search did not stabilize within order {bound}."
        raise BoundsExhaustedError(error_msg)
    if not relations:
        return PurityResult(-1, annihilator, (), bound)
    z_system = JetSystem(annihilator, order=max(1, annihilator.order), name=f"{system.name}:ann")
    completed = check_formal_integrability(z_system, bounds.r_max, bounds.completion_budget).system
    if completed.dim_r(completed.q) == 0:
        return PurityResult(n, completed.op, (), bound)
    table = _involutive_characters(completed, bounds)
    alphas = table.alphas
    r = -1
    for candidate in range(n):
        if all(alpha == 0 for alpha in alphas[n - 1 - candidate :]):
            r = candidate
    _logger.info(
        "Element classified with purity r=%d.", r, extra={"extra_data": {"alphas": alphas}}
    )
    return PurityResult(r, completed.op, alphas, bound)


def _involutive_characters(system: JetSystem, bounds: AnalysisBounds) -> CharacterTable:
    """Characters of the first involutive prolongation within the budget."""
    current = system
    for _ in range(bounds.completion_budget):
        table = characters(current, bounds)
        if table.involutive:
            return table
        current = current.with_operator(prolong(current.op, 1), current.q + 1)
    error_msg = (
        f"System {system.name} did not become involutive within "
        f"{bounds.completion_budget} prolongations."
    )
    raise BoundsExhaustedError(error_msg)


# *====[ Full analysis ]====*


@dataclass(frozen=True)
class AnalysisReport:
    """Everything `analyze` computes for a system.

    Attributes:
        integrability: Completion outcome.
        dims: dim R_{q+r} of the completed system for r ≤ r_max.
        characters: Characters of the completed system, or None when the
            regularity search failed.
        hilbert: Hilbert polynomial when the completed system is involutive.
        order: Order at which characters were taken.
        note: Human-readable remark on anything skipped.
    """

    integrability: IntegrabilityResult
    dims: tuple[int, ...]
    characters: CharacterTable | None
    hilbert: HilbertPolynomial | None
    order: int
    note: str = ""

    @property
    def formally_integrable(self) -> bool:
        """Whether the input system needed no completion."""
        return self.integrability.formally_integrable

    @property
    def completion_trace(self) -> tuple[CompletionStep, ...]:
        """Equations adjoined per completion round."""
        return self.integrability.trace


def analyze(system: JetSystem, bounds: AnalysisBounds | None = None) -> AnalysisReport:
    """Completion, dimension table, characters and Hilbert polynomial.

    Examples:
        >>> free = JetSystem(DiffOperator(2, 1, ()), order=1)
        >>> report = analyze(free)
        >>> report.dims, report.characters.verdict
        ((3, 6, 10), 'involutive')
    """
    bounds = bounds or AnalysisBounds()
    integrability = check_formal_integrability(system, bounds.r_max, bounds.completion_budget)
    completed = integrability.system
    if completed.q < 1:
        completed = completed.with_operator(completed.op, 1)
    dims = system_dims(completed, bounds.r_max)
    note = ""
    try:
        table: CharacterTable | None = characters(completed, bounds)
    except RegularityNotFoundError as exc:
        table, note = None, str(exc)
    hilbert = None
    if table is not None and table.involutive:
        hilbert = hilbert_polynomial(completed, table, bounds.r_max)
    elif table is not None:
        note = "Hilbert polynomial omitted: the completed system is not involutive."
    return AnalysisReport(integrability, dims, table, hilbert, completed.q, note)
