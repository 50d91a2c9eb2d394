"""Catalog of the linear systems shipped with the command-line tool.

Every entry is a Lie-equation style system in linear (Medolaghi) form, built
with exact coefficients. Metrics are fixed per dimension: Euclidean for n ≤ 3,
Minkowski diag(1, 1, 1, −1) for n = 4.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Final

from sympy.polys.rings import PolyElement

from jetspencer.core.errors import PreconditionError, UnknownCatalogError
from jetspencer.core.exactalg import coefficient_ring
from jetspencer.core.formal import JetSystem
from jetspencer.core.jetcalc import DiffOperator, JetForm, MultiIndex

__all__ = ["CATALOG", "CatalogEntry", "catalog", "catalog_names", "metric"]

_logger = logging.getLogger(__name__)

Term = tuple[PolyElement | int, int, tuple[int, ...]]


def metric(n: int) -> tuple[tuple[int, ...], ...]:
    """The fixed metric ω of dimension n.

    Examples:
        >>> metric(4)[3]
        (0, 0, 0, -1)
    """
    signature = [1] * n
    if n == 4:  # noqa: PLR2004
        signature[-1] = -1
    return tuple(tuple(signature[i] if i == j else 0 for j in range(n)) for i in range(n))


def _operator(n: int, m: int, rows: Sequence[Sequence[Term]]) -> DiffOperator:
    """Sum (coefficient, unknown, derivatives) terms into operator rows."""
    ring = coefficient_ring(n)
    forms: list[JetForm] = []
    for row in rows:
        form: JetForm = {}
        for coefficient, k, derivatives in row:
            jet = (k, MultiIndex.from_derivatives(n, derivatives))
            value = form.get(jet, ring.zero) + ring(coefficient)
            if value:
                form[jet] = value
            else:
                form.pop(jet, None)
        forms.append(form)
    return DiffOperator(n, m, tuple(forms))


def _xi_names(n: int) -> tuple[str, ...]:
    return tuple(f"xi{k}" for k in range(1, n + 1))


def _killing_terms(n: int, omega: Sequence[Sequence[int]], i: int, j: int) -> list[Term]:
    """ω_rj ∂_iξ^r + ω_ir ∂_jξ^r (1-based i, j)."""
    terms: list[Term] = []
    for r in range(n):
        if omega[r][j - 1]:
            terms.append((omega[r][j - 1], r, (i,)))
        if omega[i - 1][r]:
            terms.append((omega[i - 1][r], r, (j,)))
    return terms


def _killing(n: int) -> JetSystem:
    omega = metric(n)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
    rows = [_killing_terms(n, omega, i, j) for i, j in pairs]
    return JetSystem(_operator(n, n, rows), name=f"killing{n}", unknowns=_xi_names(n))


def _conformal_killing(n: int) -> JetSystem:
    """n·Ω_ij − ω_ij·ω^{rs}Ω_rs for i ≤ j, the last diagonal row dropped."""
    omega = metric(n)
    trace: list[Term] = []
    for r in range(1, n + 1):
        for coefficient, k, derivatives in _killing_terms(n, omega, r, r):
            trace.append((omega[r - 1][r - 1] * int(coefficient), k, derivatives))
    rows = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if i == j == n:
                continue
            row: list[Term] = [(n * int(c), k, d) for c, k, d in _killing_terms(n, omega, i, j)]
            if omega[i - 1][j - 1]:
                row.extend((-omega[i - 1][j - 1] * int(c), k, d) for c, k, d in trace)
            rows.append(row)
    return JetSystem(_operator(n, n, rows), name=f"conformal_killing{n}", unknowns=_xi_names(n))


def _contact(n: int) -> JetSystem:
    """Infinitesimal contact transformations of w = dx1 − x3 dx2."""
    x3 = coefficient_ring(n).gens[2]
    rows = [
        [(1, 0, (2,)), (-x3, 1, (2,)), (x3, 0, (1,)), (-(x3**2), 1, (1,)), (-1, 2, ())],
        [(1, 0, (3,)), (-x3, 1, (3,))],
    ]
    return JetSystem(_operator(n, 3, rows), name="contact", unknowns=_xi_names(3))


def _screw(n: int) -> JetSystem:
    rows = [[(1, 0, (2,))], [(1, 1, (2,)), (-1, 0, (1,))]]
    return JetSystem(_operator(n, 2, rows), name="screw", unknowns=_xi_names(2))


def _complex(n: int) -> JetSystem:
    rows = [[(1, 0, (1,)), (-1, 1, (2,))], [(1, 0, (2,)), (1, 1, (1,))]]
    return JetSystem(_operator(n, 2, rows), name="complex", unknowns=_xi_names(2))


def _affine_line(n: int) -> JetSystem:
    return JetSystem(_operator(n, 1, [[(1, 0, (1, 1))]]), name="affine_line", unknowns=("xi",))


def _projective_line(n: int) -> JetSystem:
    rows = [[(1, 0, (1, 1, 1))]]
    return JetSystem(_operator(n, 1, rows), name="projective_line", unknowns=("xi",))


def _translations(n: int) -> JetSystem:
    rows = [[(1, k, (i,))] for k in range(n) for i in range(1, n + 1)]
    return JetSystem(_operator(n, n, rows), name=f"translations{n}", unknowns=_xi_names(n))


def _elasticity_cc(n: int) -> JetSystem:
    """∂22 ε11 − 2 ∂12 ε12 + ∂11 ε22, the planar strain compatibility."""
    rows = [[(1, 0, (2, 2)), (-2, 1, (1, 2)), (1, 2, (1, 1))]]
    return JetSystem(
        _operator(n, 3, rows),
        name="elasticity_cc",
        unknowns=("eps11", "eps12", "eps22"),
    )


def _stress_div(n: int) -> JetSystem:
    """∂_r σ^{ir} = 0 for a symmetric stress stored as σ^{ij}, i ≤ j."""
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
    index = {pair: k for k, pair in enumerate(pairs)}
    rows = [
        [(1, index[min(i, r), max(i, r)], (r,)) for r in range(1, n + 1)]
        for i in range(1, n + 1)
    ]
    unknowns = tuple(f"sigma{i}{j}" for i, j in pairs)
    return JetSystem(_operator(n, len(pairs), rows), name=f"stress_div{n}", unknowns=unknowns)


@dataclass(frozen=True)
class CatalogEntry:
    """A named family of systems.

    Attributes:
        description: One-line summary.
        dimensions: Valid numbers of independent variables.
        builder: Builds the system for a given n.
    """

    description: str
    dimensions: tuple[int, ...]
    builder: Callable[[int], JetSystem]


CATALOG: Final[dict[str, CatalogEntry]] = {
    "killing": CatalogEntry("Killing system of the fixed metric", (1, 2, 3, 4), _killing),
    "conformal_killing": CatalogEntry(
        "conformal Killing system, trace removed", (2, 3, 4), _conformal_killing
    ),
    "contact": CatalogEntry("infinitesimal contact transformations", (3,), _contact),
    "screw": CatalogEntry("screw structure of the plane", (2,), _screw),
    "complex": CatalogEntry("complex structure of the plane", (2,), _complex),
    "affine_line": CatalogEntry("affine transformations of the line", (1,), _affine_line),
    "projective_line": CatalogEntry(
        "projective transformations of the line", (1,), _projective_line
    ),
    "translations": CatalogEntry("translations", (1, 2, 3, 4), _translations),
    "elasticity_cc": CatalogEntry("planar strain compatibility condition", (2,), _elasticity_cc),
    "stress_div": CatalogEntry("divergence of a symmetric stress", (2, 3), _stress_div),
}


def catalog_names() -> list[str]:
    """Catalog names in display order."""
    return list(CATALOG)


def catalog(name: str, n: int | None = None) -> JetSystem:
    """Build a catalog system.

    Args:
        name: A name from `catalog_names()`.
        n: Number of independent variables; defaults to the smallest valid one.

    Returns:
        A fresh `JetSystem`.

    Raises:
        UnknownCatalogError: For an unknown name.
        PreconditionError: For an unsupported dimension.

    Examples:
        >>> catalog("killing", 2).op.p
        3
        >>> catalog("conformal_killing", 4).op.p
        9
    """
    if name not in CATALOG:
        error_msg = f"Unknown catalog system '{name}'. Known: {', '.join(CATALOG)}."
        raise UnknownCatalogError(error_msg)
    entry = CATALOG[name]
    n = entry.dimensions[0] if n is None else n
    if n not in entry.dimensions:
        error_msg = f"Catalog system '{name}' is defined for n in {entry.dimensions}, got {n}."
        raise PreconditionError(error_msg)
    _logger.debug("Building catalog system %s for n=%d.", name, n)
    return entry.builder(n)
