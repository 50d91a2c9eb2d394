"""Command dispatch: one `run` call per command, always returning a `Report`.

Engine exceptions never escape `run`: bound exhaustion becomes an
"inconclusive" report and every other `JetSpencerError` an "error" report.
"""

import logging
import time
from collections.abc import Callable, Mapping
from pathlib import Path
from typing import Any, Final, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from sympy import Rational

from jetspencer.cli.dsl import SystemSource, parse_element, parse_system, render_system
from jetspencer.cli.report import Report, ReportInput, digest
from jetspencer.core import catalog as catalog_module
from jetspencer.core.errors import (
    DimensionMismatchError,
    InconclusiveError,
    JetSpencerError,
    PreconditionError,
    UnknownCommandError,
)
from jetspencer.core.exactalg import format_rational
from jetspencer.core.formal import (
    AnalysisBounds,
    CharacterTable,
    analyze,
    characters,
    compatibility_conditions,
    parametrization_test,
    purity_classify,
)
from jetspencer.core.jetcalc import (
    DiffOperator,
    JetForm,
    adjoint,
    compose,
    prolong,
    render_operator,
)
from jetspencer.core.macaulay import (
    decompose,
    min_generators,
    presentation_from_operator,
    solution_basis,
)
from jetspencer.core.sequences import (
    SpencerOperators,
    cosserat_check,
    first_spencer_operator,
    janet_spencer_dims,
    ricci_weyl_split,
    spencer_operators_finite_type,
)

__all__ = ["COMMANDS", "RunFlags", "resolve_source", "run"]

_logger = logging.getLogger(__name__)

Payload = tuple[dict[str, Any], dict[str, Any]]


class RunFlags(BaseModel):
    """Options shared by every command.

    Attributes:
        order_max: Highest CC / annihilator order tried.
        deg_max: Highest coefficient degree accepted for generators.
        r_max: Prolongations checked for integrability and dimension tables.
        seed: Seed of the δ-regularity search.
        n: Dimension for catalog systems, `cosserat` and `split`.
        catalog: Catalog name used when no `.pde` source is given.
        element: Linear expression classified by `purity`.
        metric: Metric used by `split`.
        ricci: Rows of ρ_ij for `split`, e.g. ``"1 0 0; 0 2 0; 0 0 3"``.
        prolong: Prolongations applied before `characters`.
        format: Output format chosen by the command line.
    """

    model_config = ConfigDict(frozen=True)

    order_max: int | None = Field(default=None, ge=0)
    deg_max: int | None = Field(default=None, ge=0)
    r_max: int = Field(default=2, ge=0)
    seed: int = 0
    n: int | None = Field(default=None, ge=1)
    catalog: str | None = None
    element: str | None = None
    metric: Literal["euclidean", "minkowski"] = "euclidean"
    ricci: str | None = None
    prolong: int = Field(default=0, ge=0)
    format: Literal["text", "structured"] = "text"

    @property
    def bounds(self) -> AnalysisBounds:
        """The analysis bounds carried by the flags."""
        return AnalysisBounds(
            order_max=self.order_max, deg_max=self.deg_max, r_max=self.r_max, seed=self.seed
        )


def resolve_source(
    path: str | Path | None = None,
    catalog_name: str | None = None,
    n: int | None = None,
) -> SystemSource | None:
    """The system named on the command line: a `.pde` file or a catalog entry.

    Examples:
        >>> resolve_source(catalog_name="screw").variables
        ('x1', 'x2')
        >>> resolve_source() is None
        True
    """
    if path is not None:
        return parse_system(Path(path).read_text(encoding="utf-8"))
    if catalog_name is not None:
        return SystemSource.from_system(catalog_module.catalog(catalog_name, n))
    return None


# *====[ Helpers ]====*


def _names(prefix: str, count: int) -> list[str]:
    return [f"{prefix}{index}" for index in range(1, count + 1)]


def _require_source(source: SystemSource | None, command: str) -> SystemSource:
    if source is None:
        error_msg = f"Command '{command}' needs a .pde source or --catalog."
        raise PreconditionError(error_msg)
    return source


def _table_payload(table: CharacterTable) -> dict[str, Any]:
    return {
        "order": table.order,
        "betas": list(table.betas),
        "alphas": list(table.alphas),
        "verdict": table.verdict,
        "cartan_sum": table.cartan_sum,
        "alpha_sum": table.alpha_sum,
        "symbol_dim": table.symbol_dim,
        "symbol_dim_next": table.symbol_dim_next,
    }


def _table_certificate(table: CharacterTable) -> dict[str, Any]:
    return {
        "coordinate_change": [list(row) for row in table.coordinate_change],
        "cohomology": [
            {"degree": degree, "order": order, "dimension": dimension}
            for degree, order, dimension in table.cohomology
        ],
    }


def _parse_ricci(text: str) -> list[list[Rational]]:
    try:
        rows = [
            [Rational(entry) for entry in row.split()] for row in text.split(";") if row.strip()
        ]
    except (TypeError, ValueError) as exc:
        error_msg = f"Ricci entries must be integers or fractions p/q: {text!r}."
        raise PreconditionError(error_msg) from exc
    if any(len(row) != len(rows) for row in rows):
        lengths = [len(row) for row in rows]
        error_msg = f"The Ricci tensor must be square, got rows of lengths {lengths}."
        raise DimensionMismatchError(error_msg)
    return rows


def _split_metric(kind: str, n: int) -> list[list[int]]:
    signature = [1] * n
    if kind == "minkowski":
        signature[-1] = -1
    return [[signature[i] if i == j else 0 for j in range(n)] for i in range(n)]


# *====[ Commands ]====*


def _analyze(source: SystemSource | None, flags: RunFlags) -> Payload:
    source = _require_source(source, "analyze")
    system = source.to_system()
    report = analyze(system, flags.bounds)
    trace = [
        {
            "step": step.step,
            "order": step.order,
            "equations": render_operator(
                DiffOperator(system.n, system.m, step.equations), source.unknowns, source.variables
            ),
        }
        for step in report.completion_trace
    ]
    result: dict[str, Any] = {
        "integrability": report.integrability.status,
        "formally_integrable": report.formally_integrable,
        "completion_trace": trace,
        "order": report.order,
        "dims": list(report.dims),
        "characters": _table_payload(report.characters) if report.characters else None,
        "hilbert": (
            [format_rational(c) for c in report.hilbert.coefficients] if report.hilbert else None
        ),
    }
    certificates = _table_certificate(report.characters) if report.characters else {}
    if report.note:
        certificates["note"] = report.note
    return result, certificates


def _characters(source: SystemSource | None, flags: RunFlags) -> Payload:
    system = _require_source(source, "characters").to_system()
    if flags.prolong:
        system = system.with_operator(prolong(system.op, flags.prolong), system.q + flags.prolong)
    table = characters(system, flags.bounds)
    result = _table_payload(table)
    result["symbol_dims"] = [system.dim_g(system.q + r) for r in range(flags.r_max + 1)]
    return result, _table_certificate(table)


def _cc(source: SystemSource | None, flags: RunFlags) -> Payload:
    source = _require_source(source, "cc")
    operator = source.operator
    bounds = flags.bounds.for_operator(operator)
    found = compatibility_conditions(operator, bounds.order_max, bounds.deg_max)
    result = {
        "count": found.operator.p,
        "orders": list(found.generator_orders),
        "operator": render_operator(found.operator, _names("phi", operator.p), source.variables),
        "complete": found.complete,
    }
    certificates = {
        "orders": [
            {
                "order": cert.order,
                "relations": cert.relations,
                "spanned": cert.spanned,
                "new_generators": cert.new_generators,
            }
            for cert in found.certificates
        ],
        "certified_through": found.certified_through,
        "excluded_locus": list(found.excluded_locus),
    }
    if not found.complete:
        error_msg = f"New compatibility conditions still appear at order {found.certified_through}."
        raise _Partial(error_msg, result, certificates)
    return result, certificates


def _adjoint(source: SystemSource | None, _: RunFlags) -> Payload:
    source = _require_source(source, "adjoint")
    dual = adjoint(source.operator)
    unknowns = _names("lam", dual.m)
    return {"operator": render_operator(dual, unknowns, source.variables)}, {}


def _parametrize(source: SystemSource | None, flags: RunFlags) -> Payload:
    source = _require_source(source, "parametrize")
    outcome = parametrization_test(source.operator, flags.bounds)
    potential = outcome.parametrization
    result = {
        "verdict": outcome.verdict,
        "potentials": potential.m if potential else 0,
        "parametrization": (
            render_operator(potential, _names("phi", potential.m), source.variables)
            if potential
            else []
        ),
        "residual_zero": outcome.residual_zero,
    }
    certificates = {
        "orders": [
            {"order": t, "relations": relations, "spanned": spanned}
            for t, relations, spanned in outcome.certificates
        ],
        "certified_through": outcome.certified_through,
    }
    if outcome.verdict == "inconclusive":
        error_msg = "Relations of the candidate exceed D1 within the order bound."
        raise _Partial(error_msg, result, certificates)
    return result, certificates


def _spencer_dims(source: SystemSource | None, flags: RunFlags) -> Payload:
    system = _require_source(source, "spencer-dims").to_system()
    dims = janet_spencer_dims(system, flags.bounds)
    result = {
        "janet": list(dims.janet),
        "spencer": list(dims.spencer),
        "spencer_jets": list(dims.spencer_jets),
    }
    return result, {"exact_columns": dims.exact_columns}


def _spencer_ops(source: SystemSource | None, _: RunFlags) -> Payload:
    source = _require_source(source, "spencer-ops")
    system = source.to_system()
    certificates: dict[str, Any] = {"symbol_dim_next": system.dim_g(system.q + 1)}
    try:
        ops = spencer_operators_finite_type(system)
    except PreconditionError as exc:
        certificates["d2_skipped"] = str(exc)
        ops = first_spencer_operator(system)
    names = list(ops.names)
    dual = adjoint(ops.d1)
    result: dict[str, Any] = {
        "coordinates": names,
        "finite_type": ops.finite_type,
        "d1_count": ops.d1.p,
        "d1": render_operator(ops.d1, names, source.variables),
        "d1_adjoint": render_operator(dual, _names("lam", dual.m), source.variables),
    }
    if ops.d2 is not None:
        row_names = [f"A_{name}_{i}" for name in names for i in range(1, system.n + 1)]
        result["d2_count"] = ops.d2.p
        result["d2"] = render_operator(ops.d2, row_names, source.variables)
        certificates["d2_after_d1_zero"] = compose(ops.d2, _d1_by_label(ops, system.n)).is_zero
    return result, certificates


def _d1_by_label(ops: SpencerOperators, n: int) -> DiffOperator:
    """D1 with row (z, i) placed at index z·n + i − 1, the numbering D2 reads."""
    rows: list[JetForm] = [{}] * (len(ops.coordinates) * n)
    for (z, i), row in zip(ops.labels, ops.d1.rows, strict=True):
        rows[z * n + i - 1] = row
    return ops.d1.with_rows(rows)


def _cosserat(_: SystemSource | None, flags: RunFlags) -> Payload:
    check = cosserat_check(flags.n or 2)
    variables = _names("x", check.n)
    result = {
        "coordinates": list(check.operators.names),
        "equations": render_operator(check.dual, check.dual_names, variables),
        "rows_match": check.rows_match,
        "residual_zero": check.residual_zero,
        "airy_ok": check.airy_ok,
        "verified": check.verified,
    }
    return result, {}


def _split(_: SystemSource | None, flags: RunFlags) -> Payload:
    if flags.ricci is None:
        error_msg = "Command 'split' needs --ricci."
        raise PreconditionError(error_msg)
    ricci = _parse_ricci(flags.ricci)
    n = len(ricci)
    if flags.n is not None and flags.n != n:
        error_msg = f"--n {flags.n} does not match a Ricci tensor of size {n}."
        raise DimensionMismatchError(error_msg)
    split = ricci_weyl_split(_split_metric(flags.metric, n), ricci)
    result = {
        "n": n,
        "metric": flags.metric,
        "scalar": format_rational(split.scalar),
        "tau": [[format_rational(split.tau[i, j]) for j in range(n)] for i in range(n)],
        "components": {
            " ".join(str(index + 1) for index in key): format_rational(value)
            for key, value in sorted(split.components.items())
        },
        "trace_ok": split.trace_ok,
    }
    return result, {"trace": [[format_rational(v) for v in split.trace().row(i)] for i in range(n)]}


def _macaulay(source: SystemSource | None, _: RunFlags) -> Payload:
    source = _require_source(source, "macaulay")
    presentation = presentation_from_operator(source.operator)
    decomposition = decompose(presentation)
    result: dict[str, Any] = {
        "invariant_factors": [str(f) for f in decomposition.nontrivial_factors],
        "free_rank": decomposition.free_rank,
        "torsion": decomposition.torsion,
    }
    if not decomposition.torsion:
        return result, {}
    space = solution_basis(presentation)
    result["dimension"] = decomposition.dimension
    result["min_generators"] = min_generators(presentation)
    result["basis"] = [[f.render() for f in vector] for vector in space.basis]
    result["generators"] = [[f.render() for f in vector] for vector in space.generators]
    certificate = space.certificate
    certificates = (
        {
            "solutions_ok": certificate.solutions_ok,
            "closure_rank": certificate.closure_rank,
            "verified": certificate.verified,
        }
        if certificate
        else {}
    )
    return result, certificates


def _purity(source: SystemSource | None, flags: RunFlags) -> Payload:
    source = _require_source(source, "purity")
    if flags.element is None:
        error_msg = "Command 'purity' needs --element."
        raise PreconditionError(error_msg)
    system = source.to_system()
    element = parse_element(flags.element, source)
    outcome = purity_classify(system, element, flags.order_max, flags.bounds)
    result = {
        "element": flags.element,
        "r": outcome.r,
        "torsion": outcome.torsion,
        "alphas": list(outcome.alphas),
        "annihilator": render_operator(outcome.annihilator, ["z"], source.variables),
    }
    certificates = {
        "membership": {f"t{r}": r <= outcome.r for r in range(system.n + 1)},
        "certified_through": outcome.certified_through,
    }
    return result, certificates


def _catalog_list(_: SystemSource | None, __: RunFlags) -> Payload:
    entries = [
        {"name": name, "description": entry.description, "dimensions": list(entry.dimensions)}
        for name, entry in catalog_module.CATALOG.items()
    ]
    return {"systems": entries}, {}


COMMANDS: Final[dict[str, Callable[[SystemSource | None, RunFlags], Payload]]] = {
    "analyze": _analyze,
    "characters": _characters,
    "cc": _cc,
    "adjoint": _adjoint,
    "parametrize": _parametrize,
    "spencer-dims": _spencer_dims,
    "spencer-ops": _spencer_ops,
    "cosserat": _cosserat,
    "split": _split,
    "macaulay": _macaulay,
    "purity": _purity,
    "catalog-list": _catalog_list,
}


class _Partial(InconclusiveError):
    """An inconclusive outcome that still carries a payload."""

    def __init__(self, message: str, result: dict[str, Any], certificates: dict[str, Any]) -> None:
        super().__init__(message)
        self.result = result
        self.certificates = certificates


# *====[ Dispatch ]====*


def _bounds_used(source: SystemSource | None, flags: RunFlags) -> dict[str, Any]:
    bounds = flags.bounds
    if source is not None:
        bounds = bounds.for_operator(source.operator)
    return bounds.model_dump()


def run(
    command: str,
    source: SystemSource | None = None,
    flags: RunFlags | Mapping[str, Any] | None = None,
) -> Report:
    """Run one command and report its outcome.

    Args:
        command: One of `COMMANDS`.
        source: The system, when the command needs one.
        flags: A `RunFlags` or a mapping validated into one.

    Returns:
        A report whose `exit_code` is 0, 2 (inconclusive) or 1 (error).

    Examples:
        >>> run("cc", resolve_source(catalog_name="killing", n=2)).result["count"]
        1
        >>> run("transmogrify").status
        'error'
    """
    started = time.perf_counter()
    identity = None
    if source is not None:
        identity = ReportInput(name=source.name, sha256=digest(render_system(source)))

    def finish(**fields: Any) -> Report:
        elapsed = int((time.perf_counter() - started) * 1000)
        return Report(command=command, input=identity, elapsed_ms=elapsed, **fields)

    try:
        checked = flags if isinstance(flags, RunFlags) else RunFlags.model_validate(flags or {})
    except ValidationError as exc:
        _logger.error("Invalid flags for %s.", command, extra={"extra_data": {"errors": str(exc)}})
        return finish(status="error", message=f"Invalid flags: {exc.error_count()} error(s).")
    bounds: dict[str, Any] = {}
    try:
        handler = COMMANDS.get(command)
        if handler is None:
            error_msg = f"Unknown command '{command}'. Known: {', '.join(COMMANDS)}."
            raise UnknownCommandError(error_msg)
        bounds = _bounds_used(source, checked)
        result, certificates = handler(source, checked)
    except _Partial as exc:
        _logger.warning("%s is inconclusive: %s", command, exc)
        return finish(
            status="inconclusive",
            result=exc.result,
            certificates=exc.certificates,
            bounds=bounds,
            message=str(exc),
        )
    except InconclusiveError as exc:
        _logger.warning("%s is inconclusive: %s", command, exc)
        return finish(status="inconclusive", bounds=bounds, message=str(exc))
    except JetSpencerError as exc:
        _logger.error(
            "%s failed: %s", command, exc, extra={"extra_data": {"type": type(exc).__name__}}
        )
        return finish(status="error", bounds=bounds, message=str(exc))
    except Exception:
        _logger.exception("Unexpected failure in %s.", command)
        raise
    _logger.info(
        "%s finished.",
        command,
        extra={"extra_data": {"input": identity.name if identity else None}},
    )
    return finish(result=result, certificates=certificates, bounds=bounds)

