"""Entry point for the jetspencer command line."""

import logging
from enum import StrEnum
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console

from jetspencer.cli import alerts
from jetspencer.cli.runner import RunFlags, resolve_source, run
from jetspencer.core.errors import JetSpencerError
from jetspencer.core.paths import LOGGING_CONFIG
from jetspencer.logger.log_manager import console_level, setup_logging

_logger = logging.getLogger(__name__)

app = typer.Typer(
    name="jetspencer",
    help="Exact formal analysis of linear systems of partial differential equations.",
    no_args_is_help=True,
    add_completion=False,
)

stdout = Console(highlight=False, soft_wrap=True)


class OutputFormat(StrEnum):
    """Report formats."""

    TEXT = "text"
    STRUCTURED = "structured"


class MetricKind(StrEnum):
    """Metric signatures accepted by `split`."""

    EUCLIDEAN = "euclidean"
    MINKOWSKI = "minkowski"


# *====[ Shared options ]====*

SourceArg = Annotated[
    Path | None,
    typer.Argument(help="A .pde system source.", exists=True, dir_okay=False, show_default=False),
]
CatalogOpt = Annotated[str | None, typer.Option("--catalog", help="Catalog system name.")]
DimensionOpt = Annotated[int | None, typer.Option("--n", min=1, help="Number of variables.")]
OrderMaxOpt = Annotated[int | None, typer.Option("--order-max", min=0, help="CC order bound.")]
DegMaxOpt = Annotated[
    int | None, typer.Option("--deg-max", min=0, help="Coefficient degree bound.")
]
RMaxOpt = Annotated[int, typer.Option("--r-max", min=0, help="Prolongations checked.")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Seed of the δ-regularity search.")]
FormatOpt = Annotated[OutputFormat, typer.Option("--format", help="Report format.")]


def _emit(command: str, path: Path | None, **options: object) -> None:
    """Run `command`, print its report on stdout and exit with its status."""
    flags = RunFlags.model_validate({key: val for key, val in options.items() if val is not None})
    try:
        with alerts.spinner(f"Running {command}..."):
            source = resolve_source(path, flags.catalog, flags.n)
            report = run(command, source, flags)
    except JetSpencerError as exc:
        alerts.fatal(str(exc), exit_code=1, context={"command": command})
        return
    if flags.format == "structured":
        stdout.print(report.to_structured(), markup=False)
    else:
        stdout.print(report.to_text(), markup=False)
        title = report.input.name if report.input else None
        alerts.panel(f"{command}: {report.status}", title=title, style=report.status)
    if report.status == "inconclusive":
        alerts.warning(f"{command}: inconclusive within bounds. {report.message}")
    elif report.status == "error":
        alerts.error(f"{command}: {report.message}")
    raise typer.Exit(code=report.exit_code)


@app.callback()
def main(
    verbose: Annotated[
        int, typer.Option("--verbose", "-v", count=True, help="-v for INFO, -vv for DEBUG.")
    ] = 0,
    log_config: Annotated[
        Path | None, typer.Option("--log-config", help="JSON logging dictConfig.")
    ] = None,
) -> None:
    """Configure logging before any command runs."""
    setup_logging(config_path=log_config or LOGGING_CONFIG, default_level=console_level(verbose))
    _logger.debug("jetspencer started.", extra={"extra_data": {"verbosity": verbose}})


# *====[ System commands ]====*


@app.command()
def analyze(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    r_max: RMaxOpt = 2,
    seed: SeedOpt = 0,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Completion, dimension table, characters and Hilbert polynomial."""
    _emit("analyze", path, catalog=catalog, n=n, r_max=r_max, seed=seed, format=output.value)


@app.command()
def characters(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    prolong: Annotated[int, typer.Option("--prolong", min=0, help="Prolong first.")] = 0,
    r_max: RMaxOpt = 2,
    seed: SeedOpt = 0,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Janet characters and the Cartan involutivity test."""
    _emit(
        "characters",
        path,
        catalog=catalog,
        n=n,
        prolong=prolong,
        r_max=r_max,
        seed=seed,
        format=output.value,
    )


@app.command()
def cc(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    order_max: OrderMaxOpt = None,
    deg_max: DegMaxOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Generating compatibility conditions."""
    _emit(
        "cc", path, catalog=catalog, n=n, order_max=order_max, deg_max=deg_max, format=output.value
    )


@app.command()
def adjoint(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Formal adjoint of the operator."""
    _emit("adjoint", path, catalog=catalog, n=n, format=output.value)


@app.command()
def parametrize(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    order_max: OrderMaxOpt = None,
    deg_max: DegMaxOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Decide whether the operator admits a potential parametrization."""
    _emit(
        "parametrize",
        path,
        catalog=catalog,
        n=n,
        order_max=order_max,
        deg_max=deg_max,
        format=output.value,
    )


@app.command("spencer-dims")
def spencer_dims(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Janet and Spencer bundle dimensions."""
    _emit("spencer-dims", path, catalog=catalog, n=n, format=output.value)


@app.command("spencer-ops")
def spencer_ops(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """First Spencer operator, its adjoint, and D2 in finite type."""
    _emit("spencer-ops", path, catalog=catalog, n=n, format=output.value)


@app.command()
def macaulay(
    path: SourceArg = None,
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Module decomposition and solution basis of a constant-coefficient ODE system."""
    _emit("macaulay", path, catalog=catalog, n=n, format=output.value)


@app.command()
def purity(
    path: SourceArg = None,
    element: Annotated[
        str, typer.Option("--element", help="Linear expression, e.g. 'd(y1; 1)'.")
    ] = "",
    catalog: CatalogOpt = None,
    n: DimensionOpt = None,
    order_max: OrderMaxOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Purity class of an element of the differential module."""
    _emit(
        "purity",
        path,
        element=element or None,
        catalog=catalog,
        n=n,
        order_max=order_max,
        format=output.value,
    )


# *====[ Standalone commands ]====*


@app.command()
def cosserat(
    n: Annotated[int, typer.Option("--n", min=2, max=3, help="Dimension, 2 or 3.")] = 2,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Cosserat equations as the adjoint of the first Spencer operator."""
    _emit("cosserat", None, n=n, format=output.value)


@app.command()
def split(
    ricci: Annotated[str, typer.Option("--ricci", help="Rows of ρ_ij: 'a b c; d e f; ...'.")],
    metric: Annotated[
        MetricKind, typer.Option("--metric", help="Metric signature.")
    ] = MetricKind.EUCLIDEAN,
    n: DimensionOpt = None,
    output: FormatOpt = OutputFormat.TEXT,
) -> None:
    """Rebuild the curvature-type tensor whose trace is the given Ricci tensor."""
    _emit("split", None, ricci=ricci, metric=metric.value, n=n, format=output.value)


@app.command("catalog-list")
def catalog_list(output: FormatOpt = OutputFormat.TEXT) -> None:
    """List the catalog systems."""
    _emit("catalog-list", None, format=output.value)


if __name__ == "__main__":
    app()
