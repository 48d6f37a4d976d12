"""netflux CLI: relaxation schemes for conservation laws on star networks."""

import logging
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.table import Table

from .analysis import ErrorReport
from .config import (
    CouplingMode,
    Preset,
    RunConfig,
    SchemeOrder,
    dump_config,
    get_settings,
    parse_config,
)
from .convergence import FAST_MUSCL_DT, FAST_RESOLUTIONS, run_convergence_study
from .errors import ConfigurationError, NumericalError
from .exporters import (
    export_diagnostics,
    export_diagnostics_json,
    export_output_readme,
    export_snapshots,
    export_table,
)
from .presets import build_experiment
from .schemes import RunResult, run

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

app = typer.Typer(
    name="netflux",
    help="Central relaxation schemes for scalar conservation laws on star networks.",
    no_args_is_help=True,
)
console = Console()

logging.basicConfig(
    level=get_settings().log_level.upper(),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


@app.command("run")
def run_command(
    preset: Annotated[
        Preset | None,
        typer.Option("--preset", "-p", help="Experiment preset"),
    ] = None,
    m: Annotated[int | None, typer.Option("--m", help="Cells per edge")] = None,
    cfl: Annotated[float | None, typer.Option("--cfl", help="Courant number")] = None,
    scheme: Annotated[
        SchemeOrder | None,
        typer.Option("--scheme", help="first, muscl or muscl-tvd"),
    ] = None,
    coupling: Annotated[
        CouplingMode | None,
        typer.Option("--coupling", help="Junction treatment"),
    ] = None,
    beta: Annotated[
        float | None,
        typer.Option("--beta", help="Right-of-way parameter for flow maximization"),
    ] = None,
    t_end: Annotated[float | None, typer.Option("--t-end", help="End time")] = None,
    equalize_speeds: Annotated[
        bool | None,
        typer.Option("--equalize-speeds/--own-speeds", help="Relax all edges at max lambda"),
    ] = None,
    output_dir: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Output directory"),
    ] = None,
    config_file: Annotated[
        Path | None,
        typer.Option("--config", "-c", help="YAML run config"),
    ] = None,
) -> None:
    """Run one experiment and write snapshots and diagnostics."""
    config = _load_config(
        config_file,
        preset=preset,
        m=m,
        cfl=cfl,
        scheme=scheme,
        coupling=coupling,
        beta=beta,
        t_end=t_end,
        equalize_speeds=equalize_speeds,
        output_dir=output_dir,
    )
    out = _output_dir(config)

    if config.preset is Preset.BURGERS_CONVERGENCE:
        _convergence(config, out, fast=False)
        return

    try:
        experiment = build_experiment(config)
    except ConfigurationError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(code=EXIT_CONFIG) from None

    console.print(
        f"Running [bold]{config.preset}[/bold] "
        f"({experiment.scheme.order}, {experiment.scheme.coupling}) to t={experiment.t_end}"
    )
    out.mkdir(parents=True, exist_ok=True)
    dump_config(config, out / "config.yaml")

    try:
        result = run(
            experiment.initial,
            experiment.network,
            experiment.scheme,
            experiment.t_end,
            experiment.snapshots,
        )
    except ConfigurationError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(code=EXIT_CONFIG) from None
    except NumericalError as e:
        console.print(f"[red]Numerical failure:[/red] {e}")
        if isinstance(e.partial, RunResult):
            _write_run_outputs(e.partial, config, out)
            console.print(f"[yellow]Partial diagnostics written to {out}[/yellow]")
        raise typer.Exit(code=EXIT_NUMERICAL) from None

    _write_run_outputs(result, config, out)
    _print_run_summary(result)
    console.print(f"\n[green]Results written to {out}[/green]")


@app.command()
def convergence(
    preset: Annotated[
        str,
        typer.Option("--preset", "-p", help="Only 'burgers' is available"),
    ] = "burgers",
    fast: Annotated[
        bool,
        typer.Option("--fast", help="Resolutions 100 and 200 with a coarser MUSCL step"),
    ] = False,
    resolutions: Annotated[
        list[int] | None,
        typer.Option("--resolution", "-r", help="1/dx values to run (repeatable)"),
    ] = None,
    fixed_dt: Annotated[
        float | None,
        typer.Option("--fixed-dt", help="Time step of the MUSCL variants (ignored with --fast)"),
    ] = None,
    output_dir: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Output directory"),
    ] = None,
) -> None:
    """Mesh-refinement study: L1/Linf errors and EOCs for four scheme variants."""
    if preset not in ("burgers", Preset.BURGERS_CONVERGENCE):
        console.print(f"[red]Error:[/red] No convergence study for preset '{preset}'")
        raise typer.Exit(code=EXIT_CONFIG)
    if fast:
        resolutions = resolutions or list(FAST_RESOLUTIONS)
        fixed_dt = FAST_MUSCL_DT
    config = _load_config(
        None,
        preset=Preset.BURGERS_CONVERGENCE,
        resolutions=resolutions,
        fixed_dt=fixed_dt,
        output_dir=output_dir,
    )
    _convergence(config, _output_dir(config), fast=fast)


# --- Private helpers ---


def _load_config(config_file: Path | None, **flags: object) -> RunConfig:
    try:
        return parse_config(config_file, **flags)
    except ConfigurationError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(code=EXIT_CONFIG) from None


def _output_dir(config: RunConfig) -> Path:
    return (config.output_dir or get_settings().output_dir).expanduser()


def _convergence(config: RunConfig, out: Path, *, fast: bool) -> None:
    console.print("Running convergence study" + (" (fast mode)" if fast else "") + "...")
    try:
        reports = run_convergence_study(
            config.resolutions,
            fast=fast,
            t_eval=config.t_end or 0.5,
            cfl=config.cfl or 0.49,
            fixed_dt=config.fixed_dt or 2e-6,
        )
    except NumericalError as e:
        console.print(f"[red]Numerical failure:[/red] {e}")
        raise typer.Exit(code=EXIT_NUMERICAL) from None

    out.mkdir(parents=True, exist_ok=True)
    export_table(reports, out / "table.csv")
    dump_config(config, out / "config.yaml")
    export_output_readme(out, config, ["table.csv", "config.yaml"])
    _print_table(reports)
    console.print(f"\n[green]Convergence table written to {out}[/green]")


def _write_run_outputs(result: RunResult, config: RunConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    export_snapshots(result, out / "snapshots.csv")
    export_diagnostics(result.diagnostics, out / "diagnostics.csv")
    export_diagnostics_json(result, out / "diagnostics.json", config)
    files = ["snapshots.csv", "diagnostics.csv", "diagnostics.json", "config.yaml"]
    export_output_readme(out, config, files)


def _print_run_summary(result: RunResult) -> None:
    diagnostics = result.diagnostics
    console.print(f"Steps: {len(diagnostics)}  Snapshots: {len(result.times)}")
    if diagnostics:
        worst = max(d.node_residual for d in diagnostics)
        drift = diagnostics[-1].total_mass - result.initial_mass
        console.print(f"Max node residual: {worst:.3e}  Mass change: {drift:.3e}")


def _print_table(reports: list[ErrorReport]) -> None:
    table = Table(title="Errors and EOCs")
    table.add_column("1/dx", justify="right")
    table.add_column("scheme")
    for name in ("L1", "EOC", "Linf", "EOC"):
        table.add_column(name, justify="right")
    for report in reports:
        for row in report.rows:
            table.add_row(
                str(row.inv_dx),
                report.variant,
                f"{row.l1:.3e}",
                f"{row.eoc_l1:.2f}",
                f"{row.linf:.3e}",
                f"{row.eoc_linf:.2f}",
            )
    console.print(table)
    logger.debug("Printed %d reports", len(reports))
