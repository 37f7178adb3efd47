"""Command-line entry point: ``aerodg <command> CONFIG``."""

import json
from pathlib import Path
from typing import Any, Callable, Optional

import click
import structlog

from .. import __version__
from ..config import AppSettings, RunConfig, Scheme, get_settings, load_run_config
from ..exceptions import AeroDGError
from ..observability import configure_logging, timed
from .commands import cmd_adjoint, cmd_deform, cmd_grad_check, cmd_optimize, cmd_solve, cmd_validate

logger = structlog.get_logger(__name__)

ERROR_FILE = "error.json"


def load_config(path: Path, output: Optional[Path] = None, scheme: Optional[str] = None) -> RunConfig:
    config = load_run_config(path)
    if scheme is not None:
        config = config.model_copy(update={"solver": config.solver.model_copy(update={"scheme": Scheme(scheme)})})
    if output is not None:
        config = config.model_copy(update={"output_dir": Path(output)})
    return config


def write_error(directory: Path, command: str, exc: AeroDGError) -> Optional[Path]:
    """Diagnostic dump next to the run's other outputs."""
    payload = {
        "command": command,
        "error_code": exc.error_code,
        "exit_code": exc.exit_code,
        "message": exc.message,
        "details": exc.details,
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / ERROR_FILE
        path.write_text(json.dumps(payload, indent=2, default=str), encoding="utf-8")
        return path
    except OSError:
        logger.warning("Could not write diagnostics", directory=str(directory))
        return None


def run_command(name: str, action: Callable[[RunConfig, AppSettings], Any]) -> Callable[..., None]:
    """Shared CONFIG argument, overrides and AeroDGError -> exit code mapping."""

    @click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
    @click.option("--output", "-o", type=click.Path(file_okay=False, path_type=Path), help="Output directory override")
    @click.option("--scheme", type=click.Choice([s.value for s in Scheme]), help="Scheme override")
    @click.pass_context
    def command(ctx: click.Context, config_path: Path, output: Optional[Path], scheme: Optional[str], **kwargs: Any) -> None:
        settings: AppSettings = ctx.obj
        output_dir: Optional[Path] = None
        try:
            config = load_config(config_path, output, scheme)
            output_dir = config.output_dir
            with timed(name):
                message = action(config, settings, **kwargs)
        except AeroDGError as exc:
            logger.error("Command failed", command=name, error_code=exc.error_code, message=exc.message, details=exc.details)
            click.echo(f"error [{exc.error_code}]: {exc.message}", err=True)
            if output_dir is not None:
                write_error(output_dir, name, exc)
            ctx.exit(exc.exit_code)
        if message:
            click.echo(message)

    return command


@click.group()
@click.option("--log-level", default=None, help="Overrides AERODG_LOG_LEVEL")
@click.option("--log-format", type=click.Choice(["console", "json"]), default=None, help="Overrides AERODG_LOG_FORMAT")
@click.version_option(__version__, prog_name="aerodg")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str], log_format: Optional[str]) -> None:
    """Adjoint-based 2D aerodynamic shape optimization."""
    settings = get_settings()
    configure_logging(log_level or settings.LOG_LEVEL, log_format or settings.LOG_FORMAT)
    ctx.obj = settings


def _solve(config: RunConfig, settings: AppSettings) -> str:
    result = cmd_solve(config, settings)
    return f"Cd={result.cd:.10g} Cl={result.cl:.10g} steps={result.steps} converged={result.converged}"


def _adjoint(config: RunConfig, settings: AppSettings) -> str:
    table = cmd_adjoint(config, settings)
    return f"gradient written for {len(table)} design variables"


def _grad_check(config: RunConfig, settings: AppSettings) -> str:
    result = cmd_grad_check(config, settings)
    return f"gradient check passed, max rel err {result.max_rel_err:.3e}"


def _optimize(config: RunConfig, settings: AppSettings, resume: Optional[Path] = None) -> str:
    outcome = cmd_optimize(config, settings, resume)
    return (
        f"{outcome.result.status.value} after {outcome.result.iterations} iterations: "
        f"Cd {outcome.initial['Cd']:.6g} -> {outcome.final['Cd']:.6g}"
    )


def _deform(config: RunConfig, settings: AppSettings, fraction: float = 0.25, values: Optional[str] = None) -> str:
    try:
        parsed = [float(v) for v in values.split()] if values else None
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--values") from exc
    report = cmd_deform(config, settings, fraction, parsed)
    return f"max displacement {report.max_displacement:.6g}, min area {report.min_area_after:.6g}"


def _validate(config: RunConfig, settings: AppSettings) -> str:
    cmd_validate(config, settings)
    return "configuration and mesh are valid"


cli.command("solve", help="Steady flow solve from the free stream.")(run_command("solve", _solve))
cli.command("adjoint", help="Adjoint gradients of Cd, Cl and area.")(run_command("adjoint", _adjoint))
cli.command("grad-check", help="Adjoint gradient against full finite differences.")(
    run_command("grad-check", _grad_check)
)
cli.command("optimize", help="Drag minimization with lift and area constraints.")(
    click.option(
        "--resume",
        type=click.Path(exists=True, file_okay=False, path_type=Path),
        default=None,
        help="Run directory to continue from its latest checkpoint",
    )(run_command("optimize", _optimize))
)
cli.command("deform", help="Deformation-only dry run.")(
    click.option("--fraction", type=float, default=0.25, show_default=True, help="Fraction of the upper bounds")(
        click.option("--values", type=str, default=None, help="Whitespace-separated design values")(
            run_command("deform", _deform)
        )
    )
)
cli.command("validate", help="Mesh and configuration checks.")(run_command("validate", _validate))


def main() -> None:
    cli(prog_name="aerodg")


if __name__ == "__main__":
    main()
