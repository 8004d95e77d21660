"""Typer application behind `simulate.py`."""

from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console

from dipolesim.settings import configure_logging
from dipolesim.telemetry import configure_tracing

from .commands.presets import list_presets
from .commands.run import EXIT_CONFIG, run

app = typer.Typer(
    help="Collective emission of dipole-coupled emitter arrays: run preset scenario configs.",
    add_completion=False,
    no_args_is_help=True,
)
console = Console()


@app.callback()
def setup():
    configure_logging()
    configure_tracing()


@app.command("run")
def run_command(
    config: Path = typer.Argument(..., help="Scenario config (JSON)"),
    out_dir: Optional[Path] = typer.Argument(None, help="Output directory (alternative to --out)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Replaces disorder.seed"),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Worker processes (default DIPOLESIM_THREADS)"),
    overrides: List[str] = typer.Option([], "--set", help="Override a config value, e.g. --set geometry.n=10"),
):
    """Run a scenario and write CSV tables, summary.json and manifest.json."""
    target = out or out_dir
    if target is None:
        console.print("[red]❌ An output directory is required (--out DIR)[/red]")
        raise typer.Exit(code=EXIT_CONFIG)
    code = run(config, target, seed=seed, threads=threads, overrides=overrides)
    if code == 0:
        console.print(f"[green]✅ Outputs written to {target}[/green]")
    raise typer.Exit(code=code)


@app.command("presets")
def presets_command():
    """List the shipped figure configs."""
    raise typer.Exit(code=list_presets(console))


def main():
    app(prog_name="simulate")
