"""Command-line interface for py-vhalab with Rich formatting."""

import argparse
import logging
import os
from collections.abc import Sequence
from pathlib import Path
from typing import Callable, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from rich.text import Text

from .ansatz import gate_report
from .config import ExperimentConfig, load_config
from .constants import JOBS_ENV_VAR
from .core import SweepTable, read_table, run_ed, run_noise_sweep, run_self_checks, run_u_sweep
from .exceptions import ConfigError, PlotError, VhaLabError
from .hubbard import LatticeSpec
from .plots import emit_plots

# Create a simple console with minimal configuration for maximum compatibility
console = Console()

FIGURE_CHOICES = ("1", "2", "3", "4", "all")


def get_default_jobs() -> Optional[int]:
    """Worker count from the environment; ``None`` leaves the config file value in place."""
    env_jobs = os.getenv(JOBS_ENV_VAR)
    if env_jobs is None:
        return None
    try:
        jobs = int(env_jobs)
    except ValueError:
        # Silently fall back to a single worker
        return 1
    return jobs if jobs >= 1 else 1


class RichHelpFormatter(argparse.HelpFormatter):
    """Custom help formatter using Rich for beautiful output."""

    def format_help(self) -> str:
        """Format the entire help message with Rich styling."""
        help_text = Text()

        help_text.append("py-vhalab", style="bold blue")
        help_text.append("\n")
        help_text.append("Variational Hamiltonian ansatz experiments on the 2D Hubbard model", style="dim")
        help_text.append("\n\n")

        help_text.append("USAGE", style="bold green")
        help_text.append("\n")
        help_text.append("  py-vhalab COMMAND [OPTIONS]", style="cyan")
        help_text.append("\n\n")

        help_text.append("DESCRIPTION", style="bold green")
        help_text.append("\n")
        help_text.append("  Run mean-field, VHA-PS, VEHA and VMFHA against exact diagonalization,\n")
        help_text.append("  sweep the interaction strength or the dephasing strength and plot the results.\n\n")

        help_text.append("EXIT CODES", style="bold green")
        help_text.append("\n")
        help_text.append("  0: every sweep point succeeded\n", style="dim")
        help_text.append("  1: configuration error, unreadable input or failed self-test\n", style="dim")
        help_text.append("  2: some sweep points failed (see the error column)\n", style="dim")
        help_text.append("  \n")
        help_text.append(f"  Set {JOBS_ENV_VAR} to change the default number of worker processes.\n", style="yellow")
        help_text.append("\n")

        commands = Table(show_header=False, box=None, padding=(0, 2))
        commands.add_column("Command", style="cyan", width=20)
        commands.add_column("Description", style="white")
        commands.add_row("sweep-u", "Noiseless sweep over the interaction strength U")
        commands.add_row("sweep-noise", "Dephasing sweep with raw and Richardson-mitigated results")
        commands.add_row("ed", "Exact ground states over the U grid")
        commands.add_row("plot", "Draw figures from a sweep CSV")
        commands.add_row("selftest", "Quick algebra and simulator checks")
        commands.add_row("gates", "Gate counts and depths of every ansatz")

        table = Table(show_header=False, box=None, padding=(0, 2))
        table.add_column("Option", style="cyan", width=20)
        table.add_column("Description", style="white")
        table.add_row("--config, -c", "TOML experiment configuration (default: built-in settings)")
        table.add_row("--out, -o", "Output directory (overrides output.directory)")
        table.add_row("--seed", "Optimizer seed (overrides optimizer.seed)")
        table.add_row("--jobs, -j", "Worker processes (overrides output.jobs)")
        table.add_row("--verbose", "Log progress")
        table.add_row("--debug", "Log optimizer details")
        table.add_row()
        table.add_row("--csv", "plot: sweep CSV to read")
        table.add_row("--figure", "plot: 1, 2, 3, 4 or all (default: all)")
        table.add_row()
        table.add_row("--help, -h", "Show this help message")
        table.add_row("--version, -v", "Show version information")

        examples_text = Text()
        examples_text.append("EXAMPLES", style="bold green")
        examples_text.append("\n")
        examples_text.append("  # Reproduce the U sweep with four workers\n", style="dim")
        examples_text.append("  py-vhalab sweep-u --jobs 4 --out results\n\n", style="cyan")
        examples_text.append("  # Noise sweep from a configuration file\n", style="dim")
        examples_text.append("  py-vhalab sweep-noise --config experiment.toml\n\n", style="cyan")
        examples_text.append("  # Figures 1 and 2 from a finished U sweep\n", style="dim")
        examples_text.append("  py-vhalab plot --csv results/u_sweep.csv --figure all\n\n", style="cyan")
        examples_text.append("  # Check the installation\n", style="dim")
        examples_text.append("  py-vhalab selftest\n\n", style="cyan")

        with console.capture() as capture:
            console.print(help_text)

            # Add a separator line (ASCII-safe for Windows compatibility)
            console.print("-" * min(console.width, 80), style="bold blue")
            console.print()

            console.print("COMMANDS", style="bold green")
            console.print(commands)
            console.print()

            console.print("OPTIONS", style="bold green")
            console.print(table)
            console.print()

            console.print("-" * min(console.width, 80), style="bold blue")
            console.print()

            console.print(examples_text)

        return str(capture.get())


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, help="TOML experiment configuration")
    common.add_argument("-o", "--out", type=Path, help="Output directory")
    common.add_argument("--seed", type=int, help="Optimizer seed")
    common.add_argument("-j", "--jobs", type=int, default=get_default_jobs(), help="Worker processes")
    common.add_argument("--verbose", action="store_true", help="Log progress")
    common.add_argument("--debug", action="store_true", help="Log optimizer details")
    return common


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser."""
    parser = argparse.ArgumentParser(
        prog="py-vhalab",
        description="Variational Hamiltonian ansatz experiments on the 2D Hubbard model",
        formatter_class=RichHelpFormatter,
        add_help=False,  # We'll handle help ourselves
    )

    parser.add_argument("-h", "--help", action="help", help="Show this help message and exit")
    parser.add_argument("-v", "--version", action="store_true", help="Show version information and exit")

    common = _common_options()
    # explicit prog keeps argparse from rendering the rich help to derive it
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", prog="py-vhalab")
    subparsers.add_parser("sweep-u", parents=[common], help="Noiseless sweep over U")
    subparsers.add_parser("sweep-noise", parents=[common], help="Dephasing sweep with mitigation")
    subparsers.add_parser("ed", parents=[common], help="Exact ground states over the U grid")

    plot = subparsers.add_parser("plot", parents=[common], help="Draw figures from a sweep CSV")
    plot.add_argument("--csv", type=Path, required=True, help="Sweep CSV to read")
    plot.add_argument("--figure", choices=FIGURE_CHOICES, default="all", help="Figure to draw (default: all)")

    subparsers.add_parser("selftest", parents=[common], help="Quick algebra and simulator checks")

    gates = subparsers.add_parser("gates", parents=[common], help="Gate counts of every ansatz")
    gates.add_argument("--nx", type=int, help="Lattice width (default: lattice.nx)")
    gates.add_argument("--ny", type=int, help="Lattice height (default: lattice.ny)")

    return parser


def _get_version_display() -> str:
    """Get formatted version information."""
    try:
        from . import __version__

        return f"py-vhalab {__version__}"
    except ImportError:
        return "py-vhalab (unknown version)"


def print_status(message: str, style: str = "white") -> None:
    """Print a status message with Rich formatting."""
    console.print(f"[{style}]{message}[/{style}]")


def print_error(message: str) -> None:
    """Print an error message with Rich formatting."""
    console.print(f"[red]Error:[/red] {message}")


def print_success(message: str) -> None:
    """Print a success message with Rich formatting."""
    console.print(f"[green]OK[/green] {message}")


def configure_logging(verbose: bool = False, debug: bool = False) -> None:
    """Route the package logger through a single Rich handler on stderr."""
    logger = logging.getLogger("py_vhalab")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    logger.setLevel(logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING)


def _report_sweep(table: SweepTable) -> int:
    print_success(f"Wrote {len(table.rows)} rows to {table.path}")
    if table.failures:
        print_status(f"{table.failures} point(s) failed; see the error column", "yellow")
        return 2
    return 0


def _sweep_u(args: argparse.Namespace, config: ExperimentConfig) -> int:
    grid = config.u_sweep.u_grid
    print_status(f"Sweeping U over {len(grid)} points on {config.lattice.nx}x{config.lattice.ny}...", "blue")
    return _report_sweep(run_u_sweep(config))


def _sweep_noise(args: argparse.Namespace, config: ExperimentConfig) -> int:
    sweep = config.noise_sweep
    print_status(
        f"Sweeping gate time over {len(sweep.gate_time_over_t2)} points on {sweep.nx}x{sweep.ny} at U={sweep.u:g}...",
        "blue",
    )
    return _report_sweep(run_noise_sweep(config))


def _ed(args: argparse.Namespace, config: ExperimentConfig) -> int:
    print_status(f"Diagonalizing {config.lattice.nx}x{config.lattice.ny} over {len(config.u_sweep.u_grid)} points...")
    return _report_sweep(run_ed(config))


def _plot(args: argparse.Namespace, config: ExperimentConfig) -> int:
    try:
        written = emit_plots(read_table(args.csv), args.figure, Path(config.output.directory))
    except PlotError as e:
        print_error(str(e))
        return 1
    for path in written:
        print_success(f"Wrote {path}")
    return 0


def _selftest(args: argparse.Namespace, config: ExperimentConfig) -> int:
    failed = 0
    for check in run_self_checks():
        if check.passed:
            print_success(f"{check.name}: {check.detail}")
        else:
            failed += 1
            console.print(f"[red]FAIL[/red] {check.name}: {check.detail}")
    return 1 if failed else 0


def _gates(args: argparse.Namespace, config: ExperimentConfig) -> int:
    nx = args.nx if args.nx is not None else config.lattice.nx
    ny = args.ny if args.ny is not None else config.lattice.ny
    try:
        lattice = LatticeSpec(
            nx, ny, t=config.lattice.t, periodic=config.lattice.periodic, dedup_bonds=config.lattice.dedup_bonds
        )
        rows = gate_report(lattice, config.ansatz.reps)
    except (VhaLabError, ValueError) as e:
        print_error(str(e))
        return 1

    table = Table(title=f"Gate report {lattice.label()}, {config.ansatz.reps} reps")
    for column in ("ansatz", "label", "parameters", "init", "per rep", "extra", "extra depth", "total", "CZ", "depth"):
        table.add_column(column, justify="left" if column in ("ansatz", "label") else "right")
    for row in rows:
        table.add_row(
            row.ansatz,
            row.label,
            str(row.parameters),
            str(row.init_gates),
            str(row.rep_gates),
            str(row.extra_rep_gates),
            str(row.extra_rep_depth),
            str(row.total_gates),
            str(row.cz_gates),
            str(row.depth),
        )
    console.print(table)
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, ExperimentConfig], int]] = {
    "sweep-u": _sweep_u,
    "sweep-noise": _sweep_noise,
    "ed": _ed,
    "plot": _plot,
    "selftest": _selftest,
    "gates": _gates,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point with Rich formatting."""
    parser = create_parser()
    args = parser.parse_args(argv)

    # Handle version display
    if args.version:
        console.print(_get_version_display(), style="bold blue")
        return 0

    if args.command is None:
        parser.print_help()
        return 0

    configure_logging(verbose=args.verbose, debug=args.debug)

    try:
        config = load_config(args.config).with_overrides(seed=args.seed, jobs=args.jobs, out=args.out)
    except ConfigError as e:
        print_error(str(e))
        return 1

    return COMMANDS[args.command](args, config)
