"""SVG figures drawn from sweep CSV rows.

Figures 1 and 2 read a U sweep, figures 3 and 4 a noise sweep. Output is
reproducible byte for byte: no timestamps and a fixed SVG id salt.
"""

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .constants import ALGORITHMS, CSV_COLUMNS, FIGURE_FILES  # noqa: E402
from .exceptions import PlotError  # noqa: E402

logger = logging.getLogger(__name__)

Row = dict[str, str]

U_SWEEP_FIGURES = ("1", "2")
NOISE_SWEEP_FIGURES = ("3", "4")

_STYLE = {"svg.hashsalt": "py-vhalab", "svg.fonttype": "path"}


def _value(row: Row, column: str) -> float:
    text = row[column]
    return float(text) if text else math.nan


def _usable(rows: Sequence[Row]) -> list[Row]:
    if not rows:
        raise PlotError("result table is empty")
    missing = [c for c in CSV_COLUMNS if c not in rows[0]]
    if missing:
        raise PlotError(f"result table is missing columns: {', '.join(missing)}")
    usable = [r for r in rows if not r["error"]]
    if not usable:
        raise PlotError("every row of the result table failed")
    if len(usable) < len(rows):
        logger.warning("skipping %d failed rows", len(rows) - len(usable))
    return usable


def is_noise_table(rows: Sequence[Row]) -> bool:
    return any(r["mitigated"] == "true" for r in rows)


def _algorithms(rows: Sequence[Row]) -> list[str]:
    present = {r["algorithm"] for r in rows}
    return [a for a in ALGORITHMS if a in present]


def series(
    rows: Sequence[Row], algorithm: str, x: str, y: str, mitigated: bool = False, magnitude: bool = False
) -> tuple[list[float], list[float]]:
    """``(x, y)`` points of one algorithm sorted by ``x``."""
    flag = "true" if mitigated else "false"
    points = sorted(
        (_value(r, x), _value(r, y)) for r in rows if r["algorithm"] == algorithm and r["mitigated"] == flag
    )
    xs = [p[0] for p in points]
    ys = [abs(p[1]) if magnitude else p[1] for p in points]
    return xs, ys


def _energy_error(rows: Sequence[Row]) -> list[Row]:
    out = []
    for r in rows:
        error = abs(_value(r, "energy") - _value(r, "ed_energy"))
        out.append({**r, "abs_err": format(error, ".12g")})
    return out


def _rel_error_figure(rows: Sequence[Row]) -> Figure:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for algorithm in _algorithms(rows):
        if algorithm == "ED":
            continue
        xs, ys = series(rows, algorithm, "u", "rel_err")
        ax.plot(xs, ys, "o-", label=algorithm)
    ax.axhline(0.0, color="k", linestyle="--", linewidth=1, label="ED")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.set_xlabel("U")
    ax.set_ylabel("relative energy error")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def _observables_figure(rows: Sequence[Row]) -> Figure:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for index, algorithm in enumerate(_algorithms(rows)):
        color = f"C{index}"
        xs, ys = series(rows, algorithm, "u", "delta_s", magnitude=True)
        ax.plot(xs, ys, "o-", color=color, label=f"{algorithm} |Δs|")
        xs, ys = series(rows, algorithm, "u", "m_af", magnitude=True)
        ax.plot(xs, ys, "s--", color=color, label=f"{algorithm} |M_AF|")
    ax.set_xlabel("U")
    ax.set_ylabel("expectation value")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small", ncol=2)
    return fig


def _noise_figure(rows: Sequence[Row], column: str, ylabel: str, reference: bool) -> Figure:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for index, algorithm in enumerate(_algorithms(rows)):
        color = f"C{index}"
        if algorithm == "ED":
            if reference:
                xs, ys = series(rows, "ED", "gate_time_over_t2", column)
                ax.plot(xs, ys, "k--", label="ED")
            continue
        xs, ys = series(rows, algorithm, "gate_time_over_t2", column)
        ax.plot(xs, ys, "o-", color=color, label=f"{algorithm} raw")
        xs, ys = series(rows, algorithm, "gate_time_over_t2", column, mitigated=True)
        ax.plot(xs, ys, "^:", color=color, label=f"{algorithm} mitigated")
    ax.set_xlabel("gate time / T2")
    ax.set_ylabel(ylabel)
    ax.ticklabel_format(axis="x", style="sci", scilimits=(0, 0))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small", ncol=2)
    return fig


def build_figure(rows: Sequence[Row], figure: str) -> Figure:
    usable = _usable(rows)
    noise = is_noise_table(usable)
    if figure in U_SWEEP_FIGURES and noise:
        raise PlotError(f"figure {figure} needs a U-sweep table")
    if figure in NOISE_SWEEP_FIGURES and not noise:
        raise PlotError(f"figure {figure} needs a noise-sweep table")
    if figure == "1":
        return _rel_error_figure(usable)
    if figure == "2":
        return _observables_figure(usable)
    if figure == "3":
        return _noise_figure(_energy_error(usable), "abs_err", "|E - E_ED|", reference=False)
    if figure == "4":
        return _noise_figure(usable, "delta_s", "Δs", reference=True)
    raise PlotError(f"unknown figure {figure!r}")


def emit_plots(rows: Sequence[Row], figure: str, out_dir: Path) -> list[Path]:
    """Write the requested figure, or with ``all`` every figure the table supports."""
    if figure == "all":
        figures = NOISE_SWEEP_FIGURES if is_noise_table(_usable(rows)) else U_SWEEP_FIGURES
    else:
        figures = (figure,)
    written = []
    with matplotlib.rc_context(_STYLE):
        for fig_id in figures:
            fig = build_figure(rows, fig_id)
            path = Path(out_dir) / FIGURE_FILES[fig_id]
            path.parent.mkdir(parents=True, exist_ok=True)
            try:
                fig.savefig(path, format="svg", metadata={"Date": None})
            finally:
                plt.close(fig)
            logger.info("wrote %s", path)
            written.append(path)
    return written
