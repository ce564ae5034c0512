"""Tests for SVG figure generation."""

from collections.abc import Iterator
from pathlib import Path

import matplotlib.pyplot as plt
import pytest

from py_vhalab.constants import CSV_COLUMNS, FIGURE_FILES
from py_vhalab.exceptions import PlotError
from py_vhalab.plots import build_figure, emit_plots, is_noise_table, series


def _row(**values: str) -> dict[str, str]:
    row = dict.fromkeys(CSV_COLUMNS, "")
    row.update({"mitigated": "false", "gate_time_over_t2": "0", "seed": "1234", "shots": "0"})
    row.update(values)
    return row


@pytest.fixture
def u_rows() -> list[dict[str, str]]:
    rows = []
    for u, ed in (("-2", -3.0), ("0", -2.0), ("2", -1.5)):
        rows.append(_row(u=u, algorithm="ED", energy=str(ed), ed_energy=str(ed), rel_err="0", m_af="0.1"))
        for algorithm, shift in (("MF", 0.2), ("VHA-PS", 0.01)):
            rows.append(
                _row(
                    u=u,
                    algorithm=algorithm,
                    energy=str(ed + shift),
                    ed_energy=str(ed),
                    rel_err=str(shift / abs(ed)),
                    m_af="-0.2",
                    delta_s="0.5",
                )
            )
    return rows


@pytest.fixture
def noise_rows() -> list[dict[str, str]]:
    rows = []
    for g in ("0", "1e-05", "0.0001"):
        rows.append(_row(u="-3", algorithm="ED", energy="-4", ed_energy="-4", delta_s="1.2", gate_time_over_t2=g))
        for flag, energy in (("false", "-3.8"), ("true", "-3.95")):
            rows.append(
                _row(
                    u="-3",
                    algorithm="VEHA",
                    energy=energy,
                    ed_energy="-4",
                    delta_s="1.1",
                    gate_time_over_t2=g,
                    mitigated=flag,
                )
            )
    return rows


@pytest.fixture(autouse=True)
def close_figures() -> Iterator[None]:
    yield
    plt.close("all")


class TestSeries:
    def test_sorted_by_x(self, u_rows: list[dict[str, str]]) -> None:
        xs, ys = series(list(reversed(u_rows)), "MF", "u", "m_af", magnitude=True)
        assert xs == [-2.0, 0.0, 2.0]
        assert ys == [0.2, 0.2, 0.2]

    def test_table_kind(self, u_rows: list[dict[str, str]], noise_rows: list[dict[str, str]]) -> None:
        assert not is_noise_table(u_rows)
        assert is_noise_table(noise_rows)


class TestBuildFigure:
    def test_relative_error_lines(self, u_rows: list[dict[str, str]]) -> None:
        fig = build_figure(u_rows, "1")
        labels = [line.get_label() for line in fig.axes[0].get_lines()]
        assert labels == ["MF", "VHA-PS", "ED"]

    def test_two_lines_per_algorithm(self, u_rows: list[dict[str, str]]) -> None:
        fig = build_figure(u_rows, "2")
        assert len(fig.axes[0].get_lines()) == 2 * 3

    def test_energy_error_has_no_reference_line(self, noise_rows: list[dict[str, str]]) -> None:
        fig = build_figure(noise_rows, "3")
        lines = fig.axes[0].get_lines()
        assert [line.get_label() for line in lines] == ["VEHA raw", "VEHA mitigated"]
        assert list(lines[0].get_ydata()) == pytest.approx([0.2, 0.2, 0.2])

    def test_pairing_has_reference_line(self, noise_rows: list[dict[str, str]]) -> None:
        fig = build_figure(noise_rows, "4")
        assert [line.get_label() for line in fig.axes[0].get_lines()] == ["ED", "VEHA raw", "VEHA mitigated"]

    def test_wrong_table_kind(self, u_rows: list[dict[str, str]], noise_rows: list[dict[str, str]]) -> None:
        with pytest.raises(PlotError, match="noise-sweep"):
            build_figure(u_rows, "3")
        with pytest.raises(PlotError, match="U-sweep"):
            build_figure(noise_rows, "1")

    def test_unknown_figure(self, u_rows: list[dict[str, str]]) -> None:
        with pytest.raises(PlotError, match="unknown figure"):
            build_figure(u_rows, "7")

    def test_empty_table(self) -> None:
        with pytest.raises(PlotError, match="empty"):
            build_figure([], "1")

    def test_every_row_failed(self) -> None:
        with pytest.raises(PlotError, match="failed"):
            build_figure([_row(u="0", algorithm="MF", error="diverged")], "1")

    def test_missing_columns(self) -> None:
        with pytest.raises(PlotError, match="missing columns"):
            build_figure([{"u": "0", "algorithm": "ED"}], "1")

    def test_failed_rows_are_skipped(self, u_rows: list[dict[str, str]]) -> None:
        fig = build_figure([*u_rows, _row(u="4", algorithm="MF", error="diverged")], "1")
        xs = list(fig.axes[0].get_lines()[0].get_xdata())
        assert xs == [-2.0, 0.0, 2.0]


class TestEmitPlots:
    def test_all_selects_by_table_kind(
        self, tmp_path: Path, u_rows: list[dict[str, str]], noise_rows: list[dict[str, str]]
    ) -> None:
        assert emit_plots(u_rows, "all", tmp_path) == [tmp_path / FIGURE_FILES["1"], tmp_path / FIGURE_FILES["2"]]
        assert emit_plots(noise_rows, "all", tmp_path) == [tmp_path / FIGURE_FILES["3"], tmp_path / FIGURE_FILES["4"]]

    def test_output_is_svg(self, tmp_path: Path, u_rows: list[dict[str, str]]) -> None:
        (path,) = emit_plots(u_rows, "1", tmp_path)
        assert path.read_text(encoding="utf-8").lstrip().startswith("<?xml")
        assert "<svg" in path.read_text(encoding="utf-8")

    def test_regeneration_is_byte_identical(self, tmp_path: Path, noise_rows: list[dict[str, str]]) -> None:
        first = [p.read_bytes() for p in emit_plots(noise_rows, "all", tmp_path / "a")]
        second = [p.read_bytes() for p in emit_plots(noise_rows, "all", tmp_path / "b")]
        assert first == second
