"""Heatmap and safe-region rendering: colours, errors, determinism."""
import numpy as np
import pytest
from PIL import Image

from plotkit import (
    GridError,
    MissingColumnError,
    PanelSpec,
    REGION_COLORS,
    cell_colors,
    plot_heatmap,
    plot_safe_region,
)
from plotkit.cli import main

SWEEP_HEADER = (
    "max_trade_fraction,min_weight,max_weight_change,"
    "z_norm,found,restarts,oracle_failures,wall_time_s\n"
)


def _sweep_csv(tmp_path, rows, name="sweep.csv"):
    path = tmp_path / name
    path.write_text(SWEEP_HEADER + "".join(rows))
    return str(path)


def _region_csv(tmp_path, rows, name="region.csv"):
    path = tmp_path / name
    path.write_text("w,dw,safe,binding\n" + "".join(rows))
    return str(path)


FOUR_CELLS = [
    "0.1,0.02,0.0001,-1e-13,0,4,0,0\n",
    "0.1,0.02,0.01,0.002,1,4,0,0\n",
    "0.1,0.05,0.0001,-2e-13,0,4,0,0\n",
    "0.1,0.05,0.01,0.001,1,4,0,0\n",
]


class TestCellColors:
    def test_white_exclusively_for_not_found(self):
        rng = np.random.default_rng(3)
        z = rng.normal(0, 1e-3, (6, 7))
        found = rng.random((6, 7)) < 0.5
        rgba = cell_colors(z, found)
        white = np.all(rgba == 1.0, axis=-1)
        assert np.array_equal(white, ~found)

    def test_all_not_found_is_all_white(self):
        rgba = cell_colors(np.zeros((2, 2)), np.zeros((2, 2), dtype=bool))
        assert np.all(rgba == 1.0)

    def test_found_cells_ordered_by_z(self):
        z = np.array([[0.0, 0.5, 1.0]])
        found = np.ones((1, 3), dtype=bool)
        rgba = cell_colors(z, found)
        assert not np.array_equal(rgba[0, 0], rgba[0, 2])


class TestPlotHeatmap:
    def test_single_not_found_cell_renders_all_white(self, tmp_path):
        csv = _sweep_csv(tmp_path, ["0.1,0.02,0.0001,-1e-13,0,4,0,0\n"])
        out = str(tmp_path / "panel.png")
        res = plot_heatmap(PanelSpec(csv, "min_weight", "max_weight_change", out))
        assert res.rgba.shape == (1, 1, 4)
        assert np.all(res.rgba == 1.0)
        img = np.asarray(Image.open(res.png_path).convert("RGBA"))
        row, col = res.pixel_centers[0, 0]
        assert tuple(img[row, col]) == (255, 255, 255, 255)

    def test_pixel_centers_match_cell_colors(self, tmp_path):
        csv = _sweep_csv(tmp_path, FOUR_CELLS)
        out = str(tmp_path / "panel.png")
        res = plot_heatmap(PanelSpec(csv, "min_weight", "max_weight_change", out))
        img = np.asarray(Image.open(res.png_path).convert("RGBA"))
        for i in range(2):
            for j in range(2):
                row, col = res.pixel_centers[i, j]
                expected = res.rgba[i, j] * 255
                # Allow 1 count for the renderer's quantization convention.
                assert np.max(np.abs(img[row, col] - expected)) <= 1.0

    def test_missing_column_error_names_column(self, tmp_path):
        csv = tmp_path / "bad.csv"
        csv.write_text("min_weight,z_norm,found\n0.02,0.0,0\n")
        with pytest.raises(MissingColumnError, match="max_weight_change"):
            plot_heatmap(
                PanelSpec(str(csv), "min_weight", "max_weight_change",
                          str(tmp_path / "x.png"))
            )

    def test_incomplete_grid_rejected(self, tmp_path):
        csv = _sweep_csv(tmp_path, FOUR_CELLS[:3])
        with pytest.raises(GridError, match="grid"):
            plot_heatmap(
                PanelSpec(csv, "min_weight", "max_weight_change",
                          str(tmp_path / "x.png"))
            )

    def test_byte_identical_rerender(self, tmp_path):
        csv = _sweep_csv(tmp_path, FOUR_CELLS)
        a = plot_heatmap(PanelSpec(csv, "min_weight", "max_weight_change",
                                   str(tmp_path / "a.png")))
        b = plot_heatmap(PanelSpec(csv, "min_weight", "max_weight_change",
                                   str(tmp_path / "b.png")))
        assert open(a.png_path, "rb").read() == open(b.png_path, "rb").read()
        assert open(a.svg_path, "rb").read() == open(b.svg_path, "rb").read()


class TestPlotSafeRegion:
    REGION_ROWS = [
        "0.4,-0.001,0,A27\n", "0.4,0,1,none\n", "0.4,0.001,0,A29\n",
        "0.5,-0.001,0,A27\n", "0.5,0,1,none\n", "0.5,0.001,0,A29\n",
    ]

    def test_colors_follow_safe_and_binding(self, tmp_path):
        csv = _region_csv(tmp_path, self.REGION_ROWS)
        res = plot_safe_region(csv, str(tmp_path / "region.png"))
        assert res.safe.shape == (3, 2)
        assert np.allclose(res.rgba[1, 0], REGION_COLORS["safe"])
        assert np.allclose(res.rgba[0, 0], REGION_COLORS["A27"])
        assert np.allclose(res.rgba[2, 1], REGION_COLORS["A29"])

    def test_empty_safe_set_has_no_safe_shade(self, tmp_path):
        csv = _region_csv(tmp_path, ["0.5,-0.001,0,A27\n", "0.5,0.001,0,A29\n"])
        res = plot_safe_region(csv, str(tmp_path / "region.png"))
        assert not np.any(
            np.all(np.isclose(res.rgba, REGION_COLORS["safe"]), axis=-1)
        )

    def test_row_count_mismatch_rejected(self, tmp_path):
        csv = _region_csv(tmp_path, self.REGION_ROWS[:5])
        with pytest.raises(GridError, match="grid"):
            plot_safe_region(csv, str(tmp_path / "x.png"))

    def test_unknown_binding_rejected(self, tmp_path):
        csv = _region_csv(tmp_path, ["0.5,0,0,A99\n"])
        with pytest.raises(GridError, match="A99"):
            plot_safe_region(csv, str(tmp_path / "x.png"))


class TestCli:
    def test_heatmap_command(self, tmp_path, capsys):
        csv = _sweep_csv(tmp_path, FOUR_CELLS)
        out = str(tmp_path / "panel.png")
        assert main(["heatmap", "--csv", csv, "--x", "min_weight",
                     "--y", "max_weight_change", "--out", out]) == 0
        printed = capsys.readouterr().out.splitlines()
        assert printed == [out, out[:-4] + ".svg"]

    def test_safe_region_command(self, tmp_path):
        csv = _region_csv(tmp_path, TestPlotSafeRegion.REGION_ROWS)
        out = str(tmp_path / "region.png")
        assert main(["safe-region", "--csv", csv, "--out", out]) == 0

    def test_missing_column_exits_2(self, tmp_path, capsys):
        csv = tmp_path / "bad.csv"
        csv.write_text("w,dw,safe\n0.5,0,1\n")
        assert main(["safe-region", "--csv", str(csv), "--out",
                     str(tmp_path / "x.png")]) == 2
        assert "binding" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["heatmap", "--csv", str(tmp_path / "nope.csv"),
                     "--x", "a", "--y", "b", "--out", str(tmp_path / "x.png")]) == 2
