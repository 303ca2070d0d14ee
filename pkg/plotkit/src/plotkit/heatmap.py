"""Guardrail sweep heatmaps: best attack return per grid cell.

White is reserved exclusively for cells where no attack was found; every
found cell is coloured from a sequential map (viridis contains no white).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from matplotlib import colormaps
from matplotlib.colors import Normalize

from .io import GridError, read_rows
from .render import cell_pixel_centers, new_figure, save_figure

WHITE = np.array([1.0, 1.0, 1.0, 1.0])
_CMAP = colormaps["viridis"]


@dataclass(frozen=True)
class PanelSpec:
    """One heatmap panel: which CSV columns span the axes."""

    csv_path: str
    x_col: str
    y_col: str
    output_path: str
    fixed_label: str | None = None
    vmin: float | None = None
    vmax: float | None = None


@dataclass(frozen=True)
class HeatmapResult:
    """Rendered panel plus the data needed to audit it pixel by pixel."""

    png_path: str
    svg_path: str
    x_values: np.ndarray
    y_values: np.ndarray
    z: np.ndarray           # (ny, nx)
    found: np.ndarray       # bool (ny, nx)
    rgba: np.ndarray        # (ny, nx, 4), the exact cell colours drawn
    pixel_centers: np.ndarray  # (ny, nx, 2) int, (row, col) in the PNG


def pivot_grid(rows: list[dict], x_col: str, y_col: str):
    """Arrange flat CSV rows into a full (ny, nx) grid."""
    x_values = np.unique([float(r[x_col]) for r in rows])
    y_values = np.unique([float(r[y_col]) for r in rows])
    nx, ny = x_values.size, y_values.size
    if len(rows) != nx * ny:
        raise GridError(
            f"{len(rows)} rows do not fill a {nx}x{ny} grid over "
            f"{x_col!r} and {y_col!r}"
        )
    z = np.full((ny, nx), np.nan)
    found = np.zeros((ny, nx), dtype=bool)
    for r in rows:
        i = int(np.searchsorted(y_values, float(r[y_col])))
        j = int(np.searchsorted(x_values, float(r[x_col])))
        if not np.isnan(z[i, j]):
            raise GridError(f"duplicate grid cell at {x_col}={r[x_col]}, {y_col}={r[y_col]}")
        z[i, j] = float(r["z_norm"])
        found[i, j] = r["found"].strip() == "1"
    return x_values, y_values, z, found


def cell_colors(z: np.ndarray, found: np.ndarray, vmin=None, vmax=None) -> np.ndarray:
    """Cell RGBA: white iff not found, else sequential in z."""
    if np.any(found):
        zf = z[found]
        lo = float(zf.min()) if vmin is None else vmin
        hi = float(zf.max()) if vmax is None else vmax
        if hi <= lo:
            hi = lo + 1.0
    else:
        lo, hi = 0.0, 1.0
    rgba = _CMAP(Normalize(lo, hi, clip=True)(np.where(found, z, 0.0)))
    rgba[~found] = WHITE
    return rgba


def _index_ticks(ax, which: str, values: np.ndarray, max_ticks: int = 6):
    n = values.size
    step = max(1, (n - 1) // (max_ticks - 1)) if n > 1 else 1
    idx = np.arange(0, n, step)
    labels = [f"{v:g}" for v in values[idx]]
    if which == "x":
        ax.set_xticks(idx, labels, rotation=45, ha="right")
    else:
        ax.set_yticks(idx, labels)


def plot_heatmap(panel: PanelSpec) -> HeatmapResult:
    rows = read_rows(panel.csv_path, (panel.x_col, panel.y_col, "z_norm", "found"))
    x_values, y_values, z, found = pivot_grid(rows, panel.x_col, panel.y_col)
    rgba = cell_colors(z, found, panel.vmin, panel.vmax)
    ny, nx = found.shape

    fig = new_figure()
    ax = fig.add_subplot(111)
    ax.imshow(
        rgba,
        origin="lower",
        interpolation="nearest",
        extent=(-0.5, nx - 0.5, -0.5, ny - 0.5),
        aspect="auto",
    )
    _index_ticks(ax, "x", x_values)
    _index_ticks(ax, "y", y_values)
    ax.set_xlabel(panel.x_col)
    ax.set_ylabel(panel.y_col)
    title = "best attack return (white: none found)"
    if panel.fixed_label:
        title += f" | {panel.fixed_label}"
    ax.set_title(title)
    fig.tight_layout()

    centers = cell_pixel_centers(fig, ax, nx, ny)
    png_path, svg_path = save_figure(fig, panel.output_path)
    return HeatmapResult(png_path, svg_path, x_values, y_values, z, found, rgba, centers)
