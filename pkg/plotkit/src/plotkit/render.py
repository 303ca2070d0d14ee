"""Deterministic figure rendering: fixed backend, no timestamps.

Figures are drawn straight onto an Agg canvas (no pyplot state), the SVG
hash salt is pinned, and date metadata is stripped, so the output bytes
are a pure function of the input data.
"""
from __future__ import annotations

import os

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

DPI = 100

matplotlib.rcParams["svg.hashsalt"] = "plotkit"


def new_figure(figsize=(6.4, 4.8)):
    fig = Figure(figsize=figsize, dpi=DPI)
    FigureCanvasAgg(fig)
    return fig


def output_paths(output_path: str) -> tuple[str, str]:
    """PNG and SVG siblings for one requested output path."""
    stem, ext = os.path.splitext(output_path)
    if ext.lower() not in (".png", ".svg"):
        stem = output_path
    return stem + ".png", stem + ".svg"


def save_figure(fig, output_path: str) -> tuple[str, str]:
    png_path, svg_path = output_paths(output_path)
    fig.savefig(png_path, format="png", metadata={"Software": "plotkit"})
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    return png_path, svg_path


def cell_pixel_centers(fig, ax, nx: int, ny: int) -> np.ndarray:
    """Pixel (row, col) of every cell center in the saved PNG.

    Assumes the axes show an nx-by-ny cell grid in index coordinates
    (imshow with extent -0.5 .. n-0.5, origin "lower").
    """
    fig.canvas.draw()
    xs, ys = np.meshgrid(np.arange(nx), np.arange(ny))
    pts = np.column_stack([xs.ravel(), ys.ravel()]).astype(float)
    disp = ax.transData.transform(pts)
    height = int(round(fig.get_figheight() * fig.dpi))
    cols = np.rint(disp[:, 0]).astype(int)
    rows = height - 1 - np.rint(disp[:, 1]).astype(int)
    return np.column_stack([rows, cols]).reshape(ny, nx, 2)
