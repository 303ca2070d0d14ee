"""Safe-region plot: shaded safe cells with binding-constraint colours."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from matplotlib.patches import Patch

from .io import GridError, read_rows
from .render import cell_pixel_centers, new_figure, save_figure

# Safe cells share one shade; unsafe cells are coloured by which bound
# is most violated. None of the colours is pure white.
REGION_COLORS = {
    "safe": (0.55, 0.78, 0.55, 1.0),
    "A26": (0.85, 0.33, 0.30, 1.0),
    "A27": (0.95, 0.62, 0.25, 1.0),
    "A28": (0.30, 0.45, 0.80, 1.0),
    "A29": (0.55, 0.35, 0.70, 1.0),
}


@dataclass(frozen=True)
class RegionResult:
    png_path: str
    svg_path: str
    w_values: np.ndarray
    dw_values: np.ndarray
    safe: np.ndarray        # bool (n_dw, n_w)
    binding: np.ndarray     # str (n_dw, n_w)
    rgba: np.ndarray        # (n_dw, n_w, 4)
    pixel_centers: np.ndarray


def _pivot(rows: list[dict]):
    w_values = np.unique([float(r["w"]) for r in rows])
    dw_values = np.unique([float(r["dw"]) for r in rows])
    nw, ndw = w_values.size, dw_values.size
    if len(rows) != nw * ndw:
        raise GridError(f"{len(rows)} rows do not fill a {nw}x{ndw} (w, dw) grid")
    safe = np.zeros((ndw, nw), dtype=bool)
    binding = np.full((ndw, nw), "", dtype=object)
    for r in rows:
        i = int(np.searchsorted(dw_values, float(r["dw"])))
        j = int(np.searchsorted(w_values, float(r["w"])))
        safe[i, j] = r["safe"].strip() == "1"
        binding[i, j] = r["binding"].strip()
    unknown = set(binding.ravel()) - set(REGION_COLORS) - {"none"}
    if unknown:
        raise GridError(f"unknown binding labels in CSV: {sorted(unknown)}")
    return w_values, dw_values, safe, binding


def region_colors(safe: np.ndarray, binding: np.ndarray) -> np.ndarray:
    rgba = np.empty(safe.shape + (4,))
    for i in range(safe.shape[0]):
        for j in range(safe.shape[1]):
            key = "safe" if safe[i, j] else binding[i, j]
            rgba[i, j] = REGION_COLORS[key]
    return rgba


def plot_safe_region(csv_path: str, output_path: str) -> RegionResult:
    rows = read_rows(csv_path, ("w", "dw", "safe", "binding"))
    w_values, dw_values, safe, binding = _pivot(rows)
    rgba = region_colors(safe, binding)
    ndw, nw = safe.shape

    fig = new_figure()
    ax = fig.add_subplot(111)
    ax.imshow(
        rgba,
        origin="lower",
        interpolation="nearest",
        extent=(-0.5, nw - 0.5, -0.5, ndw - 0.5),
        aspect="auto",
    )
    xt = np.linspace(0, nw - 1, min(nw, 7)).astype(int)
    ax.set_xticks(xt, [f"{w_values[i]:g}" for i in xt])
    yt = np.linspace(0, ndw - 1, min(ndw, 7)).astype(int)
    ax.set_yticks(yt, [f"{dw_values[i]:g}" for i in yt])
    ax.set_xlabel("weight")
    ax.set_ylabel("weight change")
    ax.set_title("provably safe weight changes")
    handles = [Patch(color=c, label=name) for name, c in REGION_COLORS.items()]
    ax.legend(handles=handles, loc="upper right", fontsize=8, framealpha=0.9)
    fig.tight_layout()

    centers = cell_pixel_centers(fig, ax, nw, ndw)
    png_path, svg_path = save_figure(fig, output_path)
    return RegionResult(
        png_path, svg_path, w_values, dw_values, safe, binding, rgba, centers
    )
