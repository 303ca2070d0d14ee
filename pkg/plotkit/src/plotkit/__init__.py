"""Figure generation for guardrail sweep and safe-region CSV outputs."""
from .heatmap import HeatmapResult, PanelSpec, cell_colors, pivot_grid, plot_heatmap
from .io import GridError, MissingColumnError, read_rows
from .region import REGION_COLORS, RegionResult, plot_safe_region, region_colors

__version__ = "0.1.0"

__all__ = [
    "GridError",
    "HeatmapResult",
    "MissingColumnError",
    "PanelSpec",
    "REGION_COLORS",
    "RegionResult",
    "cell_colors",
    "pivot_grid",
    "plot_heatmap",
    "plot_safe_region",
    "read_rows",
    "region_colors",
    "__version__",
]
