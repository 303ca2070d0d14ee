"""Command-line figure generation from sweep and safe-region CSVs."""
from __future__ import annotations

import argparse
import sys

from .heatmap import PanelSpec, plot_heatmap
from .io import GridError, MissingColumnError
from .region import plot_safe_region

EXIT_DATA_ERROR = 2


def _cmd_heatmap(args) -> int:
    panel = PanelSpec(
        csv_path=args.csv,
        x_col=args.x,
        y_col=args.y,
        output_path=args.out,
        fixed_label=args.fixed_label,
        vmin=args.vmin,
        vmax=args.vmax,
    )
    result = plot_heatmap(panel)
    print(result.png_path)
    print(result.svg_path)
    return 0


def _cmd_safe_region(args) -> int:
    result = plot_safe_region(args.csv, args.out)
    print(result.png_path)
    print(result.svg_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render guardrail sweep and safe-region figures."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_heat = sub.add_parser("heatmap", help="attack-return heatmap from a sweep CSV")
    p_heat.add_argument("--csv", required=True, help="sweep CSV path")
    p_heat.add_argument("--x", required=True, help="column for the x axis")
    p_heat.add_argument("--y", required=True, help="column for the y axis")
    p_heat.add_argument("--out", required=True, help="output image path (PNG + SVG written)")
    p_heat.add_argument("--fixed-label", default=None, help="fixed-rail annotation")
    p_heat.add_argument("--vmin", type=float, default=None, help="colour scale lower bound")
    p_heat.add_argument("--vmax", type=float, default=None, help="colour scale upper bound")
    p_heat.set_defaults(func=_cmd_heatmap)

    p_reg = sub.add_parser("safe-region", help="safe-region plot from a bounds CSV")
    p_reg.add_argument("--csv", required=True, help="safe-region CSV path")
    p_reg.add_argument("--out", required=True, help="output image path (PNG + SVG written)")
    p_reg.set_defaults(func=_cmd_safe_region)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MissingColumnError, GridError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
