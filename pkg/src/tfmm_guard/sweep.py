"""Guardrail grid sweeps: run the adversarial search over a 2-D grid.

One guardrail is held fixed and the other two vary, one panel per sweep.
Output is a flat CSV (one row per cell, row-major over the two grids)
plus a JSON metadata sidecar. The CSV bytes are a pure function of the
configuration and master seed: per-cell seeds are derived from the cell
index, results are written by a single writer in grid order, and wall
times go to the sidecar only.
"""
from __future__ import annotations

import json
import os
import platform
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .bounds import Guardrails, safe_region
from .optimizer import SearchSpec, search_cell

RAIL_NAMES = ("max_trade_fraction", "min_weight", "max_weight_change")

CSV_HEADER = (
    "max_trade_fraction,min_weight,max_weight_change,"
    "z_norm,found,restarts,oracle_failures,wall_time_s"
)


class ConfigError(ValueError):
    """Malformed sweep configuration; the message carries diagnostics."""


@dataclass(frozen=True)
class SweepConfig:
    """One sweep panel: a fixed guardrail and two varying guardrail grids."""

    fixed_rail: str
    fixed_value: float
    grid_a_rail: str
    grid_a_values: tuple
    grid_b_rail: str
    grid_b_values: tuple
    n_tokens: int = 3
    gamma: float = 0.997
    n_restarts: int = 256
    max_iters: int = 300
    master_seed: int = 0
    output_path: str = "sweep.csv"
    parallelism: int = 1

    def __post_init__(self):
        rails = {self.fixed_rail, self.grid_a_rail, self.grid_b_rail}
        if rails != set(RAIL_NAMES):
            raise ConfigError(
                "fixed_rail, grid_a_rail and grid_b_rail must name the three "
                f"guardrails {RAIL_NAMES} exactly once each"
            )
        for label, vals in (("grid_a", self.grid_a_values), ("grid_b", self.grid_b_values)):
            if len(vals) == 0:
                raise ConfigError(f"{label}_values must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError(f"{label}_values must be strictly ascending")
        if self.n_restarts < 1 or self.n_tokens < 2 or self.max_iters < 0:
            raise ConfigError("n_tokens >= 2, n_restarts >= 1, max_iters >= 0 required")
        if not (0 < self.gamma <= 1):
            raise ConfigError("gamma must lie in (0, 1]")

    def rails_for_cell(self, a_value: float, b_value: float) -> Guardrails:
        kv = {
            self.fixed_rail: self.fixed_value,
            self.grid_a_rail: a_value,
            self.grid_b_rail: b_value,
        }
        return Guardrails(**kv)

    def n_cells(self) -> int:
        return len(self.grid_a_values) * len(self.grid_b_values)


_FLOAT_KEYS = {"fixed_value", "gamma"}
_INT_KEYS = {"n_tokens", "n_restarts", "max_iters", "master_seed", "parallelism"}
_LIST_KEYS = {"grid_a_values", "grid_b_values"}
_STR_KEYS = {"fixed_rail", "grid_a_rail", "grid_b_rail", "output_path"}


def parse_config(text: str) -> SweepConfig:
    """Parse a flat key=value config. Raises ConfigError with line numbers."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in _FLOAT_KEYS:
                fields[key] = float(value)
            elif key in _INT_KEYS:
                fields[key] = int(value)
            elif key in _LIST_KEYS:
                fields[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key in _STR_KEYS:
                fields[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: field {key!r}: {exc}") from exc
    required = {"fixed_rail", "fixed_value", "grid_a_rail", "grid_a_values",
                "grid_b_rail", "grid_b_values"}
    missing = sorted(required - fields.keys())
    if missing:
        raise ConfigError(f"missing required fields: {', '.join(missing)}")
    try:
        return SweepConfig(**fields)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _cell_seed(master_seed: int, cell_index: int) -> int:
    ss = np.random.SeedSequence([int(master_seed) & (2**63 - 1), cell_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0] & (2**63 - 1))


def _cell_spec(config: SweepConfig, cell_index: int) -> SearchSpec:
    na, nb = len(config.grid_a_values), len(config.grid_b_values)
    ia, ib = divmod(cell_index, nb)
    if not (0 <= ia < na):
        raise IndexError("cell index out of range")
    rails = config.rails_for_cell(config.grid_a_values[ia], config.grid_b_values[ib])
    return SearchSpec(
        n_tokens=config.n_tokens,
        guardrails=rails,
        gamma=config.gamma,
        n_restarts=config.n_restarts,
        max_iters=config.max_iters,
        master_seed=_cell_seed(config.master_seed, cell_index),
    )


def _run_one_cell(args):
    config, cell_index = args
    spec = _cell_spec(config, cell_index)
    t0 = time.perf_counter()
    best = search_cell(spec)
    wall = time.perf_counter() - t0
    return cell_index, spec.guardrails, best.z_norm, best.found, best.oracle_failures, wall


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_row(rails: Guardrails, z_norm: float, found: bool,
                restarts: int, failures: int) -> str:
    # wall_time_s is written as 0 so output bytes depend only on the
    # configuration; measured times live in the metadata sidecar.
    return (
        f"{rails.max_trade_fraction:.12g},{rails.min_weight:.12g},"
        f"{rails.max_weight_change:.12g},{z_norm:.12g},{int(found)},"
        f"{restarts},{failures},0"
    )


def run_sweep(config: SweepConfig, workers: int | None = None) -> str:
    """Run all cells, write the CSV and sidecar, return the CSV path.

    Cells are independent; they run on a bounded process pool and a
    single writer emits rows in row-major grid order, so the CSV bytes
    are identical for any worker count.
    """
    if workers is None:
        workers = int(os.environ.get("TFMM_GUARD_THREADS", config.parallelism))
    workers = max(1, workers)
    n = config.n_cells()
    jobs = [(config, i) for i in range(n)]

    t0 = time.perf_counter()
    results = [None] * n
    if workers == 1:
        for job in jobs:
            out = _run_one_cell(job)
            results[out[0]] = out
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_run_one_cell, jobs):
                results[out[0]] = out
    total_wall = time.perf_counter() - t0

    lines = [CSV_HEADER]
    wall_times = []
    for _, rails, z_norm, found, failures, wall in results:
        lines.append(_format_row(rails, z_norm, found, config.n_restarts, failures))
        wall_times.append(wall)
    _atomic_write(config.output_path, "\n".join(lines) + "\n")

    meta = {
        "config": {
            "fixed_rail": config.fixed_rail,
            "fixed_value": config.fixed_value,
            "grid_a_rail": config.grid_a_rail,
            "grid_a_values": list(config.grid_a_values),
            "grid_b_rail": config.grid_b_rail,
            "grid_b_values": list(config.grid_b_values),
            "n_tokens": config.n_tokens,
            "gamma": config.gamma,
            "n_restarts": config.n_restarts,
            "max_iters": config.max_iters,
            "master_seed": config.master_seed,
            "output_path": config.output_path,
            "parallelism": config.parallelism,
        },
        "seed": config.master_seed,
        "code_version": __version__,
        "python": platform.python_version(),
        "total_cells": n,
        "total_restarts": n * config.n_restarts,
        "workers": workers,
        "wall_time_s": total_wall,
        "cell_wall_times_s": wall_times,
    }
    _atomic_write(config.output_path + ".meta.json", json.dumps(meta, indent=2) + "\n")
    return config.output_path


def emit_safe_region(w_grid, dw_grid, gamma: float, cap: float, output_path: str) -> str:
    """Write the analytic safe region over a (w, dw) grid as CSV.

    Columns: w, dw, safe (0/1), binding (violated bound name or "none").
    """
    region = safe_region(w_grid, dw_grid, gamma, cap)
    lines = ["w,dw,safe,binding"]
    for i, wv in enumerate(region.w_grid):
        for j, dv in enumerate(region.dw_grid):
            lines.append(
                f"{wv:.12g},{dv:.12g},{int(region.safe[i, j])},{region.binding[i, j]}"
            )
    try:
        _atomic_write(output_path, "\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write safe-region CSV to {output_path!r}: {exc}") from exc
    return output_path


def default_safe_region_grids():
    """Grids for the standard safe-region figure: w in [0.05, 0.95] step
    0.005, dw in [-0.02, 0.02] step 1e-4."""
    w_grid = np.round(np.arange(0.05, 0.95 + 1e-9, 0.005), 10)
    dw_grid = np.round(np.arange(-0.02, 0.02 + 1e-9, 1e-4), 10)
    return w_grid, dw_grid
