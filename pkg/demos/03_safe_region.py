"""The provably safe envelope of per-block weight changes.

Four closed-form inequalities bound the per-block weight change of a
two-token pool so that the manipulate/update/arbitrage attack can never
beat plain arbitrage, for any trade within the size cap. This script
evaluates the bounds, prints the safe interval across weights, and
writes the full region to CSV (the same artifact `sweep safe-region`
produces).

Run: python3 demos/03_safe_region.py
"""
import numpy as np

from tfmm_guard import safe_region, two_token_bounds
from tfmm_guard.sweep import emit_safe_region

GAMMA = 0.997
CAP = 0.2  # trades may move up to 20% of a reserve

print(f"gamma = {GAMMA}, trade-size cap = {CAP:0.0%} of reserves")
print("\n  w       safe dw interval")
for w in np.linspace(0.1, 0.9, 9):
    lb26, lb27, ub28, ub29 = two_token_bounds(w, GAMMA, CAP, CAP)
    lo, hi = max(lb26, lb27), min(ub28, ub29)
    print(f"  {w:.1f}   [{lo:+.6f}, {hi:+.6f}]")

# The interval collapses to a point with no fee: any nonzero update is
# attackable when arbitrage is free.
lo, hi = two_token_bounds(0.5, 1.0, CAP, CAP)[1:3]
print(f"\nwithout a fee the safe interval is [{lo}, {hi}]: zero only")

# Grid verdicts with the binding (most violated) inequality per cell.
region = safe_region(
    np.array([0.3, 0.5, 0.7]),
    np.array([-1e-3, -5e-4, 0.0, 5e-4, 1e-3]),
    GAMMA,
    CAP,
)
print("\nverdicts (rows: w, columns: dw):")
for i, w in enumerate(region.w_grid):
    cells = [
        "safe" if region.safe[i, j] else str(region.binding[i, j])
        for j in range(region.dw_grid.size)
    ]
    print(f"  w={w:.1f}: {cells}")

out = emit_safe_region(
    np.round(np.arange(0.05, 0.951, 0.005), 10),
    np.round(np.arange(-0.02, 0.0201, 1e-4), 10),
    GAMMA,
    CAP,
    "safe_region_demo.csv",
)
print(f"\nfull region written to {out}")
print("render it with: plotkit safe-region --csv safe_region_demo.csv "
      "--out safe_region_demo.png")
