"""Adversarial search over guardrail settings, end to end.

For each guardrail cell the optimizer jointly searches pool reserves,
weights, the weight update, and a general N-token first trade for the
most profitable attack. Sweeping a grid of guardrail settings maps the
frontier between provably safe and exploitable configurations. This is
a small, fast version of that experiment; scale the grids and restart
counts up for a production map.

Run: python3 demos/04_adversarial_sweep.py
"""
import numpy as np

from tfmm_guard import Guardrails, SweepConfig, run_sweep, search_cell, two_token_bounds
from tfmm_guard.optimizer import SearchSpec

# One cell in detail: loose guardrails on a three-token pool.
spec = SearchSpec(
    n_tokens=3,
    guardrails=Guardrails(max_trade_fraction=0.3, min_weight=0.02,
                          max_weight_change=0.05),
    gamma=0.997,
    n_restarts=64,
    max_iters=40,
    master_seed=0,
)
best = search_cell(spec)
print("loose guardrails:")
print(f"  found attack: {best.found}, normalized return z = {best.z_norm:.3e}")
print(f"  reserves:      {np.round(best.scenario.pool.reserves, 4)}")
print(f"  weights:       {np.round(best.scenario.pool.weights, 4)}")
print(f"  weight update: {np.round(best.scenario.weight_update, 4)}")
print(f"  first trade in/out: {np.round(best.scenario.manip_trade.delta_in, 4)}"
      f" / {np.round(best.scenario.manip_trade.lambda_out, 4)}")

# The same pool with the weight-change cap inside the analytic safe
# bound: the search comes up empty.
bound = min(two_token_bounds(0.02, 0.997, 0.3, 0.3)[2:])
tight = SearchSpec(
    n_tokens=3,
    guardrails=Guardrails(0.3, 0.02, 0.9 * float(bound)),
    gamma=0.997,
    n_restarts=64,
    max_iters=40,
    master_seed=0,
)
print(f"\nweight-change cap tightened to {0.9 * float(bound):.2e} "
      f"(inside the analytic bound {float(bound):.2e}):")
print(f"  found attack: {search_cell(tight).found}")

# A miniature sweep panel: fixed trade cap, 3x3 grid over the other two
# guardrails. The CSV is byte-deterministic for a fixed master seed.
config = SweepConfig(
    fixed_rail="max_trade_fraction",
    fixed_value=0.1,
    grid_a_rail="min_weight",
    grid_a_values=(0.02, 0.1, 0.2),
    grid_b_rail="max_weight_change",
    grid_b_values=(1e-5, 1e-3, 1e-2),
    n_restarts=32,
    max_iters=15,
    master_seed=0,
    output_path="sweep_demo.csv",
)
path = run_sweep(config)
print(f"\nsweep written to {path}:")
print(open(path).read().rstrip())
print("\nrender it with: plotkit heatmap --csv sweep_demo.csv "
      "--x min_weight --y max_weight_change --out sweep_demo.png")
