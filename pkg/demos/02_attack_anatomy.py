"""Anatomy of a three-stage attack against a weight update.

An attacker who knows a weight update is coming can (1) trade against
the pool to push the quoted price of the soon-to-be-upweighted token
above market, (2) let the update reprice the pool at the manipulated
reserves, then (3) arbitrage the pool back and pocket the difference.
The attack pays the fee twice, so it only profits when the weight
change is large enough; this script prices every stage explicitly.

Run: python3 demos/02_attack_anatomy.py
"""
from tfmm_guard import PoolState
from tfmm_guard.attack import (
    AttackScenario,
    epsilon_null,
    run_pair_attack,
    solve_manip_delta1,
    solve_manip_delta2,
    worst_case_market_price,
)

pool = PoolState([100.0, 100.0], [0.5, 0.5], 0.997)
market = worst_case_market_price(pool)
eps0 = epsilon_null(0.997)
print(f"fee gamma = 0.997, null deviation eps0 = gamma^-2 - 1 = {eps0:.8f}")

# Stage 1: push the pumped token's quote to (1 + eps) * market.
eps = 0.10
d1 = solve_manip_delta1(pool.reserves[0], 0.5, 0.5, 0.997, eps)
d2 = solve_manip_delta2(pool.reserves[1], 0.5, 0.5, 0.997, eps)
print(f"\nstage 1 at eps = {eps}: pay in {d1:.4f} token 0, "
      f"take out {d2:.4f} token 1")
print(f"manipulation cost C = {d1 - float(market.prices[1]) * d2:.6f}")

# Stages 2 and 3 for a range of weight updates. z is the full-pipeline
# profit with fees; z_upper replaces the closing arbitrage with its
# no-fee bound. A null weight update must never profit.
print("\n  dw        z (fee-aware)   z_upper (no-fee bound)")
for dw in (0.0, 0.005, 0.02, 0.05):
    sc = AttackScenario(pool, market, [-dw, dw], eps)
    out = run_pair_attack(sc)
    print(f"  {dw:<8} {out.z:>14.6f} {out.z_upper:>18.6f}")

# Sweep eps for one weight update. Unconstrained, the profit keeps
# growing with the manipulation size: this is exactly why the trade-size
# cap guardrail exists (demo 04 searches under all three guardrails).
print("\nfee-aware profit vs manipulation size, dw = 0.05:")
for e in (0.05, 0.1, 0.2, 0.4, 0.8):
    z = run_pair_attack(AttackScenario(pool, market, [-0.05, 0.05], e)).z
    d = solve_manip_delta1(pool.reserves[0], 0.5, 0.5, 0.997, e)
    print(f"  eps = {e:<5} first trade uses {d / pool.reserves[0]:>5.1%} "
          f"of reserve 0, z = {z:.4f}")
print("unbounded manipulation keeps paying: only the trade-size cap,")
print("weight floor, and weight-change cap together shut the attack down.")
