"""Tour of the pool model: invariant, quotes, and the no-arb band.

A geometric-mean pool holds reserves R_i with weights w_i summing to 1
and accepts a trade when the weighted product of its post-trade
effective reserves (inflows discounted by the fee factor gamma) does not
fall below the pre-trade value. This script walks through those pieces
on a small two-token pool.

Run: python3 demos/01_pool_basics.py
"""
from tfmm_guard import (
    PoolState,
    TradeIntent,
    fee_adjusted_quote,
    invariant_k,
    no_arb_band,
    quote_pair_trade,
    spot_price,
    validate_trade,
)

pool = PoolState(reserves=[100.0, 50.0], weights=[0.7, 0.3], fee_gamma=0.997)
print("pool:", pool.to_json())
print("invariant k =", invariant_k(pool))

# Swap 10 units of token 0 for token 1. The quote is exactly the output
# that meets the trading function at equality.
delta = 10.0
lam = quote_pair_trade(pool, 0, 1, delta)
print(f"\nswap {delta} of token 0 -> {lam:.6f} of token 1")

trade = TradeIntent.pair(pool.n_tokens, 0, delta, 1, lam)
decision = validate_trade(pool, trade)
print("accepted:", decision.accepted,
      "| log-invariant change:", decision.log_invariant_change)

# Asking for slightly more output must fail.
greedy = TradeIntent.pair(pool.n_tokens, 0, delta, 1, lam * 1.0001)
print("greedy trade accepted:", validate_trade(pool, greedy).accepted)

# Marginal prices: the spot price is the zero-size limit of the quote,
# and the fee widens it into a band of arbitrage-free market prices.
p = spot_price(pool, 1, 0)
print(f"\nspot price of token 1 in token 0: {p:.6f}")
print("marginal cost of buying token 1 with token 0:",
      f"{fee_adjusted_quote(pool, 0, 1):.6f}")
band = no_arb_band(pool, 0, 1)
print(f"no-arb band: [{band.lower:.6f}, {band.upper:.6f}]")
print("band width factor (upper/lower) = 1/gamma^2 =",
      band.upper / band.lower)

# Tiny trades approach the fee-loaded marginal price (the band's upper
# edge) from above: larger trades pay extra slippage on top of the fee.
print("\naverage price paid per unit of token 1:")
for d in (10.0, 1.0, 0.1, 0.01):
    unit_cost = d / quote_pair_trade(pool, 0, 1, d)
    print(f"  delta={d:<5} -> {unit_cost:.8f}")
print(f"  zero-size limit (band upper edge): {band.upper:.8f}")

