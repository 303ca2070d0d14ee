"""Analytic guardrail machinery: when is a weight change provably safe?

The two gradient conditions make the upper-bounded attack return
non-increasing in the manipulation size, so that no attack of the
manipulate/update/arbitrage form can beat plain arbitrage. In the
two-token case they reduce to four explicit bounds on the per-block
weight change, evaluated at the trade-size cap (the worst admissible
manipulation, by the level-set monotonicity of the inequalities).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pool import PoolError, PoolState, TradeIntent

BOUND_NAMES = ("A26", "A27", "A28", "A29")


@dataclass(frozen=True)
class Guardrails:
    """The three pool protections.

    max_trade_fraction caps every inflow and outflow as a fraction of the
    matching reserve; min_weight floors every weight entry; and
    max_weight_change caps the absolute per-entry weight change per block.
    """

    max_trade_fraction: float
    min_weight: float
    max_weight_change: float

    def __post_init__(self):
        if not (0 < self.max_trade_fraction < 1):
            raise ValueError("max_trade_fraction must lie in (0, 1)")
        if self.min_weight <= 0:
            raise ValueError("min_weight must be positive")
        if not (0 <= self.max_weight_change < 1):
            raise ValueError("max_weight_change must lie in [0, 1)")

    def validate_for_pool(self, n_tokens: int) -> None:
        if self.min_weight * n_tokens >= 1:
            raise ValueError("min_weight too large for the token count")


@dataclass(frozen=True)
class GuardrailDecision:
    accepted: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class SafeRegion:
    """Safe/unsafe verdict per (weight, weight-change) grid cell."""

    w_grid: np.ndarray
    dw_grid: np.ndarray
    safe: np.ndarray      # bool, shape (len(w_grid), len(dw_grid))
    binding: np.ndarray   # str, same shape; violated bound or "none"

    def __post_init__(self):
        if self.safe.shape != (self.w_grid.size, self.dw_grid.size):
            raise ValueError("safe matrix shape must match the grids")
        if self.binding.shape != self.safe.shape:
            raise ValueError("binding matrix shape must match the grids")


def gradient_conditions_n(w1, w2, w1p, w2p, gamma, delta1_over_R1, delta2_over_R2):
    """The two no-profitable-attack gradient conditions.

    cond_a: (w2'/(w1'+w2')) (1 + gamma (w1/w2)(1+d1)/(1+gamma d1)) <= 1
    cond_b: w1'/(w1'+w2') >= (1-(1-gamma)(1-d2)**(w2/w1)) /
                             (1+w2/w1-(1-gamma)(1-d2)**(w2/w1))

    Both true implies the bounded attack return is non-increasing in the
    price deviation, hence never positive.
    """
    w1, w2, w1p, w2p, gamma, d1, d2 = (
        np.asarray(v, dtype=float)
        for v in (w1, w2, w1p, w2p, gamma, delta1_over_R1, delta2_over_R2)
    )
    s = w1p + w2p
    lhs_a = (w2p / s) * (1.0 + gamma * (w1 / w2) * (1.0 + d1) / (1.0 + gamma * d1))
    cond_a = lhs_a <= 1.0 + 1e-15

    f = (1.0 - gamma) * np.exp((w2 / w1) * np.log1p(-d2))
    rhs_b = (1.0 - f) / (1.0 + w2 / w1 - f)
    cond_b = (w1p / s) >= rhs_b - 1e-15

    if cond_a.ndim == 0:
        return bool(cond_a), bool(cond_b)
    return cond_a, cond_b


def two_token_bounds(w, gamma, d1_frac, d2_frac):
    """Lower and upper bounds on dw = dw1 = -dw2 for a two-token pool.

    w is the first token's weight. Returns (lb_a26, lb_a27, ub_a28,
    ub_a29); the weight change is provably safe iff
    max(lb) <= dw <= min(ub). All four collapse to 0 at gamma=1 with
    zero-size trades.
    """
    w, gamma, d1, d2 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (w, gamma, d1_frac, d2_frac))
    )
    ratio = w / (1.0 - w)

    lb_a26 = 1.0 - 1.0 / (1.0 + gamma * ratio * (1.0 + d1) / (1.0 + gamma * d1)) - w

    f2 = (1.0 - gamma) * np.exp((1.0 / ratio) * np.log1p(-d2))
    lb_a27 = (1.0 - f2) / (1.0 + 1.0 / ratio - f2) - w

    ub_a28 = 1.0 / (1.0 + gamma * (1.0 / ratio) * (1.0 + d2) / (1.0 + gamma * d2)) - w

    f1 = (1.0 - gamma) * np.exp(ratio * np.log1p(-d1))
    ub_a29 = 1.0 - (1.0 - f1) / (1.0 + ratio - f1) - w

    # All four bounds are identically 0 for fee-free zero-size trades;
    # enforce the identity exactly instead of leaving rounding residue.
    null1 = (gamma == 1.0) & (d1 == 0.0)
    null2 = (gamma == 1.0) & (d2 == 0.0)
    lb_a26 = np.where(null1, 0.0, lb_a26)
    ub_a29 = np.where(null1, 0.0, ub_a29)
    lb_a27 = np.where(null2, 0.0, lb_a27)
    ub_a28 = np.where(null2, 0.0, ub_a28)

    if lb_a26.ndim == 0:
        return float(lb_a26), float(lb_a27), float(ub_a28), float(ub_a29)
    return lb_a26, lb_a27, ub_a28, ub_a29


def safe_region(w_grid, dw_grid, gamma: float, max_trade_fraction: float) -> SafeRegion:
    """Evaluate the four bounds at the trade cap over a (w, dw) grid.

    A cell is safe iff all four inequalities hold with both trade
    fractions at the cap. For unsafe cells, binding names the most
    violated inequality.
    """
    w_grid = np.asarray(w_grid, dtype=float)
    dw_grid = np.asarray(dw_grid, dtype=float)
    if np.any(np.diff(w_grid) <= 0) or np.any(np.diff(dw_grid) <= 0):
        raise ValueError("grids must be strictly ascending")

    lb26, lb27, ub28, ub29 = two_token_bounds(
        w_grid, gamma, max_trade_fraction, max_trade_fraction
    )
    dw = dw_grid[None, :]
    # Margin > 0 means the constraint is satisfied.
    margins = np.stack(
        [
            dw - lb26[:, None],
            dw - lb27[:, None],
            ub28[:, None] - dw,
            ub29[:, None] - dw,
        ],
        axis=0,
    )
    safe = np.all(margins >= 0, axis=0)
    worst = np.argmin(margins, axis=0)
    binding = np.where(safe, "none", np.array(BOUND_NAMES)[worst])
    return SafeRegion(w_grid, dw_grid, safe, binding)


def check_guardrails(
    pool: PoolState, trade: TradeIntent, weight_update, rails: Guardrails
) -> GuardrailDecision:
    """Reject any trade or weight update breaching a guardrail.

    Caps are inclusive: a trade of exactly the capped fraction passes.
    """
    rails.validate_for_pool(pool.n_tokens)
    cap = rails.max_trade_fraction * pool.reserves
    if np.any(trade.delta_in > cap):
        return GuardrailDecision(False, "trade-size: inflow above cap")
    if np.any(trade.lambda_out > cap):
        return GuardrailDecision(False, "trade-size: outflow above cap")
    dw = np.asarray(weight_update, dtype=float)
    if dw.shape != pool.weights.shape:
        raise PoolError("weight_update length must match the pool")
    if np.any(np.abs(dw) > rails.max_weight_change):
        return GuardrailDecision(False, "weight-change: entry above cap")
    if np.any(pool.weights + dw < rails.min_weight):
        return GuardrailDecision(False, "min-weight: floor breached")
    return GuardrailDecision(True, None)
