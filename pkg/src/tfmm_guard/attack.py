"""Three-stage price-manipulation attack on a weight-updating pool.

Stage 1 trades the numeraire (token 0) into the pool to push the quoted
price of the pumped token (token 1) to (1+epsilon) times market. Stage 2
applies the weight update with reserves unchanged. Stage 3 arbitrages the
pool back, both with a no-fee closed form (the analytic upper bound) and
with a fee-aware oracle (the realizable return).

All solvers broadcast over numpy arrays; the public API also accepts
plain floats.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pool import (
    MarketPrices,
    PoolError,
    PoolState,
    TradeIntent,
    no_arb_band,
    spot_price,
)


class NoRootError(ValueError):
    """The implicit manipulation equation has no non-negative root."""


class ArbConvergenceError(RuntimeError):
    """The fee-aware arbitrage oracle failed its stopping criterion."""


def epsilon_null(gamma) -> float:
    """Worst-case pre-existing quote deviation: gamma**-2 - 1.

    With the quote already at the upper edge of the no-arb band, doing
    nothing corresponds to epsilon = gamma**-2 - 1 (zero when gamma = 1).
    """
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0) or np.any(g > 1):
        raise ValueError("gamma must lie in (0, 1]")
    out = np.expm1(-2.0 * np.log(g))
    return float(out) if np.isscalar(gamma) else out


def _bisect_increasing(f, lo, hi, iters: int = 120) -> np.ndarray:
    """Bisection to ulp resolution for an elementwise increasing f.

    Requires f(lo) <= 0 <= f(hi). lo/hi are arrays (modified copies).
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi)
        if np.all(done):
            break
        pos = f(mid) > 0
        hi = np.where(~done & pos, mid, hi)
        lo = np.where(~done & ~pos, mid, lo)
    return lo


def _rhs_log(gamma, epsilon):
    # log of gamma**2 * (1 + epsilon), the right side of both implicit
    # manipulation equations. Targets within a few ulp of the null value
    # are snapped to it so that the null attack is exactly the zero trade.
    target = 2.0 * np.log(gamma) + np.log1p(epsilon)
    return np.where(np.abs(target) <= 1e-15, 0.0, target)


def _solve_d1_frac(w1, w2, gamma, epsilon) -> np.ndarray:
    w1, w2, gamma, epsilon = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (w1, w2, gamma, epsilon))
    )
    target = _rhs_log(gamma, epsilon)
    if np.any(target < -1e-12):
        raise NoRootError("gamma**2 * (1 + epsilon) < 1: epsilon below the null value")

    ratio = w1 / w2

    def resid(d):
        return np.log1p(d) + ratio * np.log1p(gamma * d) - target

    hi = np.ones_like(target)
    for _ in range(200):
        need = resid(hi) < 0
        if not np.any(need):
            break
        hi = np.where(need, 2.0 * hi, hi)
    root = _bisect_increasing(resid, np.zeros_like(target), hi)
    return np.where(target <= 0.0, 0.0, root)


def _solve_d2_frac(w1, w2, gamma, epsilon) -> np.ndarray:
    w1, w2, gamma, epsilon = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (w1, w2, gamma, epsilon))
    )
    target = _rhs_log(gamma, epsilon)
    if np.any(target < -1e-12):
        raise NoRootError("gamma**2 * (1 + epsilon) < 1: epsilon below the null value")

    ratio = w2 / w1

    def resid(q):
        t = np.expm1(-ratio * np.log1p(-q))  # (1-q)**(-w2/w1) - 1
        return np.log1p(t / gamma) - np.log1p(-q) - target

    q_max = np.full_like(target, 1.0 - 1e-12)
    root = _bisect_increasing(resid, np.zeros_like(target), q_max)
    return np.where(target <= 0.0, 0.0, root)


def solve_manip_delta1(R1, w1, w2, gamma, epsilon):
    """Token-0 inflow that pushes the pumped quote to (1+epsilon) market.

    Solves (1 + d)(1 + gamma*d)**(w1/w2) = gamma**2 (1+epsilon) for
    d = delta1/R1. The left side is strictly increasing in d, so the root
    is unique; it is found by bracketed bisection to ulp resolution.
    """
    d = _solve_d1_frac(w1, w2, gamma, epsilon)
    out = np.asarray(R1, dtype=float) * d
    return float(out) if out.ndim == 0 else out


def solve_manip_delta2(R2, w1, w2, gamma, epsilon):
    """Pumped-token outflow matching solve_manip_delta1.

    Solves (1-q)**-1 (1 + (1/gamma)((1-q)**(-w2/w1) - 1)) =
    gamma**2 (1+epsilon) for q = delta2/R2 on [0, 1).
    """
    q = _solve_d2_frac(w1, w2, gamma, epsilon)
    out = np.asarray(R2, dtype=float) * q
    return float(out) if out.ndim == 0 else out


def ddelta1_depsilon(R1, w1, w2, gamma, delta1):
    """Analytic derivative of the stage-1 inflow w.r.t. epsilon."""
    R1, w1, w2, gamma, delta1 = (np.asarray(v, dtype=float) for v in (R1, w1, w2, gamma, delta1))
    d = delta1 / R1
    denom = (1.0 + gamma * (w1 / w2) * (1.0 + d) / (1.0 + gamma * d)) * np.exp(
        (w1 / w2) * np.log1p(gamma * d)
    )
    out = gamma**2 * R1 / denom
    return float(out) if out.ndim == 0 else out


def ddelta2_depsilon(R2, w1, w2, gamma, delta2):
    """Analytic derivative of the stage-1 outflow w.r.t. epsilon."""
    R2, w1, w2, gamma, delta2 = (np.asarray(v, dtype=float) for v in (R2, w1, w2, gamma, delta2))
    q = delta2 / R2
    denom = (1.0 + w2 / w1) * np.exp(-(w2 / w1) * np.log1p(-q)) - (1.0 - gamma)
    out = gamma**3 * R2 * (1.0 - q) ** 2 / denom
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AttackScenario:
    """Full input to one pair-attack evaluation.

    The traded pair is (token 0, token 1) with token 0 the numeraire and
    token 1 the token whose quoted price is pumped. epsilon is measured
    against the worst-case pre-attack quote (upper band edge).
    """

    pool: PoolState
    market: MarketPrices
    weight_update: np.ndarray
    epsilon: float
    manip_trade: TradeIntent | None = None

    def __post_init__(self):
        dw = np.asarray(self.weight_update, dtype=float)
        if dw.shape != self.pool.weights.shape:
            raise PoolError("weight_update length must match the pool")
        if abs(dw.sum()) > 1e-9:
            raise PoolError("weight_update must sum to zero")
        wp = self.pool.weights + dw
        if np.any(wp <= 0) or np.any(wp >= 1):
            raise PoolError("post-update weights must stay on the open simplex")
        if self.market.prices.size != self.pool.n_tokens:
            raise PoolError("market price vector length must match the pool")
        for j in range(1, self.pool.n_tokens):
            band = no_arb_band(self.pool, 0, j)
            if not band.contains(float(self.market.prices[j]), rel_tol=1e-9):
                raise PoolError(
                    f"pre-attack price of token {j} lies outside the no-arb band"
                )
        if self.manip_trade is None:
            # Pair-attack scenarios must pump, not dump, the quoted price.
            # Explicit general trades may push quotes in either direction.
            if self.effective_epsilon() < epsilon_null(self.pool.fee_gamma) - 1e-12:
                raise PoolError("epsilon targets a quote below the current one")
        dw = dw.copy()
        dw.setflags(write=False)
        object.__setattr__(self, "weight_update", dw)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def updated_weights(self) -> np.ndarray:
        return self.pool.weights + self.weight_update

    def effective_epsilon(self) -> float:
        """Quote target re-expressed against the worst-case band edge.

        The implicit stage-1 equations are derived assuming the quote sits
        at the edge m_u = m_p/gamma; for a market price strictly inside the
        band the same equations apply with gamma**2 (1 + eps_eff) =
        gamma (1 + epsilon) m_p / m_u.
        """
        m_u = spot_price(self.pool, 1, 0)
        m_p = float(self.market.prices[1])
        g = self.pool.fee_gamma
        return (1.0 + self.epsilon) * m_p / (g * m_u) - 1.0


def worst_case_market_price(pool: PoolState) -> MarketPrices:
    """Market prices placing every quote at the upper edge of its band.

    This is the adversary's preferred pre-attack state: the quoted price
    of each non-numeraire token already deviates by the full null factor.
    """
    p = np.ones(pool.n_tokens)
    for j in range(1, pool.n_tokens):
        p[j] = pool.fee_gamma * spot_price(pool, j, 0)
    return MarketPrices(p)


def manipulation_cost(scenario: AttackScenario) -> float:
    """Stage-1 cost C = delta1 - m_p * delta2 in numeraire units."""
    pool = scenario.pool
    eps = scenario.effective_epsilon()
    g = pool.fee_gamma
    w = pool.weights
    d1 = solve_manip_delta1(pool.reserves[0], w[0], w[1], g, eps)
    d2 = solve_manip_delta2(pool.reserves[1], w[0], w[1], g, eps)
    return d1 - float(scenario.market.prices[1]) * d2


def _no_fee_pair_arb(R1, R2, w1p, w2p, target_ratio):
    """No-fee pair trade moving the full-reserve ratio R1/R2 to target.

    Returns (d1_out, d2_in): token-1-units leaving the pool and
    token-2-units entering. Either may be negative, meaning the flow
    reverses; the formula is exact in both directions.
    """
    rho = np.asarray(target_ratio, dtype=float) * R2 / R1
    s = w1p + w2p
    a = rho ** (w2p / s)  # R1''/R1
    d1 = R1 * (1.0 - a)
    d2 = R2 * (rho ** (-w1p / s) - 1.0)
    return d1, d2


def arb_trade_closed_form(R1p, R2p, w, wp, gamma, epsilon):
    """No-fee arbitrage trade after manipulation and weight update.

    w and wp are the (token0, token1) weight pairs before and after the
    update; R1p/R2p the post-manipulation reserves. Returns (delta1p,
    delta2p); both go negative when the profitable direction reverses.
    """
    w1, w2 = (np.asarray(v, dtype=float) for v in w)
    w1p, w2p = (np.asarray(v, dtype=float) for v in wp)
    rho = (w2 / w2p) * (w1p / w1) / (np.asarray(gamma, dtype=float) * (1.0 + np.asarray(epsilon, dtype=float)))
    s = w1p + w2p
    d1 = np.asarray(R1p, dtype=float) * (1.0 - rho ** (w2p / s))
    d2 = np.asarray(R2p, dtype=float) * (rho ** (-w1p / s) - 1.0)
    if d1.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


def arb_return_upper_bound(scenario: AttackScenario) -> float:
    """X_{gamma=1}(epsilon): the no-fee arbitrage return after the attack."""
    pool = scenario.pool
    g = pool.fee_gamma
    w = pool.weights
    eps = scenario.effective_epsilon()
    m_p = float(scenario.market.prices[1])
    d1 = solve_manip_delta1(pool.reserves[0], w[0], w[1], g, eps)
    d2 = solve_manip_delta2(pool.reserves[1], w[0], w[1], g, eps)
    wp = scenario.updated_weights()
    d1p, d2p = arb_trade_closed_form(
        pool.reserves[0] + d1, pool.reserves[1] - d2, (w[0], w[1]), (wp[0], wp[1]), g, eps
    )
    return d1p - m_p * d2p


def fee_trade_matching_price(R1p, R2p, w1p, w2p, gamma, target_ratio):
    """Fee-loaded pair trade reaching the same post-trade reserve ratio.

    Companion to _no_fee_pair_arb for the upper-bound comparison: the
    trader pays token 2 in (with fee) and takes token 1 out until the
    full-reserve ratio R1''/R2'' equals target_ratio. Returns (d1, d2).
    Requires the no-fee trade in that direction to be non-negative.
    """
    R1p, R2p, w1p, w2p, gamma, tau = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (R1p, R2p, w1p, w2p, gamma, target_ratio))
    )
    log_k = w1p * np.log(R1p) + w2p * np.log(R2p)

    def resid(d2):
        return w1p * np.log(tau * (R2p + d2)) + w2p * np.log(R2p + gamma * d2) - log_k

    hi = np.maximum(R2p * 1e-9, 1e-30)
    for _ in range(300):
        need = resid(hi) < 0
        if not np.any(need):
            break
        hi = np.where(need, 2.0 * hi, hi)
    d2 = _bisect_increasing(resid, np.zeros_like(hi), hi)
    d1 = R1p - tau * (R2p + d2)
    if d1.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


def arb_fee_aware_pair(pool: PoolState, market: MarketPrices, i: int, j: int):
    """Profit-maximizing fee-aware pair trade between tokens i and j.

    Zero trade when the market price sits inside the no-arb band;
    otherwise the unique trade whose post-trade fee-adjusted quote equals
    the market price in the profitable direction. Profit is valued at
    market prices in the numeraire.
    """
    if i == j:
        raise PoolError("arbitrage needs two distinct tokens")
    p = market.prices
    n = pool.n_tokens
    best = (TradeIntent.zero(n), 0.0)
    for token_in, token_out in ((i, j), (j, i)):
        trade_profit = _pair_arb_one_direction(pool, p, token_in, token_out)
        if trade_profit is not None and trade_profit[1] > best[1]:
            best = trade_profit
    return best


def _pair_arb_one_direction(pool: PoolState, prices, token_in: int, token_out: int):
    r, w, g = pool.reserves, pool.weights, pool.fee_gamma
    i, j = token_in, token_out
    m_u = spot_price(pool, j, i)  # no-fee quote of the out-token in the in-token
    rel = prices[j] / prices[i]
    # Profitable to buy token j only if the fee-loaded quote undercuts the market.
    if m_u / g >= rel:
        return None
    s = w[j] / (w[i] + w[j])
    delta_i = (r[i] / g) * np.expm1(s * np.log(g * rel / m_u))
    lam_j = r[j] * -np.expm1(-(w[i] / w[j]) * np.log1p(g * delta_i / r[i]))
    profit = float(prices[j] * lam_j - prices[i] * delta_i)
    trade = TradeIntent.pair(pool.n_tokens, i, float(delta_i), j, float(lam_j))
    return trade, profit


def _arb_ntoken_batch(
    R: np.ndarray,
    w: np.ndarray,
    prices: np.ndarray,
    gamma: float,
    max_iters: int = 120,
):
    """Batched fee-aware N-token arbitrage, exact up to bisection precision.

    Rows are independent problems. The profit -sum p_i x_i (inflows fee
    loaded by 1/gamma) is concave in the log effective reserves, so the
    KKT conditions give each post-trade effective reserve as a monotone
    piecewise function of one multiplier lam:

        e_i = lam w_i/p_i        while lam < p_i R_i / w_i        (sell i)
        e_i = R_i                in the fee deadband               (hold i)
        e_i = lam gamma w_i/p_i  while lam > p_i R_i / (gamma w_i) (buy i)

    The invariant sum w_i log e_i = log k is then strictly increasing in
    lam and is solved by bisection.

    Returns (net_flow, profit, converged): net_flow[b, i] > 0 means token
    i flows into the pool (pre-fee amount), < 0 means it flows out.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=float))
    prices = np.broadcast_to(np.asarray(prices, dtype=float), R.shape)
    g = float(gamma)

    log_k = np.sum(w * np.log(R), axis=1)
    ratio = w / prices  # e_i = lam * ratio_i on the sell branch

    # Piecewise reserve response: sell branch below R, fee deadband at R,
    # buy branch above R. The branch tests cannot overlap since gamma <= 1.
    def effective(lam):
        e_sell = lam[:, None] * ratio
        e_buy = g * e_sell
        return np.where(e_buy > R, e_buy, np.where(e_sell < R, e_sell, R))

    def excess(lam):
        return np.sum(w * np.log(effective(lam)), axis=1) - log_k

    lam_lo = np.min(prices * R / w, axis=1)
    lam_hi = np.max(prices * R / (g * w), axis=1)
    for _ in range(max_iters):
        mid = 0.5 * (lam_lo + lam_hi)
        hi = excess(mid) > 0
        lam_lo = np.where(hi, lam_lo, mid)
        lam_hi = np.where(hi, mid, lam_hi)

    e = effective(0.5 * (lam_lo + lam_hi))
    net = e - R
    net = np.where(net > 0, net / g, net)
    profit = -np.sum(prices * net, axis=1)
    # A non-positive optimum means the market sits inside the no-arb band.
    no_trade = profit <= 0
    net[no_trade] = 0.0
    profit = np.where(no_trade, 0.0, profit)
    converged = np.ones(R.shape[0], dtype=bool)
    return net, profit, converged


def arb_fee_aware_ntoken(pool: PoolState, market: MarketPrices, max_iters: int = 120):
    """Fee-aware N-token arbitrage: the trade maximizing market-value profit.

    Numerical oracle (projected gradient ascent); raises
    ArbConvergenceError when the stopping criterion is not met.
    """
    net, profit, converged = _arb_ntoken_batch(
        pool.reserves[None, :], pool.weights[None, :], market.prices, pool.fee_gamma,
        max_iters=max_iters,
    )
    if not converged[0]:
        raise ArbConvergenceError("arbitrage oracle did not meet its stopping criterion")
    x = net[0]
    tiny = 1e-15 * pool.reserves
    delta = np.where(x > tiny, x, 0.0)
    lam = np.where(x < -tiny, -x, 0.0)
    return TradeIntent(delta, lam), float(profit[0])


@dataclass(frozen=True)
class AttackOutcome:
    """All stage quantities of one pair attack, in numeraire units.

    arb_in / arb_out are the net fee-aware arbitrage flows: token-1 units
    into the pool and token-0 units out of it. x_return/x_null/z are the
    fee-aware values; x_upper/x_upper_null/z_upper the no-fee bound.
    """

    delta1: float
    delta2: float
    cost: float
    arb_in: float
    arb_out: float
    x_return: float
    x_null: float
    z: float
    x_upper: float
    x_upper_null: float
    z_upper: float

    def to_json(self, scenario: AttackScenario | None = None) -> str:
        obj = {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "cost": self.cost,
            "arb_in": self.arb_in,
            "arb_out": self.arb_out,
            "x_return": self.x_return,
            "x_null": self.x_null,
            "z": self.z,
            "x_upper": self.x_upper,
            "x_upper_null": self.x_upper_null,
            "z_upper": self.z_upper,
        }
        if scenario is not None:
            obj["scenario"] = {
                "pool": json.loads(scenario.pool.to_json()),
                "market": list(scenario.market.prices),
                "weight_update": list(scenario.weight_update),
                "epsilon": scenario.epsilon,
            }
        return json.dumps(obj)


def run_pair_attack(scenario: AttackScenario) -> AttackOutcome:
    """Execute manipulate -> weight update -> arbitrage and score it.

    Both the fee-aware return Z and its no-fee upper bound are computed;
    the counterfactual X(eps_null) uses the matching arbitrage oracle on
    the un-manipulated pool after the weight update.
    """
    pool = scenario.pool
    g = pool.fee_gamma
    w = pool.weights
    m_p = float(scenario.market.prices[1])
    eps = scenario.effective_epsilon()

    d1 = solve_manip_delta1(pool.reserves[0], w[0], w[1], g, eps)
    d2 = solve_manip_delta2(pool.reserves[1], w[0], w[1], g, eps)
    cost = d1 - m_p * d2

    reserves_after = pool.reserves.copy()
    reserves_after[0] += d1
    reserves_after[1] -= d2
    wp = scenario.updated_weights()

    # The no-fee arb always moves the full-reserve ratio to m_p * w0'/w1'.
    target_ratio = m_p * wp[0] / wp[1]
    a1, a2 = _no_fee_pair_arb(reserves_after[0], reserves_after[1], wp[0], wp[1], target_ratio)
    x_upper = float(a1 - m_p * a2)
    n1, n2 = _no_fee_pair_arb(pool.reserves[0], pool.reserves[1], wp[0], wp[1], target_ratio)
    x_upper_null = float(n1 - m_p * n2)

    pool_manip = PoolState(reserves_after, wp, g)
    pool_null = pool.with_weights(wp)
    fee_trade, x_fee = arb_fee_aware_pair(pool_manip, scenario.market, 0, 1)
    _, x_fee_null = arb_fee_aware_pair(pool_null, scenario.market, 0, 1)

    arb_in = float(fee_trade.delta_in[1] - fee_trade.lambda_out[1])
    arb_out = float(fee_trade.lambda_out[0] - fee_trade.delta_in[0])

    return AttackOutcome(
        delta1=float(d1),
        delta2=float(d2),
        cost=float(cost),
        arb_in=arb_in,
        arb_out=arb_out,
        x_return=float(x_fee),
        x_null=float(x_fee_null),
        z=float(x_fee - cost - x_fee_null),
        x_upper=x_upper,
        x_upper_null=x_upper_null,
        z_upper=float(x_upper - cost - x_upper_null),
    )
