"""Geometric-mean pool with time-varying weights: invariant, quotes, prices.

All prices are expressed with an explicit numeraire token. Products of
powers are evaluated in log domain throughout so that large pools and
extreme weights stay well conditioned.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Construction floors: below these the power-law expressions are too
# ill-conditioned to trust in binary64.
MIN_WEIGHT = 1e-9
MIN_RESERVE = 1e-12

WEIGHT_SUM_TOL = 1e-12
# Relative tolerance on the invariant comparison in validate_trade.
ACCEPT_REL_TOL = 1e-12


class PoolError(ValueError):
    """Invalid pool, trade, or price construction."""


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise PoolError(f"{name} must be a 1-D vector with at least 2 entries")
    if not np.all(np.isfinite(v)):
        raise PoolError(f"{name} must be finite")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class PoolState:
    """Reserves, weights and fee parameter of one pool at one block.

    The trading function is prod_i reserves[i]**weights[i] = k. The fee
    charged on inflows is 1 - fee_gamma.
    """

    reserves: np.ndarray
    weights: np.ndarray
    fee_gamma: float = 1.0

    def __post_init__(self):
        r = _as_vector(self.reserves, "reserves")
        w = _as_vector(self.weights, "weights")
        if r.size != w.size:
            raise PoolError("reserves and weights must have the same length")
        if np.any(r < MIN_RESERVE):
            raise PoolError("all reserves must be strictly positive")
        if np.any(w < MIN_WEIGHT) or np.any(w >= 1.0):
            raise PoolError("every weight must lie strictly in (0, 1)")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise PoolError("weights must sum to 1")
        g = float(self.fee_gamma)
        if not (0.0 < g <= 1.0):
            raise PoolError("fee_gamma must lie in (0, 1]")
        object.__setattr__(self, "reserves", r)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "fee_gamma", g)

    @property
    def n_tokens(self) -> int:
        return self.reserves.size

    def with_weights(self, weights) -> "PoolState":
        return PoolState(self.reserves, weights, self.fee_gamma)

    def with_reserves(self, reserves) -> "PoolState":
        return PoolState(reserves, self.weights, self.fee_gamma)

    def to_json(self) -> str:
        """Canonical JSON serialization: reserves, weights, gamma in order."""
        return json.dumps(
            {
                "reserves": list(self.reserves),
                "weights": list(self.weights),
                "gamma": self.fee_gamma,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PoolState":
        obj = json.loads(text)
        return cls(obj["reserves"], obj["weights"], obj["gamma"])


@dataclass(frozen=True)
class TradeIntent:
    """A multi-token trade: delta_in given to the pool, lambda_out taken.

    Support must be disjoint: a token cannot be traded for itself.
    """

    delta_in: np.ndarray
    lambda_out: np.ndarray

    def __post_init__(self):
        d = _as_vector(self.delta_in, "delta_in")
        l = _as_vector(self.lambda_out, "lambda_out")
        if d.size != l.size:
            raise PoolError("delta_in and lambda_out must have the same length")
        if np.any(d < 0) or np.any(l < 0):
            raise PoolError("trade amounts must be non-negative")
        if np.any((d > 0) & (l > 0)):
            raise PoolError("self-trade: delta_in and lambda_out overlap")
        object.__setattr__(self, "delta_in", d)
        object.__setattr__(self, "lambda_out", l)

    @classmethod
    def zero(cls, n: int) -> "TradeIntent":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def pair(cls, n: int, i: int, amount_in: float, j: int, amount_out: float) -> "TradeIntent":
        d = np.zeros(n)
        l = np.zeros(n)
        d[i] = amount_in
        l[j] = amount_out
        return cls(d, l)

    def is_zero(self) -> bool:
        return not (np.any(self.delta_in > 0) or np.any(self.lambda_out > 0))


@dataclass(frozen=True)
class MarketPrices:
    """External market prices in numeraire units per token.

    The numeraire token's entry must be exactly 1 (token 0 by convention).
    """

    prices: np.ndarray
    numeraire: int = 0

    def __post_init__(self):
        p = _as_vector(self.prices, "prices")
        if np.any(p <= 0):
            raise PoolError("all market prices must be strictly positive")
        if p[self.numeraire] != 1.0:
            raise PoolError("numeraire price entry must be exactly 1")
        object.__setattr__(self, "prices", p)


@dataclass(frozen=True)
class QuoteBand:
    """No-arbitrage interval of external prices around a pool quote."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0 < self.lower <= self.upper):
            raise PoolError("band must satisfy 0 < lower <= upper")

    def contains(self, price: float, rel_tol: float = 1e-12) -> bool:
        # Closed interval: the worst-case pre-attack state sits on the edge.
        return (self.lower * (1 - rel_tol)) <= price <= (self.upper * (1 + rel_tol))


@dataclass(frozen=True)
class TradeDecision:
    accepted: bool
    reason: str | None = None
    log_invariant_change: float = field(default=0.0)

    def __bool__(self) -> bool:
        return self.accepted


def log_invariant_k(pool: PoolState) -> float:
    """log of the pool constant k = prod reserves**weights."""
    return float(np.dot(pool.weights, np.log(pool.reserves)))


def invariant_k(pool: PoolState) -> float:
    """Pool constant k = prod_i reserves[i]**weights[i]."""
    return float(np.exp(log_invariant_k(pool)))


def validate_trade(pool: PoolState, trade: TradeIntent) -> TradeDecision:
    """Accept iff prod (R_i + gamma*delta_i - lambda_i)**w_i >= k.

    The comparison is done in log domain with relative tolerance 1e-12.
    """
    if trade.delta_in.size != pool.n_tokens:
        raise PoolError("trade size does not match pool size")
    if np.any((trade.delta_in > 0) & (trade.lambda_out > 0)):
        return TradeDecision(False, "self-trade")
    if np.any(trade.lambda_out >= pool.reserves):
        return TradeDecision(False, "drains-reserve")
    post = pool.reserves + pool.fee_gamma * trade.delta_in - trade.lambda_out
    dlog = float(np.dot(pool.weights, np.log(post))) - log_invariant_k(pool)
    if dlog >= -ACCEPT_REL_TOL:
        return TradeDecision(True, None, dlog)
    return TradeDecision(False, "below-invariant", dlog)


def quote_pair_trade(pool: PoolState, i: int, j: int, delta_i: float) -> float:
    """Amount of token j the pool pays out for delta_i of token i.

    lambda_j = R_j * (1 - (1 + gamma*delta_i/R_i)**(-w_i/w_j)); the
    resulting pair trade meets the invariant at equality.
    """
    if i == j:
        raise PoolError("cannot quote a token against itself")
    if delta_i < 0:
        raise PoolError("delta_i must be non-negative")
    r, w, g = pool.reserves, pool.weights, pool.fee_gamma
    ratio = -(w[i] / w[j]) * np.log1p(g * delta_i / r[i])
    return float(r[j] * -np.expm1(ratio))


def spot_price(pool: PoolState, i: int, j: int) -> float:
    """No-fee marginal price of token i denominated in token j."""
    if i == j:
        raise PoolError("spot price needs two distinct tokens")
    r, w = pool.reserves, pool.weights
    return float((w[i] / r[i]) / (w[j] / r[j]))


def fee_adjusted_quote(pool: PoolState, i: int, j: int) -> float:
    """Marginal cost, in token i, of buying token j from the pool.

    This is the fee-loaded quote (1/gamma) * spot_price(j, i): the pool
    sells token j no cheaper than this.
    """
    return spot_price(pool, j, i) / pool.fee_gamma


def no_arb_band(pool: PoolState, i: int, j: int) -> QuoteBand:
    """External-price interval for token j (in numeraire i) admitting no arb.

    A market price inside (gamma*m_u, m_u/gamma), where m_u is the no-fee
    quote of token j in token i, makes both trade directions unprofitable.
    Degenerates to the point m_u when gamma = 1.
    """
    m_u = spot_price(pool, j, i)
    g = pool.fee_gamma
    return QuoteBand(g * m_u, m_u / g)
