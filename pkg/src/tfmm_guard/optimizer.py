"""Adversarial search for the best attack under fixed guardrails.

For one guardrail setting the attacker jointly optimizes pool reserves,
weights, the weight update, the manipulation trade (a general N-token
trade, not restricted to a pair), and the market prices, which are
placed maximally adversarially at the upper edge of the no-arb band.
Feasibility is guaranteed by construction: an unconstrained free vector
is mapped smoothly onto the feasible set, so the gradient ascent never
needs penalty terms.

Everything is vectorized over restarts; a cell's result is a pure
function of its SearchSpec, independent of scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import attack as atk
from .bounds import Guardrails
from .pool import MarketPrices, PoolState, TradeIntent

FOUND_THRESHOLD = 1e-9


@dataclass(frozen=True)
class SearchSpec:
    """Configuration of one adversarial search cell."""

    n_tokens: int
    guardrails: Guardrails
    gamma: float
    n_restarts: int = 256
    max_iters: int = 300
    learning_rate: float = 0.05
    momentum: float = 0.9
    second_moment: float = 0.999
    fd_step: float = 1e-6
    arb_max_iters: int = 110
    master_seed: int = 0

    def __post_init__(self):
        if self.n_tokens < 2:
            raise ValueError("need at least two tokens")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        self.guardrails.validate_for_pool(self.n_tokens)

    @property
    def dim(self) -> int:
        # reserves + weights + weight update + (N-1) manipulation offsets
        return 3 * self.n_tokens + self.n_tokens - 1


@dataclass(frozen=True)
class BestAttack:
    """Best attack found in one cell."""

    z_norm: float
    scenario: atk.AttackScenario
    found: bool
    restarts_used: int
    oracle_failures: int = 0


def _softmax(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _parameterize_batch(V: np.ndarray, spec: SearchSpec):
    """Map free vectors (B, dim) onto feasible attack configurations.

    Returns reserves, weights, weight update and the manipulation trade's
    net flows, each of shape (B, N). The manipulation trade meets the
    trading function at equality and every guardrail by construction.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    N = spec.n_tokens
    g = spec.gamma
    rails = spec.guardrails
    v_R, v_w, v_dw, v_t = np.split(V, [N, 2 * N, 3 * N], axis=1)

    R = np.exp(v_R)

    mw = rails.min_weight
    w = mw + (1.0 - N * mw) * _softmax(v_w)

    raw = rails.max_weight_change * np.tanh(v_dw)
    raw = raw - raw.mean(axis=1, keepdims=True)
    peak = np.abs(raw).max(axis=1, keepdims=True)
    scale = np.minimum(1.0, rails.max_weight_change / np.maximum(peak, 1e-300))
    dw = raw * scale
    # Keep the updated weights above the floor: shrink dw where needed.
    room = w - mw
    breach = np.where(dw < 0, -dw, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        floor_scale = np.where(breach > 0, room / np.maximum(breach, 1e-300), np.inf)
    dw = dw * np.minimum(1.0, floor_scale.min(axis=1, keepdims=True))

    # Manipulation trade: log effective-reserve offsets, symmetric bound so
    # both the inflow and the outflow stay within the trade-fraction cap.
    b = np.log1p(g * rails.max_trade_fraction)
    u_free = b * np.tanh(v_t)
    u0 = -np.sum(w[:, 1:] * u_free, axis=1, keepdims=True) / w[:, 0:1]
    s0 = np.minimum(1.0, b / np.maximum(np.abs(u0), 1e-300))
    # The 1e-9 margin keeps flows strictly inside the cap despite rounding.
    u = np.concatenate([u0, u_free], axis=1) * s0 * (1.0 - 1e-9)

    e = R * np.exp(u)
    x = e - R
    net = np.where(x > 0, x / g, x)
    return R, w, dw, net


def _worst_case_prices(R: np.ndarray, w: np.ndarray, gamma: float) -> np.ndarray:
    """Market prices at the upper band edge for every non-numeraire token."""
    spot = (w / R) / (w[:, 0:1] / R[:, 0:1])
    p = gamma * spot
    p[:, 0] = 1.0
    return p


def _objective_batch(V: np.ndarray, spec: SearchSpec):
    """Normalized attacker return Z/V0 for a batch of free vectors."""
    R, w, dw, net = _parameterize_batch(V, spec)
    g = spec.gamma
    p = _worst_case_prices(R, w, g)
    V0 = np.sum(p * R, axis=1)
    cost = np.sum(p * net, axis=1)
    R_after = R + net
    wp = w + dw

    _, x_fee, conv1 = atk._arb_ntoken_batch(R_after, wp, p, g, max_iters=spec.arb_max_iters)
    _, x_null, conv0 = atk._arb_ntoken_batch(R, wp, p, g, max_iters=spec.arb_max_iters)
    z = (x_fee - cost - x_null) / V0
    return np.where(conv1 & conv0, z, -np.inf)


def parameterize(free_vector, spec: SearchSpec) -> atk.AttackScenario:
    """Map one unconstrained vector onto a valid AttackScenario."""
    R, w, dw, net = _parameterize_batch(np.asarray(free_vector, dtype=float)[None, :], spec)
    p = _worst_case_prices(R, w, spec.gamma)
    R, w, dw, net, p = R[0], w[0], dw[0], net[0], p[0]
    pool = PoolState(R, w, spec.gamma)
    market = MarketPrices(p)
    delta = np.where(net > 0, net, 0.0)
    lam = np.where(net < 0, -net, 0.0)
    trade = TradeIntent(delta, lam)
    eps = _implied_epsilon(pool, trade, market)
    return atk.AttackScenario(pool, market, dw, eps, manip_trade=trade)


def _implied_epsilon(pool: PoolState, trade: TradeIntent, market: MarketPrices) -> float:
    """Largest post-manipulation quote deviation over the market price."""
    g = pool.fee_gamma
    r_after = pool.reserves + trade.delta_in - trade.lambda_out
    quotes = (pool.weights[1:] / r_after[1:]) / (pool.weights[0] / r_after[0]) / g
    return float(np.max(quotes / market.prices[1:]) - 1.0)


def objective(scenario: atk.AttackScenario, spec: SearchSpec | None = None) -> float:
    """Z/V0 for one scenario: general first trade, fee-aware arbitrage.

    Returns -inf when the arbitrage oracle fails to converge.
    """
    arb_iters = 110 if spec is None else spec.arb_max_iters
    pool, market = scenario.pool, scenario.market
    p = market.prices
    if scenario.manip_trade is not None:
        trade = scenario.manip_trade
    else:
        eps = scenario.effective_epsilon()
        d1 = atk.solve_manip_delta1(pool.reserves[0], pool.weights[0], pool.weights[1], pool.fee_gamma, eps)
        d2 = atk.solve_manip_delta2(pool.reserves[1], pool.weights[0], pool.weights[1], pool.fee_gamma, eps)
        trade = TradeIntent.pair(pool.n_tokens, 0, d1, 1, d2)
    net = trade.delta_in - trade.lambda_out
    cost = float(np.sum(p * net))
    r_after = pool.reserves + net
    wp = scenario.updated_weights()
    v0 = float(np.sum(p * pool.reserves))
    try:
        _, x_fee = atk.arb_fee_aware_ntoken(PoolState(r_after, wp, pool.fee_gamma), market, max_iters=arb_iters)
        _, x_null = atk.arb_fee_aware_ntoken(pool.with_weights(wp), market, max_iters=arb_iters)
    except atk.ArbConvergenceError:
        return -np.inf
    return (x_fee - cost - x_null) / v0


def _initial_vectors(spec: SearchSpec) -> np.ndarray:
    """Randomized restart initializations, one seed stream per restart."""
    N = spec.n_tokens
    out = np.empty((spec.n_restarts, spec.dim))
    for r in range(spec.n_restarts):
        rng = np.random.default_rng(np.random.SeedSequence([int(spec.master_seed) & (2**63 - 1), r]))
        v_R = rng.uniform(0.0, np.log(1e4), N)
        v_w = rng.standard_normal(N)
        v_dw = np.arctanh(rng.uniform(-0.99, 0.99, N))
        mag = 10.0 ** rng.uniform(-5.0, 0.0, N - 1)
        sign = rng.choice([-1.0, 1.0], N - 1)
        v_t = np.arctanh(np.clip(sign * mag, -0.999999, 0.999999))
        out[r] = np.concatenate([v_R, v_w, v_dw, v_t])
    return out


def search_cell(spec: SearchSpec) -> BestAttack:
    """Adam ascent from n_restarts initializations; best result wins.

    Gradients are central finite differences on the free vector.
    Deterministic for a fixed master_seed regardless of thread count;
    ties between restarts break toward the lower restart index.
    """
    B, D = spec.n_restarts, spec.dim
    V = _initial_vectors(spec)
    h = spec.fd_step

    best_z = _objective_batch(V, spec)
    best_V = V.copy()

    m = np.zeros((B, D))
    s = np.zeros((B, D))
    for it in range(1, spec.max_iters + 1):
        # One stacked evaluation: current point plus both FD shifts per axis.
        shifts = np.concatenate([np.eye(D) * h, -np.eye(D) * h], axis=0)  # (2D, D)
        stacked = (V[:, None, :] + shifts[None, :, :]).reshape(B * 2 * D, D)
        vals = _objective_batch(stacked, spec).reshape(B, 2 * D)
        with np.errstate(invalid="ignore"):
            grad = (vals[:, :D] - vals[:, D:]) / (2.0 * h)
        grad = np.where(np.isfinite(grad), grad, 0.0)

        m = spec.momentum * m + (1.0 - spec.momentum) * grad
        s = spec.second_moment * s + (1.0 - spec.second_moment) * grad**2
        m_hat = m / (1.0 - spec.momentum**it)
        s_hat = s / (1.0 - spec.second_moment**it)
        V = V + spec.learning_rate * m_hat / (np.sqrt(s_hat) + 1e-12)

        z = _objective_batch(V, spec)
        improved = z > best_z
        best_V = np.where(improved[:, None], V, best_V)
        best_z = np.where(improved, z, best_z)

    idx = int(np.argmax(best_z))
    z_norm = float(best_z[idx])
    failures = int(np.sum(~np.isfinite(best_z)))
    scenario = parameterize(best_V[idx], spec)
    return BestAttack(
        z_norm=z_norm,
        scenario=scenario,
        found=bool(np.isfinite(z_norm) and z_norm > FOUND_THRESHOLD),
        restarts_used=spec.n_restarts,
        oracle_failures=failures,
    )


def with_seed(spec: SearchSpec, seed: int) -> SearchSpec:
    return replace(spec, master_seed=seed)
