"""Multi-block MEV attack model and guardrail analysis for
geometric-mean pools with time-varying weights."""

from .pool import (
    MarketPrices,
    PoolError,
    PoolState,
    QuoteBand,
    TradeDecision,
    TradeIntent,
    fee_adjusted_quote,
    invariant_k,
    no_arb_band,
    quote_pair_trade,
    spot_price,
    validate_trade,
)
from .attack import (
    ArbConvergenceError,
    AttackOutcome,
    AttackScenario,
    NoRootError,
    arb_fee_aware_ntoken,
    arb_fee_aware_pair,
    arb_return_upper_bound,
    arb_trade_closed_form,
    ddelta1_depsilon,
    ddelta2_depsilon,
    epsilon_null,
    manipulation_cost,
    run_pair_attack,
    solve_manip_delta1,
    solve_manip_delta2,
    worst_case_market_price,
)
from .bounds import (
    Guardrails,
    SafeRegion,
    check_guardrails,
    gradient_conditions_n,
    safe_region,
    two_token_bounds,
)
from .optimizer import BestAttack, SearchSpec, objective, parameterize, search_cell
from .sweep import (
    ConfigError,
    SweepConfig,
    emit_safe_region,
    load_config,
    parse_config,
    run_sweep,
)

__all__ = [
    "ArbConvergenceError",
    "AttackOutcome",
    "AttackScenario",
    "BestAttack",
    "ConfigError",
    "Guardrails",
    "MarketPrices",
    "NoRootError",
    "PoolError",
    "PoolState",
    "QuoteBand",
    "SafeRegion",
    "SearchSpec",
    "SweepConfig",
    "TradeDecision",
    "TradeIntent",
    "arb_fee_aware_ntoken",
    "arb_fee_aware_pair",
    "arb_return_upper_bound",
    "arb_trade_closed_form",
    "check_guardrails",
    "ddelta1_depsilon",
    "ddelta2_depsilon",
    "emit_safe_region",
    "epsilon_null",
    "fee_adjusted_quote",
    "gradient_conditions_n",
    "invariant_k",
    "load_config",
    "manipulation_cost",
    "no_arb_band",
    "objective",
    "parameterize",
    "parse_config",
    "quote_pair_trade",
    "run_pair_attack",
    "run_sweep",
    "safe_region",
    "search_cell",
    "solve_manip_delta1",
    "solve_manip_delta2",
    "spot_price",
    "two_token_bounds",
    "validate_trade",
    "worst_case_market_price",
]

from ._version import __version__  # noqa: E402
