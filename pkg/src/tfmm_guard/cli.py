"""Command-line driver for guardrail sweeps and single attack runs."""
from __future__ import annotations

import argparse
import json
import sys

from .attack import AttackScenario, run_pair_attack
from .pool import MarketPrices, PoolError, PoolState
from .sweep import ConfigError, default_safe_region_grids, emit_safe_region, load_config, run_sweep

EXIT_CONFIG_ERROR = 2


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config {args.config!r}: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except ConfigError as exc:
        print(f"error: config {args.config!r}: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    path = run_sweep(config)
    print(path)
    return 0


def _cmd_safe_region(args) -> int:
    w_grid, dw_grid = default_safe_region_grids()
    path = emit_safe_region(w_grid, dw_grid, args.gamma, args.cap, args.out)
    print(path)
    return 0


def _cmd_attack(args) -> int:
    try:
        obj = json.loads(args.scenario)
        pool = PoolState(obj["pool"]["reserves"], obj["pool"]["weights"], obj["pool"]["gamma"])
        market = MarketPrices(obj["market"])
        scenario = AttackScenario(pool, market, obj["weight_update"], obj["epsilon"])
    except (KeyError, TypeError, ValueError, PoolError) as exc:
        print(f"error: bad scenario JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    outcome = run_pair_attack(scenario)
    print(outcome.to_json(scenario))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweep",
        description="Guardrail sweeps for weight-updating geometric-mean pools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep from a key=value config file")
    p_run.add_argument("--config", required=True, help="path to the sweep config")
    p_run.set_defaults(func=_cmd_run)

    p_safe = sub.add_parser("safe-region", help="emit the analytic safe-region CSV")
    p_safe.add_argument("--gamma", type=float, required=True, help="fee parameter")
    p_safe.add_argument("--cap", type=float, required=True, help="trade-size fraction cap")
    p_safe.add_argument("--out", required=True, help="output CSV path")
    p_safe.set_defaults(func=_cmd_safe_region)

    p_atk = sub.add_parser("attack", help="run one pair attack and print its outcome")
    p_atk.add_argument("--scenario", required=True, help="scenario as a JSON string")
    p_atk.set_defaults(func=_cmd_attack)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
