"""Command-line entry points: run, sweep, and check.

Flags mirror the config fields in kebab-case; a JSON config file may set
any field, with explicit flags taking precedence.  The seed is always
given explicitly so every invocation is reproducible.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from vcash_sim.errors import ConfigError, ConservationError, ProtocolError
from vcash_sim.harness import (
    ATTACK_BOGUS,
    ATTACK_MIXED,
    ATTACK_SELFISH,
    FRAMEWORK_VCASH,
    FRAMEWORK_VIME,
    SimConfig,
    emit_csv,
    run_replications,
    run_simulation,
    run_sweep,
    run_with_market,
)

_CHOICES = {
    "attack_mode": (ATTACK_BOGUS, ATTACK_SELFISH, ATTACK_MIXED),
    "framework": (FRAMEWORK_VCASH, FRAMEWORK_VIME),
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    """One flag per config field; None means "not set on the command line"."""
    for f in dataclasses.fields(SimConfig):
        if f.name == "seed":
            continue  # --seed is its own required flag
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool",):
            parser.add_argument(
                flag, default=None, action=argparse.BooleanOptionalAction
            )
        elif f.name in _CHOICES:
            parser.add_argument(flag, default=None, choices=_CHOICES[f.name])
        elif f.type in ("int",):
            parser.add_argument(flag, default=None, type=int)
        else:
            parser.add_argument(flag, default=None, type=float)


def _build_config(args: argparse.Namespace) -> SimConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data.update(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config} is not valid JSON: {exc}")
    for f in dataclasses.fields(SimConfig):
        if f.name == "seed":
            continue
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    data["seed"] = args.seed
    config = SimConfig.from_dict(data)
    config.validate()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcash-sim",
        description="Event-trading reputation market simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one configuration with replications")
    run_p.add_argument("--seed", type=int, required=True)
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--config", help="JSON config file")
    run_p.add_argument("--workers", type=int, default=1)
    run_p.add_argument(
        "--trace",
        action="store_true",
        help="also dump the first run's message trace as trace.jsonl",
    )
    _add_config_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="run the density x m grid plus baselines")
    sweep_p.add_argument("--seed", type=int, required=True)
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--config", help="JSON config file")
    sweep_p.add_argument("--workers", type=int, default=1)
    _add_config_flags(sweep_p)

    sub.add_parser("check", help="fast invariant suite on tiny scenarios")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = _build_config(args)
    result = run_replications(config, workers=args.workers)
    emit_csv(result, args.out)
    if args.trace:
        _, market = run_with_market(config, config.seed)
        path = Path(args.out) / "trace.jsonl"
        with open(path, "w", newline="\n") as fh:
            for message in market.trace:
                fh.write(json.dumps(message.as_dict()))
                fh.write("\n")
    print(f"wrote {args.out} ({result.n} runs, seeds {result.seeds[0]}..{result.seeds[-1]})")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _build_config(args)
    run_sweep(config, args.out, workers=args.workers)
    print(f"wrote sweep grid under {args.out}")
    return 0


def _cmd_check() -> int:
    """Small end-to-end invariant scenarios; exits nonzero on any failure."""
    import numpy as np

    from vcash_sim.market import TradingPlan
    from vcash_sim.protocol import (
        CLAIM_EXISTS,
        CLAIM_NONEXISTENT,
        Report,
        ZoningMarket,
        validate_session_trace,
    )

    failures = 0

    def report(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
        if not ok:
            failures += 1

    # profit split example
    market = ZoningMarket(TradingPlan(), initial_balance=100.0)
    for vid in ("a", "b", "c"):
        market.handle_zone_entry(vid, 0.0)
    market.submit_report(Report("a", 1000.0, "jam", CLAIM_EXISTS, 1.0), 1.0)
    market.submit_report(Report("b", 1000.0, "jam", CLAIM_EXISTS, 1.0), 1.0)
    market.charge_subscribers(2.0)
    total = market.conservation_total()
    report(
        "conservation after verify+charge",
        abs(total - 300.0) < 1e-9 * 300.0,
        f"total {total!r}",
    )

    market.submit_report(Report("c", 1000.0, "jam", CLAIM_NONEXISTENT, 3.0), 3.0)
    market.submit_report(Report("a", 1000.0, "jam", CLAIM_NONEXISTENT, 4.0), 4.0)
    total = market.conservation_total()
    report(
        "conservation after termination",
        abs(total - 300.0) < 1e-9 * 300.0,
        f"total {total!r}",
    )
    try:
        for vid in ("a", "b", "c"):
            validate_session_trace(market.trace, vid)
        report("session trace grammar", True)
    except ProtocolError as exc:
        report("session trace grammar", False, str(exc))

    config = SimConfig(density_per_km=10.0, sim_seconds=200, replications=1, seed=3)
    try:
        first = run_simulation(config, 3)
        second = run_simulation(config, 3)
        report(
            "run determinism",
            bool(
                np.array_equal(first.bogus_ratio, second.bogus_ratio)
                and np.array_equal(first.balances, second.balances)
            ),
        )
        report("conservation over a 200s run", True, "checked every tick")
    except ConservationError as exc:
        report("conservation over a 200s run", False, str(exc))

    zero_attackers = dataclasses.replace(config, malicious_fraction=0.0)
    series = run_simulation(zero_attackers, 3)
    report(
        "no attackers means zero bogus ratio",
        bool((series.bogus_ratio == 0.0).all()),
    )

    print("check:", "ok" if failures == 0 else f"{failures} failure(s)")
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_check()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConservationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
