"""Command-line front end: scenario configs in, reproducible tables out.

Exit codes: 0 success, 2 invalid configuration or flags, 3 runtime
invariant violation. Every command honors --seed and defaults it to 0;
wall-clock entropy is never used.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .activities import MinorityGameSpec, minority_settle
from .analytics import (
    ReturnModel,
    UtilitySpec,
    envelope_expected_gain,
    heterogeneous_lottery_ev,
    optimal_allocation,
    pooled_lottery_game,
    propitious_check,
    sharpe_ratio,
)
from .breeding import classify_breeding_arbitrage, lattice_value
from .scenario import ScenarioError, load_scenario
from .simulation import (
    CollateralSpec,
    SimConfig,
    SimulationInvariantError,
    collateral_loop,
    run_simulation,
)


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _vector(text: str) -> list[float]:
    return [_finite(x) for x in text.split(",") if x.strip() != ""]


def _matrix(text: str) -> list[list[float]]:
    rows = [_vector(row) for row in text.split(";") if row.strip() != ""]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise argparse.ArgumentTypeError("matrix rows must have equal length")
    return rows


# -- simulate ------------------------------------------------------------


def _write_outputs(out_dir: Path, config: SimConfig, result) -> None:
    agent_ids = sorted(a.id for a in config.agents)
    strategies = {a.id: a.strategy for a in config.agents}

    with open(out_dir / "snapshots.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["step", "phi", "psi", "omega", "pi", "collectible_count"]
        header += [f"agent{k}_wealth" for k in agent_ids]
        writer.writerow(header)
        for snap in result.snapshots:
            row = [
                snap.step,
                snap.collectible_pool,
                snap.activity_pool,
                snap.market_pool,
                snap.total,
                snap.collectible_count,
            ]
            row += [snap.agent_wealth[k] for k in agent_ids]
            writer.writerow(row)

    with open(out_dir / "events.jsonl", "w") as fh:
        for ev in result.events:
            fh.write(
                json.dumps(
                    {
                        "step": ev.step,
                        "agent": ev.agent,
                        "action": ev.action,
                        "inputs": ev.inputs,
                        "outputs": ev.outputs,
                        "rng_draws": ev.rng_draws,
                    },
                    separators=(",", ":"),
                )
            )
            fh.write("\n")

    first, last = result.snapshots[0], result.snapshots[-1]
    summary = {
        "schema_version": 1,
        "seed": config.seed,
        "steps": config.steps,
        "final_pools": {
            "phi": last.collectible_pool,
            "psi": last.activity_pool,
            "omega": last.market_pool,
            "pi": last.total,
        },
        "collectible_count": last.collectible_count,
        "agents": [
            {
                "id": k,
                "strategy": strategies[k],
                "initial_wealth": first.agent_wealth[k],
                "final_wealth": last.agent_wealth[k],
                "total_earnings": last.agent_wealth[k] - first.agent_wealth[k],
                "ruined": result.ruined_at[k] is not None,
                "ruined_at": result.ruined_at[k],
                "actions": result.action_counts[k],
            }
            for k in agent_ids
        ],
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def cmd_simulate(args) -> int:
    try:
        config = load_scenario(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.steps is not None:
            config = replace(config, steps=args.steps)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_simulation(config)
    except SimulationInvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_outputs(out_dir, config, result)
    print(f"wrote snapshots.csv, events.jsonl, summary.json to {out_dir}")
    return 0


# -- analyze -------------------------------------------------------------


def _emit(payload: dict) -> int:
    print(json.dumps(payload))
    return 0


def cmd_analyze_sharpe(args) -> int:
    value = sharpe_ratio(args.excess, 0.0, args.vol, args.horizon)
    return _emit(
        {
            "inputs": {"excess": args.excess, "vol": args.vol, "horizon": args.horizon},
            "sharpe_ratio": value,
        }
    )


def cmd_analyze_allocate(args) -> int:
    model = ReturnModel(
        mean_vector=tuple(args.mu),
        riskless_rate=args.riskless,
        vol_matrix=tuple(tuple(r) for r in args.vol),
    )
    weights = optimal_allocation(model)
    return _emit(
        {
            "inputs": {"mu": args.mu, "riskless": args.riskless, "vol": args.vol},
            "optimal_allocation": [float(w) for w in weights],
        }
    )


def cmd_analyze_envelope(args) -> int:
    gain1, gain2 = envelope_expected_gain(args.up, args.down, args.prob)
    return _emit(
        {
            "inputs": {"up": args.up, "down": args.down, "prob": args.prob},
            "gain_player1": gain1,
            "gain_player2": gain2,
        }
    )


def cmd_analyze_propitious(args) -> int:
    game = pooled_lottery_game(UtilitySpec("power", exponent=args.seeker_exponent))
    per_player, average_mode = propitious_check(game)
    return _emit(
        {
            "inputs": {"seeker_exponent": args.seeker_exponent},
            "per_player": per_player,
            "average_mode": average_mode,
        }
    )


def cmd_analyze_lattice(args) -> int:
    value = lattice_value(args.breeds_remaining, args.floor, args.child_value, args.costs)
    return _emit(
        {
            "inputs": {
                "breeds_remaining": args.breeds_remaining,
                "floor": args.floor,
                "child_value": args.child_value,
                "costs": args.costs,
            },
            "lattice_value": value,
        }
    )


def cmd_analyze_arbitrage(args) -> int:
    verdict = classify_breeding_arbitrage(args.capital, args.growth, args.cost)
    return _emit(
        {
            "inputs": {"capital": args.capital, "growth": args.growth, "cost": args.cost},
            "verdict": verdict.kind.value,
            "magnitude": verdict.magnitude,
        }
    )


# -- demos ---------------------------------------------------------------


def _print_table(title: str, rows: list[tuple[str, str, str]]) -> None:
    print(title)
    width = max(len(r[0]) for r in rows)
    print(f"  {'quantity'.ljust(width)}  {'expected':>14}  {'computed':>14}")
    for label, expected, computed in rows:
        print(f"  {label.ljust(width)}  {expected:>14}  {computed:>14}")


def demo_two_envelopes() -> int:
    gain1, gain2 = envelope_expected_gain(2.0, 0.5, 0.5)
    _print_table(
        "two-envelopes: double-or-half swap, both sides in their own numeraire",
        [
            ("player 1 gain", "25.000%", f"{gain1 * 100:.3f}%"),
            ("player 2 gain", "25.000%", f"{gain2 * 100:.3f}%"),
        ],
    )
    print("  the swap profits both sides in expectation (Jensen asymmetry)")
    return 0


def demo_babylon_lottery() -> int:
    averse_ev, seeker_ev = heterogeneous_lottery_ev()
    _print_table(
        "babylon-lottery: ten cautious players and one thrill seeker pool one token each",
        [
            ("risk-averse mean gain", "4.250%", f"{averse_ev * 100:.3f}%"),
            ("risk-seeker mean gain", "-42.500%", f"{seeker_ev * 100:.3f}%"),
        ],
    )
    print(
        "  note: -37.5% is sometimes quoted for the seeker, but the stated"
        " probabilities (95%/5%) and payouts (-50%/+100%) give -42.5%;"
        " the recomputed value is used"
    )
    per8, avg8 = propitious_check(pooled_lottery_game(UtilitySpec("power", exponent=8.0)))
    per2, _ = propitious_check(pooled_lottery_game(UtilitySpec("power", exponent=2.0)))
    print(f"  propitious with power(8) seeker: every player gains utility -> {all(per8)}")
    print(f"  average utility gain positive   -> {avg8}")
    print(f"  power(2) seeker gains utility   -> {per2[-1]} (game not propitious for them)")
    return 0


def demo_collateral_cycle() -> int:
    calm = CollateralSpec(ltv=0.5, impact=1.0, initial_value=100.0)
    _, outcome = collateral_loop(calm)
    _print_table(
        "collateral-cycle: borrow at 50% LTV, reinvest into the game's own tokens",
        [
            ("converged value", "200.000", f"{outcome.limit_value:.3f}"),
            ("outcome", "Converged", outcome.kind),
        ],
    )
    shocked = CollateralSpec(
        ltv=0.5,
        impact=1.0,
        initial_value=100.0,
        liquidation_threshold=1.0,
        shock_step=12,
        shock_fraction=0.6,
    )
    _, crash = collateral_loop(shocked)
    print(
        f"  with a 60% shock at step 12 the position is {crash.kind}"
        f" at step {crash.liquidated_step} (value under the debt threshold)"
    )
    return 0


def demo_minority() -> int:
    side1 = [("alice", 1.0), ("bob", 2.0)]
    side2 = [("carol", 4.0)]
    payouts, organizer = minority_settle(side1, side2, MinorityGameSpec())
    _print_table(
        "minority: stakes 1+2 against 4; smaller side splits the pot pro rata",
        [
            ("alice payout", f"{7 / 3:.4f}", f"{payouts['alice']:.4f}"),
            ("bob payout", f"{14 / 3:.4f}", f"{payouts['bob']:.4f}"),
            ("carol payout", "0.0000", f"{payouts['carol']:.4f}"),
            ("organizer net", "0.0000", f"{organizer:.4f}"),
        ],
    )
    raked = MinorityGameSpec(rake_fraction=0.9, sponsor_subsidy=1.0)
    payouts2, organizer2 = minority_settle(side1, side2, raked)
    total = sum(payouts2.values()) + organizer2
    print(
        f"  with 90% rake and subsidy 1: pot {0.9 * 7 + 1:.2f},"
        f" organizer net {organizer2:.2f}, stakes conserved: {abs(total - 7.0) < 1e-12}"
    )
    print(
        "  sponsor note: the subsidy only pays for itself while"
        " (1 - rake) * total stakes >= subsidy"
    )
    return 0


DEMOS = {
    "two-envelopes": demo_two_envelopes,
    "babylon-lottery": demo_babylon_lottery,
    "collateral-cycle": demo_collateral_cycle,
    "minority": demo_minority,
}


def cmd_demo(args) -> int:
    return DEMOS[args.name]()


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nftgamesim",
        description="Deterministic NFT game economy simulator and analytics toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario file and write csv/jsonl outputs")
    sim.add_argument("--config", required=True, help="scenario JSON file")
    sim.add_argument("--seed", type=_u64, default=None, help="override the scenario seed")
    sim.add_argument("--steps", type=int, default=None, help="override the scenario step count")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    analyze = sub.add_parser("analyze", help="one-shot analytics, JSON on stdout")
    ana_sub = analyze.add_subparsers(dest="operation", required=True)

    sharpe = ana_sub.add_parser("sharpe", help="excess return over volatility, per sqrt(horizon)")
    sharpe.add_argument("--excess", type=_finite, required=True)
    sharpe.add_argument("--vol", type=_finite, required=True)
    sharpe.add_argument("--horizon", type=_finite, default=1.0)
    sharpe.add_argument("--seed", type=_u64, default=0)
    sharpe.set_defaults(func=cmd_analyze_sharpe)

    allocate = ana_sub.add_parser("allocate", help="growth-optimal multi-asset weights")
    allocate.add_argument("--mu", type=_vector, required=True, help="comma-separated drifts")
    allocate.add_argument("--riskless", type=_finite, default=0.0)
    allocate.add_argument(
        "--vol", type=_matrix, required=True, help="factor loadings, rows ';' separated"
    )
    allocate.add_argument("--seed", type=_u64, default=0)
    allocate.set_defaults(func=cmd_analyze_allocate)

    envelope = ana_sub.add_parser("envelope", help="two-envelopes expected gains")
    envelope.add_argument("--up", type=_finite, required=True)
    envelope.add_argument("--down", type=_finite, required=True)
    envelope.add_argument("--prob", type=_finite, default=0.5)
    envelope.add_argument("--seed", type=_u64, default=0)
    envelope.set_defaults(func=cmd_analyze_envelope)

    propitious = ana_sub.add_parser(
        "propitious", help="does the pooled lottery raise everyone's utility?"
    )
    propitious.add_argument("--seeker-exponent", type=_finite, default=8.0)
    propitious.add_argument("--seed", type=_u64, default=0)
    propitious.set_defaults(func=cmd_analyze_propitious)

    lattice = ana_sub.add_parser("lattice", help="collectible value from remaining breed charges")
    lattice.add_argument("--breeds-remaining", type=int, required=True)
    lattice.add_argument("--floor", type=_finite, required=True)
    lattice.add_argument("--child-value", type=_finite, required=True)
    lattice.add_argument("--costs", type=_vector, required=True)
    lattice.add_argument("--seed", type=_u64, default=0)
    lattice.set_defaults(func=cmd_analyze_lattice)

    arbitrage = ana_sub.add_parser("arbitrage", help="classify the breeding trade")
    arbitrage.add_argument("--capital", type=_finite, required=True)
    arbitrage.add_argument("--growth", type=_finite, required=True)
    arbitrage.add_argument("--cost", type=_finite, required=True)
    arbitrage.add_argument("--seed", type=_u64, default=0)
    arbitrage.set_defaults(func=cmd_analyze_arbitrage)

    demo = sub.add_parser("demo", help="run a canonical worked scenario")
    demo.add_argument("name", choices=sorted(DEMOS))
    demo.add_argument("--seed", type=_u64, default=0)
    demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
