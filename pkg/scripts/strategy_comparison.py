"""Compare agent strategies across seeds on a common scenario.

Runs the given scenario under a range of master seeds and aggregates
per-strategy wealth changes and ruin counts. Useful for eyeballing how the
deterministic strategy rules fare against the same token-sink parameters.

Run: python3 scripts/strategy_comparison.py scenarios/baseline.json --seeds 20
"""
from __future__ import annotations

import argparse
import collections
import statistics
from dataclasses import replace

from nftgamesim.scenario import load_scenario
from nftgamesim.simulation import run_simulation


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("scenario", help="scenario JSON file")
    parser.add_argument("--seeds", type=int, default=10, help="number of master seeds to run")
    parser.add_argument("--seed", type=int, default=0, help="first master seed")
    args = parser.parse_args()

    config = load_scenario(args.scenario)
    strategies = {agent.id: agent.strategy for agent in config.agents}
    earnings = collections.defaultdict(list)
    ruined = collections.Counter()

    for offset in range(args.seeds):
        result = run_simulation(replace(config, seed=args.seed + offset))
        first, last = result.snapshots[0], result.snapshots[-1]
        for agent_id, strategy in strategies.items():
            earnings[strategy].append(last.agent_wealth[agent_id] - first.agent_wealth[agent_id])
            if result.ruined_at[agent_id] is not None:
                ruined[strategy] += 1

    print(f"{'strategy':<18} {'n':>4} {'mean_earnings':>14} {'stdev':>10} {'ruined':>7}")
    for strategy in sorted(earnings):
        values = earnings[strategy]
        spread = statistics.stdev(values) if len(values) > 1 else 0.0
        print(
            f"{strategy:<18} {len(values):>4} {statistics.mean(values):>14.3f}"
            f" {spread:>10.3f} {ruined[strategy]:>7}"
        )


if __name__ == "__main__":
    main()
