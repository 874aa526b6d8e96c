"""Seed-deterministic, time-stepped game simulation and leverage toys.

One run owns a single counting generator; agents act in ascending id order
within each step and every state transition is appended to an event log,
so identical (config, seed) pairs reproduce byte-identical histories.
Monte Carlo experiments derive independent sub-seeds from the master seed
(SHA-256 over the little-endian 8-byte seed followed by the little-endian
8-byte trial index; the first 8 digest bytes, little-endian, are the
sub-seed).
"""
from __future__ import annotations

import hashlib
import itertools
import math
import random
from dataclasses import dataclass, field, replace

from . import breeding
from .activities import (
    AdventureSpec,
    BattleSpec,
    LotterySpec,
    MinorityGameSpec,
    StrategyMix,
)
from .analytics import UtilitySpec
from .breeding import BreedCost, GameRules
from .economy import (
    TREASURY,
    Collectible,
    Holdings,
    PriceBoard,
    SupplyCounters,
    check_ownership_partition,
    check_supply_conservation,
    collectible_pool_value,
    fungible_pool_values,
    total_value,
)

STRATEGIES = ("passive", "fixed_mix", "growth_maximizer", "thrill_seeker")
PRICE_UPDATES = ("frozen", "forward_drift")
MAX_SEED = 2**64

# Feasibility search looks at this many oldest eligible parents; breeding
# prefers old collectibles anyway and this keeps a step O(1).
BREED_SEARCH_WINDOW = 12

CONVERGENCE_REL_TOL = 1e-9


class SimulationInvariantError(RuntimeError):
    """A post-step audit failed; the simulation state is untrustworthy."""

    def __init__(self, step: int, message: str):
        super().__init__(f"invariant violation at step {step}: {message}")
        self.step = step


class CountingRng:
    """random.Random wrapper that tallies draws for replay audits."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)
        self.draws = 0

    def random(self) -> float:
        self.draws += 1
        return self._rng.random()

    def randrange(self, n: int) -> int:
        self.draws += 1
        return self._rng.randrange(n)


@dataclass(frozen=True)
class AgentSpec:
    """One player: identity, strategy, utility, and initial endowment.

    ``collectibles`` genesis tokens are minted for the agent at start-up.
    ``mix`` is required for the fixed_mix strategy and ignored otherwise.
    """

    id: int
    strategy: str = "passive"
    mix: StrategyMix | None = None
    utility: UtilitySpec = UtilitySpec("log")
    collectibles: int = 0
    activity_balance: float = 0.0
    market_balance: float = 0.0

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError("agent ids start at 1 (0 is the treasury)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "fixed_mix" and self.mix is None:
            raise ValueError("fixed_mix strategy needs a StrategyMix")
        if self.collectibles < 0:
            raise ValueError("genesis collectible count must be non-negative")
        if self.activity_balance < 0 or self.market_balance < 0:
            raise ValueError("initial balances must be non-negative")


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs; two runs with equal configs are identical.

    ``trait_premiums`` optionally prices newborn collectibles above the
    floor: one non-negative premium per trait value, added once per trait
    position carrying that value. Without it every newborn lists at the
    floor price.
    """

    rules: GameRules
    agents: tuple[AgentSpec, ...]
    steps: int
    seed: int = 0
    board: PriceBoard = field(default_factory=PriceBoard)
    price_update: str = "frozen"
    genesis_price: float | None = None
    trait_premiums: tuple[float, ...] | None = None
    adventure: AdventureSpec | None = None
    battle: BattleSpec | None = None
    lottery: LotterySpec | None = None
    minority: MinorityGameSpec | None = None

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.agents:
            raise ValueError("at least one agent is required")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.price_update not in PRICE_UPDATES:
            raise ValueError(f"unknown price update mode {self.price_update!r}")
        genesis = self.genesis_price if self.genesis_price is not None else self.board.floor_price
        if genesis < self.board.floor_price:
            raise ValueError("genesis price may not undercut the floor price")
        if self.trait_premiums is not None:
            if len(self.trait_premiums) != self.rules.trait_alphabet:
                raise ValueError("trait_premiums needs one entry per trait value")
            if any(p < 0 for p in self.trait_premiums):
                raise ValueError("trait premiums must be non-negative")


@dataclass
class Event:
    """One state transition: who did what, with what, and how many draws it took."""

    step: int
    agent: int
    action: str
    inputs: dict
    outputs: dict
    rng_draws: int


@dataclass
class EconomySnapshot:
    """Pool values and per-agent wealth after a step."""

    step: int
    collectible_pool: float
    activity_pool: float
    market_pool: float
    total: float
    collectible_count: int
    agent_wealth: dict[int, float]


@dataclass
class SimResult:
    events: list[Event]
    snapshots: list[EconomySnapshot]
    ruined_at: dict[int, int | None]
    action_counts: dict[int, dict[str, int]]


@dataclass(frozen=True)
class CollateralSpec:
    """Linear borrow-and-reinvest loop for game tokens used as loan collateral.

    Each round the promoter borrows ltv times the collateral value and the
    reinvested loan lifts the value by impact per unit: V(n+1) = V0 +
    impact * ltv * V(n). An optional shock multiplies the value by
    (1 - shock_fraction) at the given step; the position is liquidated once
    the value falls below liquidation_threshold times the outstanding debt.
    """

    ltv: float
    impact: float
    initial_value: float
    liquidation_threshold: float = 1.0
    shock_step: int | None = None
    shock_fraction: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.ltv < 1.0:
            raise ValueError("loan-to-value must be in (0, 1)")
        if self.impact < 0:
            raise ValueError("price impact must be non-negative")
        if self.initial_value <= 0:
            raise ValueError("initial value must be positive")
        if not 0.0 < self.liquidation_threshold <= 1.0:
            raise ValueError("liquidation threshold must be in (0, 1]")
        if self.shock_step is not None:
            if self.shock_step < 1:
                raise ValueError("shock step must be >= 1")
            if not 0.0 < self.shock_fraction < 1.0:
                raise ValueError("shock fraction must be in (0, 1)")


@dataclass(frozen=True)
class CollateralOutcome:
    kind: str  # "Converged" | "Diverged" | "Liquidated"
    limit_value: float | None = None
    liquidated_step: int | None = None


@dataclass(frozen=True)
class RuinEstimate:
    probability: float
    stderr: float
    trials: int


def derive_subseed(master_seed: int, trial: int) -> int:
    """Independent per-trial seed: first 8 little-endian bytes of
    SHA-256(master_seed as 8 LE bytes || trial as 8 LE bytes)."""
    payload = master_seed.to_bytes(8, "little") + trial.to_bytes(8, "little")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


class GameSimulation:
    """Mutable run state; use run_simulation() unless stepping manually."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.rules = config.rules
        self.rng = CountingRng(config.seed)
        self.population: dict[int, Collectible] = {}
        self.holdings: dict[int, Holdings] = {TREASURY: Holdings(TREASURY)}
        self.board = PriceBoard(
            collectible_prices=dict(config.board.collectible_prices),
            activity_price=config.board.activity_price,
            market_price=config.board.market_price,
            floor_price=config.board.floor_price,
        )
        self.counters = SupplyCounters()
        self.events: list[Event] = []
        self.ruined_at: dict[int, int | None] = {a.id: None for a in config.agents}
        self.action_counts: dict[int, dict[str, int]] = {
            a.id: {"breed": 0, "battle": 0, "adventure": 0, "lottery": 0, "pass": 0}
            for a in config.agents
        }
        self._agents = sorted(config.agents, key=lambda a: a.id)
        self._genesis()

    # -- setup ---------------------------------------------------------

    def _genesis(self) -> None:
        genesis_price = (
            self.config.genesis_price
            if self.config.genesis_price is not None
            else self.board.floor_price
        )
        next_id = 0
        for spec in self._agents:
            h = Holdings(
                owner=spec.id,
                activity_balance=spec.activity_balance,
                market_balance=spec.market_balance,
            )
            self.holdings[spec.id] = h
            self.counters.activity_supply += spec.activity_balance
            self.counters.market_supply += spec.market_balance
            for _ in range(spec.collectibles):
                before = self.rng.draws
                traits = tuple(
                    self.rng.randrange(self.rules.trait_alphabet)
                    for _ in range(self.rules.trait_count)
                )
                token = Collectible(
                    id=next_id,
                    traits=traits,
                    parents=None,
                    breed_count=0,
                    birth_step=1 - self.rules.maturity_delay,
                )
                self.population[token.id] = token
                h.collectibles.add(token.id)
                self.board.collectible_prices[token.id] = genesis_price
                self.events.append(
                    Event(
                        step=0,
                        agent=spec.id,
                        action="genesis",
                        inputs={},
                        outputs={"collectible": token.id, "traits": list(traits)},
                        rng_draws=self.rng.draws - before,
                    )
                )
                next_id += 1
        self._check_invariants(step=0)

    # -- feasibility ---------------------------------------------------

    def _eligible_parents(self, agent_id: int, step: int) -> list[Collectible]:
        out = []
        for tid in sorted(self.holdings[agent_id].collectibles):
            c = self.population[tid]
            if c.breed_count >= self.rules.breed_limit:
                continue
            if step - c.birth_step < self.rules.maturity_delay:
                continue
            out.append(c)
            if len(out) >= BREED_SEARCH_WINDOW:
                break
        return out

    def _find_breeding_set(self, agent_id: int, step: int) -> list[int] | None:
        eligible = self._eligible_parents(agent_id, step)
        if len(eligible) < self.rules.breed_arity:
            return None
        h = self.holdings[agent_id]
        for combo in itertools.combinations(eligible, self.rules.breed_arity):
            try:
                breeding.check_pairing(list(combo))
            except breeding.RestrictionViolated:
                continue
            cost = BreedCost.at_index(self.rules, combo[0].breed_count, self.board)
            if h.activity_balance < cost.activity_amount:
                continue
            if h.market_balance < cost.market_amount:
                continue
            return [c.id for c in combo]
        return None

    def _can_adventure(self, agent_id: int) -> bool:
        spec = self.config.adventure
        return spec is not None and len(self.holdings[agent_id].collectibles) >= spec.collectibles_required

    def _can_battle(self, agent_id: int) -> bool:
        spec = self.config.battle
        return spec is not None and len(self.holdings[agent_id].collectibles) >= spec.team_size

    def _can_lottery(self, agent_id: int) -> bool:
        spec = self.config.lottery
        return spec is not None and self.holdings[agent_id].market_balance >= spec.stake

    def _afford_any(self, agent_id: int, step: int) -> bool:
        if self._find_breeding_set(agent_id, step) is not None:
            return True
        return (
            self._can_adventure(agent_id)
            or self._can_battle(agent_id)
            or self._can_lottery(agent_id)
        )

    def _list_price(self, traits: tuple[int, ...]) -> float:
        if self.config.trait_premiums is None:
            return self.board.floor_price
        return self.board.floor_price + sum(self.config.trait_premiums[t] for t in traits)

    # -- wealth --------------------------------------------------------

    def agent_wealth(self, agent_id: int) -> float:
        h = self.holdings[agent_id]
        tokens = math.fsum(self.board.price_of(tid) for tid in sorted(h.collectibles))
        return (
            tokens
            + h.activity_balance * self.board.activity_price
            + h.market_balance * self.board.market_price
        )

    # -- actions -------------------------------------------------------

    def _do_breed(self, agent_id: int, step: int, parent_ids: list[int]) -> Event:
        h = self.holdings[agent_id]
        before = self.rng.draws
        child, cost = breeding.breed(
            parent_ids, h, self.population, self.rules, self.board, self.rng, current_step=step
        )
        if self.rules.burn_mode == "treasury":
            self.holdings[TREASURY].activity_balance += cost.activity_amount
            self.holdings[TREASURY].market_balance += cost.market_amount
        else:
            self.counters.activity_supply -= cost.activity_amount
            self.counters.market_supply -= cost.market_amount
        self.board.collectible_prices[child.id] = self._list_price(child.traits)
        return Event(
            step=step,
            agent=agent_id,
            action="breed",
            inputs={"parents": list(parent_ids)},
            outputs={
                "child": child.id,
                "traits": list(child.traits),
                "activity_cost": cost.activity_amount,
                "market_cost": cost.market_amount,
            },
            rng_draws=self.rng.draws - before,
        )

    def _do_adventure(self, agent_id: int, step: int) -> Event:
        spec = self.config.adventure
        h = self.holdings[agent_id]
        team = sorted(h.collectibles)[: spec.collectibles_required]
        before_balance = h.activity_balance
        after_balance = spec.reward_multiplier * before_balance
        minted = after_balance - before_balance
        h.activity_balance = after_balance
        self.counters.activity_supply += minted
        return Event(
            step=step,
            agent=agent_id,
            action="adventure",
            inputs={"collectibles": team, "activity_balance": before_balance},
            outputs={"activity_balance": after_balance, "activity_minted": minted},
            rng_draws=0,
        )

    def _do_battle(self, agent_id: int, step: int) -> Event:
        # Resolved at the average multiplier; no winner draw is made.
        spec = self.config.battle
        h = self.holdings[agent_id]
        team = sorted(h.collectibles)[: spec.team_size]
        before_balance = h.activity_balance
        after_balance = spec.survival_fraction * before_balance
        minted = after_balance - before_balance
        h.activity_balance = after_balance
        self.counters.activity_supply += minted
        return Event(
            step=step,
            agent=agent_id,
            action="battle",
            inputs={"team": team, "activity_balance": before_balance},
            outputs={"activity_balance": after_balance, "activity_minted": minted},
            rng_draws=0,
        )

    def _do_lottery(self, agent_id: int, step: int) -> Event:
        spec = self.config.lottery
        h = self.holdings[agent_id]
        before = self.rng.draws
        lost = self.rng.random() < spec.loss_prob
        if lost:
            h.market_balance -= spec.stake
            self.counters.market_supply -= spec.stake
            outputs = {"result": "loss", "market_burned": spec.stake}
        else:
            h.market_balance += spec.win_market_tokens
            h.activity_balance += spec.win_game_tokens
            self.counters.market_supply += spec.win_market_tokens
            self.counters.activity_supply += spec.win_game_tokens
            outputs = {
                "result": "win",
                "market_minted": spec.win_market_tokens,
                "activity_minted": spec.win_game_tokens,
            }
        return Event(
            step=step,
            agent=agent_id,
            action="lottery",
            inputs={"stake": spec.stake},
            outputs=outputs,
            rng_draws=self.rng.draws - before,
        )

    def _pass_event(self, agent_id: int, step: int) -> Event:
        return Event(step=step, agent=agent_id, action="pass", inputs={}, outputs={}, rng_draws=0)

    # -- strategy ------------------------------------------------------

    def _choose_action(self, spec: AgentSpec, step: int) -> str:
        if spec.strategy == "passive":
            return "pass"
        if spec.strategy == "thrill_seeker":
            return "lottery" if self._can_lottery(spec.id) else "pass"
        if spec.strategy == "fixed_mix":
            seq = (
                ["breed"] * spec.mix.breed
                + ["battle"] * spec.mix.battle
                + ["adventure"] * spec.mix.adventure
            )
            if not seq:
                return "pass"
            action = seq[(step - 1) % len(seq)]
            if action == "breed" and self._find_breeding_set(spec.id, step) is None:
                return "pass"
            if action == "battle" and not self._can_battle(spec.id):
                return "pass"
            if action == "adventure" and not self._can_adventure(spec.id):
                return "pass"
            return action
        return self._growth_choice(spec.id, step)

    def _growth_choice(self, agent_id: int, step: int) -> str:
        """Highest expected log-wealth change at current-board averages;
        ties resolved in the order breed < battle < adventure < pass."""
        wealth = self.agent_wealth(agent_id)
        if wealth <= 0:
            return "pass"
        h = self.holdings[agent_id]
        candidates: list[tuple[float, int, str]] = []

        parents = self._find_breeding_set(agent_id, step)
        if parents is not None:
            lead = self.population[parents[0]]
            cost = BreedCost.at_index(self.rules, lead.breed_count, self.board)
            delta = self.board.floor_price - cost.numeraire_total
            candidates.append((delta, 0, "breed"))
        if self._can_battle(agent_id):
            delta = (
                (self.config.battle.survival_fraction - 1.0)
                * h.activity_balance
                * self.board.activity_price
            )
            candidates.append((delta, 1, "battle"))
        if self._can_adventure(agent_id):
            delta = (
                (self.config.adventure.reward_multiplier - 1.0)
                * h.activity_balance
                * self.board.activity_price
            )
            candidates.append((delta, 2, "adventure"))
        candidates.append((0.0, 3, "pass"))

        best = None
        for delta, order, name in candidates:
            if wealth + delta <= 0:
                continue
            log_change = math.log1p(delta / wealth)
            key = (-log_change, order)
            if best is None or key < best[0]:
                best = (key, name)
        return best[1]

    # -- stepping ------------------------------------------------------

    def _execute(self, agent_id: int, action: str, step: int) -> Event:
        if action == "breed":
            parents = self._find_breeding_set(agent_id, step)
            return self._do_breed(agent_id, step, parents)
        if action == "battle":
            return self._do_battle(agent_id, step)
        if action == "adventure":
            return self._do_adventure(agent_id, step)
        if action == "lottery":
            return self._do_lottery(agent_id, step)
        return self._pass_event(agent_id, step)

    def step(self, step: int) -> None:
        for spec in self._agents:
            if self.ruined_at[spec.id] is None and not self._afford_any(spec.id, step):
                self.ruined_at[spec.id] = step
            action = self._choose_action(spec, step)
            event = self._execute(spec.id, action, step)
            self.action_counts[spec.id][event.action] += 1
            self.events.append(event)
        self._update_prices()
        self._check_invariants(step)

    def _update_prices(self) -> None:
        if self.config.price_update != "forward_drift":
            return
        cost = (
            self.rules.activity_cost_schedule[0] * self.board.activity_price
            + self.rules.market_cost_schedule[0] * self.board.market_price
        )
        d = self.rules.breed_arity
        for tid in sorted(self.board.collectible_prices):
            self.board.collectible_prices[tid] = breeding.forward_price_step(
                self.board.collectible_prices[tid], d, cost
            )
        self.board.floor_price = breeding.forward_price_step(self.board.floor_price, d, cost)

    def _check_invariants(self, step: int) -> None:
        holdings = list(self.holdings.values())
        try:
            check_ownership_partition(holdings, self.population)
            check_supply_conservation(holdings, self.counters)
            self.board.validate()
            for h in holdings:
                h.check_balances()
        except ValueError as exc:
            raise SimulationInvariantError(step, str(exc)) from exc

    def snapshot(self, step: int) -> EconomySnapshot:
        holdings = list(self.holdings.values())
        phi = collectible_pool_value(holdings, self.board)
        psi, omega = fungible_pool_values(self.counters, self.board)
        return EconomySnapshot(
            step=step,
            collectible_pool=phi,
            activity_pool=psi,
            market_pool=omega,
            total=total_value(phi, psi, omega),
            collectible_count=len(self.population),
            agent_wealth={a.id: self.agent_wealth(a.id) for a in self._agents},
        )


def run_simulation(config: SimConfig) -> SimResult:
    """Run the configured scenario; equal (config, seed) yields identical results."""
    sim = GameSimulation(config)
    snapshots = [sim.snapshot(0)]
    for step in range(1, config.steps + 1):
        sim.step(step)
        snapshots.append(sim.snapshot(step))
    return SimResult(
        events=sim.events,
        snapshots=snapshots,
        ruined_at=sim.ruined_at,
        action_counts=sim.action_counts,
    )


def collateral_loop(
    spec: CollateralSpec, max_iter: int = 10_000
) -> tuple[list[float], CollateralOutcome]:
    """Iterate the borrow-and-reinvest recursion until it settles, blows up,
    or a shock forces liquidation.

    With impact * ltv < 1 the value converges to initial / (1 - impact*ltv)
    (declared once the step change drops below 1e-9 of the initial value);
    at or above 1 the loop diverges. A shocked value below the liquidation
    threshold times the outstanding debt ends the run as Liquidated.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    feedback = spec.impact * spec.ltv
    trajectory = [spec.initial_value]
    for n in range(1, max_iter + 1):
        prev = trajectory[-1]
        value = spec.initial_value + feedback * prev
        if spec.shock_step == n:
            value *= 1.0 - spec.shock_fraction
        trajectory.append(value)
        debt = spec.ltv * prev
        if value < spec.liquidation_threshold * debt:
            return trajectory, CollateralOutcome(kind="Liquidated", liquidated_step=n)
        if abs(value - prev) < CONVERGENCE_REL_TOL * spec.initial_value:
            return trajectory, CollateralOutcome(kind="Converged", limit_value=value)
    return trajectory, CollateralOutcome(kind="Diverged")


def ruin_probability(config: SimConfig, agent: int, trials: int) -> RuinEstimate:
    """Monte Carlo probability that the agent is priced out of every activity
    before the horizon, with its binomial standard error.

    Trials run under independent sub-seeds derived from the master seed (see
    derive_subseed), so the estimate is reproducible and the trials may be
    evaluated in any order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if agent not in {a.id for a in config.agents}:
        raise ValueError(f"no agent with id {agent}")
    ruined = 0
    for trial in range(trials):
        sub = replace(config, seed=derive_subseed(config.seed, trial))
        result = run_simulation(sub)
        if result.ruined_at[agent] is not None:
            ruined += 1
    estimate = ruined / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    return RuinEstimate(probability=estimate, stderr=stderr, trials=trials)
