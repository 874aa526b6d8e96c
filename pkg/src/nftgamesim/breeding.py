"""Breeding mechanics, population bounds, forward prices, and charge valuation.

Breeding consumes fungible tokens and parent breed charges to mint a new
collectible with partially inherited, partially random traits. Because the
supply of collectibles grows at a rate fixed by the breeding arity, their
forward prices drift toward the per-breed cost; deviations between the
capital growth from breeding and the tokens it consumes are arbitrage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .economy import Collectible, Holdings, PriceBoard, TokenId

ARBITRAGE_REL_TOL = 1e-9


class BreedingError(Exception):
    """Base class for refused breeding attempts."""


class RestrictionViolated(BreedingError):
    """Parents violate a pairing rule (duplicate, parent/child, or siblings)."""


class InsufficientBalance(BreedingError):
    """Owner's fungible balances do not cover the breed cost."""


class ExhaustedBreeder(BreedingError):
    """A parent has used all of its breed charges."""


class ImmatureParent(BreedingError):
    """A parent is younger than the maturity delay."""


@dataclass(frozen=True)
class GameRules:
    """Static parameters of the breeding game.

    Cost schedules are indexed by the lead parent's breed count: the k-th
    breeding of a lead parent consumes ``activity_cost_schedule[k]`` activity
    tokens and ``market_cost_schedule[k]`` market tokens. ``burn_mode``
    decides where consumed tokens go: removed from supply ("void", default)
    or credited to the treasury ("treasury").
    """

    breed_arity: int = 2
    breed_limit: int = 7
    trait_count: int = 6
    trait_alphabet: int = 6
    mutation_prob: float = 0.0
    maturity_delay: int = 1
    activity_cost_schedule: tuple[float, ...] = ()
    market_cost_schedule: tuple[float, ...] = ()
    burn_mode: str = "void"

    def __post_init__(self) -> None:
        if self.breed_arity < 1:
            raise ValueError("breed_arity must be >= 1")
        if self.breed_limit < 1:
            raise ValueError("breed_limit must be >= 1")
        if self.trait_count < 1 or self.trait_alphabet < 1:
            raise ValueError("trait_count and trait_alphabet must be >= 1")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if self.maturity_delay < 0:
            raise ValueError("maturity_delay must be >= 0")
        if self.burn_mode not in ("void", "treasury"):
            raise ValueError("burn_mode must be 'void' or 'treasury'")
        for name in ("activity_cost_schedule", "market_cost_schedule"):
            sched = getattr(self, name)
            if not sched:
                object.__setattr__(self, name, (0.0,) * self.breed_limit)
            elif len(sched) != self.breed_limit:
                raise ValueError(f"{name} must have length breed_limit={self.breed_limit}")
            elif any(c < 0 for c in sched):
                raise ValueError(f"{name} entries must be non-negative")
            else:
                object.__setattr__(self, name, tuple(float(c) for c in sched))


@dataclass(frozen=True)
class BreedCost:
    """Tokens consumed by one breeding, plus their numeraire total."""

    activity_amount: float
    market_amount: float
    numeraire_total: float

    @classmethod
    def at_index(cls, rules: GameRules, index: int, board: PriceBoard) -> BreedCost:
        act = rules.activity_cost_schedule[index]
        mkt = rules.market_cost_schedule[index]
        return cls(act, mkt, act * board.activity_price + mkt * board.market_price)


class ArbitrageKind(str, Enum):
    NO_ARBITRAGE = "NoArbitrage"
    LONG_BREEDING = "LongBreedingArbitrage"
    SHORT_BREEDING = "ShortBreedingArbitrage"


@dataclass(frozen=True)
class ArbitrageVerdict:
    """Classification of the breeding trade, with magnitude = A*C - B.

    Short-side arbitrage is only indirectly exploitable: breeding is not a
    time-reversible process, so there is no direct way to short it.
    """

    kind: ArbitrageKind
    magnitude: float


def _are_siblings(a: Collectible, b: Collectible) -> bool:
    # Siblings share at least one parent (strictest reading).
    if a.parents is None or b.parents is None:
        return False
    return bool(set(a.parents) & set(b.parents))


def _is_parent_child(a: Collectible, b: Collectible) -> bool:
    return (a.parents is not None and b.id in a.parents) or (
        b.parents is not None and a.id in b.parents
    )


def check_pairing(parents: list[Collectible]) -> None:
    """Raise RestrictionViolated if any two chosen parents may not breed."""
    for i, a in enumerate(parents):
        for b in parents[i + 1 :]:
            if a.id == b.id:
                raise RestrictionViolated(f"collectible {a.id} listed twice as parent")
            if _is_parent_child(a, b):
                raise RestrictionViolated(
                    f"collectibles {a.id} and {b.id} are parent and child"
                )
            if _are_siblings(a, b):
                raise RestrictionViolated(f"collectibles {a.id} and {b.id} are siblings")


def breed(
    parent_ids: list[TokenId],
    owner: Holdings,
    population: dict[TokenId, Collectible],
    rules: GameRules,
    board: PriceBoard,
    rng,
    current_step: int = 0,
) -> tuple[Collectible, BreedCost]:
    """Mint a new collectible from ``parent_ids`` (length = breed_arity).

    The first parent is the lead breeder; the cost index is its current
    breed count. Each child trait is inherited from a uniformly chosen
    parent with probability 1 - mutation_prob, otherwise drawn uniformly
    from the trait alphabet. Debits the owner's balances and increments
    every parent's breed count; the caller settles supply counters
    according to ``rules.burn_mode``.

    ``rng`` needs ``random()`` and ``randrange(n)``. Two draws are consumed
    per trait (mutation test, then value) regardless of mutation_prob, so
    replay streams stay aligned.
    """
    if len(parent_ids) != rules.breed_arity:
        raise RestrictionViolated(
            f"breeding needs {rules.breed_arity} parents, got {len(parent_ids)}"
        )
    parents = []
    for pid in parent_ids:
        if pid not in owner.collectibles:
            raise RestrictionViolated(f"user {owner.owner} does not hold collectible {pid}")
        parents.append(population[pid])

    check_pairing(parents)

    for p in parents:
        if p.breed_count >= rules.breed_limit:
            raise ExhaustedBreeder(
                f"collectible {p.id} has used all {rules.breed_limit} breed charges"
            )
        if current_step - p.birth_step < rules.maturity_delay:
            raise ImmatureParent(
                f"collectible {p.id} (born step {p.birth_step}) is not mature at step {current_step}"
            )

    cost = BreedCost.at_index(rules, parents[0].breed_count, board)
    if owner.activity_balance < cost.activity_amount or owner.market_balance < cost.market_amount:
        raise InsufficientBalance(
            f"user {owner.owner} cannot cover breed cost "
            f"(needs {cost.activity_amount} activity + {cost.market_amount} market)"
        )

    traits = []
    for i in range(rules.trait_count):
        mutate = rng.random() < rules.mutation_prob
        if mutate:
            traits.append(rng.randrange(rules.trait_alphabet))
        else:
            traits.append(parents[rng.randrange(len(parents))].traits[i])

    child = Collectible(
        id=max(population) + 1,
        traits=tuple(traits),
        parents=tuple(parent_ids),
        breed_count=0,
        birth_step=current_step + 1,
    )

    owner.activity_balance -= cost.activity_amount
    owner.market_balance -= cost.market_amount
    for p in parents:
        p.breed_count += 1
    population[child.id] = child
    owner.collectibles.add(child.id)
    return child, cost


@dataclass
class _Cohort:
    # One birth cohort; blocks are (breed_count, size) runs in id order.
    # Oldest-first selection always consumes an id-order prefix, so counts
    # along the block list are non-increasing.
    birth_step: int
    blocks: list[list[int]] = field(default_factory=list)


def max_population(initial: int, rules: GameRules, horizon: int) -> list[int]:
    """Deterministic upper bound on the collectible count, per step.

    Greedy schedule: at every step all mature collectibles with remaining
    charges are grouped into as many disjoint breeding sets of size d as
    possible, oldest collectibles first; each participant spends one charge
    and every group yields one newborn at the next step. With d = 1,
    unlimited charges, and unit maturity this is the Fibonacci recurrence
    N(t+1) = N(t) + N(t-1).

    Returns the counts N_0..N_horizon. Pairing restrictions are ignored:
    with enough collectibles they never bind, so this stays an upper bound.
    """
    if initial < 1:
        raise ValueError("initial population must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")

    d = rules.breed_arity
    limit = rules.breed_limit
    cohorts = [_Cohort(birth_step=-rules.maturity_delay, blocks=[[0, initial]])]
    counts = [initial]

    for step in range(horizon):
        eligible_total = 0
        for c in cohorts:
            if step - c.birth_step < rules.maturity_delay:
                break
            eligible_total += sum(n for used, n in c.blocks if used < limit)
        births = eligible_total // d

        take = births * d
        for c in cohorts:
            if take == 0:
                break
            if step - c.birth_step < rules.maturity_delay:
                break
            new_blocks: list[list[int]] = []
            for used, n in c.blocks:
                if used >= limit or take == 0:
                    new_blocks.append([used, n])
                    continue
                k = min(n, take)
                take -= k
                if new_blocks and new_blocks[-1][0] == used + 1:
                    new_blocks[-1][1] += k
                else:
                    new_blocks.append([used + 1, k])
                if n - k:
                    new_blocks.append([used, n - k])
            c.blocks = new_blocks

        if births:
            cohorts.append(_Cohort(birth_step=step + 1, blocks=[[0, births]]))
        counts.append(counts[-1] + births)

    return counts


def forward_price_step(p_t: float, d: int, step_cost_numeraire: float) -> float:
    """One step of the no-arbitrage forward-price recursion.

    p(t+1) = d/(d+1) * p(t) + cost/(d+1). The recursion contracts with
    factor d/(d+1) toward its fixed point p* = cost: supply growth from
    breeding dilutes prices until they match the tokens the breed consumes.
    """
    if p_t <= 0:
        raise ValueError("price must be positive")
    if d < 1:
        raise ValueError("breeding arity must be >= 1")
    if step_cost_numeraire < 0:
        raise ValueError("step cost must be non-negative")
    return (d / (d + 1)) * p_t + step_cost_numeraire / (d + 1)


def classify_breeding_arbitrage(
    collectible_capital: float, growth_fraction: float, external_cost: float
) -> ArbitrageVerdict:
    """Compare the capital gain from breeding (A*C) with the tokens it burns (B).

    Only A*C = B prevents arbitrage. A*C > B is exploitable by going long
    breeding; A*C < B only indirectly, by going short, since breeding cannot
    be reversed. Equality is judged at relative tolerance 1e-9.
    """
    if collectible_capital <= 0:
        raise ValueError("collectible capital must be positive")
    if external_cost < 0:
        raise ValueError("external cost must be non-negative")
    gain = collectible_capital * growth_fraction
    magnitude = gain - external_cost
    if abs(magnitude) <= ARBITRAGE_REL_TOL * max(abs(gain), abs(external_cost), 1.0):
        return ArbitrageVerdict(ArbitrageKind.NO_ARBITRAGE, magnitude)
    if magnitude > 0:
        return ArbitrageVerdict(ArbitrageKind.LONG_BREEDING, magnitude)
    return ArbitrageVerdict(ArbitrageKind.SHORT_BREEDING, magnitude)


def lattice_value(
    breeds_remaining: int,
    floor_price: float,
    expected_child_value: float,
    cost_schedule_numeraire: list[float],
) -> float:
    """Value a collectible by backward induction over its remaining charges.

    A spent collectible is worth the floor price. Each remaining charge adds
    its exercise value, clamped at zero since a rational holder never breeds
    at a loss: V(k) = V(k-1) + max(0, child_value - cost(k)).
    """
    if breeds_remaining < 0 or breeds_remaining > len(cost_schedule_numeraire):
        raise ValueError(
            f"breeds_remaining {breeds_remaining} outside [0, {len(cost_schedule_numeraire)}]"
        )
    if floor_price <= 0:
        raise ValueError("floor price must be positive")
    if expected_child_value < 0:
        raise ValueError("expected child value must be non-negative")
    value = floor_price
    for k in range(1, breeds_remaining + 1):
        value += max(0.0, expected_child_value - cost_schedule_numeraire[k - 1])
    return value


def iterate_forward_price(p0: float, d: int, step_cost_numeraire: float, steps: int) -> list[float]:
    """Forward-price path p_0..p_steps under repeated application of the recursion."""
    path = [p0]
    for _ in range(steps):
        path.append(forward_price_step(path[-1], d, step_cost_numeraire))
    return path


def forward_price_limit(step_cost_numeraire: float) -> float:
    """Fixed point of the forward-price recursion (the per-breed cost itself)."""
    return step_cost_numeraire


def floor_price_bound(parent_values: list[float], floor_price: float) -> float:
    """Most conservative post-breeding portfolio value: parents plus one floor-priced child."""
    if floor_price <= 0:
        raise ValueError("floor price must be positive")
    return math.fsum(parent_values) + floor_price


def breeding_expected_value(
    parent_values: list[float], expected_child_value: float, cost: BreedCost
) -> float:
    """Average post-breeding portfolio value at constant prices.

    Parents are retained, one child of the given expected value is added,
    and the breed cost is paid. Using the floor price as the child value
    recovers the maximally risk-averse bound (see floor_price_bound).
    """
    return math.fsum(parent_values) + expected_child_value - cost.numeraire_total
