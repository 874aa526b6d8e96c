"""Deterministic simulator and analytics toolkit for NFT game economies."""

from .activities import (
    AdventureSpec,
    BattleSpec,
    FixedStep,
    GeometricRandom,
    LotterySpec,
    MinorityGameSpec,
    PoolCap,
    SponsorClass,
    StrategyMix,
    adventure_payout,
    battle_payout,
    classify_lottery,
    lottery_sharpe,
    minority_settle,
    minority_should_stop,
    total_earnings,
)
from .analytics import (
    RedistributionGame,
    ReturnModel,
    UtilitySpec,
    envelope_expected_gain,
    expected_utility,
    heterogeneous_lottery_ev,
    optimal_allocation,
    optimal_fraction_1d,
    pooled_lottery_game,
    propitious_check,
    pseudo_inverse,
    sharpe_ratio,
)
from .breeding import (
    ArbitrageKind,
    ArbitrageVerdict,
    BreedCost,
    BreedingError,
    ExhaustedBreeder,
    GameRules,
    ImmatureParent,
    InsufficientBalance,
    RestrictionViolated,
    breed,
    classify_breeding_arbitrage,
    forward_price_step,
    lattice_value,
    max_population,
)
from .economy import (
    Collectible,
    Holdings,
    MissingPriceError,
    PriceBoard,
    SupplyCounters,
    collectible_pool_value,
    fungible_pool_values,
    total_value,
)
from .scenario import ScenarioError, load_scenario, parse_scenario
from .simulation import (
    AgentSpec,
    CollateralOutcome,
    CollateralSpec,
    RuinEstimate,
    SimConfig,
    SimulationInvariantError,
    collateral_loop,
    ruin_probability,
    run_simulation,
)

__version__ = "0.1.0"
