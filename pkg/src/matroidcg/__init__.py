"""Matroid congestion games with set-functional costs and complementarities.

Strategy spaces are matroid base families (uniform, partition, graphic,
explicit), resource costs are monotone set functions (count-based,
weight-induced, or explicit tables), and player costs aggregate through
sum, max, L^p, or arbitrary permutation-invariant tables.  The package
computes pure Nash equilibria by improving-local-move dynamics with a
lexicographic potential, verifies every guarantee against brute-force
oracles at desk scale, and exposes it all through the ``game`` CLI.
"""

from .costs import (
    Aggregator,
    CountCost,
    LpAgg,
    MaxAgg,
    PreorderVerdict,
    SetCost,
    SumAgg,
    TableAgg,
    TableCost,
    TableFn,
    PolyFn,
    StepFn,
    ValueOrder,
    WeightCost,
    aggregate,
    check_cost_monotone_wrt_g,
    check_monotone_set_cost,
    check_weak_monotonicity,
    eval_set_cost,
    preorder_compare,
)
from .dynamics import (
    DynamicsTrace,
    Potential,
    best_response,
    brute_force_pne,
    improving_local_move,
    is_pne,
    player_specific_solver,
    potential,
    potential_compare,
    run_local_move_dynamics,
)
from .errors import (
    ContractError,
    DomainError,
    GameFormatError,
    MatroidCGError,
    NotWeaklyMonotoneError,
    ResourceLimitError,
    ValidationError,
)
from .game import (
    Congestion,
    Flavor,
    GameInstance,
    StrategyProfile,
    congestion_of,
    player_cost,
    validate_game,
)
from .matroid import (
    ExplicitBases,
    ExplicitStrategies,
    GraphicMatroid,
    GroundSet,
    MatroidOracle,
    PartitionMatroid,
    UniformMatroid,
    enumerate_bases,
    exchange_candidates,
    is_base,
    min_sum_base_minimizes_max,
    min_weight_base,
    simultaneous_exchange,
    verify_base_axioms,
)
from .reductions import (
    reduce_mixed_01_to_player_specific,
    reduce_mixed_md_to_setfunctional,
    reduce_mixed_singleton_to_player_specific,
    reduce_weighted_to_setfunctional,
)

__version__ = "0.1.0"
