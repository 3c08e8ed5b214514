"""Engine and equilibrium solver for coalition-structure formation games.

Players simultaneously announce a desired partition of the player set (with
coalition sizes capped at K) together with a local action; a formation rule
turns the announcements into one realized partition, and payoffs are looked
up per (realized partition, action profile). The solver computes expected
utilities, pure and mixed equilibria, and the distribution over realized
partitions that an equilibrium induces; games for different K form nested
families that can be checked and solved side by side.
"""

from .errors import (
    BudgetExceededError,
    CoalgameError,
    GameSpecError,
    InternalInconsistencyError,
    InvalidParameterError,
)
from .partitions import (
    Coalition,
    Partition,
    PartitionFamily,
    coalition_of,
    count_partitions,
    enumerate_partitions,
    format_partition,
    is_nested,
    parse_partition,
)
from .games import (
    DEFAULT_BUDGET,
    Action,
    CoalitionUnanimity,
    EpsilonBonus,
    FormationRule,
    Game,
    MechanismAxiomReport,
    PartitionStrategy,
    PartitionUnanimity,
    PayoffTable,
    StrategyProfile,
    apply_formation_rule,
    build_strategy_set,
    check_mechanism_axioms,
    coalition_values,
    induced_domain,
    make_game,
    payoff,
)
from .solver import (
    DEFAULT_TOL,
    EquilibriumCheck,
    EquilibriumResult,
    MixedProfile,
    MixedStrategy,
    RefineResult,
    enumerate_pure_equilibria,
    equilibrium_partitions,
    expected_utility,
    expected_utility_components,
    is_equilibrium,
    replicator_refine,
    support_enumeration,
)
from .families import (
    FamilyEquilibriumReport,
    GameFamily,
    NestingReport,
    SolveOptions,
    build_family,
    check_nesting,
    equilibria_across_k,
)
from .gamespec import GameSpec, build_game, parse_spec, serialize_spec
from .builtin_games import (
    BUNDLED_SPECS,
    builtin_games,
    bundled_spec,
    bundled_spec_text,
    dinner_family,
    dinner_game,
    matching_pennies_game,
    pd_extrovert_game,
    pd_family,
    pd_game,
)
from .reports import (
    FamilyReport,
    SolveReport,
    ValidateReport,
    build_solve_report,
    build_validate_report,
    pretty_partition,
    profiles_from_report,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BUNDLED_SPECS",
    "BudgetExceededError",
    "Coalition",
    "CoalgameError",
    "CoalitionUnanimity",
    "DEFAULT_BUDGET",
    "DEFAULT_TOL",
    "EpsilonBonus",
    "EquilibriumCheck",
    "EquilibriumResult",
    "FamilyEquilibriumReport",
    "FamilyReport",
    "FormationRule",
    "Game",
    "GameFamily",
    "GameSpec",
    "GameSpecError",
    "InternalInconsistencyError",
    "InvalidParameterError",
    "MechanismAxiomReport",
    "MixedProfile",
    "MixedStrategy",
    "NestingReport",
    "Partition",
    "PartitionFamily",
    "PartitionStrategy",
    "PartitionUnanimity",
    "PayoffTable",
    "RefineResult",
    "SolveOptions",
    "SolveReport",
    "StrategyProfile",
    "ValidateReport",
    "apply_formation_rule",
    "build_family",
    "build_game",
    "build_solve_report",
    "build_strategy_set",
    "build_validate_report",
    "builtin_games",
    "bundled_spec",
    "bundled_spec_text",
    "check_mechanism_axioms",
    "check_nesting",
    "coalition_of",
    "coalition_values",
    "count_partitions",
    "dinner_family",
    "dinner_game",
    "enumerate_partitions",
    "enumerate_pure_equilibria",
    "equilibria_across_k",
    "equilibrium_partitions",
    "expected_utility",
    "expected_utility_components",
    "format_partition",
    "induced_domain",
    "is_equilibrium",
    "is_nested",
    "make_game",
    "matching_pennies_game",
    "parse_partition",
    "parse_spec",
    "payoff",
    "pd_extrovert_game",
    "pd_family",
    "pd_game",
    "pretty_partition",
    "profiles_from_report",
    "replicator_refine",
    "serialize_spec",
    "support_enumeration",
]
