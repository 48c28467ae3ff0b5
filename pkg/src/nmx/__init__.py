"""Exact worst-case solver for finite decentralized control problems with
nested information structures."""

from .costs import to_terminal
from .dp import (
    Caps,
    SolveResult,
    StrategyProfile,
    ValueTable,
    bellman_backup,
    evaluate_strategy,
    extract_agent_strategies,
    feasible_observations,
    solve,
    terminal_value,
)
from .errors import InfeasibleObservation, ResourceLimitError
from .infostate import (
    CompleteAction,
    History,
    InfoState,
    Workspace,
    definitional_infostate,
    evolve_infostate,
    initial_infostate,
    reachable_infostates,
)
from .model import (
    DictStrategy,
    FiniteSpace,
    FnStrategy,
    InfoStructure,
    ModelError,
    Primitives,
    Strategy,
    StrategyUndefinedError,
    SystemModel,
    Trajectory,
    VarId,
    enumerate_primitives,
    simulate,
    uid,
    validate,
    yid,
)
from .modelfile import ParseError, parse_model, serialize_model
from .nested import (
    HatConstructionError,
    HatModel,
    TableRule,
    build_hat_model,
    hat_rollout,
    lift_strategy,
    lower_strategy,
)
from .oracle import (
    OracleResult,
    StrategyEnumerator,
    brute_force_minimax,
    count_strategies,
    history_minimax,
)
from .pursuit import PursuitParams, surround_indicator, table1

__version__ = "0.1.0"
