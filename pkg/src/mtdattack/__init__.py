"""Attack DAGs with moving target defenses: semantics, simulation, optimization."""

from .model import (
    AmgModel,
    AtomicAttack,
    AttackState,
    Defense,
    Refinement,
    ValidationIssue,
    validate,
)
from .ops import (
    apply_completion,
    apply_defense,
    available_activations,
    children,
    completed_descendants,
    defense_order,
    defense_relation,
    is_goal,
    propagate,
    prune,
    simple_state,
)
from .state_space import (
    ActionKind,
    ActionLabel,
    ClockValuation,
    ExplorationLimitExceeded,
    Ptmdp,
    Transition,
    build_ptmdp,
    eligible_events,
    fire,
)
from .engine import (
    ActivationSetStrategy,
    EvalStats,
    GreedyAllStrategy,
    NeverStrategy,
    RngStream,
    RunTrace,
    Strategy,
    evaluate,
    simulate_run,
)
from .optimizer import (
    BudgetConstraint,
    DecisionState,
    OptimizationResult,
    ParetoPoint,
    PolicyStrategy,
    UnreachableGoal,
    build_decision_mdp,
    optimize_expected_cost,
    optimize_expected_time,
    pareto_frontier,
    reachability_closure,
    sweep_defense_periods,
)
from .modelfile import ModelFormatError, load_model, loads_model, save_model, dumps_model

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
