"""Workforce planning for seniority-structured hierarchies.

Submodules:
    org        domain types, closed-form stationary profiles, feasibility
    transport  explicit upwind simulation of the seniority densities
    costs      labor-cost model with temporaries and floaters
    optimize   genetic and coordinate-descent plan optimization
    config     JSON run configuration
    cli        command-line entry point
"""

from .org import (
    FEASIBILITY_MARGIN,
    FlexPlan,
    IllPosedError,
    LevelSpec,
    MassMismatchError,
    MissingWageError,
    OrgSpec,
    OrgValidationError,
    SteadyState,
    check_initial_condition,
    cumulative_attrition,
    min_external_ratios,
    min_permanent_share,
    promotion_demand,
    promotion_demands,
    stationary_state,
    steady_promotable_pool,
    validate,
)
from .costs import (
    BusinessUnitPlan,
    Case1Diagnostics,
    ConstantWage,
    CostBreakdown,
    ExponentialWage,
    FloaterReduction,
    GrowthExceedsAttritionError,
    MissingFloaterCurveError,
    PiecewiseLinearWage,
    business_unit_cost,
    case1_diagnostics,
    case2_residuals,
    cost_quadrature_oracle,
    floater_average_cost,
    format_cost_table,
    format_plan_table,
    level_cost,
    org_cost,
    reduce_floaters,
    write_cost_csv,
)
from .optimize import (
    Candidate,
    GaConfig,
    GaResult,
    NoFeasibleCandidateError,
    PlanObjective,
    coordinate_descent,
    feasible_cost_ceiling,
    ga_minimize,
    golden_section,
    penalized_cost,
    write_ga_csv,
)
from .transport import (
    DEFAULT_PROMOTION_CAP,
    CflViolationError,
    InfeasibleInitialDataError,
    PolicyState,
    SeniorityGrid,
    SimulationResult,
    close_policy_external_fraction,
    close_policy_max_internal,
    discrete_pools,
    discrete_stationary_density,
    level_metrics,
    make_initial_density,
    run,
    step,
    write_snapshot_csv,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BusinessUnitPlan",
    "Candidate",
    "Case1Diagnostics",
    "CflViolationError",
    "ConstantWage",
    "CostBreakdown",
    "DEFAULT_PROMOTION_CAP",
    "ExponentialWage",
    "FEASIBILITY_MARGIN",
    "FlexPlan",
    "FloaterReduction",
    "GaConfig",
    "GaResult",
    "GrowthExceedsAttritionError",
    "IllPosedError",
    "InfeasibleInitialDataError",
    "LevelSpec",
    "MassMismatchError",
    "MissingFloaterCurveError",
    "MissingWageError",
    "NoFeasibleCandidateError",
    "OrgSpec",
    "OrgValidationError",
    "PiecewiseLinearWage",
    "PlanObjective",
    "PolicyState",
    "SeniorityGrid",
    "SimulationResult",
    "SteadyState",
    "business_unit_cost",
    "case1_diagnostics",
    "case2_residuals",
    "check_initial_condition",
    "close_policy_external_fraction",
    "close_policy_max_internal",
    "coordinate_descent",
    "cost_quadrature_oracle",
    "cumulative_attrition",
    "discrete_pools",
    "discrete_stationary_density",
    "feasible_cost_ceiling",
    "floater_average_cost",
    "ga_minimize",
    "golden_section",
    "level_cost",
    "level_metrics",
    "make_initial_density",
    "min_external_ratios",
    "min_permanent_share",
    "org_cost",
    "penalized_cost",
    "promotion_demand",
    "promotion_demands",
    "reduce_floaters",
    "run",
    "stationary_state",
    "steady_promotable_pool",
    "step",
    "validate",
    "write_cost_csv",
    "write_ga_csv",
    "write_snapshot_csv",
    "write_trajectory_csv",
    "__version__",
]
