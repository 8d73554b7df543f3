"""Consensus tracking for switched odd-power-integrator multi-agent networks.

A numpy-based simulation library: directed leader-follower topologies, the
scalar inequality kernel behind the reduced-complexity adaptive design,
Gaussian basis regressors, the distributed controller itself, a fixed-step
closed-loop integrator, post-run metrics with a convergence-bound
calculator, and YAML scenario files with a built-in three-follower
benchmark.
"""

from .analysis import (
    AssumedConstants,
    BoundednessReport,
    BoundReport,
    ConsensusMetrics,
    check_boundedness,
    compose_convergence_bounds,
    consensus_metrics,
)
from .controller import (
    ControllerState,
    ControlOutput,
    FollowerController,
    FollowerGainSet,
    PowerProfile,
    adaptation_rate,
    control_effort_scale,
    control_input,
    neighborhood_tracking_error,
    regressor,
    regressor_dim,
    surface_error,
    virtual_control,
    virtual_gain,
)
from .expressions import (
    Expression,
    ExpressionError,
    compile_fn,
    evaluate,
    parse_expression,
    pretty,
    variables,
)
from .graph import (
    GraphTopology,
    LaplacianDecomposition,
    build_laplacian,
    conservative_lambda_min_bound,
    has_leader_rooted_spanning_tree,
    min_singular_value,
    singular_values,
)
from .oddpower import (
    SeparationCoefficients,
    check_binomial_envelope,
    check_separation_inequality,
    ineq_holds,
    odd_pow,
    power_split_bounds,
    separation_coefficients,
    solve_l_for_d,
    young_bound,
)
from .plant import (
    GainBoundWarning,
    LeaderSignal,
    ModeDynamics,
    SwitchingSchedule,
    derivative,
    generate_schedule,
    mode_at,
)
from .rbf import ApproximatorSpec, RbfNetwork, grid_network, random_network
from .scenario import (
    ScenarioStructureWarning,
    ScenarioValidationError,
    benchmark_dict,
    benchmark_scenario,
    from_dict,
    load_scenario,
    read_trajectory_csv,
    save_scenario,
    scenario_to_dict,
    write_trajectory,
)
from .simulator import (
    ClosedLoop,
    FollowerSpec,
    FollowerTrack,
    NetworkScenario,
    SimulationDiverged,
    Trajectory,
    closed_loop_derivative,
    convergence_order,
    integrate,
    rk4_path,
    rk4_step,
)
from .verify import SuiteResult, format_suite_table, run_inequality_suites

__version__ = "0.1.0"
