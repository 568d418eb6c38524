"""Simulation and numerical verification of unicycle consensus under
switching communication topologies.

The package splits into graph algebra (:mod:`swsim.graphs`), switching
signals and joint-connectivity analysis (:mod:`swsim.switching`), the
controlled dynamics and integrator (:mod:`swsim.dynamics`), run-time
verification monitors (:mod:`swsim.diagnostics`), and the scenario/file
layer with its CLI (:mod:`swsim.scenario`, :mod:`swsim.cli`).
"""

from .graphs import (
    GraphFamily,
    WeightedGraph,
    centering_matrix,
    connected_subsets,
    generalized_laplacian,
    is_connected,
    laplacian,
    min_positive_eigenvalue,
    offdiag_norm,
    union_graph,
    union_laplacian,
)
from .switching import (
    GujcReport,
    JointGraphParams,
    SwitchSchedule,
    check_gujc,
    connectivity_margin,
    constant_schedule,
    dwell_free_schedule,
    explicit_schedule,
    joint_graph,
    window_laplacian_integral,
)
from .dynamics import (
    BodyFrameState,
    ControllerParams,
    EventDensityError,
    ExcitationProfile,
    PhaseCheck,
    SwarmState,
    Trajectory,
    body_rhs,
    body_transform,
    body_transform_inverse,
    check_phase_condition,
    control_input,
    default_step,
    excitation_rhs,
    integrate,
    rotation_coupling,
    world_rhs,
)
from .diagnostics import (
    BoundConstants,
    DecayFit,
    EnergyReport,
    GronwallInstance,
    GronwallVerdict,
    Monitors,
    PhaseConsistency,
    consensus_distance,
    demean,
    energy_bound,
    fit_exponential_decay,
    gronwall_check,
    monitor_values,
    output_energy,
    phase_consistency_check,
    sliding_window_energy,
    switched_energy_cumulative,
    trajectory_channels,
    virtual_output_heading,
    virtual_output_joint,
    window_energy_trend,
)
from .scenario import (
    CONSENSUS_THRESHOLD,
    ConfigError,
    RunReport,
    ScenarioConfig,
    default_scenario_path,
    parse_config,
    run_batch,
    run_scenario,
    serialize,
    write_trajectory_csv,
)

__version__ = "0.1.0"
