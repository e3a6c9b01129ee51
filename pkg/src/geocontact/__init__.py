"""Geodesic contact curves for rolling rigid bodies.

Contact curves that are time-parameterized geodesics on both surfaces keep
two bodies rolling: the relative tangential acceleration is then proportional
to the relative velocity, so a slip-free start stays slip-free.  A feedback
term on the object curve turns that proportionality into exponential decay of
slip.  The package provides surface charts, contact kinematics, the geodesic
and feedback-modified right-hand sides, rolling diagnostics, a small
penalty-contact dynamics model and a scenario runner.
"""

from .contact import (
    ContactState,
    RelativeMotion,
    proportionality_residual,
    relative_acceleration,
    relative_velocity,
    rotation_psi,
)
from .dynamics import (
    ContactForceRecord,
    DynamicsParams,
    RigidBodyState,
    World,
    friction_force,
    penalty_normal_force,
    step_dynamics,
)
from .errors import (
    DegenerateChartError,
    DomainError,
    GeoContactError,
    IntegrationError,
    InvalidParameterError,
    ScenarioError,
    SingularProfileError,
)
from .geodesic import (
    ContactPairSystem,
    ContractionWarning,
    Disturbance,
    SigmaProfile,
    geodesic_rhs,
    integrate,
    modified_geodesic_rhs,
)
from .rolling import (
    corollary_check,
    geodesic_curvature,
    geodesic_residual,
    initial_state,
    plane_deviation,
    rolling_map,
    rolling_rates,
    simulate_rolling,
)
from .scenario import Scenario, SummaryMetrics, TrajectoryLog, load_scenario, run
from .surface import (
    Chart,
    Christoffel,
    build_chart,
    check_orthogonality,
    cylinder_chart,
    ellipsoid_chart,
    finite_difference_chart,
    geometry_at,
    sphere_chart,
)

__version__ = "0.1.0"
