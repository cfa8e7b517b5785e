"""riverkpp: Fisher-KPP population dynamics on star-shaped river networks.

Computes stationary states via phase-plane threshold constructions,
time-integrates the reaction-advection-diffusion system on truncated star
graphs with Kirchhoff junction coupling, and classifies the long-time
outcome (washout / persistence at capacity / persistence below capacity).
"""

__version__ = "0.1.0"

from .network import (  # noqa: F401
    BranchSpec,
    JunctionWeights,
    Orientation,
    RiverNetwork,
    Topology,
    build_network,
    junction_weights,
    one_up_two_down,
    read_network_config,
    two_branch,
    two_up_one_down,
    write_network_config,
)
from .phaseplane import (  # noqa: F401
    EquilibriumReport,
    GridOptions,
    IntegrationOptions,
    OriginType,
    PhasePoint,
    PsiCurve,
    TrajectoryCurve,
    TrajectoryKind,
    equilibrium_eigen,
    psi_curve,
    trace_special_trajectory,
    vector_field,
)
from .stationary import (  # noqa: F401
    CaseTag,
    DecayClass,
    DecayKind,
    RelaxationOptions,
    StationaryProfile,
    ThresholdReport,
    classify_case,
    compute_thresholds,
    decay_exponents,
    decay_rate,
    existence_classification,
    relaxation_oracle,
    stationary_profile,
    supersolution_init,
)
from .simulator import (  # noqa: F401
    FarBC,
    GridSpec,
    SimulationState,
    Stepper,
    TimeSeries,
    bump_init,
    check_ordering,
    discretize,
    lyapunov_value,
    run,
    step,
    truncation_convergence,
)
from .classify import (  # noqa: F401
    PersistenceState,
    SimOptions,
    VerificationReport,
    classify_parameters,
    classify_simulation,
    sweep,
    verify_trichotomy,
)
