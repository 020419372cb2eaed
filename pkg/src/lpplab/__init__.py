"""Simulation laboratory for exponential last passage percolation."""

__version__ = "0.1.0"

from .field import (  # noqa: E402
    EXCLUDED,
    DomainError,
    Droplet,
    FieldSpec,
    Flat,
    InitialCondition,
    LatticePoint,
    RegionViolation,
    Stationary,
    Table,
    initial_condition_at,
    make_ic,
    weight_at,
)
from .passage import (  # noqa: E402
    All,
    BackwardProfile,
    Complement,
    Intersection,
    PassageSolution,
    Rectangle,
    Strip,
    exit_constrained_max,
    expected_passage,
    point_to_point,
    solve_backward,
    solve_forward,
    solve_from_line,
)
from .geodesic import (  # noqa: E402
    GeodesicPath,
    argmax_on_line,
    crossing_point,
    overlap,
    trace_geodesic,
    transversal_fluctuation,
)
from .scaling import ScaledProfile, rescale_flat_profile, rescale_point_profile  # noqa: E402
from .estimate import (  # noqa: E402
    EstimateReport,
    ExponentFit,
    ReplicaConfig,
    covariance,
    event_probability,
    exponent_fit,
    run_replicas,
)
from .events import (  # noqa: E402
    BarrierRegion,
    CoverageError,
    EventParams,
    ParameterError,
    classify_a_b_c,
    indicator_barrier,
    indicator_e_dec,
    indicator_large_tf,
    indicator_two_peaks,
)
from .brownian import (  # noqa: E402
    BrownianPath,
    c_prime_event_mc,
    sample_bm,
    two_peak_bound,
    two_peak_mc,
)
