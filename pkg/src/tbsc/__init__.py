"""Rate-optimal binary streaming codes for three-node relay networks with burst erasures."""

__version__ = "0.1.0"

from .constructions import (  # noqa: E402
    FeasibilityReport,
    TypeAParams,
    TypeBParams,
    build_tbsc,
    build_type_a,
    build_type_b,
    feasibility,
    predicted_profile_a,
    predicted_profile_b,
    rate_bound,
    reduced_p0_matrix,
)
from .gf2 import BinMatrix, IncrementalSolver, is_invertible, mat_mul, rank  # noqa: E402
from .oracle import (  # noqa: E402
    VerificationReport,
    enumerate_schedules,
    oracle_recovery_times,
    recovery_matrix,
    verify_tbsc,
)
from .relay import (  # noqa: E402
    RelayNetworkSpec,
    SimulationReport,
    relay_lag,
    simulate_network,
    worst_case_delays,
)
from .streaming import (  # noqa: E402
    Decoder,
    DelayProfile,
    Encoder,
    ErasureSchedule,
    StreamCodeSpec,
    is_admissible,
    measure_delay_profile,
)
