"""onsim: thermal dynamics, Floquet stability and beat analysis for the
large-N O(N) oscillator."""

from .analysis import BeatReport, EnvelopeSeries, beat_report, extract_envelope
from .dynamics import (
    S_MIN,
    IntegratorConfig,
    IntegratorStats,
    State,
    Trajectory,
    derivative,
    energy_x,
    integrate,
    linearized_frequency,
    locate_turning_events,
    time_reversal_roundtrip,
)
from .errors import (
    BracketError,
    DegenerateMotionError,
    DomainError,
    EventNotFoundError,
    InsufficientDataError,
    NonMonotonicError,
    NumericalError,
    SimulationError,
    UndersampledError,
    ValidationError,
)
from .floquet import (
    DET_ERROR_LIMIT,
    TOL_BOUNDARY,
    MonodromyResult,
    PeriodEstimate,
    classify_stability,
    compute_monodromy,
    find_inner_turning_point,
    multiplier_deviation,
    period_by_events,
    period_by_quadrature,
)
from .potential import Potential, format_coefficients, parse_coefficients
from .scan import (
    GridSpec,
    ScanRecord,
    assert_no_resonance,
    default_grid,
    records_to_csv,
    run_scan,
)
from .thermal import (
    PerturbedSetup,
    build_setup,
    effective_gradient,
    effective_potential,
    energy_per_dof,
    gap_residual,
    matsubara_x0,
    solve_gap_equation,
)

__version__ = "0.1.0"
