"""carbonprof: energy and carbon-footprint profiling of running workloads.

Measures the power a workload draws on top of the idle system using a
three-phase protocol (inactivity, strain, inactivity), converts the excess
into energy and grams of CO2e, ships four built-in iteration benchmarks as
controlled strain generators, and analyzes recorded power-meter traces
offline.
"""

from .errors import (
    CarbonprofError,
    ChecksumOverflowError,
    ConfigError,
    EmptyTraceError,
    MalformedRowError,
    NegativeFootprintWarning,
    NegativeStrainWarning,
    NoBatteryError,
    NonMonotonicTimeError,
    NoStrainDetectedError,
    OnACPowerError,
    RangeOutsideTraceError,
    ReadFailureError,
    SourceError,
    SourceExhaustedError,
    TraceError,
    TraceNotFoundError,
    TraceParseError,
    UnknownRegionError,
    WorkloadError,
    WorkloadFailedError,
)
from .intensity import (
    DEFAULT_INTENSITY,
    DEFAULT_REGION,
    REGION_INTENSITY,
    CarbonIntensity,
    lookup_intensity,
)
from .powersource import (
    BatterySource,
    PowerSample,
    PowerSource,
    SourceDescriptor,
    SourceKind,
    SyntheticSource,
    TraceReplaySource,
    open_source,
)
from .protocol import (
    ExternalCommand,
    MeasurementSession,
    PhaseStats,
    SessionConfig,
    SessionReport,
    StrainRun,
    compute_alg_dr,
    compute_carbon,
    compute_session_report,
    run_session,
    strain_footprint,
    strain_footprint_scaled,
)
from .traceio import (
    PowerTrace,
    StrainWindow,
    baseline_stats,
    detect_strain_window,
    integrate_energy,
    mean_power,
    parse_trace,
    read_trace,
    serialize_trace,
    trace_from_arrays,
    write_trace,
)
from .workloads import (
    Variant,
    WorkloadResult,
    WorkloadSpec,
    expected_checksum,
    expected_head,
    oracle_rotate,
    run_workload,
)

__version__ = "0.1.0"
