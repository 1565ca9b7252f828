"""Exception and warning taxonomy shared by all carbonprof modules."""


class CarbonprofError(Exception):
    """Base class for every error raised by this package."""


# --- power sources ---

class SourceError(CarbonprofError):
    """A power source could not be opened or read."""


class NoBatteryError(SourceError):
    """No battery interface was found on this platform."""


class OnACPowerError(SourceError):
    """The battery is not discharging; measurements require battery power only."""


class ReadFailureError(SourceError):
    """A battery interface read failed or returned an invalid value."""


class SourceExhaustedError(SourceError):
    """A trace replay source has no samples left."""


class TraceNotFoundError(SourceError):
    """The trace file named by a replay descriptor does not exist."""


# --- traces ---

class TraceError(CarbonprofError):
    """Base class for trace parsing and analysis errors."""


class TraceParseError(TraceError):
    """The input is not a valid trace CSV."""


class MalformedRowError(TraceParseError):
    """A data row has the wrong column count or a non-numeric cell."""


class NonMonotonicTimeError(TraceParseError):
    """Timestamps do not strictly increase."""


class EmptyTraceError(TraceParseError):
    """The input contains no data rows."""


class RangeOutsideTraceError(TraceError):
    """An integration or averaging interval falls outside the trace."""


class NoStrainDetectedError(TraceError):
    """No strain window rose above the detection threshold.

    Carries the baseline statistics so callers can still report them.
    """

    def __init__(self, message, baseline_mean=None, baseline_std=None, threshold=None):
        super().__init__(message)
        self.baseline_mean = baseline_mean
        self.baseline_std = baseline_std
        self.threshold = threshold


# --- workloads and sessions ---

class WorkloadError(CarbonprofError):
    """A workload specification is invalid."""


class ChecksumOverflowError(WorkloadError):
    """The final checksum would not fit a signed 64-bit integer;
    max_iter is too large for the integer width."""


class WorkloadFailedError(CarbonprofError):
    """A profiled workload exited nonzero or produced a wrong checksum."""


class UnknownRegionError(CarbonprofError):
    """No bundled carbon-intensity entry for the requested region."""

    def __init__(self, region, known):
        super().__init__(
            f"unknown region {region!r}; bundled regions: {', '.join(sorted(known))} "
            f"(or pass an explicit factor)"
        )
        self.region = region
        self.known = tuple(known)


class ConfigError(CarbonprofError):
    """Invalid command-line or session configuration."""


# --- warnings ---

class NegativeStrainWarning(UserWarning):
    """Running DR fell below Init DR; the baseline probably drifted."""


class NegativeFootprintWarning(UserWarning):
    """A baseline-subtracted footprint came out negative."""


class ChargeLevelWarning(UserWarning):
    """The battery was not at full charge when the session started."""
