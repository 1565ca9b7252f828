"""Power-trace parsing, serialization, integration and strain detection.

The canonical trace format is CSV (UTF-8, LF or CRLF) with header
``t_s,v_V,i_A`` or ``t_s,v_V,i_A,p_W``. Timestamps must strictly increase.
When p_W is absent it is derived as v_V*i_A; v_V/i_A cells may be empty when
p_W carries the reading (battery recordings know only watts). All analysis
operations are pure over immutable traces.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyTraceError,
    MalformedRowError,
    NonMonotonicTimeError,
    NoStrainDetectedError,
    RangeOutsideTraceError,
    TraceParseError,
)
from .powersource import PowerSample, SourceDescriptor

CSV_COLUMNS = ("t_s", "v_V", "i_A")
CSV_COLUMNS_P = ("t_s", "v_V", "i_A", "p_W")


@dataclass(frozen=True)
class PowerTrace:
    """An ordered run of power samples."""

    samples: tuple[PowerSample, ...]
    origin: SourceDescriptor | None = None

    def __post_init__(self):
        if not self.samples:
            raise EmptyTraceError("a trace needs at least one sample")
        object.__setattr__(self, "samples", tuple(self.samples))
        prev = None
        for s in self.samples:
            if prev is not None and s.t <= prev:
                raise NonMonotonicTimeError(
                    f"timestamps must strictly increase ({s.t} after {prev})"
                )
            prev = s.t

    def __len__(self):
        return len(self.samples)

    @property
    def t_first(self) -> float:
        return self.samples[0].t

    @property
    def t_last(self) -> float:
        return self.samples[-1].t

    @property
    def duration(self) -> float:
        return self.t_last - self.t_first

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def watts(self) -> np.ndarray:
        return np.array([s.watts for s in self.samples], dtype=float)


@dataclass(frozen=True)
class StrainWindow:
    """A detected strain segment and the baseline it rose above."""

    t_start: float
    t_end: float
    mean_power: float
    baseline_power: float

    def __post_init__(self):
        if not (self.t_end > self.t_start):
            raise ValueError("t_end must be greater than t_start")
        if self.mean_power < 0:
            raise ValueError("mean_power must be >= 0")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def _cell(raw: str, what: str, lineno: int) -> float | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise MalformedRowError(
            f"line {lineno}: {what} cell {raw!r} is not a number"
        ) from None


def parse_trace(data: bytes | str, origin: SourceDescriptor | None = None) -> PowerTrace:
    """Parse trace CSV into a PowerTrace.

    Raises MalformedRowError, NonMonotonicTimeError or EmptyTraceError.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise TraceParseError(f"trace is not UTF-8: {exc}") from exc

    lines = data.splitlines()
    if not lines:
        raise EmptyTraceError("no header line")
    header = tuple(c.strip() for c in lines[0].split(","))
    if header == CSV_COLUMNS:
        has_p = False
    elif header == CSV_COLUMNS_P:
        has_p = True
    else:
        raise TraceParseError(
            f"bad header {lines[0]!r}; expected {','.join(CSV_COLUMNS)}[,p_W]"
        )

    samples = []
    prev_t = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise MalformedRowError(
                f"line {lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        t = _cell(cells[0], "t_s", lineno)
        volts = _cell(cells[1], "v_V", lineno)
        amps = _cell(cells[2], "i_A", lineno)
        p = _cell(cells[3], "p_W", lineno) if has_p else None
        if t is None:
            raise MalformedRowError(f"line {lineno}: t_s is empty")
        if p is not None:
            watts = p
        elif volts is not None and amps is not None:
            watts = volts * amps
        else:
            raise MalformedRowError(
                f"line {lineno}: needs p_W or both v_V and i_A"
            )
        if prev_t is not None and t <= prev_t:
            raise NonMonotonicTimeError(
                f"line {lineno}: t_s {t} does not increase past {prev_t}"
            )
        prev_t = t
        try:
            samples.append(PowerSample(t=t, watts=watts, volts=volts, amps=amps))
        except ValueError as exc:
            raise MalformedRowError(f"line {lineno}: {exc}") from exc

    if not samples:
        raise EmptyTraceError("no data rows")
    return PowerTrace(tuple(samples), origin)


def read_trace(path: str | Path, origin: SourceDescriptor | None = None) -> PowerTrace:
    return parse_trace(Path(path).read_bytes(), origin)


def serialize_trace(trace: PowerTrace) -> str:
    """Render a trace back to canonical CSV (full float precision, so a
    round trip is value-exact)."""
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS_P) + "\n")
    for s in trace.samples:
        v = repr(s.volts) if s.volts is not None else ""
        a = repr(s.amps) if s.amps is not None else ""
        out.write(f"{s.t!r},{v},{a},{s.watts!r}\n")
    return out.getvalue()


def write_trace(trace: PowerTrace, path: str | Path) -> None:
    Path(path).write_text(serialize_trace(trace), encoding="utf-8")


def _resolve_range(trace: PowerTrace, t0: float | None, t1: float | None):
    if t0 is None:
        t0 = trace.t_first
    if t1 is None:
        t1 = trace.t_last
    if not (t0 < t1):
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    if t0 < trace.t_first or t1 > trace.t_last:
        raise RangeOutsideTraceError(
            f"[{t0}, {t1}] outside trace span [{trace.t_first}, {trace.t_last}]"
        )
    return t0, t1


def integrate_energy(trace: PowerTrace, t0: float | None = None,
                     t1: float | None = None) -> float:
    """Trapezoidal energy over [t0, t1] in watt-hours.

    Boundary values are linearly interpolated; defaults cover the whole
    trace. Raises RangeOutsideTraceError when the interval leaves the trace.
    """
    if len(trace) < 2:
        raise RangeOutsideTraceError("integration needs at least 2 samples")
    t0, t1 = _resolve_range(trace, t0, t1)
    times = trace.times()
    watts = trace.watts()
    w0 = float(np.interp(t0, times, watts))
    w1 = float(np.interp(t1, times, watts))
    inner = (times > t0) & (times < t1)
    ts = np.concatenate(([t0], times[inner], [t1]))
    ws = np.concatenate(([w0], watts[inner], [w1]))
    joules = float(np.trapezoid(ws, ts))
    return joules / 3600.0


def mean_power(trace: PowerTrace, t0: float | None = None,
               t1: float | None = None) -> float:
    """Time-weighted mean power over [t0, t1] in watts."""
    lo, hi = _resolve_range(trace, t0, t1)
    return integrate_energy(trace, lo, hi) * 3600.0 / (hi - lo)


def baseline_stats(trace: PowerTrace, t0: float, t1: float) -> tuple[float, float]:
    """Mean and standard deviation of the samples inside [t0, t1]."""
    t0, t1 = _resolve_range(trace, t0, t1)
    times = trace.times()
    watts = trace.watts()
    sel = (times >= t0) & (times <= t1)
    if int(sel.sum()) < 2:
        raise ValueError(f"baseline [{t0}, {t1}] covers fewer than 2 samples")
    chunk = watts[sel]
    return float(chunk.mean()), float(chunk.std())


def _rolling_mean(values: np.ndarray, width: int) -> np.ndarray:
    # centered, shrinking toward the edges
    n = len(values)
    half = width // 2
    csum = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def _true_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    # inclusive (start, end) index pairs of contiguous True stretches
    edges = np.flatnonzero(np.diff(np.concatenate(([0], mask.astype(np.int8), [0]))))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def detect_strain_window(trace: PowerTrace, baseline_t0: float, baseline_t1: float,
                         k: float = 3.0, smooth_samples: int = 5,
                         max_dip_samples: int = 3) -> StrainWindow:
    """Locate the strain step in a trace.

    Baseline mean/std come from [baseline_t0, baseline_t1]; the strain
    window is the longest contiguous run where the centered rolling mean
    (smooth_samples wide) exceeds mean + k*std. Transient dips shorter than
    max_dip_samples do not split a window. Raises NoStrainDetectedError when
    nothing rises above the threshold.
    """
    if not (k > 0):
        raise ValueError(f"k must be > 0, got {k}")
    mu, sigma = baseline_stats(trace, baseline_t0, baseline_t1)
    threshold = mu + k * sigma
    # the epsilon keeps rounding noise in the rolling mean from tripping a
    # zero-sigma threshold on perfectly flat traces
    cutoff = threshold + 1e-9 * max(abs(mu), 1.0)

    times = trace.times()
    watts = trace.watts()
    smoothed = _rolling_mean(watts, smooth_samples)
    above = smoothed > cutoff

    runs = _true_runs(above)
    if not runs:
        raise NoStrainDetectedError(
            f"no sample rises above the threshold {threshold:.6g} W "
            f"(baseline {mu:.6g} +/- {sigma:.6g} W, k={k})",
            baseline_mean=mu, baseline_std=sigma, threshold=threshold,
        )

    merged = [runs[0]]
    for start, end in runs[1:]:
        prev_start, prev_end = merged[-1]
        if start - prev_end - 1 < max_dip_samples:
            merged[-1] = (prev_start, end)
        else:
            merged.append((start, end))

    start, end = max(merged, key=lambda r: r[1] - r[0])

    # refine against raw samples: the smoothing pass widens the run by up to
    # half the smoothing window on each side
    raw_above = np.flatnonzero(watts[start:end + 1] > cutoff)
    if raw_above.size >= 2 and raw_above[-1] > raw_above[0]:
        start, end = start + int(raw_above[0]), start + int(raw_above[-1])

    if end - start < 1:
        raise NoStrainDetectedError(
            "only an isolated sample rises above the threshold",
            baseline_mean=mu, baseline_std=sigma, threshold=threshold,
        )
    t_start, t_end = float(times[start]), float(times[end])
    return StrainWindow(
        t_start=t_start,
        t_end=t_end,
        mean_power=mean_power(trace, t_start, t_end),
        baseline_power=mu,
    )


def trace_from_arrays(times, watts, origin: SourceDescriptor | None = None) -> PowerTrace:
    """Build a trace from parallel time/watts arrays (fixture helper)."""
    samples = tuple(
        PowerSample(t=float(t), watts=float(w)) for t, w in zip(times, watts)
    )
    return PowerTrace(samples, origin)
