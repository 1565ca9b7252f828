"""Three-phase measurement sessions and the derived report columns.

A session samples inactivity, runs the workload under sampling (optionally
repeated), then samples inactivity again. Init DR is the average discharge
rate across the two inactivity phases, Running DR the rate under strain,
Alg DR their difference; energy and carbon follow from Alg DR and the
strain duration. Canonical energy is watt-hours; the W*min figure that some
published tables call "Energy [Wh]" is also computed so those tables can be
reproduced (see --paper-units in the CLI).
"""

from __future__ import annotations

import re
import shlex
import subprocess
import threading
import time
import warnings
from dataclasses import dataclass
from statistics import fmean

import numpy as np

from .errors import (
    ChargeLevelWarning,
    ConfigError,
    NegativeFootprintWarning,
    NegativeStrainWarning,
    WorkloadFailedError,
)
from .intensity import DEFAULT_INTENSITY, CarbonIntensity
from .powersource import PowerSample, PowerSource, SourceDescriptor, SourceKind, open_source
from .traceio import PowerTrace, mean_power
from .workloads import WorkloadSpec, expected_checksum, run_workload

#: Hard floor for the inactivity phases; shorter baselines are too noisy.
MIN_BASELINE_SECS = 10.0

DEFAULT_BASELINE_SECS = 60.0


@dataclass(frozen=True)
class ExternalCommand:
    """An arbitrary command line profiled as the strain workload."""

    argv: tuple[str, ...]

    def __post_init__(self):
        if not self.argv:
            raise ConfigError("external command must not be empty")

    @classmethod
    def parse(cls, line: str) -> "ExternalCommand":
        return cls(tuple(shlex.split(line)))

    @property
    def label(self) -> str:
        return " ".join(self.argv)


@dataclass(frozen=True)
class SessionConfig:
    baseline_secs: float = DEFAULT_BASELINE_SECS
    runs: int = 1
    intensity: CarbonIntensity = DEFAULT_INTENSITY


@dataclass(frozen=True)
class PhaseStats:
    mean_w: float | None
    duration_s: float


@dataclass(frozen=True)
class StrainRun:
    """One workload repetition: its trace, logical duration and outcome."""

    trace: PowerTrace | None
    duration_s: float
    wall_s: float
    checksum: int | None


@dataclass(frozen=True)
class MeasurementSession:
    """Raw material of one measured session, before any averaging."""

    workload: str
    iters: int | None
    pre: PowerTrace | None
    post: PowerTrace | None
    strain_runs: tuple[StrainRun, ...]
    charge_start: float | None = None
    charge_end: float | None = None

    def __post_init__(self):
        if len(self.strain_runs) < 1:
            raise ConfigError("a session needs at least one strain run")
        for run in self.strain_runs:
            if not (run.duration_s > 0):
                raise ConfigError("strain durations must be > 0")


@dataclass(frozen=True)
class RunReportRow:
    run: int
    running_dr_w: float | None
    alg_dr_w: float | None
    time_s: float
    energy_wh: float | None
    energy_paper_wmin: float | None
    carbon_g: float | None
    carbon_paper_g: float | None
    checksum: int | None


@dataclass(frozen=True)
class SessionReport:
    """Averaged session results plus the per-repetition rows."""

    workload: str
    iters: int | None
    runs: int
    phases: dict[str, PhaseStats]
    init_dr_w: float | None
    running_dr_w: float | None
    alg_dr_w: float | None
    time_s: float
    energy_wh: float | None
    energy_paper_wmin: float | None
    carbon_g: float | None
    carbon_paper_g: float | None
    intensity: CarbonIntensity
    checksum: int | None
    per_run: tuple[RunReportRow, ...]
    charge_start: float | None = None
    charge_end: float | None = None


def compute_alg_dr(init_dr: float, running_dr: float) -> float:
    """Discharge rate attributable to the workload: running minus baseline.

    A negative result is returned as-is but flagged with
    NegativeStrainWarning, since it signals baseline drift.
    """
    for name, value in (("init_dr", init_dr), ("running_dr", running_dr)):
        if not np.isfinite(value) or value < 0:
            raise ValueError(f"{name} must be finite and >= 0, got {value}")
    alg = running_dr - init_dr
    # rounding dust from averaging equal baselines is not drift
    if alg < -1e-12 * max(init_dr, 1.0):
        warnings.warn(
            f"running DR {running_dr} below init DR {init_dr}; baseline drift?",
            NegativeStrainWarning,
            stacklevel=2,
        )
    return alg


def compute_carbon(energy_wh: float, intensity: CarbonIntensity) -> float:
    """Grams of CO2e for an energy amount. The kg/kWh factor equals g/Wh,
    so this is a single multiplication."""
    if energy_wh < 0:
        raise ValueError(f"energy must be >= 0, got {energy_wh}")
    return energy_wh * intensity.factor


def strain_footprint(total_strain: float, avg_inactivity: float) -> float:
    """Footprint attributable to the workload: total strain-phase footprint
    minus the average inactivity footprint."""
    if total_strain < 0 or avg_inactivity < 0:
        raise ValueError("footprint inputs must be >= 0")
    result = total_strain - avg_inactivity
    if result < 0:
        warnings.warn(
            f"strain footprint {total_strain} below inactivity {avg_inactivity}",
            NegativeFootprintWarning,
            stacklevel=2,
        )
    return result


def strain_footprint_scaled(total_strain: float, baseline_rate: float,
                            strain_duration: float) -> float:
    """Duration-corrected variant: subtracts baseline_rate * strain_duration
    instead of a raw inactivity figure."""
    if total_strain < 0 or baseline_rate < 0 or strain_duration < 0:
        raise ValueError("footprint inputs must be >= 0")
    result = total_strain - baseline_rate * strain_duration
    if result < 0:
        warnings.warn(
            f"scaled strain footprint came out negative ({result})",
            NegativeFootprintWarning,
            stacklevel=2,
        )
    return result


def _derive(init_dr: float, running_dr: float, time_s: float,
            intensity: CarbonIntensity):
    alg = compute_alg_dr(init_dr, running_dr)
    energy_wh = alg * time_s / 3600.0
    energy_wmin = alg * time_s / 60.0
    return alg, energy_wh, energy_wmin, energy_wh * intensity.factor, energy_wmin * intensity.factor


def compute_session_report(session: MeasurementSession, cfg: SessionConfig) -> SessionReport:
    """Derive the report columns from a session's traces.

    Pure function over the session, so tests can feed synthetic sessions
    directly. With no power traces (timing-only sessions) the power columns
    are None.
    """
    have_power = (
        session.pre is not None
        and session.post is not None
        and all(r.trace is not None for r in session.strain_runs)
    )

    init_dr = pre_stats = post_stats = None
    if have_power:
        pre_mean = mean_power(session.pre)
        post_mean = mean_power(session.post)
        init_dr = (pre_mean + post_mean) / 2.0
        pre_stats = PhaseStats(pre_mean, session.pre.duration)
        post_stats = PhaseStats(post_mean, session.post.duration)
    else:
        pre_stats = post_stats = PhaseStats(None, 0.0)

    rows = []
    for idx, run in enumerate(session.strain_runs, start=1):
        if have_power:
            running = mean_power(run.trace)
            alg, e_wh, e_min, c_g, c_paper = _derive(
                init_dr, running, run.duration_s, cfg.intensity
            )
            rows.append(RunReportRow(idx, running, alg, run.duration_s,
                                     e_wh, e_min, c_g, c_paper, run.checksum))
        else:
            rows.append(RunReportRow(idx, None, None, run.duration_s,
                                     None, None, None, None, run.checksum))

    time_s = fmean(r.time_s for r in rows)
    if have_power:
        running_dr = fmean(r.running_dr_w for r in rows)
        alg, e_wh, e_min, c_g, c_paper = _derive(init_dr, running_dr, time_s, cfg.intensity)
    else:
        running_dr = alg = e_wh = e_min = c_g = c_paper = None

    return SessionReport(
        workload=session.workload,
        iters=session.iters,
        runs=len(rows),
        phases={
            "pre": pre_stats,
            "strain": PhaseStats(running_dr, time_s),
            "post": post_stats,
        },
        init_dr_w=init_dr,
        running_dr_w=running_dr,
        alg_dr_w=alg,
        time_s=time_s,
        energy_wh=e_wh,
        energy_paper_wmin=e_min,
        carbon_g=c_g,
        carbon_paper_g=c_paper,
        intensity=cfg.intensity,
        checksum=rows[0].checksum,
        per_run=tuple(rows),
        charge_start=session.charge_start,
        charge_end=session.charge_end,
    )


_CHECKSUM_RE = re.compile(r"checksum=(-?\d+)")


def _execute_workload(workload) -> tuple[int | None, float]:
    """Run the workload once; return (checksum, wall seconds)."""
    if isinstance(workload, WorkloadSpec):
        result = run_workload(workload)
        want = expected_checksum(workload.max_iter, workload.window)
        if result.checksum != want:
            raise WorkloadFailedError(
                f"{workload.variant.value} checksum {result.checksum} != expected {want}"
            )
        return result.checksum, result.wall_time

    start = time.perf_counter()
    try:
        proc = subprocess.run(list(workload.argv), capture_output=True, text=True)
    except OSError as exc:
        raise WorkloadFailedError(f"cannot launch {workload.label!r}: {exc}") from exc
    wall = time.perf_counter() - start
    if proc.returncode != 0:
        tail = proc.stderr.strip()[-500:]
        raise WorkloadFailedError(
            f"command {workload.label!r} exited {proc.returncode}: {tail}"
        )
    checksum = None
    for line in reversed(proc.stdout.splitlines()):
        m = _CHECKSUM_RE.search(line)
        if m:
            checksum = int(m.group(1))
            break
    return checksum, wall


def _workload_identity(workload) -> tuple[str, int | None]:
    if isinstance(workload, WorkloadSpec):
        return workload.variant.value, workload.max_iter
    return workload.label, None


class _Sampler(threading.Thread):
    """Samples a source at its cadence until told to stop.

    Takes one reading immediately and one more on stop, so even very short
    phases produce an integrable trace.
    """

    def __init__(self, source: PowerSource):
        super().__init__(daemon=True)
        self.source = source
        self.interval = source.descriptor.sample_interval
        self.samples: list[PowerSample] = []
        self.error: Exception | None = None
        self._halt = threading.Event()  # name must not shadow Thread._stop

    def run(self):
        next_at = time.perf_counter()
        while True:
            try:
                self.samples.append(self.source.sample())
            except Exception as exc:  # surfaced in finish()
                self.error = exc
                return
            next_at += self.interval
            delay = next_at - time.perf_counter()
            if self._halt.wait(max(delay, 0.0)):
                return

    def finish(self) -> PowerTrace:
        self._halt.set()
        self.join()
        if self.error is not None:
            raise self.error
        self.samples.append(self.source.sample())
        return PowerTrace(tuple(self.samples))


def _sample_phase_realtime(source: PowerSource, secs: float) -> PowerTrace:
    sampler = _Sampler(source)
    sampler.start()
    time.sleep(secs)
    return sampler.finish()


def _pull_samples(source: PowerSource, duration: float, interval: float) -> PowerTrace:
    n = max(2, int(round(duration / interval)) + 1)
    return PowerTrace(tuple(source.sample() for _ in range(n)))


def _interp_sample(trace: PowerTrace, t: float) -> PowerSample:
    w = float(np.interp(t, trace.times(), trace.watts()))
    return PowerSample(t=t, watts=w)


def _slice_trace(trace: PowerTrace, a: float, b: float) -> PowerTrace:
    # boundary samples are interpolated so the slice spans [a, b] exactly
    times = trace.times()
    inner = [s for s, t in zip(trace.samples, times) if a < t < b]
    return PowerTrace(tuple([_interp_sample(trace, a)] + inner + [_interp_sample(trace, b)]))


def _run_simulated(workload, source: PowerSource, cfg: SessionConfig) -> MeasurementSession:
    interval = source.descriptor.sample_interval
    source.notify_phase("pre")
    pre = _pull_samples(source, cfg.baseline_secs, interval)

    injected = getattr(source, "strain_secs", None)
    runs = []
    for _ in range(cfg.runs):
        source.notify_phase("strain")
        checksum, wall = _execute_workload(workload)
        duration = injected if injected is not None else max(wall, 1e-9)
        runs.append(StrainRun(_pull_samples(source, duration, interval),
                              duration, wall, checksum))

    source.notify_phase("post")
    post = _pull_samples(source, cfg.baseline_secs, interval)
    label, iters = _workload_identity(workload)
    return MeasurementSession(label, iters, pre, post, tuple(runs))


def _run_realtime(workload, source: PowerSource, cfg: SessionConfig) -> MeasurementSession:
    charge = getattr(source, "charge_level", lambda: None)
    charge_start = charge()
    if charge_start is not None and charge_start < 100:
        warnings.warn(
            f"battery at {charge_start:.0f}%, not full; discharge is non-linear, "
            f"prefer starting from a full charge",
            ChargeLevelWarning,
            stacklevel=3,
        )

    source.notify_phase("pre")
    pre = _sample_phase_realtime(source, cfg.baseline_secs)

    runs = []
    for _ in range(cfg.runs):
        source.notify_phase("strain")
        sampler = _Sampler(source)
        sampler.start()
        try:
            checksum, wall = _execute_workload(workload)
        finally:
            trace = sampler.finish()
        runs.append(StrainRun(trace, max(wall, 1e-9), wall, checksum))

    source.notify_phase("post")
    post = _sample_phase_realtime(source, cfg.baseline_secs)
    label, iters = _workload_identity(workload)
    return MeasurementSession(label, iters, pre, post, tuple(runs),
                              charge_start=charge_start, charge_end=charge())


def _run_replay(workload, source: PowerSource, cfg: SessionConfig) -> MeasurementSession:
    """Offline segmentation of a recorded session trace: first baseline_secs
    is the pre phase, last baseline_secs the post phase, the middle is the
    strain. The workload still executes natively for its checksum."""
    if cfg.runs != 1:
        raise ConfigError("replay sessions support exactly one run")
    trace = source.trace
    b = cfg.baseline_secs
    if trace.duration <= 2 * b:
        raise ConfigError(
            f"trace spans {trace.duration:.3f} s; needs more than twice the "
            f"baseline ({b} s) to hold a strain segment"
        )
    t0, t1 = trace.t_first, trace.t_last
    pre = _slice_trace(trace, t0, t0 + b)
    strain = _slice_trace(trace, t0 + b, t1 - b)
    post = _slice_trace(trace, t1 - b, t1)

    checksum, _wall = _execute_workload(workload)
    run = StrainRun(strain, strain.duration, _wall, checksum)
    label, iters = _workload_identity(workload)
    return MeasurementSession(label, iters, pre, post, (run,))


def _run_timing_only(workload, cfg: SessionConfig) -> MeasurementSession:
    runs = []
    for _ in range(cfg.runs):
        checksum, wall = _execute_workload(workload)
        runs.append(StrainRun(None, max(wall, 1e-9), wall, checksum))
    label, iters = _workload_identity(workload)
    return MeasurementSession(label, iters, None, None, tuple(runs))


def run_session(workload, source: SourceDescriptor | None,
                cfg: SessionConfig | None = None) -> SessionReport:
    """Execute the full three-phase protocol and return the report.

    `workload` is a WorkloadSpec or an ExternalCommand; `source` None means
    timing-only (no power columns). Source errors propagate; a nonzero
    workload exit or checksum mismatch raises WorkloadFailedError.
    """
    cfg = cfg or SessionConfig()
    if cfg.runs < 1:
        raise ConfigError(f"runs must be >= 1, got {cfg.runs}")
    if source is not None and cfg.baseline_secs < MIN_BASELINE_SECS:
        raise ConfigError(
            f"baseline_secs must be >= {MIN_BASELINE_SECS:.0f}, got {cfg.baseline_secs}"
        )

    if source is None:
        session = _run_timing_only(workload, cfg)
    else:
        src = open_source(source)
        try:
            if source.kind is SourceKind.TRACE_REPLAY:
                session = _run_replay(workload, src, cfg)
            elif src.realtime:
                session = _run_realtime(workload, src, cfg)
            else:
                session = _run_simulated(workload, src, cfg)
        finally:
            src.close()
    return compute_session_report(session, cfg)
