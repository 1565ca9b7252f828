"""Uniform sampling abstraction over power-data origins.

Three source kinds share one interface: the OS battery interface (software
path), recorded meter traces replayed sample-for-sample (hardware path), and
synthetic generators for tests and dry runs. A source hands out timestamped
PowerSample values; timestamps strictly increase per source.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    NoBatteryError,
    OnACPowerError,
    ReadFailureError,
    SourceExhaustedError,
    TraceNotFoundError,
)

#: Environment variable overriding the platform power-supply class path.
BATTERY_PATH_ENV = "CARBONPROF_BATTERY_PATH"

DEFAULT_POWER_SUPPLY_PATH = "/sys/class/power_supply"

#: Default sampling cadence in seconds.
DEFAULT_INTERVAL = 1.0


@dataclass(frozen=True)
class PowerSample:
    """One timestamped power reading.

    `t` is seconds since the owning source was opened (monotonic clock for
    live sources, file/simulated time otherwise). volts and amps are kept
    when the origin exposes them; watts is always present.
    """

    t: float
    watts: float
    volts: float | None = None
    amps: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0:
            raise ValueError(f"sample time must be finite and >= 0, got {self.t}")
        if not math.isfinite(self.watts) or self.watts < 0:
            raise ValueError(f"watts must be finite and >= 0, got {self.watts}")
        if self.volts is not None and self.amps is not None:
            va = self.volts * self.amps
            if abs(self.watts - va) > 1e-9 * max(abs(self.watts), abs(va), 1e-12):
                raise ValueError(
                    f"inconsistent sample: volts*amps = {va!r} but watts = {self.watts!r}"
                )


class SourceKind(Enum):
    BATTERY = "battery"
    TRACE_REPLAY = "trace"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class SourceDescriptor:
    """Where power readings come from and how often to take them."""

    kind: SourceKind
    location: str = ""
    sample_interval: float = DEFAULT_INTERVAL

    def __post_init__(self):
        if not (self.sample_interval > 0):
            raise ConfigError(
                f"sample_interval must be > 0, got {self.sample_interval}"
            )

    @classmethod
    def parse(cls, text: str, sample_interval: float = DEFAULT_INTERVAL) -> "SourceDescriptor":
        """Parse a CLI-style source spec: ``battery``, ``trace:<path>`` or
        ``synthetic:<generator>``."""
        t = text.strip()
        if t == "battery":
            return cls(SourceKind.BATTERY, "", sample_interval)
        if t.startswith("trace:"):
            path = t[len("trace:"):]
            if not path:
                raise ConfigError("trace source needs a path: trace:<file.csv>")
            return cls(SourceKind.TRACE_REPLAY, path, sample_interval)
        if t.startswith("synthetic:"):
            spec = t[len("synthetic:"):]
            if not spec:
                raise ConfigError("synthetic source needs a generator spec")
            return cls(SourceKind.SYNTHETIC, spec, sample_interval)
        raise ConfigError(
            f"unrecognized source {text!r}; expected battery, trace:<path> "
            f"or synthetic:<spec>"
        )


class PowerSource:
    """Handle yielding PowerSample values at roughly the descriptor cadence."""

    #: True when samples must be taken on the wall clock (a live device).
    realtime = False

    def __init__(self, descriptor: SourceDescriptor):
        self.descriptor = descriptor

    def sample(self) -> PowerSample:
        raise NotImplementedError

    def notify_phase(self, phase: str) -> None:
        """Hook for sources whose output depends on the measurement phase
        (pre/strain/post). Default: ignore."""

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class SyntheticSource(PowerSource):
    """Deterministic generator over simulated time.

    Generator specs:

    - ``constant:<watts>``
    - ``step:<baseline_w>,<strain_w>[,strain=<secs>][,noise=<sigma>][,seed=<int>]``

    A step source emits the baseline wattage except while the session is in
    its strain phase. The optional ``strain=`` duration tells the session to
    simulate that wall time instead of clocking the workload, which makes
    whole sessions reproducible. Noise is Gaussian from a seeded generator
    (seed 0 unless given), clamped at zero.
    """

    def __init__(self, descriptor: SourceDescriptor):
        super().__init__(descriptor)
        self.baseline_w, self.strain_w, self.strain_secs, self._noise, seed = (
            self._parse_spec(descriptor.location)
        )
        self._rng = np.random.default_rng(seed)
        self._count = 0
        self._phase = "pre"

    @staticmethod
    def _parse_spec(spec: str):
        head, _, rest = spec.partition(":")
        try:
            if head == "constant":
                w = float(rest)
                return w, w, None, 0.0, 0
            if head == "step":
                parts = [p.strip() for p in rest.split(",") if p.strip()]
                if len(parts) < 2:
                    raise ValueError("step needs baseline and strain watts")
                base, strain = float(parts[0]), float(parts[1])
                strain_secs, noise, seed = None, 0.0, 0
                for part in parts[2:]:
                    key, _, val = part.partition("=")
                    if key == "strain":
                        strain_secs = float(val)
                    elif key == "noise":
                        noise = float(val)
                    elif key == "seed":
                        seed = int(val)
                    else:
                        raise ValueError(f"unknown step parameter {key!r}")
                return base, strain, strain_secs, noise, seed
            raise ValueError(f"unknown generator {head!r}")
        except ValueError as exc:
            raise ConfigError(f"bad synthetic spec {spec!r}: {exc}") from None

    def notify_phase(self, phase: str) -> None:
        self._phase = phase

    def sample(self) -> PowerSample:
        self._count += 1
        t = self._count * self.descriptor.sample_interval
        w = self.strain_w if self._phase == "strain" else self.baseline_w
        if self._noise > 0:
            w = max(0.0, w + self._rng.normal(0.0, self._noise))
        return PowerSample(t=t, watts=w)


class TraceReplaySource(PowerSource):
    """Replays a recorded trace sample-for-sample."""

    def __init__(self, descriptor: SourceDescriptor, trace):
        super().__init__(descriptor)
        self.trace = trace
        self._pos = 0

    def sample(self) -> PowerSample:
        if self._pos >= len(self.trace.samples):
            raise SourceExhaustedError(
                f"trace {self.descriptor.location!r} exhausted after {self._pos} samples"
            )
        s = self.trace.samples[self._pos]
        self._pos += 1
        return s


class BatterySource(PowerSource):
    """Reads the platform battery interface (status, power_now, current_now,
    voltage_now files).

    Prefers a direct micro-watt reading; otherwise derives watts from
    current (uA) times voltage (uV). The interface root comes from
    CARBONPROF_BATTERY_PATH when set, so tests can point it at a fixture
    directory.
    """

    realtime = True

    def __init__(self, descriptor: SourceDescriptor, battery_dir: Path):
        super().__init__(descriptor)
        self.battery_dir = battery_dir
        self._t0 = time.perf_counter()
        self._last_t = -1.0

    @staticmethod
    def locate(root: str | os.PathLike | None = None) -> Path:
        """Find the battery directory under the power-supply class path."""
        base = Path(root or os.environ.get(BATTERY_PATH_ENV) or DEFAULT_POWER_SUPPLY_PATH)
        if (base / "status").is_file():
            return base
        if base.is_dir():
            for child in sorted(base.iterdir()):
                type_file = child / "type"
                try:
                    if type_file.is_file() and type_file.read_text().strip() == "Battery":
                        return child
                except OSError:
                    continue
        raise NoBatteryError(f"no battery interface found under {base}")

    def _read_int(self, name: str) -> int | None:
        path = self.battery_dir / name
        if not path.is_file():
            return None
        try:
            return int(path.read_text().strip())
        except (OSError, ValueError) as exc:
            raise ReadFailureError(f"cannot read {path}: {exc}") from exc

    def _read_status(self) -> str:
        try:
            return (self.battery_dir / "status").read_text().strip()
        except OSError as exc:
            raise ReadFailureError(f"cannot read battery status: {exc}") from exc

    def check_discharging(self) -> None:
        status = self._read_status()
        if status != "Discharging":
            raise OnACPowerError(
                f"battery status is {status!r}; measurements need battery power only"
            )

    def charge_level(self) -> float | None:
        """Charge percentage if the interface exposes it."""
        try:
            value = self._read_int("capacity")
        except ReadFailureError:
            return None
        return float(value) if value is not None else None

    def sample(self) -> PowerSample:
        self.check_discharging()
        t = time.perf_counter() - self._t0
        if t <= self._last_t:
            t = self._last_t + 1e-9
        self._last_t = t

        power_uw = self._read_int("power_now")
        if power_uw is not None:
            watts = power_uw / 1e6
            if watts < 0:
                raise ReadFailureError(
                    f"negative power reading {watts} W; is the battery charging?"
                )
            return PowerSample(t=t, watts=watts)

        current_ua = self._read_int("current_now")
        voltage_uv = self._read_int("voltage_now")
        if current_ua is None or voltage_uv is None:
            raise ReadFailureError(
                f"battery interface at {self.battery_dir} exposes neither power_now "
                f"nor current_now+voltage_now"
            )
        volts = voltage_uv / 1e6
        amps = current_ua / 1e6
        watts = volts * amps
        if watts < 0:
            raise ReadFailureError(
                f"negative power reading {watts} W; is the battery charging?"
            )
        return PowerSample(t=t, watts=watts, volts=volts, amps=amps)


def open_source(descriptor: SourceDescriptor) -> PowerSource:
    """Open a source handle for the descriptor.

    Raises NoBatteryError/OnACPowerError for the battery path,
    TraceNotFoundError or a parse error for replay, ConfigError for a bad
    synthetic spec.
    """
    if descriptor.kind is SourceKind.SYNTHETIC:
        return SyntheticSource(descriptor)
    if descriptor.kind is SourceKind.TRACE_REPLAY:
        from .traceio import read_trace  # deferred: traceio imports PowerSample

        path = Path(descriptor.location)
        if not path.is_file():
            raise TraceNotFoundError(f"trace file not found: {path}")
        return TraceReplaySource(descriptor, read_trace(path, origin=descriptor))
    if descriptor.kind is SourceKind.BATTERY:
        battery_dir = BatterySource.locate(descriptor.location or None)
        src = BatterySource(descriptor, battery_dir)
        src.check_discharging()
        return src
    raise ConfigError(f"unsupported source kind {descriptor.kind!r}")
