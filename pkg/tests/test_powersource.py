from __future__ import annotations

import pytest

from carbonprof.errors import (
    ConfigError,
    NoBatteryError,
    OnACPowerError,
    ReadFailureError,
    SourceExhaustedError,
    TraceNotFoundError,
)
from carbonprof.powersource import (
    BatterySource,
    PowerSample,
    SourceDescriptor,
    SourceKind,
    open_source,
)
from carbonprof.traceio import parse_trace, serialize_trace, write_trace


class TestPowerSample:
    def test_valid(self):
        s = PowerSample(t=0.5, watts=7.4, volts=14.8, amps=0.5)
        assert s.watts == pytest.approx(7.4)

    def test_rejects_negative_watts(self):
        with pytest.raises(ValueError):
            PowerSample(t=0.0, watts=-1.0)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            PowerSample(t=-0.1, watts=1.0)

    def test_rejects_inconsistent_volt_amp_product(self):
        with pytest.raises(ValueError):
            PowerSample(t=0.0, watts=5.0, volts=5.0, amps=1.1)


class TestDescriptor:
    def test_parse_kinds(self):
        assert SourceDescriptor.parse("battery").kind is SourceKind.BATTERY
        d = SourceDescriptor.parse("trace:run1.csv")
        assert d.kind is SourceKind.TRACE_REPLAY and d.location == "run1.csv"
        d = SourceDescriptor.parse("synthetic:constant:5.0")
        assert d.kind is SourceKind.SYNTHETIC

    def test_parse_rejects_unknown(self):
        with pytest.raises(ConfigError):
            SourceDescriptor.parse("psychic")

    def test_interval_must_be_positive(self):
        with pytest.raises(ConfigError):
            SourceDescriptor(SourceKind.SYNTHETIC, "constant:1", sample_interval=0)


class TestSyntheticSource:
    def test_constant_generator(self):
        src = open_source(SourceDescriptor.parse("synthetic:constant:5.0", 0.1))
        first = src.sample()
        assert first.t == pytest.approx(0.1)
        assert all(src.sample().watts == 5.0 for _ in range(10))

    def test_timestamps_strictly_increase(self):
        src = open_source(SourceDescriptor.parse("synthetic:constant:1.0"))
        ts = [src.sample().t for _ in range(5)]
        assert all(b > a for a, b in zip(ts, ts[1:]))

    def test_step_follows_phase(self):
        src = open_source(SourceDescriptor.parse("synthetic:step:8,15"))
        assert src.sample().watts == 8.0
        src.notify_phase("strain")
        assert src.sample().watts == 15.0
        src.notify_phase("post")
        assert src.sample().watts == 8.0

    def test_step_strain_duration_parameter(self):
        src = open_source(SourceDescriptor.parse("synthetic:step:8,15,strain=30"))
        assert src.strain_secs == 30.0

    def test_noise_is_reproducible(self):
        spec = "synthetic:step:5,9,noise=0.1,seed=7"
        a = open_source(SourceDescriptor.parse(spec))
        b = open_source(SourceDescriptor.parse(spec))
        assert [a.sample().watts for _ in range(20)] == [b.sample().watts for _ in range(20)]

    def test_bad_specs_rejected(self):
        for spec in ("synthetic:constant:abc", "synthetic:step:5", "synthetic:wave:1",
                     "synthetic:step:5,9,frequency=2"):
            with pytest.raises(ConfigError):
                open_source(SourceDescriptor.parse(spec))


class TestTraceReplay:
    def test_replays_file_rows_exactly(self, tmp_path):
        path = tmp_path / "run1.csv"
        path.write_text("t_s,v_V,i_A\n0.0,5.0,1.0\n0.5,5.0,1.2\n1.0,5.0,1.1\n")
        src = open_source(SourceDescriptor.parse(f"trace:{path}"))
        got = [src.sample() for _ in range(3)]
        assert [s.watts for s in got] == [5.0, 6.0, pytest.approx(5.5)]
        assert [s.t for s in got] == [0.0, 0.5, 1.0]
        with pytest.raises(SourceExhaustedError):
            src.sample()

    def test_missing_file(self):
        with pytest.raises(TraceNotFoundError):
            open_source(SourceDescriptor.parse("trace:/does/not/exist.csv"))

    def test_round_trip_identity(self, tmp_path):
        path = tmp_path / "orig.csv"
        path.write_text("t_s,v_V,i_A\n0.0,5.0,1.0\n0.5,5.0,1.2\n")
        trace = parse_trace(path.read_bytes())
        copy = tmp_path / "copy.csv"
        write_trace(trace, copy)
        replay = open_source(SourceDescriptor.parse(f"trace:{copy}"))
        for original in trace.samples:
            echoed = replay.sample()
            assert echoed.t == original.t
            assert echoed.watts == original.watts

    def test_serialize_preserves_values(self, tmp_path):
        text = "t_s,v_V,i_A\n0.0,5.0,1.0\n0.5,5.0,1.2\n"
        trace = parse_trace(text)
        again = parse_trace(serialize_trace(trace))
        for a, b in zip(trace.samples, again.samples):
            assert round(a.watts, 6) == round(b.watts, 6)
            assert a.t == b.t


class TestBatterySource:
    def test_micro_watt_conversion(self, battery_dir):
        src = open_source(SourceDescriptor.parse("battery"))
        s = src.sample()
        assert abs(s.watts - 6.665) / 6.665 < 1e-12
        assert s.volts is None

    def test_current_voltage_fallback(self, battery_dir):
        (battery_dir / "power_now").unlink()
        (battery_dir / "current_now").write_text("500000\n")
        (battery_dir / "voltage_now").write_text("14800000\n")
        src = open_source(SourceDescriptor.parse("battery"))
        s = src.sample()
        assert s.watts == pytest.approx(7.4, rel=1e-12)
        assert s.volts == pytest.approx(14.8)
        assert s.amps == pytest.approx(0.5)

    def test_timestamps_strictly_increase(self, battery_dir):
        src = open_source(SourceDescriptor.parse("battery"))
        ts = [src.sample().t for _ in range(5)]
        assert all(b > a for a, b in zip(ts, ts[1:]))

    def test_not_discharging_is_rejected(self, battery_dir):
        (battery_dir / "status").write_text("Charging\n")
        with pytest.raises(OnACPowerError):
            open_source(SourceDescriptor.parse("battery"))

    def test_no_battery_found(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CARBONPROF_BATTERY_PATH", str(tmp_path / "empty"))
        with pytest.raises(NoBatteryError):
            open_source(SourceDescriptor.parse("battery"))

    def test_negative_reading_is_an_error(self, battery_dir):
        src = open_source(SourceDescriptor.parse("battery"))
        (battery_dir / "power_now").write_text("-100000\n")
        with pytest.raises(ReadFailureError):
            src.sample()

    def test_no_power_files_is_read_failure(self, battery_dir):
        src = open_source(SourceDescriptor.parse("battery"))
        (battery_dir / "power_now").unlink()
        with pytest.raises(ReadFailureError):
            src.sample()

    def test_charge_level(self, battery_dir):
        src = BatterySource(SourceDescriptor.parse("battery"), battery_dir)
        assert src.charge_level() == 100.0
