from __future__ import annotations

import numpy as np
import pytest

from carbonprof.traceio import PowerTrace, trace_from_arrays


def make_step_trace(baseline_w: float, strain_w: float, pre_secs: float,
                    strain_secs: float, post_secs: float, interval: float = 1.0,
                    noise: float = 0.0, seed: int = 0) -> tuple[PowerTrace, float, float]:
    """Synthetic session trace: baseline, a strain step, baseline again.

    Returns (trace, strain_start, strain_end); the step edges land exactly
    on the sample grid.
    """
    total = pre_secs + strain_secs + post_secs
    n = int(round(total / interval)) + 1
    times = np.arange(n) * interval
    strain_lo, strain_hi = pre_secs, pre_secs + strain_secs
    watts = np.where((times >= strain_lo) & (times < strain_hi), strain_w, baseline_w)
    if noise > 0:
        rng = np.random.default_rng(seed)
        watts = np.maximum(watts + rng.normal(0.0, noise, size=n), 0.0)
    return trace_from_arrays(times, watts), strain_lo, strain_hi


@pytest.fixture
def battery_dir(tmp_path, monkeypatch):
    """Fake power-supply class directory with one discharging battery."""
    bat = tmp_path / "BAT0"
    bat.mkdir()
    (bat / "type").write_text("Battery\n")
    (bat / "status").write_text("Discharging\n")
    (bat / "power_now").write_text("6665000\n")
    (bat / "capacity").write_text("100\n")
    monkeypatch.setenv("CARBONPROF_BATTERY_PATH", str(tmp_path))
    return bat
