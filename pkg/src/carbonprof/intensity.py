"""Regional carbon-intensity factors (kg CO2e per kWh of electricity).

Only regions with a sourced figure ship in the bundled table (see README);
anything else must be given as an explicit factor, either through
``custom:<value>`` or the --intensity-factor flag.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, UnknownRegionError


@dataclass(frozen=True)
class CarbonIntensity:
    """kg CO2e emitted per kWh in a region. Numerically equal to g per Wh."""

    region: str
    factor: float

    def __post_init__(self):
        if not (self.factor > 0):
            raise ConfigError(f"intensity factor must be > 0, got {self.factor}")


REGION_INTENSITY = {
    "US": 0.65,
}

DEFAULT_REGION = "US"

DEFAULT_INTENSITY = CarbonIntensity(DEFAULT_REGION, REGION_INTENSITY[DEFAULT_REGION])


def lookup_intensity(region: str) -> CarbonIntensity:
    """Resolve a region name, or ``custom:<factor>``, to a CarbonIntensity.

    Raises UnknownRegionError for regions without a bundled entry.
    """
    name = region.strip()
    if name.lower().startswith("custom:"):
        raw = name.split(":", 1)[1]
        try:
            factor = float(raw)
        except ValueError:
            raise ConfigError(f"bad custom intensity {raw!r}") from None
        return CarbonIntensity("custom", factor)
    key = name.upper()
    if key in REGION_INTENSITY:
        return CarbonIntensity(key, REGION_INTENSITY[key])
    raise UnknownRegionError(region, REGION_INTENSITY)
