"""Unit conversions used at the package boundary.

Internally every frequency and rate is angular (rad/s).  All files,
configs and CLI output use ordinary frequency in Hz, powers in W (with
dBm accepted on input), lengths in metres.
"""

from __future__ import annotations

import os
import re

from .constants import TWO_PI
from .errors import ConfigError

_POWER_RE = re.compile(
    r"^\s*([+-]?[0-9.eE+-]+)\s*(dBm|dbm|mW|mw|uW|uw|W|w)\s*$"
)


def hz_to_rad(f):
    """Ordinary frequency (Hz) -> angular frequency (rad/s)."""
    return TWO_PI * f


def rad_to_hz(w):
    """Angular frequency (rad/s) -> ordinary frequency (Hz)."""
    return w / TWO_PI


def dbm_to_watts(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w: float) -> float:
    if p_w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    import math

    return 10.0 * math.log10(p_w / 1e-3)


def parse_power(value) -> float:
    """Parse a power given as a number (W) or a suffix-tagged string.

    Accepted string forms: ``"-41 dBm"``, ``"0.015 W"``, ``"15 mW"``,
    ``"3 uW"``.  The Unicode minus sign is tolerated.
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"power value {value!r} is neither a number nor a tagged string")
    text = value.replace("−", "-")
    m = _POWER_RE.match(text)
    if m is None:
        raise ConfigError(
            f"cannot parse power {value!r}; expected a number in W or "
            "a string like '-41 dBm', '15 mW' or '0.015 W'"
        )
    num = float(m.group(1))
    unit = m.group(2).lower()
    if unit == "dbm":
        return dbm_to_watts(num)
    scale = {"w": 1.0, "mw": 1e-3, "uw": 1e-6}[unit]
    return num * scale


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (lossless round trip)."""
    return "%.17g" % x


def resolve_thread_count(requested=None) -> int:
    """Worker count for parallel loops.

    ``requested`` wins when given; otherwise the ``MAGNONLINK_THREADS``
    environment variable is consulted (0 or unset means auto = CPU count).
    """
    value = requested
    if value is None:
        raw = os.environ.get("MAGNONLINK_THREADS", "0")
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(
                f"MAGNONLINK_THREADS={raw!r} is not an integer"
            ) from None
    if value < 0:
        raise ConfigError("thread count must be >= 0")
    if value == 0:
        value = os.cpu_count() or 1
    return value
