"""Domain parameter types.

All frequencies and rates are angular (rad/s); lengths and volumes are
metres-based SI.  Constructors validate physical invariants and raise
:class:`~magnonlink.errors.ValidationError` on violation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .constants import GAMMA_E, HBAR, TWO_PI
from .errors import ValidationError


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _finite(*values) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class SystemParams:
    """Rates and frequencies of the hybrid cavity-magnon system.

    Parameters
    ----------
    omega_c, omega_m : float
        Cavity and magnon resonance angular frequencies (rad/s).
    kappa : float
        Cavity internal loss rate (rad/s).
    kappa_c : float
        Cavity external (port) coupling rate (rad/s).
    gamma : float
        Magnon intrinsic dissipation rate (rad/s).
    g : float
        Magnon-photon coupling rate (rad/s).
    zeta : float
        Magnon-light parametric coupling rate (rad/s).
    """

    omega_c: float
    omega_m: float
    kappa: float
    kappa_c: float
    gamma: float
    g: float
    zeta: float = 0.0

    def __post_init__(self):
        vals = [getattr(self, f.name) for f in fields(self)]
        _require(_finite(*vals), "all parameters must be finite")
        _require(self.omega_c > 0 and self.omega_m > 0,
                 "omega_c and omega_m must be positive")
        for name in ("kappa", "kappa_c", "gamma", "g", "zeta"):
            _require(getattr(self, name) >= 0.0, f"{name} must be >= 0")
        carrier = min(self.omega_c, self.omega_m)
        for name in ("kappa", "kappa_c", "gamma", "g", "zeta"):
            _require(
                getattr(self, name) < carrier,
                f"{name} must be strictly below the carrier frequencies "
                "for the rotating-frame model to hold",
            )

    @classmethod
    def from_hz(cls, omega_c_hz, omega_m_hz, kappa_hz, kappa_c_hz,
                gamma_hz, g_hz, zeta_hz=0.0) -> "SystemParams":
        """Build from ordinary frequencies in Hz."""
        return cls(
            omega_c=TWO_PI * omega_c_hz,
            omega_m=TWO_PI * omega_m_hz,
            kappa=TWO_PI * kappa_hz,
            kappa_c=TWO_PI * kappa_c_hz,
            gamma=TWO_PI * gamma_hz,
            g=TWO_PI * g_hz,
            zeta=TWO_PI * zeta_hz,
        )


@dataclass(frozen=True)
class Detunings:
    """Probe detunings from the cavity (delta_c) and magnon (delta_m) lines, rad/s.

    Either field may be a scalar or an ndarray (the two must broadcast
    against each other); every entry must be finite.
    """

    delta_c: float
    delta_m: float

    def __post_init__(self):
        for name in ("delta_c", "delta_m"):
            if not np.all(np.isfinite(np.asarray(getattr(self, name)))):
                raise ValidationError("detunings must be finite")
        np.broadcast_shapes(np.shape(self.delta_c), np.shape(self.delta_m))


@dataclass(frozen=True)
class MaterialGeometry:
    """Material and geometric quantities of the sphere-in-cavity assembly.

    Fields
    ------
    spin_density : float        net spin density n (m^-3)
    verdet : float              Verdet constant (rad/m)
    sample_length : float       optical path length through the sample (m)
    sample_volume : float       sample volume (m^3)
    cavity_volume : float       cavity mode volume (m^3)
    gilbert_alpha : float       dimensionless damping constant (>= 0)
    gyromagnetic_ratio : float  rad s^-1 T^-1
    bare_kittel_freq : float    undamped uniform-precession frequency (rad/s)
    """

    spin_density: float
    verdet: float
    sample_length: float
    sample_volume: float
    cavity_volume: float
    gilbert_alpha: float
    gyromagnetic_ratio: float = GAMMA_E
    bare_kittel_freq: float = 0.0

    def __post_init__(self):
        vals = [getattr(self, f.name) for f in fields(self)]
        _require(_finite(*vals), "all material parameters must be finite")
        for name in ("spin_density", "verdet", "sample_length",
                     "sample_volume", "cavity_volume", "gyromagnetic_ratio"):
            _require(getattr(self, name) > 0.0, f"{name} must be positive")
        _require(self.gilbert_alpha >= 0.0, "gilbert_alpha must be >= 0")
        _require(self.bare_kittel_freq >= 0.0,
                 "bare_kittel_freq must be >= 0")
        # The optical path cannot physically exceed the diameter of a
        # sphere of the given volume; warn (only) because slightly
        # inconsistent nominal numbers are common in practice.
        diameter = 2.0 * (3.0 * self.sample_volume / (4.0 * math.pi)) ** (1.0 / 3.0)
        if self.sample_length > diameter * (1 + 1e-12):
            warnings.warn(
                "sample_length %.3g m exceeds the sphere diameter %.3g m "
                "implied by sample_volume" % (self.sample_length, diameter),
                stacklevel=2,
            )


@dataclass(frozen=True)
class OpticalDriveParams:
    """Optical carrier drive: power, angular frequency, photon flux.

    ``photon_flux`` defaults to P0 / (hbar * Omega0); when supplied
    explicitly it must agree with that value to 1e-12 relative.
    """

    power: float
    carrier_angular_freq: float
    photon_flux: float = None  # type: ignore[assignment]

    def __post_init__(self):
        _require(self.power >= 0.0, "power must be >= 0")
        _require(self.carrier_angular_freq > 0.0,
                 "carrier_angular_freq must be positive")
        derived = self.power / (HBAR * self.carrier_angular_freq)
        if self.photon_flux is None:
            object.__setattr__(self, "photon_flux", derived)
        else:
            scale = max(abs(derived), 1.0)
            _require(
                abs(self.photon_flux - derived) <= 1e-12 * scale,
                "photon_flux inconsistent with power / (hbar * carrier_angular_freq)",
            )


@dataclass(frozen=True)
class FieldBias:
    """Static-field bias and its linear dependence on coil current."""

    static_field: float
    field_per_current: float
    reference_current: float
    reference_kittel_freq: float

    def __post_init__(self):
        vals = [getattr(self, f.name) for f in fields(self)]
        _require(_finite(*vals), "all bias parameters must be finite")
        _require(self.static_field >= 0.0, "static_field must be >= 0")
        _require(self.reference_kittel_freq > 0.0,
                 "reference_kittel_freq must be positive")
