"""Derive the phenomenological rates from material, geometric and drive inputs.

The chain runs: cavity geometry -> zero-point field -> single-spin
coupling -> collective coupling g; Verdet constant -> single-spin optical
coupling G -> magnon-light rate zeta; Gilbert damping -> magnon linewidth
and frequency pull; coil current -> bias field -> magnon frequency.
"""

from __future__ import annotations

import math

from .constants import GAMMA_E, HBAR, MU_0
from .errors import ValidationError
from .params import FieldBias, MaterialGeometry, OpticalDriveParams


def zero_point_field(cavity_volume: float, omega_c: float) -> float:
    """Zero-point magnetic-field amplitude ``sqrt(mu0 hbar omega_c / 2 V)`` (T)."""
    if cavity_volume <= 0:
        raise ValidationError("cavity_volume must be positive")
    if omega_c < 0:
        raise ValidationError("omega_c must be >= 0")
    return math.sqrt(MU_0 * HBAR * omega_c / (2.0 * cavity_volume))


def single_spin_coupling(b_zpf: float, gamma_e: float = GAMMA_E) -> float:
    """Coupling of one spin to the cavity field (rad/s).

    Only the field component co-rotating with the precessing
    magnetization couples, hence ``gamma_e * b_zpf / sqrt(2)``.
    """
    return gamma_e * b_zpf / math.sqrt(2.0)


def collective_coupling(g0: float, spin_density: float,
                        sample_volume: float) -> float:
    """Collectively enhanced coupling ``g0 sqrt(n V_s)`` (rad/s)."""
    n_spins = spin_density * sample_volume
    if n_spins < 1.0:
        raise ValidationError(
            f"collective enhancement needs at least one spin; got N = {n_spins:.3g}"
        )
    return g0 * math.sqrt(n_spins)


def predicted_coupling(geom: MaterialGeometry, omega_c: float,
                       overlap_factor: float = 1.0) -> float:
    """First-principles magnon-photon coupling estimate (rad/s).

    Composes the zero-point field, single-spin and collective steps.
    ``overlap_factor`` multiplies the result to account for the mode
    field being nonuniform over the sample; it defaults to 1.0 and is
    never guessed — fitted couplings take precedence in any workflow
    that has them.
    """
    b = zero_point_field(geom.cavity_volume, omega_c)
    g0 = single_spin_coupling(b, geom.gyromagnetic_ratio)
    g = collective_coupling(g0, geom.spin_density, geom.sample_volume)
    return overlap_factor * g


def verdet_to_G(verdet: float, spin_density: float) -> float:
    """Per-spin optical coupling constant ``G = 4 V / n`` (m^2).

    Follows from the Faraday rotation angle per unit length being
    ``(1/4) G n`` for the saturated magnetization.
    """
    if spin_density <= 0:
        raise ValidationError("spin_density must be positive")
    return 4.0 * verdet / spin_density


def zeta_from_G(G: float, geom: MaterialGeometry,
                drive: OpticalDriveParams) -> float:
    """Magnon-light parametric coupling rate (rad/s).

    ``zeta = G^2 l^2 n P0 / (16 V_s hbar Omega0)``.
    """
    return (G ** 2 * geom.sample_length ** 2 * geom.spin_density
            * drive.power
            / (16.0 * geom.sample_volume * HBAR * drive.carrier_angular_freq))


def gamma_from_gilbert(alpha: float, omega_m: float) -> float:
    """Intrinsic magnon dissipation rate ``gamma = 2 alpha omega_m`` (rad/s)."""
    if alpha < 0:
        raise ValidationError("alpha must be >= 0")
    return 2.0 * alpha * omega_m


def kittel_shift(omega_k: float, alpha: float) -> float:
    """Damping-renormalized magnon frequency ``omega_m = omega_K / (1 + alpha^2)``."""
    if alpha < 0:
        raise ValidationError("alpha must be >= 0")
    return omega_k / (1.0 + alpha ** 2)


def kittel_freq_from_current(bias: FieldBias, current: float,
                             gamma_e: float = GAMMA_E) -> float:
    """Magnon frequency at a given coil current (rad/s), linearized.

    ``omega_m(I) = omega_m(I0) + gamma_e (dB0/dI) (I - I0)``.  The
    intercept comes from the calibrated reference point in ``bias``.
    """
    return (bias.reference_kittel_freq
            + gamma_e * bias.field_per_current
            * (current - bias.reference_current))
