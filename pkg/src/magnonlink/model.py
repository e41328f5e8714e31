"""Closed-form response functions of the hybrid cavity-magnon system.

Every function is a pure map from immutable parameters and probe
frequency to a complex (or real) response; all accept scalar or ndarray
``omega`` and broadcast.  Angular frequencies (rad/s) throughout.

Sign and factor conventions
---------------------------
* Mode susceptibility: ``chi(omega) = 1 / (-i (omega - omega_res) + rate_total / 2)``.
* The reflection off the cavity port is ratio-of-affine in the cavity
  self-energy, with the magnon line entering through ``g^2 chi_m``.
* Up- and down-conversion amplitudes share one kernel
  ``chi_m chi_c / (1 + g^2 chi_m chi_c)`` so that the two optical
  sidebands of the microwave-to-light process are bit-identical and the
  two directions have identical magnitude by construction.
"""

from __future__ import annotations

import cmath

import numpy as np

from .errors import NumericalError, SingularInputError
from .params import Detunings, SystemParams

# Complex response values are plain complex scalars / ndarrays; finite
# components are guaranteed by the singularity guards below.
ComplexResponse = "complex | np.ndarray"

_SINGULAR_RTOL = 1e-15


def _wrap(omega):
    """Return (array view, was_scalar flag) for a frequency argument."""
    arr = np.asarray(omega, dtype=float)
    return arr, arr.ndim == 0


def _ret(values, scalar):
    return np.asarray(values)[()] if scalar else values


def _check_singular(denom, omega, what):
    """Raise if any |denom| is vanishingly small, reporting the frequency."""
    mag = np.abs(denom)
    bad = mag == 0.0
    if np.any(bad):
        w = np.asarray(omega, dtype=float)
        w_bad = float(w[bad][0]) if w.ndim else float(w)
        raise SingularInputError(
            f"{what} is singular at omega = {w_bad:.6e} rad/s"
        )


def chi_c(params: SystemParams, omega):
    """Cavity susceptibility ``1 / (-i (omega - omega_c) + (kappa + kappa_c)/2)`` (s)."""
    w, scalar = _wrap(omega)
    denom = -1j * (w - params.omega_c) + 0.5 * (params.kappa + params.kappa_c)
    _check_singular(denom, w, "cavity susceptibility")
    return _ret(1.0 / denom, scalar)


def chi_m(params: SystemParams, omega):
    """Magnon susceptibility ``1 / (-i (omega - omega_m) + gamma/2)`` (s)."""
    w, scalar = _wrap(omega)
    denom = -1j * (w - params.omega_m) + 0.5 * params.gamma
    _check_singular(denom, w, "magnon susceptibility")
    return _ret(1.0 / denom, scalar)


def s11_hybrid(params: SystemParams, omega):
    """Microwave reflection coefficient of the magnon-loaded cavity port.

    Returns
    -------
    complex or ndarray
        ``[i(omega-omega_c) - (kappa-kappa_c)/2 + g^2/(i(omega-omega_m) - gamma/2)]
        / [i(omega-omega_c) - (kappa+kappa_c)/2 + g^2/(i(omega-omega_m) - gamma/2)]``

    For passive parameters (all rates >= 0) the magnitude never exceeds 1.
    """
    w, scalar = _wrap(omega)
    d_m = 1j * (w - params.omega_m) - 0.5 * params.gamma
    _check_singular(d_m, w, "magnon line of the reflection")
    self_energy = 1j * (w - params.omega_c) + params.g ** 2 / d_m
    denom = self_energy - 0.5 * (params.kappa + params.kappa_c)
    _check_singular(denom, w, "cavity line of the reflection")
    num = self_energy - 0.5 * (params.kappa - params.kappa_c)
    return _ret(num / denom, scalar)


def s11_coil(omega_m: float, gamma: float, gamma_c: float, omega):
    """Reflection off a directly coupled magnon port (loop-coil geometry).

    ``[i(omega-omega_m) + (gamma_c-gamma)/2] / [i(omega-omega_m) - (gamma_c+gamma)/2]``
    """
    if gamma < 0 or gamma_c < 0:
        raise NumericalError("gamma and gamma_c must be >= 0")
    w, scalar = _wrap(omega)
    denom = 1j * (w - omega_m) - 0.5 * (gamma_c + gamma)
    _check_singular(denom, w, "coil reflection")
    num = 1j * (w - omega_m) + 0.5 * (gamma_c - gamma)
    return _ret(num / denom, scalar)


def _conversion_kernel(params: SystemParams, omega):
    """Shared kernel ``chi_m chi_c / (1 + g^2 chi_m chi_c)``.

    All four directed conversion amplitudes are prefactor * kernel, so
    magnitude identities between them hold exactly, not just to rounding.
    """
    w, scalar = _wrap(omega)
    prod = np.asarray(chi_m(params, w)) * np.asarray(chi_c(params, w))
    denom = 1.0 + params.g ** 2 * prod
    scale = 1.0 + np.abs(params.g ** 2 * prod)
    bad = np.abs(denom) < _SINGULAR_RTOL * scale
    if np.any(bad):
        w_arr = np.asarray(w, dtype=float)
        w_bad = float(w_arr[bad][0]) if w_arr.ndim else float(w_arr)
        raise SingularInputError(
            "conversion denominator 1 + g^2 chi_m chi_c vanishes at "
            f"omega = {w_bad:.6e} rad/s (zero-loss input?)"
        )
    return _ret(prod / denom, scalar)


def s_lm_plus(params: SystemParams, omega):
    """Microwave->light amplitude into the upper (anti-Stokes) sideband."""
    return 1j * params.g * np.sqrt(params.kappa_c * params.zeta) \
        * _conversion_kernel(params, omega)


def s_lm_minus(params: SystemParams, omega):
    """Microwave->light amplitude into the lower (Stokes) sideband.

    Identical to :func:`s_lm_plus` by construction: both sidebands carry
    the same amplitude.
    """
    return s_lm_plus(params, omega)


def s_lm(params: SystemParams, eta: float, omega):
    """Measured microwave->light conversion amplitude.

    A detection chain with (uncalibrated) power gain ``eta`` scales the
    intrinsic amplitude: ``g sqrt(eta kappa_c zeta) chi_m chi_c /
    (1 + g^2 chi_m chi_c)``.
    """
    if eta < 0:
        raise NumericalError("eta must be >= 0")
    return params.g * np.sqrt(eta * params.kappa_c * params.zeta) \
        * _conversion_kernel(params, omega)


def s_ml_plus(params: SystemParams, omega_a):
    """Light->microwave amplitude from the parametric (lower-sideband) drive."""
    return -1j * params.g * np.sqrt(params.kappa_c * params.zeta) \
        * _conversion_kernel(params, omega_a)


def s_ml_minus(params: SystemParams, omega_b):
    """Light->microwave amplitude from the beam-splitter (upper-sideband) drive.

    Differs from :func:`s_ml_plus` by a pi phase only.
    """
    return 1j * params.g * np.sqrt(params.kappa_c * params.zeta) \
        * _conversion_kernel(params, omega_b)


def cooperativity(params: SystemParams) -> float:
    """Dimensionless cooperativity ``4 g^2 / ((kappa_c + kappa) gamma)``."""
    denom = (params.kappa_c + params.kappa) * params.gamma
    if denom == 0.0:
        raise NumericalError(
            "cooperativity undefined: gamma or kappa + kappa_c is zero"
        )
    return 4.0 * params.g ** 2 / denom


def conversion_prefactor(params: SystemParams) -> float:
    """Rate ratio ``kappa_c zeta / ((kappa_c + kappa) gamma)``.

    This is the photon-number efficiency the converter would reach at
    unit internal conversion; the detuned efficiency is this prefactor
    times a Lorentzian-squared landscape factor.
    """
    denom = (params.kappa_c + params.kappa) * params.gamma
    if denom == 0.0:
        raise NumericalError("prefactor undefined: zero dissipation rates")
    return params.kappa_c * params.zeta / denom


def efficiency_detuned(params: SystemParams, det: Detunings):
    """Photon-number conversion efficiency at given detunings.

    With ``C`` the cooperativity, ``x = delta_c / (kappa_c + kappa)`` and
    ``y = delta_m / gamma``:

        eff = 4 C K / [ (C + 1 - 4 x y)^2 + 4 (x + y)^2 ]

    where ``K`` is :func:`conversion_prefactor`.  Equals
    ``|s_ml_plus(omega)|^2`` with ``omega - omega_c = delta_c`` and
    ``omega - omega_m = delta_m``.
    """
    c = cooperativity(params)
    k = conversion_prefactor(params)
    x = np.asarray(det.delta_c, dtype=float) / (params.kappa_c + params.kappa)
    y = np.asarray(det.delta_m, dtype=float) / params.gamma
    denom = (c + 1.0 - 4.0 * x * y) ** 2 + 4.0 * (x + y) ** 2
    out = 4.0 * c * k / denom
    return out[()] if out.ndim == 0 else out


def efficiency_resonant(params: SystemParams) -> float:
    """Efficiency at zero detunings: ``4 C K / (C + 1)^2``."""
    c = cooperativity(params)
    return 4.0 * c * conversion_prefactor(params) / (c + 1.0) ** 2


def normal_mode_frequencies(params: SystemParams):
    """Lossless normal-mode frequencies (rad/s), lower then upper.

    ``omega_bar -/+ sqrt(g^2 + delta^2)`` with ``omega_bar = (omega_c +
    omega_m)/2`` and ``delta = (omega_c - omega_m)/2``.  Dissipation
    shifts are neglected; see :func:`normal_mode_frequencies_lossy` for
    the complex eigenvalues.
    """
    mean = 0.5 * (params.omega_c + params.omega_m)
    half = 0.5 * (params.omega_c - params.omega_m)
    split = np.hypot(params.g, half)
    return mean - split, mean + split


def normal_mode_frequencies_lossy(params: SystemParams):
    """Complex eigenvalues of the dissipative two-mode system.

    Returns the pair sorted by real part; for each eigenvalue the real
    part is the mode frequency and ``-2 * imag`` its full linewidth.
    """
    kt = params.kappa + params.kappa_c
    a = params.omega_c - 0.5j * kt
    b = params.omega_m - 0.5j * params.gamma
    mean = 0.5 * (a + b)
    half = 0.5 * (a - b)
    split = cmath.sqrt(params.g ** 2 + half ** 2)
    lo, hi = mean - split, mean + split
    if lo.real > hi.real:
        lo, hi = hi, lo
    return lo, hi


def s21_cavity(omega_c: float, kappa: float, kappa_c: float,
               kappa_1: float, omega):
    """Power transmission of a two-port cavity (weak probe port ``kappa_1``).

    ``|sqrt(kappa_1 kappa_c) / (i(omega-omega_c) + (kappa_1+kappa_c+kappa)/2)|^2``
    """
    if min(kappa, kappa_c, kappa_1) < 0:
        raise NumericalError("cavity rates must be >= 0")
    total = kappa_1 + kappa_c + kappa
    if total == 0.0:
        raise NumericalError("total cavity linewidth is zero")
    w, scalar = _wrap(omega)
    denom2 = (w - omega_c) ** 2 + 0.25 * total ** 2
    return _ret(kappa_1 * kappa_c / denom2, scalar)


def phase_excursion(values) -> float:
    """Total unwrapped phase change (rad) across an ordered response array."""
    phase = np.unwrap(np.angle(np.asarray(values)))
    return float(phase[-1] - phase[0])
