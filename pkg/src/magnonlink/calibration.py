"""Shot-noise-referenced and microwave-chain calibrations.

Two independent schemes live here:

* A coherently driven magnon line read out optically against the shot
  noise of the probe laser.  The peak-to-floor ratio of that spectrum
  fixes the per-spin optical coupling ``G`` and hence the magnon-light
  rate ``zeta``, without knowing the detection chain gain.
* A weakly coupled probe port on the microwave cavity whose known
  transmission lets the lumped gain/ripple of the amplification chain,
  ``T_a(omega)``, be divided out of any measured power spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .errors import DataError, NumericalError, ValidationError
from .model import s21_cavity
from .microscopic import zeta_from_G
from .params import MaterialGeometry, OpticalDriveParams


@dataclass(frozen=True)
class ShotNoiseRun:
    """Inputs of one shot-noise calibration run.

    All rates/frequencies angular (rad/s), powers W, flux s^-1,
    ``measured_snr`` linear (not dB).
    """

    microwave_power: float
    probe_photon_flux: float
    resolution_bandwidth: float
    coil_coupling: float
    magnon_freq: float
    measured_snr: float
    electronic_noise_psd: float | None = None

    def __post_init__(self):
        for name in ("microwave_power", "probe_photon_flux",
                     "resolution_bandwidth", "coil_coupling",
                     "magnon_freq", "measured_snr"):
            if not getattr(self, name) > 0.0:
                raise ValidationError(f"{name} must be positive")
        if self.electronic_noise_psd is not None and self.electronic_noise_psd < 0:
            raise ValidationError("electronic_noise_psd must be >= 0")


@dataclass(frozen=True)
class ChainCalibration:
    """A chain-calibration data set: known tone in, measured powers out.

    ``omega`` are the (strictly increasing) bin frequencies in rad/s;
    ``cavity`` is ``(omega_c, kappa, kappa_c, kappa_1)`` in rad/s.
    ``transfer_function`` is filled by :func:`extract_transfer_function`.
    """

    tone_power_in: float
    omega: np.ndarray
    measured_power: np.ndarray
    cavity: tuple
    transfer_function: np.ndarray | None = None

    def __post_init__(self):
        if not self.tone_power_in > 0:
            raise ValidationError("tone_power_in must be positive")
        omega = np.asarray(self.omega, dtype=float)
        power = np.asarray(self.measured_power, dtype=float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "measured_power", power)
        if omega.shape != power.shape or omega.ndim != 1:
            raise ValidationError("omega and measured_power must be equal-length 1-D arrays")
        if not np.all(np.diff(omega) > 0):
            raise ValidationError("bins must be strictly increasing in frequency")
        if np.any(power < 0):
            raise ValidationError("measured powers must be >= 0")
        if len(self.cavity) != 4:
            raise ValidationError("cavity must be (omega_c, kappa, kappa_c, kappa_1)")
        if self.transfer_function is not None:
            tf = np.asarray(self.transfer_function, dtype=float)
            if np.any(tf <= 0):
                raise ValidationError("transfer function must be positive on calibrated bins")
            object.__setattr__(self, "transfer_function", tf)


@dataclass(frozen=True)
class TransferFunction:
    """Extracted chain transfer function on the retained bins."""

    omega: np.ndarray
    values: np.ndarray
    excluded_omega: np.ndarray


@dataclass(frozen=True)
class ShotNoiseResult:
    """Audit record of a shot-noise inversion: G, zeta and the input echo."""

    g_m2: float
    zeta: float
    inputs: dict = field(repr=False)


def magnon_spectral_density(p_in: float, omega_m: float, gamma_c: float,
                            gamma: float | None = None) -> float:
    """Coherent-tone spectral weight at the magnon line.

    At critical coupling and resonant drive, the steady tone carries a
    number weight ``P_i / (hbar omega_m gamma_c)`` concentrated in a
    delta line at ``omega_m``.  Passing ``gamma`` enables the critical-
    coupling check (|gamma - gamma_c| within 10%), which is this
    formula's validity condition.
    """
    if p_in < 0:
        raise ValidationError("p_in must be >= 0")
    if omega_m <= 0 or gamma_c <= 0:
        raise ValidationError("omega_m and gamma_c must be positive")
    if gamma is not None and abs(gamma - gamma_c) > 0.1 * gamma_c:
        raise ValidationError(
            "spectral-weight formula requires near-critical coupling "
            f"(|gamma - gamma_c| <= 10% of gamma_c); got gamma = {gamma:.4g}, "
            f"gamma_c = {gamma_c:.4g}"
        )
    return p_in / (HBAR * omega_m * gamma_c)


def _snr_formula(G: float, geom: MaterialGeometry, photon_flux: float,
                 p_in: float, omega_m: float, gamma_c: float,
                 delta_omega: float) -> float:
    return (G ** 2 * geom.sample_length ** 2 * photon_flux
            * geom.spin_density * p_in
            / (8.0 * geom.sample_volume * HBAR * omega_m * gamma_c
               * delta_omega))


def predict_snr(G: float, geom: MaterialGeometry, run: ShotNoiseRun) -> float:
    """Shot-noise-limited SNR of the optically read-out magnon tone.

    ``SNR = G^2 l^2 |beta|^2 n P_i / (8 V_s hbar omega_m gamma_c d_omega)``
    """
    return _snr_formula(G, geom, run.probe_photon_flux, run.microwave_power,
                        run.magnon_freq, run.coil_coupling,
                        run.resolution_bandwidth)


def snr_to_zeta(run: ShotNoiseRun, geom: MaterialGeometry,
                drive: OpticalDriveParams) -> ShotNoiseResult:
    """Invert the measured SNR for G, then evaluate zeta for the given drive.

    Exact round trip with :func:`predict_snr`: feeding the SNR predicted
    for some G returns that G (and its zeta) to rounding.
    """
    if run.measured_snr <= 0:
        raise NumericalError("measured SNR must be positive to invert")
    unit = _snr_formula(1.0, geom, run.probe_photon_flux,
                        run.microwave_power, run.magnon_freq,
                        run.coil_coupling, run.resolution_bandwidth)
    g_m2 = float(np.sqrt(run.measured_snr / unit))
    zeta = zeta_from_G(g_m2, geom, drive)
    inputs = {
        "microwave_power_w": run.microwave_power,
        "probe_photon_flux_per_s": run.probe_photon_flux,
        "resolution_bandwidth_rad_s": run.resolution_bandwidth,
        "coil_coupling_rad_s": run.coil_coupling,
        "magnon_freq_rad_s": run.magnon_freq,
        "measured_snr": run.measured_snr,
        "spin_density_m3": geom.spin_density,
        "sample_length_m": geom.sample_length,
        "sample_volume_m3": geom.sample_volume,
        "drive_power_w": drive.power,
        "drive_carrier_rad_s": drive.carrier_angular_freq,
    }
    return ShotNoiseResult(g_m2=g_m2, zeta=zeta, inputs=inputs)


def svv_spectrum(G: float, geom: MaterialGeometry, drive: OpticalDriveParams,
                 p_in: float, omega_m: float, gamma_c: float,
                 delta_omega: float, omega_grid) -> np.ndarray:
    """Shot-noise-normalized power spectrum of the optical readout.

    A flat shot-noise floor ``|beta|^2 delta_omega / 2`` plus the
    coherent magnon tone in the single bin containing ``omega_m``.  The
    signal excess over the floor in that bin equals the predicted SNR
    exactly (so peak-above-floor / floor is the SNR).
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DataError("omega_grid must be a nonempty 1-D array")
    idx = int(np.argmin(np.abs(grid - omega_m)))
    if abs(grid[idx] - omega_m) > delta_omega:
        raise DataError(
            "omega_grid does not include the magnon frequency within one "
            "resolution bandwidth"
        )
    floor = 0.5 * drive.photon_flux * delta_omega
    snr = _snr_formula(G, geom, drive.photon_flux, p_in, omega_m, gamma_c,
                       delta_omega)
    psd = np.full(grid.shape, floor, dtype=float)
    psd[idx] += floor * snr
    return psd


def subtract_electronic_noise(total_psd, electronic_psd,
                              freq_total=None, freq_electronic=None):
    """Bin-wise noise subtraction with clamping at zero.

    Returns ``(psd, clamped)`` where ``clamped`` marks bins whose
    electronic estimate exceeded the total (those are set to 0 rather
    than going negative — measured floors fluctuate below their mean).
    """
    total = np.asarray(total_psd, dtype=float)
    electronic = np.asarray(electronic_psd, dtype=float)
    if total.shape != electronic.shape:
        raise DataError("total and electronic spectra have mismatched grids")
    if freq_total is not None or freq_electronic is not None:
        ft = np.asarray(freq_total, dtype=float)
        fe = np.asarray(freq_electronic, dtype=float)
        if ft.shape != fe.shape or not np.array_equal(ft, fe):
            raise DataError("total and electronic spectra have mismatched grids")
    out = total - electronic
    clamped = out < 0
    out[clamped] = 0.0
    return out, clamped


def extract_transfer_function(cal: ChainCalibration,
                              threshold: float = 1e-8) -> TransferFunction:
    """Divide the known cavity transmission out of the measured powers.

    ``T_a(omega) = P_m(omega) / (|S21(omega)|^2 P_i)``.  Bins where the
    modeled ``|S21|^2`` is at or below ``threshold`` would amplify noise
    unboundedly; they are excluded and reported.
    """
    omega_c, kappa, kappa_c, kappa_1 = cal.cavity
    s21sq = s21_cavity(omega_c, kappa, kappa_c, kappa_1, cal.omega)
    keep = s21sq > threshold
    t_a = cal.measured_power[keep] / (s21sq[keep] * cal.tone_power_in)
    return TransferFunction(
        omega=cal.omega[keep],
        values=t_a,
        excluded_omega=cal.omega[~keep],
    )


def efficiency_from_powers(optical_power_in: float,
                           carrier_angular_freq: float,
                           microwave_power_out: float,
                           omega_a: float,
                           bandwidth: float) -> float:
    """Photon-number conversion efficiency from in/out powers.

    ``(P_mw / hbar omega_a) / (P_opt / hbar Omega)``; both powers must
    refer to the same analysis bandwidth, and the microwave power must
    already be referred back to the cavity output (chain divided out).
    ``bandwidth`` documents that common bandwidth; it cancels in the
    ratio and is validated only for positivity.
    """
    if optical_power_in <= 0 or carrier_angular_freq <= 0 or omega_a <= 0:
        raise ValidationError("powers and frequencies must be positive")
    if microwave_power_out < 0:
        raise ValidationError("microwave_power_out must be >= 0")
    if bandwidth <= 0:
        raise ValidationError("bandwidth must be positive")
    flux_mw = microwave_power_out / (HBAR * omega_a)
    flux_opt = optical_power_in / (HBAR * carrier_angular_freq)
    return flux_mw / flux_opt
