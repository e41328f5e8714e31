"""Frequency-domain response functions of the hybrid system."""

import numpy as np
import pytest

from magnonlink import (Detunings, SingularInputError, SystemParams,
                        ValidationError, chi_c, chi_m, cooperativity,
                        efficiency_detuned, efficiency_resonant,
                        normal_mode_frequencies, normal_mode_frequencies_lossy,
                        s11_coil, s11_hybrid, s21_cavity, s_lm, s_lm_minus,
                        s_lm_plus, s_ml_minus, s_ml_plus)
from magnonlink.model import conversion_prefactor, phase_excursion

from conftest import TWO_PI


class TestSusceptibilities:
    def test_resonant_magnitudes(self, device):
        # 1 / ((kappa + kappa_c)/2) and 1 / (gamma/2)
        assert abs(chi_c(device, device.omega_c)) == pytest.approx(
            1.1247699158437833e-08, rel=1e-12)
        assert abs(chi_m(device, device.omega_m)) == pytest.approx(
            2.893726238034461e-07, rel=1e-12)

    def test_scalar_and_array_agree(self, device):
        w = device.omega_c + TWO_PI * np.array([-5e6, 0.0, 5e6])
        arr = chi_c(device, w)
        for wi, vi in zip(w, arr):
            assert chi_c(device, wi) == pytest.approx(vi, rel=1e-15)
        assert isinstance(chi_c(device, float(w[0])), complex)

    def test_half_width_points(self, device):
        # |chi| falls by sqrt(2) one half-linewidth off resonance
        half = 0.5 * (device.kappa + device.kappa_c)
        ratio = abs(chi_c(device, device.omega_c)) / abs(
            chi_c(device, device.omega_c + half))
        assert ratio == pytest.approx(np.sqrt(2.0), rel=1e-12)

    def test_singular_without_damping(self):
        p = SystemParams.from_hz(10e9, 10e9, 0.0, 0.0, 0.0, 63e6)
        with pytest.raises(SingularInputError):
            chi_c(p, p.omega_c)
        with pytest.raises(SingularInputError):
            chi_m(p, p.omega_m)


class TestReflection:
    def test_two_dips_split_by_2g(self, device):
        freq = np.linspace(10.0e9, 10.9e9, 40001)
        mag = np.abs(s11_hybrid(device, TWO_PI * freq))
        interior = (mag[1:-1] < mag[:-2]) & (mag[1:-1] < mag[2:])
        dips = freq[1:-1][interior]
        assert dips.size == 2
        assert dips[1] - dips[0] == pytest.approx(2 * 63e6, rel=0.05)

    def test_uncoupled_cavity_value_at_resonance(self, device):
        from dataclasses import replace

        r = s11_hybrid(replace(device, g=0.0), device.omega_c)
        expected = (device.kappa - device.kappa_c) / (device.kappa + device.kappa_c)
        assert r == pytest.approx(expected, rel=1e-12)

    def test_far_detuned_magnon_approaches_the_bare_cavity(self, device):
        from dataclasses import replace

        # the residual dispersive pull g^2/delta is ~80 kHz here, well
        # inside the 14 MHz cavity half-linewidth, so the reflection at
        # the bare cavity frequency is close to the uncoupled value
        p = replace(device, omega_m=device.omega_m + TWO_PI * 50e9)
        r = s11_hybrid(p, p.omega_c)
        expected = (device.kappa - device.kappa_c) / (device.kappa + device.kappa_c)
        assert abs(r - expected) < 0.02

    def test_passive(self, device):
        w = device.omega_c + TWO_PI * np.linspace(-300e6, 300e6, 4001)
        assert np.all(np.abs(s11_hybrid(device, w)) <= 1.0 + 1e-12)

    def test_phase_winds_twice_as_fast_as_conversion(self, device):
        w = TWO_PI * np.linspace(10.0e9, 10.9e9, 20001)
        exc_refl = phase_excursion(s11_hybrid(device, w))
        exc_conv = phase_excursion(s_lm(device, 1.0, w))
        # two overcoupled normal modes: ~4 pi of reflection phase, half
        # of it in the conversion amplitude
        assert exc_refl == pytest.approx(4 * np.pi, rel=0.05)
        assert exc_refl / exc_conv == pytest.approx(2.0, rel=0.03)


class TestCoilReflection:
    def test_critical_coupling_nulls_resonance(self):
        w0 = TWO_PI * 10.45e9
        assert s11_coil(w0, TWO_PI * 1.1e6, TWO_PI * 1.1e6, w0) == 0.0

    def test_overcoupled_resonant_value(self):
        w0 = TWO_PI * 10.45e9
        r = s11_coil(w0, TWO_PI * 1.1e6, TWO_PI * 1.5e6, w0)
        assert r == pytest.approx(-(1.5 - 1.1) / (1.5 + 1.1), rel=1e-12)

    def test_asymptotically_unity(self):
        w0 = TWO_PI * 10.45e9
        r = s11_coil(w0, TWO_PI * 1.1e6, TWO_PI * 1.5e6, w0 + TWO_PI * 5e9)
        assert abs(r - 1.0) < 1e-3


class TestConversion:
    def test_sidebands_identical(self, device):
        w = device.omega_c + TWO_PI * np.linspace(-200e6, 200e6, 501)
        up = s_lm_plus(device, w)
        down = s_lm_minus(device, w)
        assert np.array_equal(up, down)

    def test_reverse_direction_signs(self, device):
        w = device.omega_c + TWO_PI * np.linspace(-200e6, 200e6, 101)
        assert np.array_equal(s_ml_plus(device, w), -s_lm_plus(device, w))
        assert np.array_equal(s_ml_minus(device, w), s_lm_plus(device, w))

    def test_measured_amplitude_scales_with_sqrt_eta(self, device):
        w = device.omega_c + TWO_PI * 40e6
        assert s_lm(device, 4.0, w) == pytest.approx(2.0 * s_lm(device, 1.0, w),
                                                     rel=1e-12)

    def test_efficiency_equals_squared_conversion_amplitude(self, device):
        w = device.omega_c + TWO_PI * np.linspace(-150e6, 150e6, 301)
        det = Detunings(delta_c=w - device.omega_c, delta_m=w - device.omega_m)
        eff = efficiency_detuned(device, det)
        amp2 = np.abs(s_ml_plus(device, w)) ** 2
        np.testing.assert_allclose(eff, amp2, rtol=1e-12)

    def test_zero_zeta_means_zero_conversion(self, device):
        from dataclasses import replace

        p = replace(device, zeta=0.0)
        w = p.omega_c + TWO_PI * np.linspace(-50e6, 50e6, 21)
        assert np.all(s_lm_plus(p, w) == 0.0)
        assert efficiency_resonant(p) == 0.0


class TestScalars:
    def test_cooperativity(self, device):
        assert cooperativity(device) == pytest.approx(509.99036299389661,
                                                      rel=1e-12)

    def test_resonant_efficiency(self, device):
        assert efficiency_resonant(device) == pytest.approx(
            1.1293535846347304e-12, rel=1e-12)

    def test_detuned_efficiency_at_reported_operating_point(self, device):
        det = Detunings(TWO_PI * 320e6, TWO_PI * 12e6)
        assert float(efficiency_detuned(device, det)) == pytest.approx(
            1.2915522122951447e-10, rel=1e-12)

    def test_conversion_prefactor_bounds_peak(self, device):
        # kappa_c zeta / ((kappa_c + kappa) gamma), the K in the efficiency
        k = conversion_prefactor(device)
        assert k == pytest.approx(1.4455509155155799e-10, rel=1e-12)


class TestNormalModes:
    def test_lossless_split_at_degeneracy(self, device):
        lo, hi = sorted(normal_mode_frequencies(device))
        assert hi - lo == pytest.approx(2.0 * device.g, rel=1e-12)

    def test_lossless_detuned(self, device):
        from dataclasses import replace

        delta = TWO_PI * 40e6
        p = replace(device, omega_m=device.omega_c + 2 * delta)
        lo, hi = sorted(normal_mode_frequencies(p))
        assert hi - lo == pytest.approx(2 * np.hypot(p.g, delta), rel=1e-12)

    def test_lossy_linewidths_hybridize_equally_at_degeneracy(self, device):
        lower, upper = normal_mode_frequencies_lossy(device)
        total = device.kappa + device.kappa_c + device.gamma
        assert lower.imag == pytest.approx(upper.imag, rel=1e-9)
        # amplitude decay: imaginary parts sum to -(kappa_t + gamma)/2,
        # shared equally between the two hybrid modes at degeneracy
        assert -(lower.imag + upper.imag) == pytest.approx(total / 2, rel=1e-12)
        assert upper.real - lower.real == pytest.approx(2 * device.g, rel=0.01)


class TestBareCavityTransmission:
    def test_peak_value(self):
        w0 = TWO_PI * 10.45e9
        peak = s21_cavity(w0, TWO_PI * 3.3e6, TWO_PI * 25e6, TWO_PI * 42e3, w0)
        k1, kc, k = 42e3, 25e6, 3.3e6
        assert peak == pytest.approx(4 * k1 * kc / (k1 + kc + k) ** 2, rel=1e-12)

    def test_half_power_at_half_total_linewidth(self):
        w0 = TWO_PI * 10.45e9
        total = TWO_PI * (3.3e6 + 25e6 + 42e3)
        peak = s21_cavity(w0, TWO_PI * 3.3e6, TWO_PI * 25e6, TWO_PI * 42e3, w0)
        side = s21_cavity(w0, TWO_PI * 3.3e6, TWO_PI * 25e6, TWO_PI * 42e3,
                          w0 + 0.5 * total)
        assert side == pytest.approx(0.5 * peak, rel=1e-12)


class TestValidation:
    def test_rates_must_be_nonnegative(self):
        with pytest.raises(ValidationError):
            SystemParams.from_hz(10e9, 10e9, -1.0, 25e6, 1e6, 63e6)

    def test_rates_must_sit_below_the_carrier(self):
        with pytest.raises(ValidationError):
            SystemParams.from_hz(10e9, 10e9, 3e6, 25e6, 1e6, 11e9)

    def test_detunings_reject_nan(self):
        with pytest.raises(ValidationError):
            Detunings(np.nan, 0.0)

    def test_detunings_accept_arrays(self):
        d = Detunings(np.array([0.0, 1.0]), 0.0)
        assert np.shape(d.delta_c) == (2,)
