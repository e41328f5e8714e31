"""Trace synthesis and parameter recovery by damped least squares."""

from dataclasses import replace

import numpy as np
import pytest

from magnonlink import (DataError, SpectrumTrace, SystemParams, TraceKind,
                        ValidationError, find_dips, fit_power_only,
                        fit_s11_coil, fit_s11_hybrid, fit_s_lm,
                        initial_guess_s11, jacobian_fd, monte_carlo_recovery,
                        synthesize_trace)

from conftest import (G_HZ, GAMMA_HZ, KAPPA_C_HZ, KAPPA_HZ, OMEGA_C_HZ,
                      TWO_PI)

HALF_SPAN_HZ = 4.0 * (KAPPA_HZ + KAPPA_C_HZ)


def _grid(n=801, half_span=HALF_SPAN_HZ):
    return np.linspace(OMEGA_C_HZ - half_span, OMEGA_C_HZ + half_span, n)


def _perturbed(device):
    return replace(device,
                   omega_c=device.omega_c + TWO_PI * 2e6,
                   omega_m=device.omega_m - TWO_PI * 2e6,
                   kappa=1.2 * device.kappa,
                   kappa_c=0.8 * device.kappa_c,
                   gamma=1.3 * device.gamma,
                   g=1.1 * device.g)


class TestTraceValidation:
    def test_needs_at_least_eight_samples(self):
        with pytest.raises(ValidationError):
            SpectrumTrace(np.arange(5.0) + 1, np.ones(5, complex),
                          TraceKind.S11_HYBRID)

    def test_frequencies_must_increase(self):
        f = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 7.0])
        with pytest.raises(ValidationError):
            SpectrumTrace(f, np.ones(8, complex), TraceKind.S11_HYBRID)

    def test_values_must_be_finite(self):
        v = np.ones(8, complex)
        v[3] = np.nan
        with pytest.raises(ValidationError):
            SpectrumTrace(np.arange(8.0) + 1, v, TraceKind.S11_HYBRID)

    def test_shapes_must_match(self):
        with pytest.raises(ValidationError):
            SpectrumTrace(np.arange(9.0) + 1, np.ones(8, complex),
                          TraceKind.S11_HYBRID)

    def test_power_traces_are_real(self, device):
        t = synthesize_trace(device, TraceKind.POWER_ONLY, _grid(64))
        assert t.value.dtype == np.float64


class TestSynthesis:
    def test_same_seed_reproduces_the_same_trace(self, device):
        a = synthesize_trace(device, TraceKind.S11_HYBRID, _grid(201),
                             noise_sigma=0.01, seed=7)
        b = synthesize_trace(device, TraceKind.S11_HYBRID, _grid(201),
                             noise_sigma=0.01, seed=7)
        assert np.array_equal(a.value, b.value)

    def test_different_seeds_differ(self, device):
        a = synthesize_trace(device, TraceKind.S11_HYBRID, _grid(201),
                             noise_sigma=0.01, seed=7)
        b = synthesize_trace(device, TraceKind.S11_HYBRID, _grid(201),
                             noise_sigma=0.01, seed=8)
        assert not np.array_equal(a.value, b.value)

    def test_coil_kind_requires_gamma_c(self, device):
        with pytest.raises(ValidationError):
            synthesize_trace(device, TraceKind.S11_COIL, _grid(64))

    def test_meta_records_the_generation_settings(self, device):
        t = synthesize_trace(device, TraceKind.S_LM, _grid(64),
                             noise_sigma=0.0, eta=0.7)
        assert t.meta["eta"] == 0.7
        assert t.meta["kind"] == "s_lm"


class TestHybridReflectionFit:
    def test_noiseless_recovery_from_perturbed_start(self, device):
        trace = synthesize_trace(device, TraceKind.S11_HYBRID, _grid())
        result = fit_s11_hybrid(trace, init=_perturbed(device))
        assert result.converged
        for name in ("omega_c", "omega_m", "kappa", "kappa_c", "gamma", "g"):
            assert result.params[name] == pytest.approx(
                getattr(device, name), rel=1e-6), name

    def test_auto_initialization_from_the_dips(self, device):
        trace = synthesize_trace(device, TraceKind.S11_HYBRID, _grid())
        result = fit_s11_hybrid(trace)
        assert "ambiguous-mode-assignment" in result.flags
        assert result.converged
        for name in ("kappa", "kappa_c", "gamma", "g"):
            assert result.params[name] == pytest.approx(
                getattr(device, name), rel=1e-4), name

    def test_covariance_shrinks_with_noise(self, device):
        init = _perturbed(device)
        lo = fit_s11_hybrid(synthesize_trace(device, TraceKind.S11_HYBRID,
                                             _grid(), noise_sigma=0.003,
                                             seed=1), init)
        hi = fit_s11_hybrid(synthesize_trace(device, TraceKind.S11_HYBRID,
                                             _grid(), noise_sigma=0.03,
                                             seed=1), init)
        i = lo.fitted_names.index("g")
        assert hi.covariance[i, i] > lo.covariance[i, i]

    def test_gives_up_cleanly_when_starved_of_iterations(self, device):
        trace = synthesize_trace(device, TraceKind.S11_HYBRID, _grid())
        far = replace(device, g=0.3 * device.g, kappa=3.0 * device.kappa)
        result = fit_s11_hybrid(trace, init=far, max_iter=1)
        assert not result.converged

    def test_rejects_the_wrong_trace_kind(self, device):
        trace = synthesize_trace(device, TraceKind.POWER_ONLY, _grid(64))
        with pytest.raises(DataError):
            fit_s11_hybrid(trace, init=device)


class TestConversionFit:
    def test_recovers_the_eta_zeta_product_and_phase(self, device):
        trace = synthesize_trace(device, TraceKind.S_LM, _grid(), eta=0.7)
        result = fit_s_lm(trace, init=device)
        assert result.converged
        assert result.eta_zeta == pytest.approx(0.7 * device.zeta, rel=1e-6)
        assert result.params["g"] == pytest.approx(device.g, rel=1e-6)
        assert result.params["gamma"] == pytest.approx(device.gamma, rel=1e-6)
        phase = (result.nuisance["phase_rad"] + np.pi) % (2 * np.pi) - np.pi
        assert phase == pytest.approx(0.0, abs=1e-6)

    def test_instrument_phase_is_absorbed(self, device):
        trace = synthesize_trace(device, TraceKind.S_LM, _grid(), eta=0.7)
        rotated = SpectrumTrace(trace.freq, np.exp(0.9j) * trace.value,
                                TraceKind.S_LM)
        result = fit_s_lm(rotated, init=device)
        assert result.converged
        assert result.eta_zeta == pytest.approx(0.7 * device.zeta, rel=1e-6)
        assert result.nuisance["phase_rad"] == pytest.approx(0.9, abs=1e-6)

    def test_unknown_fixed_names_rejected(self, device):
        trace = synthesize_trace(device, TraceKind.S_LM, _grid(64))
        with pytest.raises(DataError):
            fit_s_lm(trace, init=device, fixed=frozenset({"bogus"}))


class TestCoilFit:
    def test_overcoupled_recovery(self, device):
        gamma_c = TWO_PI * 1.5e6
        grid = np.linspace(OMEGA_C_HZ - 10e6, OMEGA_C_HZ + 10e6, 401)
        trace = synthesize_trace(device, TraceKind.S11_COIL, grid,
                                 gamma_c=gamma_c)
        result = fit_s11_coil(trace, (device.omega_m + TWO_PI * 0.2e6,
                                      1.3 * device.gamma, 0.8 * gamma_c))
        assert result.converged
        assert result.params["omega_m"] == pytest.approx(device.omega_m,
                                                         rel=1e-9)
        assert result.params["gamma"] == pytest.approx(device.gamma, rel=1e-6)
        assert result.params["gamma_c"] == pytest.approx(gamma_c, rel=1e-6)
        assert result.regime == "overcoupled"

    def test_undercoupled_regime(self, device):
        gamma_c = TWO_PI * 0.5e6
        grid = np.linspace(OMEGA_C_HZ - 10e6, OMEGA_C_HZ + 10e6, 401)
        trace = synthesize_trace(device, TraceKind.S11_COIL, grid,
                                 gamma_c=gamma_c)
        result = fit_s11_coil(trace, (device.omega_m, 1.2 * device.gamma,
                                      1.2 * gamma_c))
        assert result.regime == "undercoupled"

    def test_critical_regime(self, device):
        grid = np.linspace(OMEGA_C_HZ - 10e6, OMEGA_C_HZ + 10e6, 401)
        trace = synthesize_trace(device, TraceKind.S11_COIL, grid,
                                 gamma_c=device.gamma)
        result = fit_s11_coil(trace, (device.omega_m, 1.05 * device.gamma,
                                      0.95 * device.gamma))
        assert result.regime == "critical"


class TestPowerOnlyFit:
    def test_recovery_without_phase_information(self, device):
        trace = synthesize_trace(device, TraceKind.POWER_ONLY, _grid())
        result = fit_power_only(trace, init=_perturbed(device))
        assert result.converged
        for name in ("kappa", "kappa_c", "gamma", "g"):
            assert result.params[name] == pytest.approx(
                getattr(device, name), rel=1e-6), name


class TestSeeding:
    def test_find_dips_orders_by_depth(self):
        freq = np.linspace(0.0, 10.0, 101)
        mag = np.ones_like(freq)
        mag[30] = 0.5
        mag[70] = 0.2
        assert find_dips(freq, mag) == [freq[70], freq[30]]

    def test_initial_guess_flags_near_degenerate_modes(self, device):
        trace = synthesize_trace(device, TraceKind.S11_HYBRID, _grid())
        guess, flags = initial_guess_s11(trace)
        assert flags == ["ambiguous-mode-assignment"]
        assert guess.omega_c / TWO_PI == pytest.approx(OMEGA_C_HZ, abs=1e6)
        assert guess.g / TWO_PI == pytest.approx(G_HZ, rel=0.1)

    def test_featureless_trace_cannot_seed_a_fit(self):
        freq = np.linspace(1.0, 2.0, 64)
        with pytest.raises(DataError):
            initial_guess_s11(SpectrumTrace(freq, np.ones(64, complex),
                                            TraceKind.S11_HYBRID))


class TestJacobian:
    def test_exact_for_quadratics(self):
        def f(x):
            return np.array([x[0] ** 2, x[0] * x[1]])

        jac = jacobian_fd(f, np.array([3.0, 2.0]))
        np.testing.assert_allclose(jac, [[6.0, 0.0], [2.0, 3.0]], rtol=1e-9)

    def test_scales_control_the_step(self):
        calls = []

        def f(x):
            calls.append(x.copy())
            return np.array([x[0]])

        jacobian_fd(f, np.array([0.0]), scales=np.array([1e9]), rel_step=1e-6)
        steps = {abs(c[0]) for c in calls if c[0] != 0.0}
        assert steps == {1e3}

    def test_complex_models_are_supported(self):
        jac = jacobian_fd(lambda x: np.exp(1j * x), np.array([0.3]))
        assert jac.dtype == complex
        np.testing.assert_allclose(jac[0, 0], 1j * np.exp(0.3j), rtol=1e-6)


class TestMonteCarlo:
    def test_deterministic_across_thread_counts(self, device):
        init = _perturbed(device)
        grid = _grid(201)
        a = monte_carlo_recovery(device, TraceKind.S11_HYBRID, grid, 0.01, 3,
                                 init, seed0=5, max_workers=1)
        b = monte_carlo_recovery(device, TraceKind.S11_HYBRID, grid, 0.01, 3,
                                 init, seed0=5, max_workers=4)
        for ra, rb in zip(a, b):
            assert ra.params == rb.params

    def test_only_reflection_fits_are_wired_up(self, device):
        with pytest.raises(DataError):
            monte_carlo_recovery(device, TraceKind.S_LM, _grid(64), 0.01, 2,
                                 device)
