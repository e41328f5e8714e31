"""Detuned-operation optimizer: location, certification, gain."""

from dataclasses import replace

import numpy as np
import pytest

from magnonlink import (Detunings, EfficiencyLandscape, HessianKind,
                        NumericalError, cooperativity, conversion_prefactor,
                        efficiency_detuned, efficiency_landscape,
                        efficiency_resonant, find_optimum,
                        optimum_along_fixed_offset, stationarity_residual)
from magnonlink.constants import TWO_PI


class TestOptimum:
    def test_location_and_value(self, device):
        report = find_optimum(device)
        assert report.det.delta_c / TWO_PI == pytest.approx(
            319235528.96653825, rel=1e-9)
        assert report.det.delta_m / TWO_PI == pytest.approx(
            12408448.122374278, rel=1e-9)
        assert report.efficiency == pytest.approx(1.44555091551558e-10,
                                                  rel=1e-12)
        assert report.gain_over_resonant == pytest.approx(127.99808095381555,
                                                          rel=1e-12)
        assert report.hessian_definiteness is HessianKind.MAX

    def test_normalized_coordinates_satisfy_the_exact_conditions(self, device):
        report = find_optimum(device)
        c = cooperativity(device)
        x, y = report.delta_c_normalized, report.delta_m_normalized
        # the stationary point sits at x = y with 4 x^2 = C - 1
        assert x == pytest.approx(y, rel=1e-9)
        assert 4.0 * x * x == pytest.approx(c - 1.0, rel=1e-9)
        # the common strong-coupling rule of thumb 4 x^2 ~ C + 1 holds to
        # its intrinsic 2/(C+1) accuracy
        assert abs(4.0 * x * x / (c + 1.0) - 1.0) < 0.02

    def test_peak_efficiency_saturates_the_rate_prefactor(self, device):
        report = find_optimum(device)
        assert report.efficiency == pytest.approx(conversion_prefactor(device),
                                                  rel=1e-12)

    def test_gain_matches_the_closed_form(self, device):
        c = cooperativity(device)
        report = find_optimum(device)
        assert report.gain_over_resonant == pytest.approx(
            (c + 1.0) ** 2 / (4.0 * c), rel=1e-12)

    def test_certified_stationary(self, device):
        report = find_optimum(device)
        assert report.gradient_norm < 1e-6
        rx, ry = stationarity_residual(device, report.det)
        assert abs(rx) < 1e-6 and abs(ry) < 1e-6

    def test_reported_efficiency_is_reachable(self, device):
        report = find_optimum(device)
        direct = efficiency_detuned(device, report.det)
        assert float(direct) == pytest.approx(report.efficiency, rel=1e-12)

    def test_independent_of_the_coarse_grid(self, device):
        a = find_optimum(device)
        b = find_optimum(device, span=50.0, grid_points=501)
        assert a.delta_c_normalized == pytest.approx(b.delta_c_normalized,
                                                     rel=1e-9)
        assert a.efficiency == pytest.approx(b.efficiency, rel=1e-12)


class TestOptimumEdgeCases:
    def test_uncoupled_system_is_degenerate(self, device):
        report = find_optimum(replace(device, g=0.0))
        assert report.hessian_definiteness is HessianKind.DEGENERATE
        assert report.efficiency == 0.0
        assert report.gain_over_resonant == 1.0

    def test_weak_coupling_stays_on_resonance(self, device):
        weak = replace(device, g=TWO_PI * 1e6)
        assert cooperativity(weak) < 1.0
        report = find_optimum(weak)
        assert report.delta_c_normalized == pytest.approx(0.0, abs=1e-9)
        assert report.delta_m_normalized == pytest.approx(0.0, abs=1e-9)
        assert report.hessian_definiteness is HessianKind.MAX
        assert report.gain_over_resonant == pytest.approx(1.0, rel=1e-9)

    def test_too_small_a_window_is_reported(self, device):
        with pytest.raises(NumericalError, match="increase span"):
            find_optimum(device, span=1.0)

    def test_degenerate_grid_rejected(self, device):
        with pytest.raises(NumericalError):
            find_optimum(device, grid_points=2)


class TestSignSymmetry:
    def test_joint_sign_flip_leaves_efficiency_unchanged(self, device):
        report = find_optimum(device)
        dc, dm = report.det.delta_c, report.det.delta_m
        plus = efficiency_detuned(device, Detunings(dc, dm))
        minus = efficiency_detuned(device, Detunings(-dc, -dm))
        assert float(plus) == float(minus)

    def test_single_sign_flip_does_not(self, device):
        report = find_optimum(device)
        dc, dm = report.det.delta_c, report.det.delta_m
        plus = efficiency_detuned(device, Detunings(dc, dm))
        mixed = efficiency_detuned(device, Detunings(dc, -dm))
        assert float(mixed) < float(plus)


class TestLandscape:
    def test_axes_and_anchor_values(self, device):
        report = find_optimum(device)
        grid = efficiency_landscape(
            device,
            dc_axis=np.array([0.0, report.det.delta_c]),
            dm_axis=np.array([0.0, report.det.delta_m]),
        )
        assert grid.values.shape == (2, 2)
        assert grid.values[0, 0] == pytest.approx(efficiency_resonant(device),
                                                  rel=1e-12)
        assert grid.values[1, 1] == pytest.approx(report.efficiency, rel=1e-9)

    def test_no_grid_point_beats_the_refined_optimum(self, device):
        report = find_optimum(device)
        kt = device.kappa_c + device.kappa
        grid = efficiency_landscape(
            device,
            dc_axis=np.linspace(-15 * kt, 15 * kt, 151),
            dm_axis=np.linspace(-15 * device.gamma, 15 * device.gamma, 151),
        )
        assert grid.values.max() <= report.efficiency * (1 + 1e-12)

    def test_validation(self, device):
        with pytest.raises(NumericalError):
            efficiency_landscape(device, np.array([0.0, np.inf]),
                                 np.array([0.0]))
        with pytest.raises(NumericalError):
            EfficiencyLandscape(np.zeros(3), np.zeros(4), np.zeros((3, 3)))


class TestFixedOffsetLine:
    def test_line_through_the_global_optimum_reaches_it(self, device):
        report = find_optimum(device)
        offset = report.det.delta_c - report.det.delta_m
        line = optimum_along_fixed_offset(device, offset)
        assert line.efficiency == pytest.approx(report.efficiency, rel=1e-6)
        assert line.det.delta_m == pytest.approx(report.det.delta_m, rel=1e-3)

    def test_resonant_current_line_still_beats_resonance(self, device):
        line = optimum_along_fixed_offset(device, 0.0)
        assert line.gain_over_resonant > 1.0
        assert line.det.delta_c == pytest.approx(line.det.delta_m, rel=1e-12)
        assert line.efficiency > efficiency_resonant(device)

    def test_line_never_beats_the_two_dimensional_optimum(self, device):
        report = find_optimum(device)
        line = optimum_along_fixed_offset(device, report.det.delta_c)
        assert line.efficiency <= report.efficiency * (1 + 1e-9)

    def test_boundary_hit_is_reported(self, device):
        with pytest.raises(NumericalError, match="increase span"):
            optimum_along_fixed_offset(device, 0.0, span=1e-6)
