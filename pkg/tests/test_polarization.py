"""Tests for optical-pumping polarization and saturation fitting.

Oracles: the interference fringe has period lambda/(2n) = 110.833... nm
and range [(1-r)^2, (1+r)^2]; the pump kinetics are an explicit
exponential with hand-checkable values; the contrast integral of a
two-level intensity map has a closed form; and the saturation fit must
recover synthetic parameters exactly (noise-free), be exactly equivariant
under intensity rescaling, and stay within a few percent under 1 percent
multiplicative noise.
"""

import math

import numpy as np
import pytest

from spintex.polarization import (
    FRINGE_PERIOD_NM,
    PolarizationError,
    contrast_curve,
    fit_saturation,
    fringe_period_nm,
    normalized_profiles,
    pump_profile,
    toy_interference_intensity,
)


class TestInterference:
    def test_fringe_period_value(self):
        assert FRINGE_PERIOD_NM == pytest.approx(532.0 / 4.8, rel=1e-12)
        assert FRINGE_PERIOD_NM == pytest.approx(110.8333333, rel=1e-9)
        assert fringe_period_nm(640.0, 2.0) == pytest.approx(160.0)

    def test_extremes_and_period(self):
        r = 0.35
        x = np.linspace(0.0, 5 * FRINGE_PERIOD_NM, 50001)
        intensity = toy_interference_intensity(x, reflectivity=r)
        assert intensity.max() == pytest.approx((1 + r) ** 2, rel=1e-6)
        assert intensity.min() == pytest.approx((1 - r) ** 2, rel=1e-4)
        # antinode at x = 0 for zero phase, next at one fringe period
        assert intensity[0] == pytest.approx((1 + r) ** 2, rel=1e-12)
        at_period = toy_interference_intensity(
            np.array([FRINGE_PERIOD_NM]), reflectivity=r
        )
        assert at_period[0] == pytest.approx((1 + r) ** 2, rel=1e-12)

    def test_phase_shifts_pattern(self):
        r = 0.5
        shifted = toy_interference_intensity(
            np.array([0.0]), reflectivity=r, phase_rad=math.pi
        )
        assert shifted[0] == pytest.approx((1 - r) ** 2, rel=1e-12)

    def test_envelope_multiplies(self):
        x = np.array([0.0, 150.0, 300.0])
        bare = toy_interference_intensity(x, reflectivity=0.3)
        enveloped = toy_interference_intensity(
            x, reflectivity=0.3, envelope_sigma_nm=200.0,
            envelope_center_nm=0.0,
        )
        gauss = np.exp(-(x**2) / (2 * 200.0**2))
        assert np.allclose(enveloped, bare * gauss, rtol=1e-14)

    def test_validation(self):
        with pytest.raises(PolarizationError):
            toy_interference_intensity([0.0], reflectivity=1.5)
        with pytest.raises(PolarizationError):
            toy_interference_intensity([0.0], envelope_sigma_nm=-1.0)
        with pytest.raises(PolarizationError):
            fringe_period_nm(-1.0)


class TestPumpProfile:
    def test_hand_value(self):
        # tau I / tau_S = 2 -> P = 1 - e^-2
        p = pump_profile(np.array([4.0]), pump_time_us=0.5, tau_s_us=1.0)
        assert p[0] == pytest.approx(1.0 - math.exp(-2.0), rel=1e-14)

    def test_limits(self):
        intensity = np.array([0.0, 1.0, 100.0])
        p = pump_profile(intensity, 50.0, 1.0)
        assert p[0] == 0.0
        assert p[2] == pytest.approx(1.0, abs=1e-12)
        capped = pump_profile(intensity, 50.0, 1.0, p_max=0.4)
        assert capped[2] == pytest.approx(0.4, abs=1e-12)

    def test_monotone_in_time(self):
        intensity = np.array([0.7])
        taus = [0.1, 0.5, 2.0, 10.0]
        values = [pump_profile(intensity, t, 1.3)[0] for t in taus]
        assert np.all(np.diff(values) > 0)

    def test_validation(self):
        with pytest.raises(PolarizationError):
            pump_profile([1.0], 1.0, 0.0)
        with pytest.raises(PolarizationError):
            pump_profile([1.0], -1.0, 1.0)
        with pytest.raises(PolarizationError):
            pump_profile([-1.0], 1.0, 1.0)
        with pytest.raises(PolarizationError):
            pump_profile([1.0], 1.0, 1.0, p_max=0.0)


class TestContrastCurve:
    def test_two_level_closed_form(self):
        # half the cells at I=1, half at I=2, unit weight
        intensity = np.array([1.0, 1.0, 2.0, 2.0])
        weight = np.ones(4)
        tau_s = 0.8
        taus = np.array([0.0, 0.4, 1.6])
        curve = contrast_curve(
            intensity, taus, tau_s, weight=weight, cell_volume_nm3=2.0
        )
        for k, tau in enumerate(taus):
            expected = 2.0 * (
                2 * (1 - math.exp(-tau / tau_s))
                + 2 * (1 - math.exp(-2 * tau / tau_s))
            )
            assert curve[k] == pytest.approx(expected, rel=1e-14)

    def test_default_weight_is_intensity_squared(self):
        intensity = np.array([0.5, 1.5, 3.0])
        taus = [0.3, 0.9]
        implicit = contrast_curve(intensity, taus, 1.0)
        explicit = contrast_curve(
            intensity, taus, 1.0, weight=intensity**2
        )
        assert np.array_equal(implicit, explicit)

    def test_saturates_to_weight_integral(self):
        intensity = np.array([1.0, 2.0, 3.0])
        curve = contrast_curve(intensity, [1e4], 1.0)
        assert curve[0] == pytest.approx(float(np.sum(intensity**2)),
                                         rel=1e-12)

    def test_validation(self):
        with pytest.raises(PolarizationError):
            contrast_curve([1.0], [-0.1], 1.0)
        with pytest.raises(PolarizationError):
            contrast_curve([1.0, 2.0], [0.1], 1.0, weight=[1.0])


def fringe_intensity(n=512, length_nm=2250.0):
    x = np.linspace(-length_nm / 2, length_nm / 2, n)
    return toy_interference_intensity(
        x, reflectivity=0.35, envelope_sigma_nm=600.0
    )


class TestFitSaturation:
    def synthetic(self, tau_s=0.7, amplitude=2.7, n_times=24):
        intensity = fringe_intensity()
        times = np.geomspace(0.02, 20.0, n_times)
        curve = amplitude * contrast_curve(intensity, times, tau_s)
        return intensity, times, curve

    def test_noise_free_recovery(self):
        intensity, times, curve = self.synthetic()
        fit = fit_saturation(times, curve, intensity)
        assert fit.tau_s_us == pytest.approx(0.7, rel=1e-6)
        assert fit.amplitude == pytest.approx(2.7, rel=1e-6)
        assert fit.sse < 1e-12 * float(curve @ curve)

    def test_exact_scale_equivariance(self):
        intensity, times, curve = self.synthetic()
        fit1 = fit_saturation(times, curve, intensity)
        scale = 37.5
        # same physical curve: I -> c I with tau_S -> c tau_S
        fit2 = fit_saturation(times, curve, scale * intensity)
        assert fit2.u_us == fit1.u_us  # identical search path
        assert fit2.tau_s_us == pytest.approx(
            scale * fit1.tau_s_us, rel=1e-14
        )

    def test_recovery_under_one_percent_noise(self):
        intensity, times, curve = self.synthetic()
        rng = np.random.default_rng(12)
        noisy = curve * (1.0 + 0.01 * rng.normal(size=len(curve)))
        fit = fit_saturation(times, noisy, intensity)
        assert fit.tau_s_us == pytest.approx(0.7, rel=0.02)

    def test_custom_weight_respected(self):
        intensity = fringe_intensity()
        weight = np.ones_like(intensity)
        times = np.geomspace(0.05, 10.0, 16)
        curve = 1.3 * contrast_curve(intensity, times, 0.5, weight=weight)
        fit = fit_saturation(times, curve, intensity, weight=weight)
        assert fit.tau_s_us == pytest.approx(0.5, rel=1e-6)

    def test_validation(self):
        intensity = fringe_intensity(64)
        with pytest.raises(PolarizationError):
            fit_saturation([1.0, 2.0], [0.1, 0.2], intensity)
        with pytest.raises(PolarizationError):
            fit_saturation([1.0, 2.0, 3.0], [0.1, 0.2], intensity)
        with pytest.raises(PolarizationError):
            fit_saturation(
                [1.0, 2.0, 3.0], [0.1, 0.2, 0.3],
                np.zeros_like(intensity),
            )


class TestNormalizedProfiles:
    def test_unit_maximum(self):
        rows = np.array([[0.2, 0.4, 0.1], [3.0, 1.0, 2.0]])
        out = normalized_profiles(rows)
        assert np.allclose(out.max(axis=1), 1.0)
        assert out[0, 1] == 1.0 and out[1, 0] == 1.0

    def test_dips_fill_with_fluence(self):
        # polarization contrast between fringe node and antinode fades as
        # the pump saturates
        x = np.linspace(0.0, 4 * FRINGE_PERIOD_NM, 1024)
        intensity = toy_interference_intensity(x, reflectivity=0.35)
        short = pump_profile(intensity, 0.05, 1.0)
        long = pump_profile(intensity, 20.0, 1.0)
        short_n, long_n = normalized_profiles([short, long])
        assert short_n.min() < 0.3
        assert long_n.min() > 0.95
        # monotone fill-in across intermediate fluences
        mins = [
            normalized_profiles(
                [pump_profile(intensity, t, 1.0)]
            )[0].min()
            for t in (0.05, 0.2, 1.0, 5.0, 20.0)
        ]
        assert np.all(np.diff(mins) > 0)

    def test_guard_rejects_vanishing_profile(self):
        with pytest.raises(PolarizationError):
            normalized_profiles([[1.0, 0.5], [1e-9, 2e-9]])
        with pytest.raises(PolarizationError):
            normalized_profiles([[0.0, 0.0]])
