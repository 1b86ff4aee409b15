"""Tests for coherence-scan acquisition and profile reconstruction.

Oracles: the discrete Parseval identity and forward/inverse transform
round trip are exact algebraic identities of the padded-FFT construction;
a rectangular profile has the analytic transform L sinc(uL/2) whose
magnitude FWHM is 2 * 1.8954942670 * (2/L); a winding wavevector appears
as a reconstructed phase slope equal to Q; and the decoherence envelope
multiplies the static signal by exp(-((tau_w + tau'(Q'))/T2)^p) exactly.
"""

import math

import numpy as np
import pytest

from spintex.geometry import NvGroup, SpinEnsemble
from spintex.imaging import (
    CoherenceScan,
    ImagingError,
    SpatialProfile,
    acquire_scan,
    dominant_modulation_period,
    fwhm,
    phase_slope,
    profile_to_scan,
    reconstruct,
    revival_width,
    symmetric_grid,
)
from spintex.protocol import DecoherenceModel, wind_time_us

Z_AXIS = NvGroup(index=0, axis=np.array([0.0, 0.0, 1.0]))

# |sinc(u)| = 1/2 at u = 1.8954942670339809
SINC_HALF = 1.8954942670339809


def line_ensemble(n=400, length_nm=1200.0, polarizations=None):
    """Deterministic lattice of spins along z for geometric readout tests."""
    z = (np.arange(n) + 0.5) * (length_nm / n) - length_nm / 2.0
    positions = np.zeros((n, 3))
    positions[:, 2] = z
    return SpinEnsemble(
        positions=positions,
        group=Z_AXIS,
        boundary="open",
        dimensions=np.array([50.0, 50.0, length_nm]),
        polarizations=polarizations,
    )


def slab_polarizations(ens, width_nm, center_nm=0.0):
    z = ens.positions[:, 2]
    return np.where(np.abs(z - center_nm) <= width_nm / 2.0, 1.0, 0.0)


# ---------------------------------------------------------------------------
# grids and validation
# ---------------------------------------------------------------------------


class TestGridsAndValidation:
    def test_symmetric_grid(self):
        g = symmetric_grid(0.1, 11)
        assert len(g) == 11
        assert g[5] == 0.0
        assert g[0] == pytest.approx(-0.1)
        assert g[-1] == pytest.approx(0.1)
        assert np.allclose(np.diff(g), 0.02)

    def test_scan_requires_uniform_grid(self):
        with pytest.raises(ImagingError):
            CoherenceScan(
                q_values=np.array([0.0, 0.1, 0.3]),
                direction=np.array([0.0, 0.0, 1.0]),
                signal=np.zeros(3, dtype=complex),
            )

    def test_scan_shape_mismatch(self):
        with pytest.raises(ImagingError):
            CoherenceScan(
                q_values=np.linspace(0, 1, 4),
                direction=np.array([0.0, 0.0, 1.0]),
                signal=np.zeros(3, dtype=complex),
            )

    def test_zero_direction_rejected(self):
        ens = line_ensemble(16)
        with pytest.raises(ImagingError):
            acquire_scan(ens, (0, 0, 0), symmetric_grid(0.1, 8))


# ---------------------------------------------------------------------------
# acquisition
# ---------------------------------------------------------------------------


class TestAcquisition:
    def test_uniform_sample_gives_dc_peak(self):
        ens = line_ensemble(200)
        qs = symmetric_grid(0.2, 41)
        scan = acquire_scan(ens, (0, 0, 1), qs, tip_theta=math.pi / 2)
        k0 = np.argmin(np.abs(qs))
        assert scan.signal[k0] == pytest.approx(0.5, abs=1e-12)
        # off-DC bins see the sinc sidelobes of the finite line
        assert np.all(
            np.abs(scan.signal[np.abs(qs) > 0.02]) < 0.05
        )

    def test_signal_is_fourier_sum(self):
        # hand-evaluate the Fourier sum on a tiny ensemble
        ens = line_ensemble(3, length_nm=300.0)
        qs = np.array([-0.05, 0.0, 0.05])
        theta = 0.7
        scan = acquire_scan(ens, (0, 0, 1), qs, tip_theta=theta)
        z = ens.positions[:, 2]
        for k, q in enumerate(qs):
            expected = 0.5 * math.sin(theta) * np.mean(np.exp(-1j * q * z))
            assert scan.signal[k] == pytest.approx(expected, abs=1e-14)

    def test_wound_texture_shifts_peak(self):
        ens = line_ensemble(300)
        q_wind = 0.15
        qs = q_wind + symmetric_grid(0.05, 41)
        scan = acquire_scan(
            ens, (0, 0, 1), qs, wind_q_vec=np.array([0.0, 0.0, q_wind])
        )
        peak_q = qs[np.argmax(np.abs(scan.signal))]
        assert peak_q == pytest.approx(q_wind, abs=scan.spacing / 2)
        assert np.max(np.abs(scan.signal)) == pytest.approx(0.5, abs=1e-12)

    def test_decoherence_attenuates_pointwise(self):
        ens = line_ensemble(100)
        qs = np.linspace(0.01, 0.2, 20)
        dec = DecoherenceModel(t2_us=0.5, stretch=1.2)
        grad = 3.0
        bare = acquire_scan(ens, (0, 0, 1), qs)
        damped = acquire_scan(
            ens, (0, 0, 1), qs, decoherence=dec, gradient_mt_per_um=grad
        )
        taus = np.array([wind_time_us(q, grad) for q in qs])
        expected = bare.signal * dec.envelope(taus)
        assert np.allclose(damped.signal, expected, atol=1e-15)

    def test_decoherence_with_wind_adds_times(self):
        ens = line_ensemble(100)
        q_wind = 0.1
        qs = np.linspace(0.05, 0.15, 5)
        dec = DecoherenceModel(t2_us=0.5)
        grad = 3.0
        bare = acquire_scan(
            ens, (0, 0, 1), qs, wind_q_vec=np.array([0, 0, q_wind])
        )
        damped = acquire_scan(
            ens, (0, 0, 1), qs, wind_q_vec=np.array([0, 0, q_wind]),
            decoherence=dec, gradient_mt_per_um=grad,
        )
        taus = wind_time_us(q_wind, grad) + np.array(
            [wind_time_us(q, grad) for q in qs]
        )
        assert np.allclose(
            damped.signal, bare.signal * dec.envelope(taus), atol=1e-15
        )

    def test_decoherence_requires_gradient(self):
        ens = line_ensemble(16)
        with pytest.raises(ImagingError):
            acquire_scan(
                ens, (0, 0, 1), symmetric_grid(0.1, 8),
                decoherence=DecoherenceModel(t2_us=1.0),
            )


# ---------------------------------------------------------------------------
# reconstruction identities
# ---------------------------------------------------------------------------


def random_scan(m=64, seed=0):
    rng = np.random.default_rng(seed)
    signal = rng.normal(size=m) + 1j * rng.normal(size=m)
    qs = 0.004 * (np.arange(m) - m // 2)
    return CoherenceScan(
        q_values=qs, direction=np.array([0.0, 0.0, 1.0]), signal=signal
    )


class TestReconstruction:
    @pytest.mark.parametrize("pad", [1, 2, 4])
    @pytest.mark.parametrize("m", [64, 63])
    def test_parseval_identity(self, pad, m):
        scan = random_scan(m=m)
        prof = reconstruct(scan, pad_factor=pad)
        lhs = scan.spacing / (2 * math.pi) * np.sum(
            np.abs(scan.signal) ** 2
        )
        rhs = prof.spacing_nm * np.sum(np.abs(prof.values) ** 2)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1e-30)

    @pytest.mark.parametrize("pad", [1, 2, 4])
    def test_round_trip_exact(self, pad):
        scan = random_scan(m=48, seed=3)
        prof = reconstruct(scan, pad_factor=pad)
        back = profile_to_scan(prof, scan.q_values)
        assert np.max(np.abs(back - scan.signal)) < 1e-10

    def test_grid_relations(self):
        scan = random_scan(m=50)
        prof = reconstruct(scan, pad_factor=4)
        m_pad = 200
        assert len(prof.x_nm) == m_pad
        assert prof.spacing_nm * scan.spacing == pytest.approx(
            2 * math.pi / m_pad, rel=1e-12
        )
        assert np.all(np.diff(prof.x_nm) > 0)
        assert prof.x_nm[m_pad // 2] == 0.0

    def test_point_scatterer_localized(self):
        # a single spin at z0 reconstructs to a peak at z0
        z0 = 137.0
        positions = np.array([[0.0, 0.0, z0]])
        ens = SpinEnsemble(
            positions=positions, group=Z_AXIS, boundary="open",
            dimensions=np.array([50.0, 50.0, 600.0]),
        )
        qs = symmetric_grid(0.25, 129)
        scan = acquire_scan(ens, (0, 0, 1), qs)
        prof = reconstruct(scan, pad_factor=8)
        peak_x = prof.x_nm[np.argmax(np.abs(prof.values))]
        assert peak_x == pytest.approx(z0, abs=prof.spacing_nm)

    def test_slab_profile_width(self):
        # rectangular polarized slab: reconstructed |p| width ~ slab width
        width = 300.0
        ens = line_ensemble(n=1500, length_nm=1500.0)
        ens.polarizations = slab_polarizations(ens, width)
        qs = symmetric_grid(0.35, 257)
        scan = acquire_scan(ens, (0, 0, 1), qs)
        prof = reconstruct(scan, pad_factor=4)
        measured = fwhm(prof.x_nm, np.abs(prof.values))
        assert measured == pytest.approx(width, rel=0.03)

    def test_bad_pad_factor(self):
        with pytest.raises(ImagingError):
            reconstruct(random_scan(), pad_factor=0)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


class TestPhaseSlope:
    def test_wound_slab_reads_back_wavevector(self):
        width = 300.0
        q_wind = 0.11
        ens = line_ensemble(n=1200, length_nm=1500.0)
        ens.polarizations = slab_polarizations(ens, width)
        qs = q_wind + symmetric_grid(0.3, 257)
        scan = acquire_scan(
            ens, (0, 0, 1), qs, wind_q_vec=np.array([0, 0, q_wind])
        )
        prof = reconstruct(scan, pad_factor=4)
        slope = phase_slope(prof)
        assert slope == pytest.approx(q_wind, rel=1e-3)

    def test_synthetic_linear_phase(self):
        x = np.linspace(-200, 200, 400)
        values = np.exp(-((x / 60.0) ** 2)) * np.exp(1j * 0.07 * x)
        prof = SpatialProfile(x_nm=x, values=values)
        assert phase_slope(prof) == pytest.approx(0.07, rel=1e-9)

    def test_empty_profile_rejected(self):
        prof = SpatialProfile(
            x_nm=np.linspace(0, 1, 8), values=np.zeros(8, dtype=complex)
        )
        with pytest.raises(ImagingError):
            phase_slope(prof)


class TestWidths:
    def test_fwhm_triangle_exact(self):
        x = np.linspace(-2, 2, 41)
        y = np.clip(1.0 - np.abs(x), 0.0, None)
        assert fwhm(x, y) == pytest.approx(1.0, rel=1e-12)

    def test_fwhm_gaussian(self):
        x = np.linspace(-5, 5, 2001)
        sigma = 0.8
        y = np.exp(-(x**2) / (2 * sigma**2))
        assert fwhm(x, y) == pytest.approx(
            2.0 * math.sqrt(2.0 * math.log(2.0)) * sigma, rel=1e-4
        )

    def test_fwhm_requires_half_crossing(self):
        x = np.linspace(0, 1, 10)
        y = np.full(10, 1.0)
        with pytest.raises(ImagingError):
            fwhm(x, y)

    def test_revival_width_of_slab(self):
        # |FT| of a rect of length L is L |sinc(qL/2)|;
        # FWHM = 4 * 1.8954942670 / L
        width = 300.0
        ens = line_ensemble(n=2000, length_nm=1500.0)
        ens.polarizations = slab_polarizations(ens, width)
        q_wind = 0.12
        qs = q_wind + symmetric_grid(0.08, 513)
        scan = acquire_scan(
            ens, (0, 0, 1), qs, wind_q_vec=np.array([0, 0, q_wind])
        )
        expected = 4.0 * SINC_HALF / width
        assert revival_width(scan) == pytest.approx(expected, rel=0.01)


class TestDominantPeriod:
    def test_fringe_period_recovered(self):
        period = 110.0
        q_f = 2 * math.pi / period
        ens = line_ensemble(n=2000, length_nm=2200.0)
        z = ens.positions[:, 2]
        ens.polarizations = 0.5 * (1.0 + np.cos(q_f * z))
        qs = symmetric_grid(0.12, 257)
        scan = acquire_scan(ens, (0, 0, 1), qs)
        measured = dominant_modulation_period(scan, q_floor=0.01)
        bin_width = scan.spacing
        # one-bin accuracy in q translates to the matching period window
        assert abs(2 * math.pi / measured - q_f) <= bin_width

    def test_q_floor_excludes_dc(self):
        ens = line_ensemble(n=200)
        qs = symmetric_grid(0.1, 41)
        scan = acquire_scan(ens, (0, 0, 1), qs)
        with pytest.raises(ImagingError):
            dominant_modulation_period(scan, q_floor=1.0)
