"""Fourier-space magnetic imaging of polarization textures.

A gradient pulse winds the tipped ensemble to a readout wavevector Q'; the
surviving uniform transverse magnetization measures one spatial Fourier
component of the polarization-weighted spin density.  Scanning Q' along
the gradient direction acquires the profile's transform line by line, and
a padded inverse FFT reconstructs the real-space profile:

    p(x) = (dQ / 2 pi) sum_k S(Q'_k) e^{+i Q'_k x},

evaluated on the grid x_m with dx * dQ = 2 pi / M_pad.  The discrete
Parseval identity (dQ / 2 pi) sum |S|^2 = dx sum |p|^2 holds exactly.

Acquisition here is static: the signal is the geometric Fourier sum of the
mean tipped spins, optionally attenuated by a per-point decoherence
envelope with winding time tau'(Q') = |Q'| / (gamma |grad|).  Interaction
effects during winding are the business of the dynamics engine; this
module models the readout and reconstruction chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SpinEnsemble
from .protocol import DecoherenceModel, wind_time_us

__all__ = [
    "ImagingError",
    "CoherenceScan",
    "SpatialProfile",
    "symmetric_grid",
    "acquire_scan",
    "reconstruct",
    "profile_to_scan",
    "phase_slope",
    "fwhm",
    "revival_width",
    "dominant_modulation_period",
]


class ImagingError(ValueError):
    """Raised for ill-posed imaging inputs."""


@dataclass
class CoherenceScan:
    """Complex readout signal on a uniform 1-D wavevector grid."""

    q_values: np.ndarray  # (M,) rad/nm along direction
    direction: np.ndarray  # unit 3-vector
    signal: np.ndarray  # (M,) complex
    tip_theta: float = math.pi / 2.0
    wind_q_vec: np.ndarray | None = None

    def __post_init__(self):
        self.q_values = np.asarray(self.q_values, dtype=float)
        self.signal = np.asarray(self.signal, dtype=complex)
        self.direction = np.asarray(self.direction, dtype=float)
        if self.q_values.ndim != 1 or len(self.q_values) < 2:
            raise ImagingError("need at least two scan points")
        if self.signal.shape != self.q_values.shape:
            raise ImagingError("signal and q_values shapes differ")
        steps = np.diff(self.q_values)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ImagingError("scan grid must be uniform")

    @property
    def spacing(self) -> float:
        return float(self.q_values[1] - self.q_values[0])


@dataclass
class SpatialProfile:
    """Reconstructed complex profile on a uniform position grid (nm)."""

    x_nm: np.ndarray
    values: np.ndarray

    @property
    def spacing_nm(self) -> float:
        return float(self.x_nm[1] - self.x_nm[0])


def symmetric_grid(q_max: float, n_points: int) -> np.ndarray:
    """Uniform scan grid of n_points centered on zero, (k - n//2) dq."""
    if n_points < 2:
        raise ImagingError("need at least two scan points")
    dq = 2.0 * q_max / (n_points - 1) if n_points > 1 else q_max
    return dq * (np.arange(n_points) - n_points // 2)


def acquire_scan(
    ensemble: SpinEnsemble,
    direction,
    q_values,
    tip_theta: float = math.pi / 2.0,
    wind_q_vec=None,
    decoherence: DecoherenceModel | None = None,
    gradient_mt_per_um: float | None = None,
) -> CoherenceScan:
    """Static readout of the polarization texture at each Q' = q * dhat.

    signal(Q') = (sin theta / 2) (1/N) sum_j P_j e^{i (Q_wind - Q').r_j},
    times the decoherence envelope for the total winding time (the initial
    wind plus the scan point's own wind) when a model and gradient are
    given.
    """
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise ImagingError("scan direction must be nonzero")
    direction = direction / norm
    q_values = np.asarray(q_values, dtype=float)

    phase = np.zeros(len(ensemble))
    wind_time = 0.0
    if wind_q_vec is not None:
        wind_q_vec = np.asarray(wind_q_vec, dtype=float)
        phase = ensemble.positions @ wind_q_vec
        if decoherence is not None:
            if gradient_mt_per_um is None:
                raise ImagingError(
                    "decoherence envelope needs a gradient magnitude"
                )
            wind_time = wind_time_us(
                float(np.linalg.norm(wind_q_vec)), gradient_mt_per_um
            )

    proj = ensemble.positions @ direction  # (N,) nm
    amp = 0.5 * math.sin(tip_theta) * ensemble.polarizations
    # (M,) complex Fourier sums over spins
    signal = (
        np.exp(1j * (phase[None, :] - np.outer(q_values, proj)))
        @ amp
    ) / len(ensemble)

    if decoherence is not None:
        if gradient_mt_per_um is None:
            raise ImagingError(
                "decoherence envelope needs a gradient magnitude"
            )
        times = wind_time + np.array(
            [wind_time_us(q, gradient_mt_per_um) for q in q_values]
        )
        signal = signal * decoherence.envelope(times)
    return CoherenceScan(
        q_values=q_values,
        direction=direction,
        signal=signal,
        tip_theta=tip_theta,
        wind_q_vec=wind_q_vec,
    )


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------


def reconstruct(scan: CoherenceScan, pad_factor: int = 4) -> SpatialProfile:
    """Padded inverse transform of the scan onto a centered position grid.

    dx = 2 pi / (M_pad dQ); the result satisfies the discrete Parseval
    identity (dQ/2 pi) sum |S|^2 = dx sum |p|^2 exactly.
    """
    if pad_factor < 1:
        raise ImagingError("pad_factor must be >= 1")
    m = len(scan.q_values)
    m_pad = pad_factor * m
    dq = scan.spacing
    dx = 2.0 * math.pi / (m_pad * dq)

    padded = np.zeros(m_pad, dtype=complex)
    padded[:m] = scan.signal
    base = m_pad * np.fft.ifft(padded)  # sum_k S_k e^{2 pi i k m / M_pad}

    # signed positions, then reorder monotonically
    idx = np.arange(m_pad)
    signed_m = np.where(idx < (m_pad + 1) // 2, idx, idx - m_pad)
    x = signed_m * dx
    q_min = scan.q_values[0]
    values = (dq / (2.0 * math.pi)) * base * np.exp(1j * q_min * x)
    order = np.argsort(signed_m)
    return SpatialProfile(x_nm=x[order], values=values[order])


def profile_to_scan(profile: SpatialProfile, q_values) -> np.ndarray:
    """Forward transform S(Q) = dx sum_m p(x_m) e^{-i Q x_m}.

    On the grid the profile was reconstructed from, this inverts
    reconstruct exactly (to rounding).
    """
    q_values = np.asarray(q_values, dtype=float)
    dx = profile.spacing_nm
    return dx * (
        np.exp(-1j * np.outer(q_values, profile.x_nm)) @ profile.values
    )


# ---------------------------------------------------------------------------
# profile diagnostics
# ---------------------------------------------------------------------------


def _support_slice(weights: np.ndarray, fraction: float) -> slice:
    """Contiguous index range around the peak where weights stay above
    fraction * max."""
    peak = int(np.argmax(weights))
    level = fraction * weights[peak]
    lo = peak
    while lo > 0 and weights[lo - 1] >= level:
        lo -= 1
    hi = peak
    while hi < len(weights) - 1 and weights[hi + 1] >= level:
        hi += 1
    return slice(lo, hi + 1)


def phase_slope(
    profile: SpatialProfile, support_fraction: float = 0.25
) -> float:
    """Magnitude-weighted linear slope (rad/nm) of the unwrapped phase over
    the contiguous support around the profile peak.

    For a texture wound to Q before scanning, the reconstructed profile
    carries phase e^{+i Q x}, so the slope reads back the winding
    wavevector.
    """
    w = np.abs(profile.values)
    if not np.any(w > 0):
        raise ImagingError("empty profile")
    sel = _support_slice(w, support_fraction)
    x = profile.x_nm[sel]
    w = w[sel]
    if len(x) < 2:
        raise ImagingError("support region too narrow for a slope")
    phi = np.unwrap(np.angle(profile.values[sel]))
    wsum = w.sum()
    x_bar = (w * x).sum() / wsum
    p_bar = (w * phi).sum() / wsum
    var = (w * (x - x_bar) ** 2).sum()
    return float((w * (x - x_bar) * (phi - p_bar)).sum() / var)


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum of a single-peaked curve, with linear
    interpolation at the half-level crossings."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    peak = int(np.argmax(y))
    half = 0.5 * y[peak]

    def crossing(idx_range):
        prev = peak
        for i in idx_range:
            if y[i] <= half:
                # linear interpolation between i and prev
                frac = (half - y[i]) / (y[prev] - y[i])
                return x[i] + frac * (x[prev] - x[i])
            prev = i
        raise ImagingError("curve does not fall to half maximum")

    left = crossing(range(peak - 1, -1, -1))
    right = crossing(range(peak + 1, len(y)))
    return float(right - left)


def revival_width(scan: CoherenceScan) -> float:
    """FWHM (rad/nm) of the revival peak |S(Q')| across the scan."""
    return fwhm(scan.q_values, np.abs(scan.signal))


def dominant_modulation_period(
    scan: CoherenceScan, q_floor: float = 0.0
) -> float:
    """Spatial period 2 pi / |Q'_peak| of the strongest scan component
    with |Q'| > q_floor (use q_floor to skip the DC part)."""
    mask = np.abs(scan.q_values) > q_floor
    if not np.any(mask):
        raise ImagingError("no scan points above q_floor")
    sub_q = scan.q_values[mask]
    sub_s = np.abs(scan.signal[mask])
    q_peak = abs(sub_q[int(np.argmax(sub_s))])
    if q_peak == 0:
        raise ImagingError("dominant component is the DC term")
    return 2.0 * math.pi / q_peak
