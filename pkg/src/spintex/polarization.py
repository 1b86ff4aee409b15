"""Optical pumping of spin polarization in a structured light field.

Pumping with local intensity I for a time tau polarizes spins following
saturation kinetics,

    P(r, tau) = P_max (1 - exp(-tau I(r) / tau_S)),

where tau_S sets the characteristic fluence.  In a waveguide the forward
and reflected pump fields interfere,

    I(x) = 1 + r^2 + 2 r cos(2 k n x - phi),

producing fringes of period lambda / (2 n) (110.8 nm for 532 nm light at
group index 2.4), optionally under a Gaussian longitudinal envelope.  The
polarization pattern inherits the fringes at low fluence and saturates
toward a flat profile as the dips between antinodes fill in.

The measurable readout is a weighted integral of the polarization; optical
detection weights each location by excitation and collection efficiency,
so the default weight is I^2.  Fitting the saturation time uses the scan
of contrast versus pump time: the amplitude enters linearly and tau_S is
found by a golden-section search on the log of u = tau_S / <I>, which
makes the recovered tau_S exactly equivariant under rescaling of the
intensity map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolarizationError",
    "SaturationFit",
    "FRINGE_PERIOD_NM",
    "fringe_period_nm",
    "toy_interference_intensity",
    "pump_profile",
    "contrast_curve",
    "fit_saturation",
    "normalized_profiles",
]


class PolarizationError(ValueError):
    """Raised for ill-posed pumping inputs."""


def fringe_period_nm(
    wavelength_nm: float = 532.0, refractive_index: float = 2.4
) -> float:
    """Standing-wave fringe period lambda / (2 n)."""
    if wavelength_nm <= 0 or refractive_index <= 0:
        raise PolarizationError("wavelength and index must be positive")
    return wavelength_nm / (2.0 * refractive_index)


FRINGE_PERIOD_NM = fringe_period_nm()


def toy_interference_intensity(
    x_nm,
    reflectivity: float = 0.35,
    wavelength_nm: float = 532.0,
    refractive_index: float = 2.4,
    phase_rad: float = 0.0,
    envelope_center_nm: float = 0.0,
    envelope_sigma_nm: float | None = None,
):
    """Two-beam interference intensity along the propagation coordinate.

    I = [1 + r^2 + 2 r cos(2 k n x - phi)] * (optional Gaussian envelope).
    """
    if not (0.0 <= reflectivity <= 1.0):
        raise PolarizationError("reflectivity must lie in [0, 1]")
    x_nm = np.asarray(x_nm, dtype=float)
    k = 2.0 * math.pi / wavelength_nm
    intensity = (
        1.0
        + reflectivity**2
        + 2.0
        * reflectivity
        * np.cos(2.0 * k * refractive_index * x_nm - phase_rad)
    )
    if envelope_sigma_nm is not None:
        if envelope_sigma_nm <= 0:
            raise PolarizationError("envelope sigma must be positive")
        intensity = intensity * np.exp(
            -((x_nm - envelope_center_nm) ** 2)
            / (2.0 * envelope_sigma_nm**2)
        )
    return intensity


def pump_profile(intensity, pump_time_us: float, tau_s_us: float,
                 p_max: float = 1.0):
    """Saturating polarization P = P_max (1 - exp(-tau I / tau_S))."""
    if tau_s_us <= 0:
        raise PolarizationError("tau_S must be positive")
    if pump_time_us < 0:
        raise PolarizationError("pump time must be non-negative")
    if not (0.0 < p_max <= 1.0):
        raise PolarizationError("p_max must lie in (0, 1]")
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity < 0):
        raise PolarizationError("intensity must be non-negative")
    return p_max * (1.0 - np.exp(-pump_time_us * intensity / tau_s_us))


def contrast_curve(
    intensity,
    pump_times_us,
    tau_s_us: float,
    weight=None,
    cell_volume_nm3: float = 1.0,
    p_max: float = 1.0,
) -> np.ndarray:
    """Weighted polarization integral C(tau) = dV sum_r w(r) P(r, tau).

    weight defaults to intensity^2 (excitation times collection
    efficiency of the optical readout).
    """
    intensity = np.asarray(intensity, dtype=float).ravel()
    pump_times_us = np.atleast_1d(np.asarray(pump_times_us, dtype=float))
    if np.any(pump_times_us < 0):
        raise PolarizationError("pump times must be non-negative")
    if weight is None:
        weight = intensity**2
    else:
        weight = np.asarray(weight, dtype=float).ravel()
        if weight.shape != intensity.shape:
            raise PolarizationError("weight and intensity shapes differ")
    out = np.empty(len(pump_times_us))
    for k, tau in enumerate(pump_times_us):
        out[k] = cell_volume_nm3 * float(
            weight @ pump_profile(intensity, tau, tau_s_us, p_max)
        )
    return out


@dataclass
class SaturationFit:
    """Result of fitting contrast-vs-pump-time to saturation kinetics."""

    tau_s_us: float
    amplitude: float
    sse: float  # sum of squared residuals at the optimum
    u_us: float  # search variable tau_S / <I>


def _saturation_sse(u, times, values, intensity, weight, mean_i):
    """Best-amplitude residual for tau_S = u * <I>."""
    tau_s = u * mean_i
    shape = np.array(
        [
            float(weight @ (1.0 - np.exp(-t * intensity / tau_s)))
            for t in times
        ]
    )
    denom = shape @ shape
    if denom == 0.0:
        return float(values @ values), 0.0, shape
    amp = float((shape @ values) / denom)
    resid = values - amp * shape
    return float(resid @ resid), amp, shape


def fit_saturation(
    pump_times_us,
    contrast_values,
    intensity,
    weight=None,
    u_bounds_us=None,
    tol: float = 1e-12,
) -> SaturationFit:
    """Fit tau_S and a linear amplitude to a measured contrast curve.

    The model is C(tau) = A sum_r w(r) (1 - exp(-tau I(r) / tau_S)).  The
    amplitude is solved in closed form for each candidate tau_S; tau_S
    itself is located by golden-section search on log u, where
    u = tau_S / <I> and <I> is the plain mean of the intensity map.
    Because the model depends on intensity only through tau I / tau_S,
    rescaling I by any factor rescales the fitted tau_S by exactly the
    same factor.
    """
    times = np.atleast_1d(np.asarray(pump_times_us, dtype=float))
    values = np.atleast_1d(np.asarray(contrast_values, dtype=float))
    if times.shape != values.shape:
        raise PolarizationError("times and contrast shapes differ")
    if len(times) < 3:
        raise PolarizationError("need at least three pump times")
    intensity = np.asarray(intensity, dtype=float).ravel()
    mean_i = float(intensity.mean())
    if mean_i <= 0:
        raise PolarizationError("intensity map must have positive mean")
    if weight is None:
        weight = intensity**2
    else:
        weight = np.asarray(weight, dtype=float).ravel()
        if weight.shape != intensity.shape:
            raise PolarizationError("weight and intensity shapes differ")

    t_scale = float(np.median(times[times > 0])) if np.any(times > 0) else 1.0
    if u_bounds_us is None:
        u_bounds_us = (1e-4 * t_scale, 1e4 * t_scale)
    lo, hi = math.log(u_bounds_us[0]), math.log(u_bounds_us[1])
    if not lo < hi:
        raise PolarizationError("invalid search bounds")

    def objective(log_u):
        return _saturation_sse(
            math.exp(log_u), times, values, intensity, weight, mean_i
        )[0]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    u = math.exp(0.5 * (a + b))
    sse, amp, _ = _saturation_sse(
        u, times, values, intensity, weight, mean_i
    )
    return SaturationFit(
        tau_s_us=u * mean_i, amplitude=amp, sse=sse, u_us=u
    )


def normalized_profiles(profiles) -> np.ndarray:
    """Scale each profile to unit maximum for shape comparison.

    Rows whose peak falls below 1e-6 of the largest peak carry no usable
    shape information and are rejected.
    """
    arr = np.atleast_2d(np.asarray(profiles, dtype=float))
    peaks = arr.max(axis=1)
    top = peaks.max()
    if top <= 0:
        raise PolarizationError("all profiles are empty")
    if np.any(peaks < 1e-6 * top):
        raise PolarizationError(
            "profile peak below 1e-6 of the largest; cannot normalize"
        )
    return arr / peaks[:, None]
