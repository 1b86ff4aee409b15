"""Physical constants and unit conventions.

Internal unit system:
    lengths            nm
    magnetic fields    mT
    times              s for integration internals, us at API/file boundaries
    couplings, rates   rad/s  (2pi x Hz only at CLI/report boundaries)
    coil geometry      um, currents mA
"""

import numpy as np

# Electron gyromagnetic ratio (NV ground-state g ~ 2.003, treated as the free
# electron value): rad s^-1 T^-1.
GAMMA_RAD_PER_S_PER_T = 1.76085963e11
GAMMA_RAD_PER_S_PER_MT = GAMMA_RAD_PER_S_PER_T * 1e-3
# ~ 28.025 MHz/mT, the ESR detuning slope.
GAMMA_MHZ_PER_MT = GAMMA_RAD_PER_S_PER_MT / (2.0 * np.pi) / 1e6

HBAR_J_S = 1.054571817e-34
MU0_OVER_4PI_T_M_PER_A = 1e-7

# Dipolar coupling prefactor J0 = (mu0/4pi) gamma^2 hbar.
# 1e-7 * (1.76085963e11)^2 * 1.054571817e-34 = 3.2698e-19 rad/s m^3
#   -> 3.2698e8 rad/s nm^3 ~ 2pi x 52.0 MHz nm^3.
J0_RAD_PER_S_NM3 = (
    MU0_OVER_4PI_T_M_PER_A * GAMMA_RAD_PER_S_PER_T**2 * HBAR_J_S * 1e27
)

# Biot-Savart prefactor mu0/(4 pi) in mT um / mA:
# 1e-7 T m/A = 1e-7 * 1e3 mT * 1e6 um / (1e3 mA) = 0.1 mT um/mA.
MU0_OVER_4PI_MT_UM_PER_MA = 0.1

# Diamond: 3.515 g/cm^3, M = 12.011 g/mol -> 1.7624e23 carbons/cm^3.
CARBON_DENSITY_PER_NM3 = 176.24

# A "15 ppm" sample with the four crystallographic orientation groups equally
# populated: density of a single addressable group.
DEFAULT_TOTAL_PPM = 15.0
SINGLE_GROUP_FRACTION = 0.25
DEFAULT_GROUP_DENSITY_PER_NM3 = (
    DEFAULT_TOTAL_PPM * 1e-6 * CARBON_DENSITY_PER_NM3 * SINGLE_GROUP_FRACTION
)  # 6.609e-4 nm^-3 -> typical spacing n^-1/3 = 11.5 nm

# Hard-core UV cutoff used when sampling ensembles (closest allowed pair).
DEFAULT_UV_CUTOFF_NM = 2.2

MAGIC_COSINE = 1.0 / np.sqrt(3.0)


def j_typical(density_per_nm3: float) -> float:
    """Typical dipolar coupling J0 * n (rad/s) at number density n."""
    return J0_RAD_PER_S_NM3 * density_per_nm3


def wavevector_from_gradient(gradient_mt_per_um: float, tau_us: float) -> float:
    """Spiral pitch wavevector Q = gamma * grad * tau in rad/nm.

    gamma[rad/s/mT] * grad[mT/um -> mT/nm] * tau[us -> s]
    = 0.176086 * grad * tau.
    """
    return GAMMA_RAD_PER_S_PER_MT * 1e-3 * gradient_mt_per_um * tau_us * 1e-6
