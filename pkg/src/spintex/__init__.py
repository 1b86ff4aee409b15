"""spintex: simulation and analysis toolkit for wound spin textures in dense
dipolar spin ensembles — semiclassical trajectory dynamics, engineered XXZ
interactions via pulse-sequence frame engineering, exchange-field analytics,
Fourier-mode imaging, and optical-pumping polarization models.

The submodules are the primary interface (``spintex.dtwa``,
``spintex.protocol``, ``spintex.exchange``, ``spintex.imaging``,
``spintex.polarization``, ``spintex.hamiltonian``, ``spintex.geometry``,
``spintex.config``, ``spintex.cli``); the names re-exported here are the
pieces most workflows start from.
"""

from .constants import GAMMA_RAD_PER_S_PER_MT, J0_RAD_PER_S_NM3
from .dtwa import build_couplings, evolve, sample_initial
from .exchange import exchange_fields, precession_frequency
from .geometry import NvGroup, SpinEnsemble, nv_group_axes, sample_positions
from .hamiltonian import (
    compile_frames,
    lambda_from_ratio,
    model_from_lambda,
    xxz_from_lambda,
)
from .protocol import (
    DecoherenceModel,
    SpiralSpec,
    anisotropy_scan,
    commensurate_wavevector,
    fit_precession,
    run_quench,
    wavevector_scan,
)

__version__ = "0.1.0"

__all__ = [
    "GAMMA_RAD_PER_S_PER_MT",
    "J0_RAD_PER_S_NM3",
    "build_couplings",
    "evolve",
    "sample_initial",
    "exchange_fields",
    "precession_frequency",
    "NvGroup",
    "SpinEnsemble",
    "nv_group_axes",
    "sample_positions",
    "compile_frames",
    "lambda_from_ratio",
    "model_from_lambda",
    "xxz_from_lambda",
    "DecoherenceModel",
    "SpiralSpec",
    "anisotropy_scan",
    "commensurate_wavevector",
    "fit_precession",
    "run_quench",
    "wavevector_scan",
    "__version__",
]
