"""Strict YAML configuration schemas for the command-line tools.

Every config is validated against an explicit schema before anything is
built: unknown keys are rejected by name, missing required keys are
reported with their full dotted path, and physical quantities carry
their unit in the key name (``_nm``, ``_us``, ``_rad_per_nm``,
``_mt_per_um``, ``_per_nm3``, ``_deg``).  The walkers return plain
nested dicts of converted values; the ``build_*`` helpers then assemble
the simulation objects.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Mapping
from pathlib import Path

import numpy as np
import yaml
from scipy.special import erf

from .dtwa import CouplingMatrix
from .geometry import NvGroup, SpinEnsemble, nv_group_axes, sample_positions
from .hamiltonian import XXZModel, lambda_from_ratio, model_from_lambda
from .polarization import pump_profile, toy_interference_intensity
from .protocol import DecoherenceModel, SpiralSpec, commensurate_wavevector

__all__ = [
    "ConfigError",
    "REQUIRED",
    "FILL",
    "Scalar",
    "Section",
    "load_yaml",
    "parse_config",
    "load_config",
    "QUENCH_SCHEMA",
    "SCAN_SCHEMA",
    "FMI_SCHEMA",
    "ANALYTICS_SCHEMA",
    "SEQUENCE_SCHEMA",
    "PUMPING_SCHEMA",
    "build_ensemble",
    "build_model",
    "build_spiral",
    "build_decoherence",
    "resolve_quench_time_s",
]


class ConfigError(ValueError):
    """A configuration file failed validation."""


REQUIRED = object()  # sentinel: key must be present
FILL = object()  # sentinel: absent section is walked as {} (defaults apply)


@dataclasses.dataclass(frozen=True)
class Scalar:
    convert: object  # callable(value, path) -> converted value
    default: object = REQUIRED


@dataclasses.dataclass(frozen=True)
class Section:
    fields: Mapping[str, object]
    default: object = REQUIRED  # REQUIRED | FILL | None


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


# ---------------------------------------------------------------------------
# converters
# ---------------------------------------------------------------------------


def _number(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"'{path}' must be finite, got {value!r}")
    return float(value)


def _positive(value, path) -> float:
    out = _number(value, path)
    if out <= 0:
        raise ConfigError(f"'{path}' must be > 0, got {value!r}")
    return out


def _non_negative(value, path) -> float:
    out = _number(value, path)
    if out < 0:
        raise ConfigError(f"'{path}' must be >= 0, got {value!r}")
    return out


def _unit_interval(value, path) -> float:
    out = _number(value, path)
    if not 0.0 <= out <= 1.0:
        raise ConfigError(f"'{path}' must be in [0, 1], got {value!r}")
    return out


def _integer(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}' must be an integer, got {value!r}")
    return int(value)


def _positive_int(value, path) -> int:
    out = _integer(value, path)
    if out <= 0:
        raise ConfigError(f"'{path}' must be a positive integer, got {value!r}")
    return out


def _non_negative_int(value, path) -> int:
    out = _integer(value, path)
    if out < 0:
        raise ConfigError(f"'{path}' must be >= 0, got {value!r}")
    return out


def _int_min2(value, path) -> int:
    out = _integer(value, path)
    if out < 2:
        raise ConfigError(f"'{path}' must be >= 2, got {value!r}")
    return out


def _boolean(value, path) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"'{path}' must be true or false, got {value!r}")
    return value


def _string(value, path) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"'{path}' must be a string, got {value!r}")
    return value


def _choice(*options):
    def convert(value, path):
        if value not in options:
            raise ConfigError(
                f"'{path}' must be one of {sorted(options)}, got {value!r}"
            )
        return value

    return convert


def _vector(n: int, item=_number):
    def convert(value, path):
        if not isinstance(value, (list, tuple)) or len(value) != n:
            raise ConfigError(f"'{path}' must be a list of {n} numbers")
        return np.array([item(v, f"{path}[{i}]") for i, v in enumerate(value)])

    return convert


def _int_vector(n: int, item=_integer):
    def convert(value, path):
        if not isinstance(value, (list, tuple)) or len(value) != n:
            raise ConfigError(f"'{path}' must be a list of {n} integers")
        return tuple(item(v, f"{path}[{i}]") for i, v in enumerate(value))

    return convert


def _number_list(value, path) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"'{path}' must be a non-empty list of numbers")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


_vec3 = _vector(3)
_vec3_positive = _vector(3, _positive)
_ivec3 = _int_vector(3)


# ---------------------------------------------------------------------------
# walker
# ---------------------------------------------------------------------------


def _walk(section: Section, data, path: str) -> dict:
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"'{path or '<top level>'}' must be a mapping")
    for key in data:
        if key not in section.fields:
            raise ConfigError(f"unknown key '{_join(path, key)}'")
    out = {}
    for key, spec in section.fields.items():
        kpath = _join(path, key)
        if isinstance(spec, Section):
            if key in data:
                out[key] = _walk(spec, data[key], kpath)
            elif spec.default is REQUIRED:
                raise ConfigError(f"missing required section '{kpath}'")
            elif spec.default is FILL:
                out[key] = _walk(spec, {}, kpath)
            else:
                out[key] = spec.default
        elif isinstance(spec, Scalar):
            if key in data:
                out[key] = spec.convert(data[key], kpath)
            elif spec.default is REQUIRED:
                raise ConfigError(f"missing required key '{kpath}'")
            else:
                out[key] = spec.default
        else:  # pragma: no cover - schema author error
            raise TypeError(f"bad schema node at '{kpath}'")
    return out


def load_yaml(path) -> Mapping:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file '{path}' not found")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"'{path}' is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"'{path}' must contain a mapping at the top level")
    return raw


def parse_config(raw: Mapping, schema: Section) -> dict:
    return _walk(schema, raw, "")


def load_config(path, schema: Section) -> dict:
    return parse_config(load_yaml(path), schema)


# ---------------------------------------------------------------------------
# shared sections
# ---------------------------------------------------------------------------

_POLARIZATION = Section(
    {
        "kind": Scalar(_choice("uniform", "slab", "fringe")),
        "value": Scalar(_unit_interval, default=1.0),
        "axis": Scalar(_choice("x", "y", "z"), default="z"),
        # slab
        "width_nm": Scalar(_positive, default=None),
        "center_nm": Scalar(_number, default=0.0),
        "outside_value": Scalar(_unit_interval, default=0.0),
        "edge_sigma_nm": Scalar(_positive, default=None),
        # fringe (optical pumping through a standing-wave intensity)
        "reflectivity": Scalar(_unit_interval, default=0.35),
        "wavelength_nm": Scalar(_positive, default=532.0),
        "refractive_index": Scalar(_positive, default=2.4),
        "phase_rad": Scalar(_number, default=0.0),
        "envelope_sigma_nm": Scalar(_positive, default=None),
        "pump_time_us": Scalar(_positive, default=None),
        "tau_s_us": Scalar(_positive, default=None),
    },
    default=None,
)

_ENSEMBLE = Section(
    {
        "box_nm": Scalar(_vec3_positive),
        "boundary": Scalar(_choice("periodic", "open"), default="periodic"),
        "number_density_per_nm3": Scalar(_positive),
        "uv_cutoff_nm": Scalar(_positive),
        "group_index": Scalar(_non_negative_int, default=0),
        "group_axis": Scalar(_vec3, default=None),
        "position_seed": Scalar(_non_negative_int, default=0),
        "polarization": _POLARIZATION,
    }
)

_MODEL = Section(
    {
        "lambda_anisotropy": Scalar(_number, default=None),
        "ratio_zz_xx": Scalar(_number, default=None),
        "sequence_name": Scalar(_string, default=None),
        "sequence_file": Scalar(_string, default=None),
    },
    default=None,
)

_SPIRAL = Section(
    {
        "wavevector_rad_per_nm": Scalar(_vec3, default=None),
        "harmonics": Scalar(_ivec3, default=None),
        "gradient_mt_per_um": Scalar(_positive, default=None),
    },
    default=None,
)

_PROTOCOL = Section(
    {
        "tip_theta_deg": Scalar(_number, default=90.0),
        "tip_phi_deg": Scalar(_number, default=0.0),
        "quench_time_us": Scalar(_positive, default=None),
        "quench_time_per_jtyp": Scalar(_positive, default=None),
        "n_times": Scalar(_int_min2, default=25),
        "n_trajectories": Scalar(_positive_int),
        "seed": Scalar(_non_negative_int, default=0),
        "antipodal": Scalar(_boolean, default=True),
        "frame": Scalar(_choice("lab", "cowinding"), default="cowinding"),
    }
)

_DECOHERENCE = Section(
    {
        "t2_us": Scalar(_positive),
        "stretch": Scalar(_positive, default=1.0),
    },
    default=None,
)

_DYNAMICS = Section(
    {
        "method": Scalar(_choice("rk4", "rk45"), default="rk4"),
        "dt_factor": Scalar(_positive, default=0.02),
        "check_tol": Scalar(_positive, default=1e-6),
    },
    default=FILL,
)

QUENCH_SCHEMA = Section(
    {
        "ensemble": _ENSEMBLE,
        "model": dataclasses.replace(_MODEL, default=REQUIRED),
        "spiral": _SPIRAL,
        "protocol": _PROTOCOL,
        "decoherence": _DECOHERENCE,
        "dynamics": _DYNAMICS,
    }
)

SCAN_SCHEMA = Section(
    {
        "ensemble": _ENSEMBLE,
        "model": _MODEL,
        "spiral": _SPIRAL,
        "protocol": _PROTOCOL,
        "decoherence": _DECOHERENCE,
        "dynamics": _DYNAMICS,
        "scan": Section(
            {
                "kind": Scalar(_choice("anisotropy", "wavevector")),
                "lambda_values": Scalar(_number_list, default=None),
                "ratio_values": Scalar(_number_list, default=None),
                "q_magnitudes_rad_per_nm": Scalar(_number_list, default=None),
                "direction": Scalar(_vec3, default=None),
                "gradient_mt_per_um": Scalar(_positive, default=None),
                "n_groups": Scalar(_positive_int, default=8),
            }
        ),
    }
)

FMI_SCHEMA = Section(
    {
        "ensemble": _ENSEMBLE,
        "spiral": _SPIRAL,
        "decoherence": _DECOHERENCE,
        "imaging": Section(
            {
                "direction": Scalar(_vec3),
                "q_max_rad_per_nm": Scalar(_positive),
                "n_points": Scalar(_int_min2),
                "tip_theta_deg": Scalar(_number, default=90.0),
                "pad_factor": Scalar(_positive_int, default=4),
                "support_fraction": Scalar(_unit_interval, default=0.25),
                "q_floor_rad_per_nm": Scalar(_non_negative, default=0.0),
            }
        ),
    }
)

ANALYTICS_SCHEMA = Section(
    {
        "ensemble": dataclasses.replace(_ENSEMBLE, default=None),
        "analytics": Section(
            {
                "kind": Scalar(_choice("shell_sweep", "moment")),
                # shell_sweep
                "q_values_rad_per_nm": Scalar(_number_list, default=None),
                "shell": Section(
                    {
                        "r_uv_nm": Scalar(_positive),
                        "r_outer_nm": Scalar(_positive),
                        "density_per_nm3": Scalar(_positive),
                    },
                    default=None,
                ),
                "gaussian": Section(
                    {
                        "amplitude_per_nm3": Scalar(_positive),
                        "r_star_nm": Scalar(_positive),
                        "r_uv_nm": Scalar(_positive),
                    },
                    default=None,
                ),
                "anisotropy_factor": Scalar(_number, default=1.0),
                # moment
                "q_direction": Scalar(_vec3, default=None),
                "curvature_step_rad_per_nm": Scalar(_positive, default=0.02),
            }
        ),
    }
)

SEQUENCE_SCHEMA = Section(
    {
        "sequence": Section(
            {
                "name": Scalar(_string, default=None),
                "file": Scalar(_string, default=None),
            }
        ),
    }
)

PUMPING_SCHEMA = Section(
    {
        "pumping": Section(
            {
                "measurements_csv": Scalar(_string),
                "time_column": Scalar(_string, default="pump_time_us"),
                "contrast_column": Scalar(_string, default="contrast"),
                "weight": Scalar(
                    _choice("intensity_squared", "intensity", "uniform"),
                    default="intensity_squared",
                ),
                "fringe": Section(
                    {
                        "reflectivity": Scalar(_unit_interval, default=0.35),
                        "wavelength_nm": Scalar(_positive, default=532.0),
                        "refractive_index": Scalar(_positive, default=2.4),
                        "phase_rad": Scalar(_number, default=0.0),
                        "envelope_sigma_nm": Scalar(_positive, default=None),
                        "axis": Scalar(_choice("x", "y", "z"), default="z"),
                    },
                    default=FILL,
                ),
                "grid_shape": Scalar(_ivec3, default=(64, 64, 256)),
                "grid_extent_nm": Scalar(
                    _vec3_positive, default=(300.0, 300.0, 2250.0)
                ),
            }
        ),
    }
)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _smoothed_window(coord: np.ndarray, center: float, width: float, sigma):
    """Indicator of |coord - center| < width/2, optionally erf-smoothed."""
    half = 0.5 * width
    if sigma is None:
        return ((coord >= center - half) & (coord <= center + half)).astype(float)
    s = math.sqrt(2.0) * sigma
    return 0.5 * (
        erf((half - (coord - center)) / s) + erf((half + (coord - center)) / s)
    )


def _build_polarizations(pcfg: Mapping, positions: np.ndarray) -> np.ndarray:
    kind = pcfg["kind"]
    coord = positions[:, _AXIS_INDEX[pcfg["axis"]]]
    if kind == "uniform":
        return np.full(len(positions), pcfg["value"])
    if kind == "slab":
        if pcfg["width_nm"] is None:
            raise ConfigError(
                "missing required key 'ensemble.polarization.width_nm' "
                "(kind 'slab')"
            )
        window = _smoothed_window(
            coord, pcfg["center_nm"], pcfg["width_nm"], pcfg["edge_sigma_nm"]
        )
        low = pcfg["outside_value"]
        return low + (pcfg["value"] - low) * window
    # fringe: optically pumped standing-wave pattern
    for key in ("pump_time_us", "tau_s_us"):
        if pcfg[key] is None:
            raise ConfigError(
                f"missing required key 'ensemble.polarization.{key}' "
                "(kind 'fringe')"
            )
    intensity = toy_interference_intensity(
        coord,
        reflectivity=pcfg["reflectivity"],
        wavelength_nm=pcfg["wavelength_nm"],
        refractive_index=pcfg["refractive_index"],
        phase_rad=pcfg["phase_rad"],
        envelope_center_nm=pcfg["center_nm"],
        envelope_sigma_nm=pcfg["envelope_sigma_nm"],
    )
    return pump_profile(
        intensity, pcfg["pump_time_us"], pcfg["tau_s_us"], p_max=pcfg["value"]
    )


def build_ensemble(cfg: Mapping) -> SpinEnsemble:
    """Sample positions and apply the configured polarization profile."""
    groups = nv_group_axes()
    index = cfg["group_index"]
    if index >= len(groups):
        raise ConfigError(
            f"'ensemble.group_index' must be < {len(groups)}, got {index}"
        )
    group = groups[index]
    if cfg["group_axis"] is not None:
        axis = np.asarray(cfg["group_axis"], dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ConfigError("'ensemble.group_axis' must be nonzero")
        group = NvGroup(group.index, axis / norm)
    ensemble = sample_positions(
        dimensions=tuple(cfg["box_nm"]),
        number_density=cfg["number_density_per_nm3"],
        r_uv=cfg["uv_cutoff_nm"],
        seed=cfg["position_seed"],
        group=group,
        boundary=cfg["boundary"],
    )
    if cfg["polarization"] is not None:
        pol = _build_polarizations(cfg["polarization"], ensemble.positions)
        ensemble = dataclasses.replace(ensemble, polarizations=pol)
    return ensemble


def build_model(cfg: Mapping, path: str = "model") -> XXZModel:
    """Resolve exactly one of the model specifications to coefficients."""
    keys = ("lambda_anisotropy", "ratio_zz_xx", "sequence_name", "sequence_file")
    given = [k for k in keys if cfg.get(k) is not None]
    if len(given) != 1:
        raise ConfigError(
            f"'{path}' must set exactly one of {list(keys)}, got {given or 'none'}"
        )
    key = given[0]
    if key == "lambda_anisotropy":
        return model_from_lambda(cfg[key])
    if key == "ratio_zz_xx":
        return model_from_lambda(lambda_from_ratio(cfg[key]))
    # lazy import: sequences pulls in package data
    from .hamiltonian import compile_frames, model_from_frames
    from .sequences import load_shipped_sequence

    if key == "sequence_name":
        seq = load_shipped_sequence(cfg[key])
    else:
        from .hamiltonian import load_sequence

        seq = load_sequence(cfg[key])
    return model_from_frames(compile_frames(seq))


def build_spiral(
    cfg: Mapping | None, ensemble: SpinEnsemble, path: str = "spiral"
) -> SpiralSpec:
    """Spiral winding spec; absent config means no winding (Q = 0)."""
    if cfg is None:
        return SpiralSpec(q_vec=np.zeros(3))
    has_q = cfg["wavevector_rad_per_nm"] is not None
    has_h = cfg["harmonics"] is not None
    if has_q == has_h:
        raise ConfigError(
            f"'{path}' must set exactly one of "
            "['wavevector_rad_per_nm', 'harmonics']"
        )
    if has_h:
        if ensemble.boundary != "periodic":
            raise ConfigError(
                f"'{path}.harmonics' needs a periodic ensemble; "
                "use 'wavevector_rad_per_nm' for open boundaries"
            )
        q_vec = commensurate_wavevector(ensemble.dimensions, cfg["harmonics"])
    else:
        q_vec = cfg["wavevector_rad_per_nm"]
    return SpiralSpec.from_wavevector(
        q_vec, gradient_mt_per_um=cfg["gradient_mt_per_um"]
    )


def build_decoherence(cfg: Mapping | None) -> DecoherenceModel | None:
    if cfg is None:
        return None
    return DecoherenceModel(t2_us=cfg["t2_us"], stretch=cfg["stretch"])


def resolve_quench_time_s(cfg: Mapping, coupling: CouplingMatrix) -> float:
    """Quench duration from either an absolute or a J_typ-relative key."""
    absolute = cfg["quench_time_us"]
    relative = cfg["quench_time_per_jtyp"]
    if (absolute is None) == (relative is None):
        raise ConfigError(
            "'protocol' must set exactly one of "
            "['quench_time_us', 'quench_time_per_jtyp']"
        )
    if absolute is not None:
        return absolute * 1e-6
    return relative / coupling.j_typical
