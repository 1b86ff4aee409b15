"""Command-line interface for spin-texture simulations and analysis.

Subcommands::

    simulate-quench   wind / quench / unwind protocol on one configuration
    scan              anisotropy or wind-wavevector parameter scans
    fmi               static Fourier-imaging acquisition + reconstruction
    analytics         mean-field exchange analytics (no dynamics)
    compile-sequence  pulse-sequence -> toggling frames -> effective model
    fit-pumping       saturation-time fit of optical-pumping contrast data

Common flags: ``--config`` (YAML, strictly validated), ``--out``
(directory, created if needed), ``--seed`` (override the configured
seed), ``--workers`` (trajectory parallelism; results are byte-identical
for any value), ``--verify`` (recompute and compare against the stored
manifest instead of writing).

Exit codes: 0 success, 2 configuration/input error, 3 runtime failure
(diverged integration or verification drift).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ANALYTICS_SCHEMA,
    FMI_SCHEMA,
    PUMPING_SCHEMA,
    QUENCH_SCHEMA,
    SCAN_SCHEMA,
    SEQUENCE_SCHEMA,
    ConfigError,
    build_decoherence,
    build_ensemble,
    build_model,
    build_spiral,
    load_yaml,
    parse_config,
    resolve_quench_time_s,
)
from .dtwa import IntegrationError, build_couplings
from .exchange import (
    GaussianProfileParams,
    ShellParams,
    chi_gaussian,
    chi_shell_closed,
    exchange_fields,
    exchange_moment_from_chi,
    exchange_moment_pairs,
)
from .geometry import GeometryError, PackingError
from .gridio import FieldFormatError, Grid3D
from .hamiltonian import (
    ModelError,
    SequenceError,
    average_hamiltonian,
    compile_frames,
    disorder_residual,
    load_sequence,
    model_from_frames,
)
from .imaging import (
    ImagingError,
    acquire_scan,
    dominant_modulation_period,
    phase_slope,
    reconstruct,
    revival_width,
    symmetric_grid,
)
from .manifest import (
    ManifestError,
    build_manifest,
    compare_outputs,
    load_manifest,
    verify_files,
    write_manifest,
)
from .polarization import (
    PolarizationError,
    contrast_curve,
    fit_saturation,
    toy_interference_intensity,
)
from .protocol import (
    ProtocolError,
    anisotropy_scan,
    fit_precession,
    mode_statistics,
    run_quench,
    wavevector_scan,
)
from .sequences import load_shipped_sequence
from .tables import json_bytes, read_table, table_bytes

__all__ = ["main", "build_parser"]

# Input/validation problems exit 2; numerical failures exit 3.
_CONFIG_ERRORS = (
    ConfigError,
    ManifestError,
    SequenceError,
    ModelError,
    ProtocolError,
    PolarizationError,
    ImagingError,
    GeometryError,
    PackingError,
    FieldFormatError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)
_RUNTIME_ERRORS = (IntegrationError, FloatingPointError)


def _deg(value: float) -> float:
    return math.radians(value)


def _effective_seed(args, configured: int) -> int:
    return configured if args.seed is None else args.seed


# ---------------------------------------------------------------------------
# subcommand handlers: (raw config, args, config dir) -> (outputs, seeds, notes)
# ---------------------------------------------------------------------------


def _cmd_quench(raw, args, base_dir):
    cfg = parse_config(raw, QUENCH_SCHEMA)
    ensemble = build_ensemble(cfg["ensemble"])
    model = build_model(cfg["model"])
    spiral = build_spiral(cfg["spiral"], ensemble)
    decoherence = build_decoherence(cfg["decoherence"])
    coupling = build_couplings(ensemble)
    proto = cfg["protocol"]
    dyn = cfg["dynamics"]
    seed = _effective_seed(args, proto["seed"])
    quench_time_s = resolve_quench_time_s(proto, coupling)
    times_s = np.linspace(0.0, quench_time_s, proto["n_times"])

    result = run_quench(
        ensemble,
        model,
        spiral,
        tip_theta=_deg(proto["tip_theta_deg"]),
        sample_times_s=times_s,
        n_traj=proto["n_trajectories"],
        seed=seed,
        tip_phi=_deg(proto["tip_phi_deg"]),
        frame=proto["frame"],
        antipodal=proto["antipodal"],
        decoherence=decoherence,
        coupling=coupling,
        method=dyn["method"],
        dt_factor=dyn["dt_factor"],
        check_tol=dyn["check_tol"],
        workers=args.workers,
    )
    mode = result.modes[:, 0]
    signal = result.signal[:, 0]
    fit = fit_precession(times_s, result.per_trajectory[:, :, 0])
    final_mean, final_amp, final_sigma = mode_statistics(
        result.per_trajectory[:, -1, 0]
    )

    trace_csv = table_bytes(
        {
            "time_us": times_s * 1e6,
            "mode_re": mode.real,
            "mode_im": mode.imag,
            "mode_abs": np.abs(mode),
            "signal_re": signal.real,
            "signal_im": signal.imag,
            "signal_abs": np.abs(signal),
        }
    )
    summary = {
        "n_spins": len(ensemble.positions),
        "n_trajectories": proto["n_trajectories"],
        "j_typical_rad_s": coupling.j_typical,
        "quench_time_us": quench_time_s * 1e6,
        "readout_q_rad_per_nm": result.readout_qs[0],
        "envelope": result.envelope,
        "omega_rad_s": fit.omega_rad_s,
        "omega_sigma_rad_s": fit.sigma_rad_s,
        "amplitude": fit.amplitude,
        "phase_rad": fit.phase_rad,
        "final_amplitude": final_amp,
        "final_amplitude_sigma": final_sigma,
        "final_mode": final_mean,
        "norm_drift": result.norm_drift,
        "energy_drift": result.energy_drift,
    }
    outputs = {
        "quench_trace.csv": trace_csv,
        "quench_fit.json": json_bytes(summary),
    }
    seeds = {"position_seed": cfg["ensemble"]["position_seed"], "protocol_seed": seed}
    notes = [
        f"omega = {fit.omega_rad_s:.6g} rad/s (sigma {fit.sigma_rad_s:.3g})",
        f"final |m| = {final_amp:.6g} (sigma {final_sigma:.3g})",
    ]
    return outputs, seeds, notes


def _cmd_scan(raw, args, base_dir):
    cfg = parse_config(raw, SCAN_SCHEMA)
    scan_cfg = cfg["scan"]
    kind = scan_cfg["kind"]
    ensemble = build_ensemble(cfg["ensemble"])
    decoherence = build_decoherence(cfg["decoherence"])
    coupling = build_couplings(ensemble)
    proto = cfg["protocol"]
    dyn = cfg["dynamics"]
    seed = _effective_seed(args, proto["seed"])
    quench_time_s = resolve_quench_time_s(proto, coupling)
    quench_kwargs = dict(
        tip_phi=_deg(proto["tip_phi_deg"]),
        frame=proto["frame"],
        antipodal=proto["antipodal"],
        method=dyn["method"],
        dt_factor=dyn["dt_factor"],
        check_tol=dyn["check_tol"],
    )
    seeds = {"position_seed": cfg["ensemble"]["position_seed"], "protocol_seed": seed}

    if kind == "anisotropy":
        if cfg["model"] is not None:
            raise ConfigError(
                "scan.kind 'anisotropy' varies the model; remove the 'model' section"
            )
        if cfg["spiral"] is None:
            raise ConfigError("scan.kind 'anisotropy' requires a 'spiral' section")
        has_lam = scan_cfg["lambda_values"] is not None
        has_ratio = scan_cfg["ratio_values"] is not None
        if has_lam == has_ratio:
            raise ConfigError(
                "'scan' must set exactly one of ['lambda_values', 'ratio_values']"
            )
        if has_lam:
            lambdas = scan_cfg["lambda_values"]
        else:
            from .hamiltonian import lambda_from_ratio

            lambdas = np.array(
                [lambda_from_ratio(r) for r in scan_cfg["ratio_values"]]
            )
        spiral = build_spiral(cfg["spiral"], ensemble)
        scan = anisotropy_scan(
            ensemble,
            spiral,
            tip_theta=_deg(proto["tip_theta_deg"]),
            quench_time_s=quench_time_s,
            lambdas=lambdas,
            n_traj=proto["n_trajectories"],
            seed=seed,
            n_times=proto["n_times"],
            workers=args.workers,
            n_groups=scan_cfg["n_groups"],
            coupling=coupling,
            decoherence=decoherence,
            **quench_kwargs,
        )
        csv = table_bytes(
            {
                "lambda_anisotropy": scan.lambdas,
                "ratio_zz_xx": scan.ratios,
                "amplitude": scan.amplitudes,
                "amplitude_sigma": scan.amp_sigmas,
                "omega_rad_s": scan.omegas,
                "omega_sigma_rad_s": scan.omega_sigmas,
            }
        )
        best = int(np.argmax(scan.amplitudes))
        summary = {
            "kind": kind,
            "n_spins": len(ensemble.positions),
            "j_typical_rad_s": coupling.j_typical,
            "quench_time_us": quench_time_s * 1e6,
            "wind_q_rad_per_nm": spiral.q_vec,
            "best_ratio_zz_xx": scan.ratios[best],
            "best_amplitude": scan.amplitudes[best],
        }
        outputs = {
            "anisotropy_scan.csv": csv,
            "scan_summary.json": json_bytes(summary),
        }
        notes = [
            f"{len(scan.lambdas)} model points; "
            f"largest amplitude {scan.amplitudes[best]:.6g} "
            f"at ratio {scan.ratios[best]:.4g}"
        ]
        return outputs, seeds, notes

    # wavevector scan
    if cfg["model"] is None:
        raise ConfigError("scan.kind 'wavevector' requires a 'model' section")
    if cfg["spiral"] is not None:
        raise ConfigError(
            "scan.kind 'wavevector' varies the spiral; remove the 'spiral' "
            "section and set scan.direction / scan.q_magnitudes_rad_per_nm"
        )
    if scan_cfg["q_magnitudes_rad_per_nm"] is None or scan_cfg["direction"] is None:
        raise ConfigError(
            "scan.kind 'wavevector' requires 'scan.direction' and "
            "'scan.q_magnitudes_rad_per_nm'"
        )
    model = build_model(cfg["model"])
    scan = wavevector_scan(
        ensemble,
        model,
        direction=scan_cfg["direction"],
        q_mags=scan_cfg["q_magnitudes_rad_per_nm"],
        tip_theta=_deg(proto["tip_theta_deg"]),
        quench_time_s=quench_time_s,
        n_traj=proto["n_trajectories"],
        seed=seed,
        n_times=proto["n_times"],
        gradient_mt_per_um=scan_cfg["gradient_mt_per_um"],
        decoherence=decoherence,
        workers=args.workers,
        n_groups=scan_cfg["n_groups"],
        coupling=coupling,
        **quench_kwargs,
    )
    csv = table_bytes(
        {
            "q_rad_per_nm": scan.q_mags,
            "wind_time_us": scan.wind_times_us,
            "amplitude": scan.amplitudes,
            "amplitude_sigma": scan.amp_sigmas,
            "peak_time_us": scan.peak_times_us,
            "envelope": scan.envelopes,
            "decohered_amplitude": scan.decohered_amplitudes,
        }
    )
    summary = {
        "kind": kind,
        "n_spins": len(ensemble.positions),
        "j_typical_rad_s": coupling.j_typical,
        "quench_time_us": quench_time_s * 1e6,
        "direction": scan_cfg["direction"],
        "gradient_mt_per_um": scan_cfg["gradient_mt_per_um"],
    }
    outputs = {
        "wavevector_scan.csv": csv,
        "scan_summary.json": json_bytes(summary),
    }
    notes = [f"{len(scan.q_mags)} wavevector points"]
    return outputs, seeds, notes


def _cmd_fmi(raw, args, base_dir):
    cfg = parse_config(raw, FMI_SCHEMA)
    if args.seed is not None:
        cfg["ensemble"]["position_seed"] = args.seed
    ensemble = build_ensemble(cfg["ensemble"])
    img = cfg["imaging"]
    decoherence = build_decoherence(cfg["decoherence"])
    wind_q_vec = None
    gradient = None
    if cfg["spiral"] is not None:
        spiral = build_spiral(cfg["spiral"], ensemble)
        wind_q_vec = spiral.q_vec
        gradient = spiral.gradient_mt_per_um
    q_values = symmetric_grid(img["q_max_rad_per_nm"], img["n_points"])
    scan = acquire_scan(
        ensemble,
        direction=img["direction"],
        q_values=q_values,
        tip_theta=_deg(img["tip_theta_deg"]),
        wind_q_vec=wind_q_vec,
        decoherence=decoherence,
        gradient_mt_per_um=gradient,
    )
    profile = reconstruct(scan, pad_factor=img["pad_factor"])

    scan_power = scan.spacing / (2.0 * math.pi) * float(
        np.sum(np.abs(scan.signal) ** 2)
    )
    profile_power = profile.spacing_nm * float(np.sum(np.abs(profile.values) ** 2))
    summary = {
        "n_spins": len(ensemble.positions),
        "n_points": img["n_points"],
        "q_spacing_rad_per_nm": scan.spacing,
        "x_spacing_nm": profile.spacing_nm,
        "wind_q_rad_per_nm": wind_q_vec,
        "parseval_scan_power": scan_power,
        "parseval_profile_power": profile_power,
        "parseval_rel_mismatch": abs(scan_power - profile_power)
        / max(scan_power, 1e-300),
        "phase_slope_rad_per_nm": None,
        "revival_fwhm_rad_per_nm": None,
        "dominant_period_nm": None,
    }
    try:
        summary["phase_slope_rad_per_nm"] = phase_slope(
            profile, support_fraction=img["support_fraction"]
        )
    except (ImagingError, ValueError):
        pass
    try:
        summary["revival_fwhm_rad_per_nm"] = revival_width(scan)
    except (ImagingError, ValueError):
        pass
    try:
        summary["dominant_period_nm"] = dominant_modulation_period(
            scan, q_floor=img["q_floor_rad_per_nm"]
        )
    except (ImagingError, ValueError):
        pass

    outputs = {
        "fmi_scan.csv": table_bytes(
            {
                "q_rad_per_nm": scan.q_values,
                "signal_re": scan.signal.real,
                "signal_im": scan.signal.imag,
                "signal_abs": np.abs(scan.signal),
            }
        ),
        "fmi_profile.csv": table_bytes(
            {
                "x_nm": profile.x_nm,
                "profile_re": profile.values.real,
                "profile_im": profile.values.imag,
                "profile_abs": np.abs(profile.values),
            }
        ),
        "fmi_summary.json": json_bytes(summary),
    }
    seeds = {"position_seed": cfg["ensemble"]["position_seed"]}
    notes = [f"Parseval mismatch {summary['parseval_rel_mismatch']:.3g}"]
    if summary["phase_slope_rad_per_nm"] is not None:
        notes.append(
            f"profile phase slope {summary['phase_slope_rad_per_nm']:.6g} rad/nm"
        )
    return outputs, seeds, notes


def _cmd_analytics(raw, args, base_dir):
    cfg = parse_config(raw, ANALYTICS_SCHEMA)
    acfg = cfg["analytics"]
    kind = acfg["kind"]
    if kind == "shell_sweep":
        if acfg["q_values_rad_per_nm"] is None:
            raise ConfigError(
                "missing required key 'analytics.q_values_rad_per_nm' "
                "(kind 'shell_sweep')"
            )
        if acfg["shell"] is None and acfg["gaussian"] is None:
            raise ConfigError(
                "analytics.kind 'shell_sweep' needs an 'analytics.shell' "
                "and/or 'analytics.gaussian' section"
            )
        qs = acfg["q_values_rad_per_nm"]
        factor = acfg["anisotropy_factor"]
        columns = {"q_rad_per_nm": qs}
        summary = {"kind": kind, "anisotropy_factor": factor}
        if acfg["shell"] is not None:
            shell = ShellParams(**acfg["shell"])
            columns["chi_xy_shell_rad_per_s"] = np.array(
                [chi_shell_closed(q, shell, anisotropy=factor) for q in qs]
            )
            summary["shell"] = acfg["shell"]
        if acfg["gaussian"] is not None:
            gauss = GaussianProfileParams(**acfg["gaussian"])
            columns["chi_xy_gaussian_rad_per_s"] = np.array(
                [chi_gaussian(q, gauss, anisotropy=factor) for q in qs]
            )
            summary["gaussian"] = acfg["gaussian"]
        outputs = {
            "analytics_chi.csv": table_bytes(columns),
            "analytics_summary.json": json_bytes(summary),
        }
        return outputs, {}, [f"{len(qs)} wavevector points"]

    # moment: direct pair sum vs curvature of the exchange susceptibility
    if cfg["ensemble"] is None:
        raise ConfigError(
            "missing required section 'ensemble' (analytics.kind 'moment')"
        )
    if acfg["q_direction"] is None:
        raise ConfigError(
            "missing required key 'analytics.q_direction' (kind 'moment')"
        )
    if args.seed is not None:
        cfg["ensemble"]["position_seed"] = args.seed
    ensemble = build_ensemble(cfg["ensemble"])
    q_hat = np.asarray(acfg["q_direction"], dtype=float)
    norm = np.linalg.norm(q_hat)
    if norm == 0:
        raise ConfigError("'analytics.q_direction' must be non-zero")
    q_hat = q_hat / norm
    step = acfg["curvature_step_rad_per_nm"]
    pairs = exchange_moment_pairs(ensemble, q_hat)
    curvature = exchange_moment_from_chi(
        lambda h: exchange_fields(ensemble, h * q_hat).chi_xy, h=step
    )
    rel = abs(pairs - curvature) / max(abs(pairs), 1e-300)
    summary = {
        "kind": kind,
        "n_spins": len(ensemble.positions),
        "q_direction": q_hat,
        "curvature_step_rad_per_nm": step,
        "moment_pairs_rad_per_s_nm2": pairs,
        "moment_curvature_rad_per_s_nm2": curvature,
        "rel_difference": rel,
    }
    outputs = {"analytics_moment.json": json_bytes(summary)}
    seeds = {"position_seed": cfg["ensemble"]["position_seed"]}
    notes = [f"pair sum vs curvature rel diff {rel:.3g}"]
    return outputs, seeds, notes


def _cmd_compile_sequence(raw, args, base_dir):
    cfg = parse_config(raw, SEQUENCE_SCHEMA)["sequence"]
    has_name = cfg["name"] is not None
    has_file = cfg["file"] is not None
    if has_name == has_file:
        raise ConfigError("'sequence' must set exactly one of ['name', 'file']")
    if has_name:
        seq = load_shipped_sequence(cfg["name"])
    else:
        path = Path(cfg["file"])
        if not path.is_absolute():
            path = base_dir / path
        seq = load_sequence(path)
    frames = compile_frames(seq)
    cx, cy, cz = average_hamiltonian(frames)
    residual = disorder_residual(frames)
    try:
        model = model_from_frames(frames)
        model_info = {
            "g0": model.g0,
            "g2": model.g2,
            "lambda_anisotropy": model.lam,
            "ratio_zz_xx": model.anisotropy_ratio,
        }
    except ModelError:
        model_info = None

    labels = [label for label, _, _ in frames.frames]
    axes = np.array([axis for _, axis, _ in frames.frames])
    durations = np.array([dur for _, _, dur in frames.frames])
    frames_csv = table_bytes(
        {
            "index": np.arange(len(labels)),
            "axis": labels,
            "ux": axes[:, 0],
            "uy": axes[:, 1],
            "uz": axes[:, 2],
            "duration_ns": durations,
        }
    )
    summary = {
        "name": seq.name,
        "n_pulses": len(seq.pulses),
        "n_frames": len(labels),
        "cycle_ns": frames.cycle_ns,
        "weights": {"x": cx, "y": cy, "z": cz},
        "disorder_residual": residual,
        "model": model_info,
    }
    outputs = {
        "frames.csv": frames_csv,
        "sequence_model.json": json_bytes(summary),
    }
    notes = [f"{len(labels)} frames over {frames.cycle_ns:.6g} ns"]
    if model_info is not None:
        notes.append(
            f"effective model ratio_zz_xx = {model_info['ratio_zz_xx']:.6g}"
        )
    return outputs, {}, notes


def _cmd_fit_pumping(raw, args, base_dir):
    cfg = parse_config(raw, PUMPING_SCHEMA)["pumping"]
    csv_path = Path(cfg["measurements_csv"])
    if not csv_path.is_absolute():
        csv_path = base_dir / csv_path
    if not csv_path.is_file():
        raise ConfigError(f"measurements file '{csv_path}' not found")
    table = read_table(csv_path)
    for key in ("time_column", "contrast_column"):
        if cfg[key] not in table:
            raise ConfigError(
                f"column '{cfg[key]}' not in '{csv_path.name}' "
                f"(has {sorted(table)})"
            )
    times = table[cfg["time_column"]]
    contrast = table[cfg["contrast_column"]]

    fringe = cfg["fringe"]
    shape = cfg["grid_shape"]
    extent = cfg["grid_extent_nm"]
    spacing = tuple(e / s for e, s in zip(extent, shape))
    grid = Grid3D.centered(shape, spacing)
    axis_index = {"x": 0, "y": 1, "z": 2}[fringe["axis"]]
    coords = grid.axes()[axis_index]
    # the standing-wave intensity varies only along the fringe axis, so the
    # transverse grid dimensions enter only through the fitted amplitude
    intensity = toy_interference_intensity(
        coords,
        reflectivity=fringe["reflectivity"],
        wavelength_nm=fringe["wavelength_nm"],
        refractive_index=fringe["refractive_index"],
        phase_rad=fringe["phase_rad"],
        envelope_sigma_nm=fringe["envelope_sigma_nm"],
    )
    if cfg["weight"] == "uniform":
        weight = np.ones_like(intensity)
    elif cfg["weight"] == "intensity":
        weight = intensity
    else:
        weight = intensity**2
    fit = fit_saturation(times, contrast, intensity, weight=weight)
    model_curve = fit.amplitude * contrast_curve(
        intensity, times, fit.tau_s_us, weight=weight
    )
    residual = contrast - model_curve

    outputs = {
        "pumping_curve.csv": table_bytes(
            {
                "pump_time_us": times,
                "contrast_measured": contrast,
                "contrast_model": model_curve,
                "residual": residual,
            }
        ),
        "pumping_fit.json": json_bytes(
            {
                "tau_s_us": fit.tau_s_us,
                "u_us": fit.u_us,
                "amplitude": fit.amplitude,
                "sse": fit.sse,
                "n_measurements": len(times),
                "weight": cfg["weight"],
                "fringe_wavelength_nm": fringe["wavelength_nm"],
                "fringe_refractive_index": fringe["refractive_index"],
            }
        ),
    }
    notes = [f"tau_S = {fit.tau_s_us:.6g} us from {len(times)} points"]
    return outputs, {}, notes


_COMMANDS = {
    "simulate-quench": (_cmd_quench, "run one wind/quench/unwind protocol"),
    "scan": (_cmd_scan, "anisotropy or wind-wavevector scan"),
    "fmi": (_cmd_fmi, "Fourier-imaging acquisition and reconstruction"),
    "analytics": (_cmd_analytics, "mean-field exchange analytics"),
    "compile-sequence": (_cmd_compile_sequence, "pulse sequence -> effective model"),
    "fit-pumping": (_cmd_fit_pumping, "fit optical-pumping saturation time"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintex",
        description="spin-texture simulation and analysis tools",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (handler, help_text) in _COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="YAML configuration file")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument(
            "--seed", type=int, default=None, help="override the configured seed"
        )
        sp.add_argument(
            "--workers",
            type=int,
            default=1,
            help="trajectory worker processes (results are identical for any value)",
        )
        sp.add_argument(
            "--verify",
            action="store_true",
            help="recompute and compare against the stored manifest; write nothing",
        )
        sp.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    config_path = Path(args.config)
    try:
        raw = load_yaml(config_path)
        outputs, seeds, notes = args.handler(raw, args, config_path.parent)
        if args.verify:
            manifest = load_manifest(out_dir)
            problems = verify_files(manifest, out_dir)
            problems += compare_outputs(manifest, outputs)
            if problems:
                for line in problems:
                    print(f"drift: {line}", file=sys.stderr)
                return 3
            print(f"verified {len(outputs)} outputs against {out_dir}")
            return 0
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, data in outputs.items():
            (out_dir / name).write_bytes(data)
        manifest = build_manifest(
            command=args.command,
            config_path=config_path,
            config_bytes=config_path.read_bytes(),
            outputs=outputs,
            seeds=seeds,
            workers=args.workers,
            version=__version__,
        )
        manifest_path = write_manifest(out_dir, manifest)
        for note in notes:
            print(note)
        for name in outputs:
            print(f"wrote {out_dir / name}")
        print(f"wrote {manifest_path}")
        return 0
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _RUNTIME_ERRORS as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
