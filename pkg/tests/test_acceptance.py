"""Acceptance checks: one test per headline capability of the toolkit.

Each test pins an end-to-end behavior at a stated tolerance: conservation
laws of the trajectory engine at scale, the closed-form two-spin oracle,
the magic-angle null of the texture precession and its mean-field rate,
opposite-sign precession for parallel and perpendicular windings, the
anisotropy- and wavevector-scan shapes, agreement between independent
analytics routes, the wind/unwind round trip and revival width, Fourier
imaging reconstruction, the optical-pumping fit, the pulse-sequence
compiler, and byte-level reproducibility across worker counts.

Tests that exercise the command line run the reference configurations
under configs/ through ``python -m spintex`` in a subprocess, exactly as
a user would.  The dynamics-heavy tests each take a minute or more of
wall time; the whole module runs in roughly a quarter of an hour on one
core.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import textwrap
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from spintex.constants import J0_RAD_PER_S_NM3 as J0
from spintex.dtwa import (
    SPIN_LENGTH,
    TrajectoryBatch,
    build_couplings,
    evolve,
    sample_initial,
)
from spintex.exchange import (
    GaussianProfileParams,
    ShellParams,
    chi_gaussian,
    chi_shell_closed,
    exchange_fields,
    exchange_moment_from_chi,
    exchange_moment_grid,
    exchange_moment_pairs,
    g_function,
    gaussian_f_quadrature,
    gaussian_f_series,
    kernel_convolution,
    precession_frequency,
)
from spintex.geometry import (
    NvGroup,
    SpinEnsemble,
    nv_group_axes,
    sample_positions,
)
from spintex.gridio import Grid3D
from spintex.hamiltonian import (
    average_hamiltonian,
    compile_frames,
    disorder_residual,
    model_from_frames,
    model_from_lambda,
    xxz_from_lambda,
)
from spintex.polarization import (
    normalized_profiles,
    pump_profile,
    toy_interference_intensity,
)
from spintex.protocol import (
    SpiralSpec,
    commensurate_wavevector,
    fit_precession,
    run_quench,
    unwind,
    wind,
)
from spintex.sequences import load_shipped_sequence

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

HEISENBERG = model_from_lambda(0.0)
Z_AXIS = np.array([0.0, 0.0, 1.0])


def run_cli(*args, cwd):
    """Run the installed command line in a subprocess; fail on nonzero exit."""
    proc = subprocess.run(
        [sys.executable, "-m", "spintex", *map(str, args)],
        cwd=cwd,
        capture_output=True,
        text=True,
        timeout=3600,
    )
    assert proc.returncode == 0, (
        f"command line exited {proc.returncode}:\n{proc.stdout}\n{proc.stderr}"
    )
    return proc


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def load_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


# ---------------------------------------------------------------------------
# trajectory engine: conservation at scale and the two-spin oracle
# ---------------------------------------------------------------------------


def test_isotropic_quench_conserves_total_spin_and_norms():
    """500 spins, 100 trajectories, isotropic model, no winding: every
    trajectory's total spin vector and every spin norm drift by less
    than 1e-6 (relative) over ten typical interaction times."""
    length = (500.0 / 6e-4) ** (1.0 / 3.0)
    ens = sample_positions(
        (length,) * 3, 6e-4, r_uv=4.6, seed=2, boundary="periodic"
    )
    assert len(ens.positions) == 500
    coupling = build_couplings(ens)
    batch = sample_initial(ens, theta=math.pi / 4.0, n_traj=100, seed=9)
    start = batch.spins.copy()
    t_end = 10.0 / coupling.j_typical
    result = evolve(batch, coupling, HEISENBERG, [t_end], dt_factor=0.045)

    s0 = start.sum(axis=1)
    s1 = result.batch.spins.sum(axis=1)
    total_drift = np.linalg.norm(s1 - s0, axis=1) / np.linalg.norm(s0, axis=1)
    norms = np.linalg.norm(result.batch.spins, axis=2)
    norm_drift = np.abs(norms - SPIN_LENGTH) / SPIN_LENGTH
    assert total_drift.max() <= 1e-6
    assert norm_drift.max() <= 1e-6
    assert result.norm_drift <= 1e-6


def test_two_spin_trajectory_matches_closed_form_over_ten_periods():
    """Two spins under isotropic exchange: the difference vector
    precesses about the conserved total spin at g0 J |T|; the integrated
    trajectory tracks the closed form to 1e-6 after ten periods."""
    positions = np.array([[0.0, 0.0, 0.0], [8.0, 0.0, 0.0]])
    ens = SpinEnsemble(
        positions=positions,
        group=NvGroup(index=0, axis=Z_AXIS),
        boundary="open",
        dimensions=np.array([40.0, 40.0, 40.0]),
    )
    coupling = build_couplings(ens)
    j = coupling.matrix[0, 1]
    s1 = np.array([0.5, 0.5, 0.5])
    s2 = np.array([-0.5, 0.5, -0.5])
    t_vec = s1 + s2
    d_vec = s1 - s2
    omega = HEISENBERG.g0 * j * np.linalg.norm(t_vec)
    t_end = 10.0 * 2.0 * math.pi / abs(omega)

    batch = TrajectoryBatch(ensemble=ens, spins=np.array([[s1, s2]]))
    result = evolve(batch, coupling, HEISENBERG, [t_end])

    that = t_vec / np.linalg.norm(t_vec)
    d_par = (d_vec @ that) * that
    d_perp = d_vec - d_par
    expected = (
        d_par
        + math.cos(omega * t_end) * d_perp
        + math.sin(omega * t_end) * np.cross(that, d_perp)
    )
    spins = result.batch.spins[0]
    assert np.max(np.abs(spins[0] + spins[1] - t_vec)) < 1e-6
    assert np.max(np.abs(spins[0] - spins[1] - expected)) < 1e-6


# ---------------------------------------------------------------------------
# texture precession: magic-angle null and the mean-field rate
# ---------------------------------------------------------------------------

# Quantization-axis tilts bracketing the magic angle; the winding stays
# along z, so the axis cosine is exactly the angle between them.
AXIS_COSINES = (0.40, 0.50, 0.65, 0.80, 1.00)


@pytest.fixture(scope="module")
def tilted_axis_fits():
    """Precession fits of a 1000-spin wound texture for a range of
    quantization-axis tilts, plus the pieces shared by both consumers
    (the z-aligned ensemble, the winding, and the model)."""
    length = (1000.0 / 6e-4) ** (1.0 / 3.0)
    base = sample_positions(
        (length,) * 3, 6e-4, r_uv=4.6, seed=7, boundary="periodic"
    )
    assert len(base.positions) == 1000
    q_vec = commensurate_wavevector(base.dimensions, (0, 0, 2))
    j_typ = J0 * base.density_per_nm3
    times = np.linspace(0.0, 0.9 / j_typ, 9)
    fits = {}
    for cos_tilt in AXIS_COSINES:
        axis = np.array(
            [math.sqrt(1.0 - cos_tilt**2), 0.0, cos_tilt]
        )
        ens = replace(base, group=NvGroup(index=1, axis=axis))
        res = run_quench(
            ens,
            HEISENBERG,
            SpiralSpec.from_wavevector(q_vec),
            math.pi / 4.0,
            times,
            n_traj=200,
            seed=5,
            dt_factor=0.05,
        )
        fits[cos_tilt] = fit_precession(times, res.per_trajectory[:, :, 0])
    ens_aligned = replace(base, group=NvGroup(index=1, axis=Z_AXIS))
    return ens_aligned, q_vec, fits


def test_precession_null_sits_at_the_magic_angle(tilted_axis_fits):
    """The fitted precession frequency changes sign where the winding
    direction crosses the magic angle to the quantization axis: the root
    of Omega vs the second Legendre polynomial of the axis cosine lands
    within 0.03 of 1/sqrt(3)."""
    _ens, _q_vec, fits = tilted_axis_fits
    cosines = np.array(AXIS_COSINES)
    omegas = np.array([fits[c].omega_rad_s for c in cosines])
    sigmas = np.array([fits[c].sigma_rad_s for c in cosines])

    # sign change brackets the magic angle (cos = 0.577)
    assert omegas[cosines < 0.55].max() < 0.0
    assert omegas[cosines > 0.60].min() > 0.0

    # Omega is linear in P2(cos); locate its root in the cosine
    p2 = 0.5 * (3.0 * cosines**2 - 1.0)
    slope, intercept = np.polyfit(p2, omegas, 1, w=1.0 / sigmas)
    u_root = -intercept / slope
    cos_root = math.sqrt((2.0 * u_root + 1.0) / 3.0)
    assert abs(cos_root - 1.0 / math.sqrt(3.0)) <= 0.03


def test_early_time_precession_matches_exchange_mean_field(tilted_axis_fits):
    """The fitted early-time frequency of the aligned-axis quench agrees
    with the mean-field rate built from the same ensemble's pairwise
    exchange sums to within 15%."""
    ens, q_vec, fits = tilted_axis_fits
    fields = exchange_fields(ens, q_vec)
    predicted = precession_frequency(HEISENBERG, fields, math.pi / 4.0)
    fitted = fits[1.00].omega_rad_s
    assert fitted == pytest.approx(predicted, rel=0.15)


# ---------------------------------------------------------------------------
# protocol-level sign structure and scan shapes (via the command line)
# ---------------------------------------------------------------------------


def test_parallel_and_perpendicular_windings_precess_oppositely(tmp_path):
    """Winding along vs across the quantization axis flips the sign of
    the texture precession; both fits are at least five sigma from
    zero."""
    fits = {}
    for stem in ("quench_parallel", "quench_perpendicular"):
        run_cli(
            "simulate-quench",
            "--config", CONFIGS / f"{stem}.yaml",
            "--out", tmp_path / stem,
            cwd=tmp_path,
        )
        fits[stem] = load_json(tmp_path / stem / "quench_fit.json")
    omega_par = fits["quench_parallel"]["omega_rad_s"]
    omega_perp = fits["quench_perpendicular"]["omega_rad_s"]
    assert omega_par * omega_perp < 0.0
    for fit in fits.values():
        assert abs(fit["omega_rad_s"]) >= 5.0 * fit["omega_sigma_rad_s"]


def test_anisotropy_scan_amplitude_peaks_at_the_isotropic_model(tmp_path):
    """Over an 11-point coupling-ratio grid spanning [-1, 3], the peak
    precessed quadrature is largest within one grid step of the
    isotropic point and falls off monotonically on both sides."""
    run_cli(
        "scan",
        "--config", CONFIGS / "anisotropy_scan.yaml",
        "--out", tmp_path / "out",
        cwd=tmp_path,
    )
    table = load_csv(tmp_path / "out" / "anisotropy_scan.csv")
    ratios = table["ratio_zz_xx"]
    amps = table["amplitude"]
    assert len(ratios) == 11
    assert ratios[0] == pytest.approx(-1.0) and ratios[-1] == pytest.approx(3.0)
    peak = int(np.argmax(amps))
    step = ratios[1] - ratios[0]
    assert abs(ratios[peak] - 1.0) <= step + 1e-12
    assert np.all(np.diff(amps[: peak + 1]) > 0.0)
    assert np.all(np.diff(amps[peak:]) < 0.0)


def test_wavevector_scan_knee_and_decoherence_envelope(tmp_path):
    """Scanning the winding wavevector over a 300 nm pumped slab gives a
    non-monotone amplitude curve whose rise to the plateau sits within a
    factor of two of 2 pi / (300 nm), and the decohered curve lies
    strictly below the ideal one at every wavevector."""
    run_cli(
        "scan",
        "--config", CONFIGS / "wavevector_scan.yaml",
        "--out", tmp_path / "out",
        cwd=tmp_path,
    )
    table = load_csv(tmp_path / "out" / "wavevector_scan.csv")
    q = table["q_rad_per_nm"]
    amp = table["amplitude"]
    decohered = table["decohered_amplitude"]

    q_star = 2.0 * math.pi / 300.0
    peak = int(np.argmax(amp))
    assert 0 < peak < len(q) - 1  # interior maximum: non-monotone
    assert amp[-1] < 0.5 * amp[peak]  # collapse beyond the plateau
    knee = q[np.argmax(amp >= 0.9 * amp[peak])]
    assert q_star / 2.0 <= knee <= 2.0 * q_star
    assert np.all(q > 0.0)
    assert np.all(decohered < amp)


# ---------------------------------------------------------------------------
# exchange analytics: independent routes agree
# ---------------------------------------------------------------------------


def test_exchange_analytics_independent_routes_agree():
    """Closed forms, series, adaptive quadrature, FFT convolution, and
    direct pair sums for the exchange field and its second moment agree
    at their stated tolerances, and the second moment grows as the
    square of the region size over a decade."""
    # uniform-shell closed form vs adaptive radial quadrature
    shell = ShellParams(r_uv_nm=2.2, r_outer_nm=80.0, density_per_nm3=6.6e-4)
    for qa in np.geomspace(1e-3, 30.0, 13):
        q = qa / shell.r_uv_nm
        closed = chi_shell_closed(q, shell, anisotropy=0.7)
        val, _ = quad(
            lambda r: g_function(q * r) / r,
            shell.r_uv_nm,
            shell.r_outer_nm,
            limit=800,
            epsabs=1e-15,
            epsrel=1e-13,
        )
        ref = 4.0 * math.pi * shell.density_per_nm3 * J0 * 0.7 * val
        assert closed == pytest.approx(ref, rel=1e-8)

    # Gaussian-profile series vs Gauss-Hermite quadrature
    for lam in (0.0, 0.1, 0.2):
        for q in (0.02, 0.3, 1.0, 2.0, 3.0):
            assert gaussian_f_series(q, lam) == pytest.approx(
                gaussian_f_quadrature(q, lam), rel=1e-8
            )

    # FFT kernel convolution vs the series on a 128^3 grid
    params = GaussianProfileParams(
        amplitude_per_nm3=1e-3, r_star_nm=150.0, r_uv_nm=15.0
    )
    grid = Grid3D.centered((128,) * 3, (12.0 * params.r_star_nm / 128,) * 3)
    x, y, z = grid.coordinates()
    rho = params.amplitude_per_nm3 * np.exp(
        -(x * x + y * y + z * z) / (2.0 * params.r_star_nm**2)
    )
    eta = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    q_dir = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    ceta = float(q_dir @ eta)
    chi_grid = kernel_convolution(grid, rho, 0.02 * q_dir, eta, params.r_uv_nm)
    chi_series = chi_gaussian(
        0.02, params, anisotropy=0.5 * (3.0 * ceta**2 - 1.0)
    )
    assert chi_grid == pytest.approx(chi_series, rel=1e-4)

    # second moment: direct pair sum vs curvature of the pair field
    ens = sample_positions(
        (60.0,) * 3,
        1.5e-3,
        r_uv=3.0,
        seed=11,
        group=nv_group_axes()[0],
        boundary="periodic",
    )
    direct = exchange_moment_pairs(ens, Z_AXIS)
    curvature = exchange_moment_from_chi(
        lambda h: exchange_fields(ens, h * Z_AXIS).chi_xy, h=0.02
    )
    assert curvature == pytest.approx(direct, rel=1e-4)

    # the moment diverges as the square of the region size
    lengths = np.geomspace(50.0, 500.0, 5)
    kappas = []
    for length in lengths:
        box = Grid3D.centered((48,) * 3, (2.5 * length / 48,) * 3)
        bx, by, bz = box.coordinates()
        smooth = length / 20.0
        prof = np.ones((1, 1, 1))
        for coord in (bx, by, bz):
            prof = (
                prof
                * 0.25
                * (1.0 + np.tanh((coord + length / 2.0) / smooth))
                * (1.0 - np.tanh((coord - length / 2.0) / smooth))
            )
        kappas.append(
            exchange_moment_grid(box, prof, Z_AXIS, Z_AXIS, 2.2)
        )
    slope = np.polyfit(np.log(lengths), np.log(np.abs(kappas)), 1)[0]
    assert abs(slope - 2.0) <= 0.1


# ---------------------------------------------------------------------------
# winding round trip, revival width, and Fourier imaging
# ---------------------------------------------------------------------------


def test_wind_unwind_round_trip_and_revival_width(tmp_path):
    """Winding and unwinding the same wavevector restores every spin to
    1e-12; imaging a wound 400 nm slab shows the revival at the wound
    point with width 2 pi / (400 nm) to 20%."""
    ens = sample_positions(
        (40.0,) * 3, 6e-4, r_uv=4.0, seed=4, boundary="periodic"
    )
    batch = sample_initial(ens, theta=math.pi / 3.0, n_traj=8, seed=1)
    q_vec = np.array([0.013, -0.007, 0.021])
    wound = wind(batch, q_vec)
    assert not np.allclose(wound.spins, batch.spins)
    back = unwind(wound, q_vec)
    assert np.max(np.abs(back.spins - batch.spins)) <= 1e-12

    run_cli(
        "fmi",
        "--config", CONFIGS / "wind_unwind_revival.yaml",
        "--out", tmp_path / "out",
        cwd=tmp_path,
    )
    summary = load_json(tmp_path / "out" / "fmi_summary.json")
    expected_fwhm = 2.0 * math.pi / 400.0
    assert summary["revival_fwhm_rad_per_nm"] == pytest.approx(
        expected_fwhm, rel=0.20
    )


def test_fourier_imaging_reconstructs_the_winding(tmp_path):
    """A spiral wound at a 126 nm pitch reads back with its modulation
    period within one wavevector bin, a phase slope within 1% of the
    wound wavevector, and the Parseval identity holding to 1e-10."""
    run_cli(
        "fmi",
        "--config", CONFIGS / "fmi_spiral.yaml",
        "--out", tmp_path / "out",
        cwd=tmp_path,
    )
    summary = load_json(tmp_path / "out" / "fmi_summary.json")
    q_true = float(np.linalg.norm(summary["wind_q_rad_per_nm"]))
    assert q_true == pytest.approx(2.0 * math.pi / 126.0, rel=1e-12)
    spacing = summary["q_spacing_rad_per_nm"]
    q_peak = 2.0 * math.pi / summary["dominant_period_nm"]
    assert abs(q_peak - q_true) <= spacing + 1e-12
    assert summary["phase_slope_rad_per_nm"] == pytest.approx(q_true, rel=0.01)
    assert summary["parseval_rel_mismatch"] <= 1e-10


# ---------------------------------------------------------------------------
# optical pumping
# ---------------------------------------------------------------------------


def test_pumping_fit_recovers_tau_and_fringe_dip_fills_in(tmp_path):
    """The saturation fit recovers the generating time constant of the
    shipped synthetic contrast curve (0.7 us, 1% multiplicative noise)
    within 2%, and normalized interference-pumped profiles show a
    central dip at short pump times that fills in at long ones."""
    run_cli(
        "fit-pumping",
        "--config", CONFIGS / "pumping_fit.yaml",
        "--out", tmp_path / "out",
        cwd=tmp_path,
    )
    fit = load_json(tmp_path / "out" / "pumping_fit.json")
    assert abs(fit["tau_s_us"] - 0.7) <= 0.02 * 0.7

    x = np.linspace(-166.0, 166.0, 333)
    intensity = toy_interference_intensity(x, phase_rad=math.pi)
    profiles = normalized_profiles(
        [
            pump_profile(intensity, 0.05, 0.7),
            pump_profile(intensity, 20.0, 0.7),
        ]
    )
    center = len(x) // 2
    assert profiles[0, center] < 0.5  # pronounced dip at low fluence
    assert profiles[1, center] > 0.95  # saturated: dip filled in


# ---------------------------------------------------------------------------
# sequence compiler
# ---------------------------------------------------------------------------


def test_shipped_sequences_compile_to_clean_frames():
    """Both shipped pulse programs compile to axis-aligned toggling
    frames with zero disorder residual; the composite program averages
    to the isotropic (equal-thirds) point at 1e-12, and the coupling
    family endpoints are exact."""
    for name in ("xy4", "cxy4_droid_vxy4_symm"):
        traj = compile_frames(load_shipped_sequence(name))
        for _label, vec, _duration in traj.frames:
            v = np.abs(np.asarray(vec, dtype=float))
            assert v.max() == pytest.approx(1.0, abs=1e-12)
            assert int(np.sum(v > 0.5)) == 1
        np.testing.assert_allclose(disorder_residual(traj), 0.0, atol=1e-12)

    traj = compile_frames(load_shipped_sequence("cxy4_droid_vxy4_symm"))
    np.testing.assert_allclose(
        average_hamiltonian(traj), 1.0 / 3.0, atol=1e-12
    )
    engineered = model_from_frames(traj)
    assert engineered.g0 == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert abs(engineered.g2) <= 1e-12

    # plain XY4 keeps the native anisotropy (its frames stay on +-z)
    c_xy4 = average_hamiltonian(compile_frames(load_shipped_sequence("xy4")))
    np.testing.assert_allclose(c_xy4, [1.0, 1.0, -1.0], atol=1e-12)

    assert xxz_from_lambda(0.0) == (2.0 / 3.0, 0.0)
    assert xxz_from_lambda(2.0) == (2.0, -4.0)


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


def test_scan_csv_is_byte_identical_across_worker_counts(tmp_path):
    """Rerunning a scan with the same seed but a different number of
    trajectory workers reproduces the CSV byte for byte."""
    config = tmp_path / "tiny_scan.yaml"
    config.write_text(
        textwrap.dedent(
            """\
            ensemble:
              box_nm: [30.0, 30.0, 30.0]
              boundary: periodic
              number_density_per_nm3: 6.0e-4
              uv_cutoff_nm: 4.0
              group_index: 0
              position_seed: 3
            spiral:
              harmonics: [1, 1, 1]
              gradient_mt_per_um: 3.0
            protocol:
              tip_theta_deg: 45.0
              quench_time_per_jtyp: 0.5
              n_times: 5
              n_trajectories: 96
              seed: 3
            scan:
              kind: anisotropy
              ratio_values: [-1.0, 1.0, 3.0]
              n_groups: 4
            dynamics:
              method: rk4
              dt_factor: 0.04
            """
        )
    )
    digests = {}
    for workers in (1, 3):
        out = tmp_path / f"workers{workers}"
        run_cli(
            "scan",
            "--config", config,
            "--out", out,
            "--workers", workers,
            cwd=tmp_path,
        )
        digests[workers] = (out / "anisotropy_scan.csv").read_bytes()
    assert digests[1] == digests[3]
