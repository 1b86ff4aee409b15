"""Discrete truncated-Wigner dynamics for dipolar XXZ ensembles.

Each spin-1/2 is a classical vector with components sampled from the discrete
Wigner distribution of the initial product state: along the local tipped axis
the component is +1/2 with probability (1+P)/2 (P the spin's polarization),
-1/2 otherwise, and both transverse components are independently +-1/2.  The
length is sqrt(3)/2 and is conserved exactly by the precession equation

    ds_j/dt = b_j x s_j,
    b_j^{x,y} = g0 sum_l J_jl s_l^{x,y},   b_j^z = (g0+g2) sum_l J_jl s_l^z.

Evolution can optionally be carried out in the frame co-winding with a
texture wavevector Q, where the coupling picks up position-dependent phases;
this is numerically equivalent to lab-frame evolution followed by unwinding.

Observables are averages over trajectories.  Trajectories are organized in
fixed blocks of 32 so that results are bit-identical regardless of how many
worker processes are used.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from threadpoolctl import threadpool_limits

from .geometry import SpinEnsemble
from .constants import J0_RAD_PER_S_NM3

__all__ = [
    "IntegrationError",
    "CouplingMatrix",
    "TrajectoryBatch",
    "EvolveResult",
    "SPIN_LENGTH",
    "build_couplings",
    "sample_initial",
    "evolve",
    "measure_fourier_mode",
    "total_spin",
]

SPIN_LENGTH = math.sqrt(3.0) / 2.0
BLOCK_SIZE = 32


class IntegrationError(RuntimeError):
    """Raised when conservation checks fail during time evolution."""


# ---------------------------------------------------------------------------
# couplings and initial states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingMatrix:
    """Pairwise couplings J_ij (rad/s), zero diagonal."""

    matrix: np.ndarray
    j_max: float  # max |J_ij|
    j_typical: float  # J0 * number density

    def __len__(self):
        return len(self.matrix)


def build_couplings(ensemble: SpinEnsemble) -> CouplingMatrix:
    """Dense J_ij = (J0 / r^3) A_eta(rhat), minimum-image under periodic
    boundaries, diagonal zero."""
    d = ensemble.displacements()
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, np.inf)
    r = np.sqrt(r2)
    cos_angle = (d @ ensemble.group.axis) / r
    aniso = 0.5 * (3.0 * cos_angle**2 - 1.0)
    jmat = J0_RAD_PER_S_NM3 * aniso / (r2 * r)
    np.fill_diagonal(jmat, 0.0)
    return CouplingMatrix(
        matrix=jmat,
        j_max=float(np.abs(jmat).max()),
        j_typical=J0_RAD_PER_S_NM3 * ensemble.density_per_nm3,
    )


def _rodrigues(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix for a signed angle about a unit axis."""
    c, s = math.cos(angle), math.sin(angle)
    cross = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(axis, axis)


@dataclass
class TrajectoryBatch:
    """A set of sampled classical-spin trajectories at a common time."""

    ensemble: SpinEnsemble
    spins: np.ndarray  # (n_traj, N, 3)
    time_s: float = 0.0
    seed: int | None = None

    @property
    def n_traj(self) -> int:
        return self.spins.shape[0]


def sample_initial(
    ensemble: SpinEnsemble,
    theta: float,
    n_traj: int,
    seed: int,
    phi: float = 0.0,
    antipode: bool = False,
) -> TrajectoryBatch:
    """Sample n_traj discrete-Wigner configurations of the tipped product
    state.

    theta, phi give the tip direction of the mean spin from +z.  With
    antipode=True the tip angle is reflected (theta -> -theta) while every
    random draw is reused: the transverse mean flips sign, the longitudinal
    mean is unchanged, and the shared draws make the pair antithetic -- in
    the half-difference of the two members, tip-independent backgrounds and
    most sampling noise cancel.
    """
    n = len(ensemble)
    if antipode:
        theta = -theta
    # frame carried along by the tipping rotation: rotate (x, y, z) by the
    # signed angle theta about the in-plane axis u = (-sin phi, cos phi, 0).
    # The frame is smooth in theta, so the antipodal partner's transverse
    # axes differ from the original's only at O(theta).
    axis = np.array([-math.sin(phi), math.cos(phi), 0.0])
    rot = _rodrigues(axis, theta)
    e1, e2, nhat = rot[:, 0], rot[:, 1], rot[:, 2]

    children = np.random.SeedSequence(seed).spawn(n_traj)
    spins = np.empty((n_traj, n, 3))
    pol = ensemble.polarizations
    for t, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        up = rng.random(n) < 0.5 * (1.0 + pol)
        s_par = np.where(up, 0.5, -0.5)
        s_e1 = np.where(rng.random(n) < 0.5, 0.5, -0.5)
        s_e2 = np.where(rng.random(n) < 0.5, 0.5, -0.5)
        spins[t] = (
            s_par[:, None] * nhat[None, :]
            + s_e1[:, None] * e1[None, :]
            + s_e2[:, None] * e2[None, :]
        )
    return TrajectoryBatch(ensemble=ensemble, spins=spins, seed=seed)


# ---------------------------------------------------------------------------
# mean field and the precession right-hand side
# ---------------------------------------------------------------------------


def _winding_phases(ensemble: SpinEnsemble, q_vec) -> tuple | None:
    if q_vec is None:
        return None
    q_vec = np.asarray(q_vec, dtype=float)
    if not np.any(q_vec):
        return None
    phase = ensemble.positions @ q_vec
    return np.cos(phase), np.sin(phase)


def _mean_field(spins, jmat, g0, g2, phases):
    """Local fields b for a block of trajectories; spins (b, N, 3).

    In the co-winding frame (phases = (cos Q.r, sin Q.r)) the transverse
    coupling is conjugated by the winding phases; everything reduces to a
    single real GEMM on stacked columns.
    """
    nb, n, _ = spins.shape
    stacked = np.empty((n, nb, 3))
    st = spins.transpose(1, 0, 2)  # (N, b, 3)
    if phases is None:
        stacked[...] = st
    else:
        c, s = phases
        stacked[..., 0] = c[:, None] * st[..., 0] - s[:, None] * st[..., 1]
        stacked[..., 1] = s[:, None] * st[..., 0] + c[:, None] * st[..., 1]
        stacked[..., 2] = st[..., 2]
    y = (jmat @ stacked.reshape(n, nb * 3)).reshape(n, nb, 3)
    b = np.empty_like(y)
    if phases is None:
        b[..., 0] = g0 * y[..., 0]
        b[..., 1] = g0 * y[..., 1]
    else:
        c, s = phases
        b[..., 0] = g0 * (c[:, None] * y[..., 0] + s[:, None] * y[..., 1])
        b[..., 1] = g0 * (c[:, None] * y[..., 1] - s[:, None] * y[..., 0])
    b[..., 2] = (g0 + g2) * y[..., 2]
    return b.transpose(1, 0, 2)  # (b, N, 3)


def _rhs(spins, jmat, g0, g2, phases):
    b = _mean_field(spins, jmat, g0, g2, phases)
    return np.cross(b, spins)


def _batch_energy(spins, jmat, g0, g2, phases):
    """E = (1/2) sum_j b_j . s_j per trajectory (conserved)."""
    b = _mean_field(spins, jmat, g0, g2, phases)
    return 0.5 * np.einsum("bjk,bjk->b", b, spins)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


@dataclass
class EvolveResult:
    """Time evolution output for one batch."""

    times: np.ndarray  # (n_times,) seconds, includes t = 0
    batch: TrajectoryBatch  # state at times[-1]
    modes: np.ndarray | None  # (n_times, n_modes) complex, trajectory mean
    norm_drift: float
    energy_drift: float


def _rk4_segment(spins, jmat, g0, g2, phases, duration, dt_max):
    n_steps = max(1, math.ceil(duration / dt_max))
    h = duration / n_steps
    for _ in range(n_steps):
        k1 = _rhs(spins, jmat, g0, g2, phases)
        k2 = _rhs(spins + 0.5 * h * k1, jmat, g0, g2, phases)
        k3 = _rhs(spins + 0.5 * h * k2, jmat, g0, g2, phases)
        k4 = _rhs(spins + h * k3, jmat, g0, g2, phases)
        spins += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return spins


def _rk45_segment(spins, jmat, g0, g2, phases, duration, rtol):
    from scipy.integrate import solve_ivp

    shape = spins.shape

    def fun(_t, y):
        return _rhs(y.reshape(shape), jmat, g0, g2, phases).ravel()

    sol = solve_ivp(
        fun, (0.0, duration), spins.ravel(), method="RK45",
        rtol=rtol, atol=rtol * 1e-2, dense_output=False,
    )
    if not sol.success:  # pragma: no cover - defensive
        raise IntegrationError(f"adaptive integrator failed: {sol.message}")
    return sol.y[:, -1].reshape(shape)


def _mode_matrix(ensemble, record_modes):
    if record_modes is None:
        return None
    qs = np.asarray(record_modes, dtype=float)
    if qs.size == 0:
        return None
    qs = np.atleast_2d(qs)
    return np.exp(-1j * (ensemble.positions @ qs.T))  # (N, n_modes)


def _evolve_block(
    spins, jmat, g0, g2, phases, sample_times, method, dt_max, rtol,
    mode_mat, keep_traj=False,
):
    """Evolve one trajectory block through all sample times.

    Returns (final spins, recorded modes, norm drift, energy drift).  Modes
    are per-spin-normalized; with keep_traj they are kept per trajectory
    with shape (block, n_times, n_modes), otherwise summed over the block's
    trajectories so the caller can average in a fixed order.
    """
    # Overflow inside a diverging fixed-step run is caught by the drift
    # guard, not reported as a warning.
    with threadpool_limits(limits=1), np.errstate(over="ignore",
                                                  invalid="ignore"):
        # private copy: the RK4 loop updates in place
        spins = np.array(spins, dtype=float, order="C")
        n_times = len(sample_times)
        if mode_mat is None:
            mode_sums = None
        elif keep_traj:
            mode_sums = np.zeros(
                (len(spins), n_times, mode_mat.shape[1]), dtype=complex
            )
        else:
            mode_sums = np.zeros((n_times, mode_mat.shape[1]), dtype=complex)
        e0 = _batch_energy(spins, jmat, g0, g2, phases)
        e_scale = float(np.abs(e0).max())
        norm0 = SPIN_LENGTH
        norm_drift = 0.0
        energy_drift = 0.0
        t = 0.0
        for k, target in enumerate(sample_times):
            seg = target - t
            if seg < -1e-18:
                raise ValueError("sample times must be non-decreasing")
            if seg > 0:
                if method == "rk4":
                    spins = _rk4_segment(
                        spins, jmat, g0, g2, phases, seg, dt_max
                    )
                else:
                    spins = _rk45_segment(
                        spins, jmat, g0, g2, phases, seg, rtol
                    )
                t = target
            if mode_sums is not None:
                splus = spins[..., 0] + 1j * spins[..., 1]
                per_traj = splus @ mode_mat  # (block, n_modes)
                if keep_traj:
                    mode_sums[:, k, :] = per_traj
                else:
                    mode_sums[k] = per_traj.sum(axis=0)
            norms = np.sqrt(np.einsum("bjk,bjk->bj", spins, spins))
            norm_drift = max(
                norm_drift, _finite(np.abs(norms - norm0).max() / norm0)
            )
            e_now = _batch_energy(spins, jmat, g0, g2, phases)
            if e_scale > 0:
                energy_drift = max(
                    energy_drift, _finite(np.abs(e_now - e0).max() / e_scale)
                )
        return spins, mode_sums, norm_drift, energy_drift


def _finite(value) -> float:
    """Drift value with NaN (a diverged integration) mapped to infinity."""
    value = float(value)
    return value if math.isfinite(value) else math.inf


def evolve(
    batch: TrajectoryBatch,
    coupling: CouplingMatrix,
    model,
    sample_times,
    q_vec=None,
    record_modes=None,
    method: str = "rk4",
    dt_factor: float = 0.02,
    rtol: float = 1e-8,
    workers: int = 1,
    check_tol: float = 1e-6,
    per_trajectory_modes: bool = False,
) -> EvolveResult:
    """Evolve a trajectory batch through the given sample times (seconds).

    q_vec, if given, selects the frame co-winding with that texture.
    record_modes is an optional list of wavevectors Q' (rad/nm); the result
    then carries the per-spin Fourier modes (1/N) sum_j e^{-i Q'.r_j} s+_j
    at every sample time, averaged over trajectories with shape
    (n_times, n_modes), or kept per trajectory with shape
    (n_traj, n_times, n_modes) when per_trajectory_modes is set.

    Conservation guard: spin norms and per-trajectory energy are monitored
    at every sample time; relative drift beyond check_tol raises
    IntegrationError.  Results are bit-reproducible for any worker count.
    """
    if method not in ("rk4", "rk45"):
        raise ValueError(f"unknown integration method {method!r}")
    sample_times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    if np.any(np.diff(sample_times) < 0):
        raise ValueError("sample times must be non-decreasing")
    g0, g2 = model.g0, model.g2
    jmat = coupling.matrix
    phases = _winding_phases(batch.ensemble, q_vec)
    rate = max(abs(g0), abs(g0 + g2)) * coupling.j_max
    dt_max = dt_factor / rate if rate > 0 else float(sample_times[-1] or 1.0)
    mode_mat = _mode_matrix(batch.ensemble, record_modes)

    n_traj = batch.n_traj
    blocks = [
        (k, batch.spins[k : k + BLOCK_SIZE])
        for k in range(0, n_traj, BLOCK_SIZE)
    ]
    args = [
        (
            spins_blk, jmat, g0, g2, phases, sample_times, method, dt_max,
            rtol, mode_mat, per_trajectory_modes,
        )
        for _, spins_blk in blocks
    ]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evolve_block_star, args))
    else:
        results = [_evolve_block(*a) for a in args]

    final = np.empty_like(batch.spins)
    if mode_mat is None:
        mode_total = None
    elif per_trajectory_modes:
        mode_total = np.empty(
            (n_traj, len(sample_times), mode_mat.shape[1]), dtype=complex
        )
    else:
        mode_total = np.zeros(
            (len(sample_times), mode_mat.shape[1]), dtype=complex
        )
    norm_drift = 0.0
    energy_drift = 0.0
    for (k, spins_blk), (out, msum, nd, ed) in zip(blocks, results):
        final[k : k + len(out)] = out
        if mode_total is not None:
            if per_trajectory_modes:
                mode_total[k : k + len(out)] = msum
            else:
                mode_total += msum
        norm_drift = max(norm_drift, nd)
        energy_drift = max(energy_drift, ed)

    if norm_drift > check_tol:
        raise IntegrationError(
            f"spin-norm drift {norm_drift:.3e} exceeds {check_tol:.1e}"
        )
    if energy_drift > check_tol:
        raise IntegrationError(
            f"energy drift {energy_drift:.3e} exceeds {check_tol:.1e}"
        )

    n = len(batch.ensemble)
    if mode_total is None:
        modes = None
    elif per_trajectory_modes:
        modes = mode_total / n
    else:
        modes = mode_total / (n_traj * n)
    out_batch = replace(
        batch, spins=final, time_s=batch.time_s + float(sample_times[-1])
    )
    return EvolveResult(
        times=sample_times,
        batch=out_batch,
        modes=modes,
        norm_drift=norm_drift,
        energy_drift=energy_drift,
    )


def _evolve_block_star(args):
    return _evolve_block(*args)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def measure_fourier_mode(
    batch: TrajectoryBatch, q_prime, per_trajectory: bool = False
):
    """Per-spin transverse Fourier mode (1/N) sum_j e^{-i Q'.r_j} s+_j.

    Returns the trajectory mean, or the per-trajectory values if requested.
    """
    q_prime = np.asarray(q_prime, dtype=float)
    phase = np.exp(-1j * (batch.ensemble.positions @ q_prime))
    splus = batch.spins[..., 0] + 1j * batch.spins[..., 1]
    per_traj = (splus * phase[None, :]).mean(axis=1)
    if per_trajectory:
        return per_traj
    return complex(per_traj.mean())


def total_spin(batch: TrajectoryBatch) -> np.ndarray:
    """Trajectory-averaged total spin vector sum_j s_j."""
    return batch.spins.sum(axis=1).mean(axis=0)
