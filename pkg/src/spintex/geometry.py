"""Ensemble geometry: orientation groups, disordered positions, dipolar
coupling geometry, coil fields and effective gradients.

Positions are in nm, coil geometry in um, fields in mT, couplings in rad/s.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import (
    DEFAULT_UV_CUTOFF_NM,
    GAMMA_MHZ_PER_MT,
    J0_RAD_PER_S_NM3,
    MU0_OVER_4PI_MT_UM_PER_MA,
)


class GeometryError(ValueError):
    pass


class PackingError(RuntimeError):
    """Hard-sphere rejection sampling could not place a spin."""


# ---------------------------------------------------------------------------
# orientation groups
# ---------------------------------------------------------------------------

_GROUP_AXES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / np.sqrt(3.0)


@dataclass(frozen=True)
class NvGroup:
    """One of the four <111>-family quantization axes."""

    index: int  # 1..4
    axis: np.ndarray  # unit 3-vector

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise GeometryError("group axis must be a unit vector")
        object.__setattr__(self, "axis", axis)


def nv_group_axes() -> list[NvGroup]:
    """The four orientation groups; labeling convention is fixed as
    (1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1), each normalized."""
    return [NvGroup(i + 1, _GROUP_AXES[i].copy()) for i in range(4)]


# ---------------------------------------------------------------------------
# dipolar geometry
# ---------------------------------------------------------------------------


def _check_unit(v: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise GeometryError(f"{name} must be a 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise GeometryError(f"{name} must be a unit vector")
    return v


def dipolar_anisotropy(eta: np.ndarray, rhat: np.ndarray) -> float:
    """Angular factor A_eta(rhat) = (3 (eta.rhat)^2 - 1)/2 in [-1/2, 1]."""
    eta = _check_unit(eta, "eta")
    rhat = _check_unit(rhat, "rhat")
    c = float(eta @ rhat)
    return 0.5 * (3.0 * c * c - 1.0)


def dipolar_coupling(
    r: np.ndarray, eta: np.ndarray, r_uv: float | None = None
) -> float:
    """Pairwise coupling J(r) = (J0 / |r|^3) A_eta(rhat) in rad/s, r in nm."""
    r = np.asarray(r, dtype=float)
    dist = float(np.linalg.norm(r))
    if dist <= 0.0:
        raise GeometryError("zero separation")
    if r_uv is not None and dist < r_uv:
        raise GeometryError(f"separation {dist:.3f} nm below UV cutoff {r_uv}")
    return J0_RAD_PER_S_NM3 * dipolar_anisotropy(eta, r / dist) / dist**3


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


@dataclass
class SpinEnsemble:
    """Disordered positions with per-spin polarization for one group.

    boundary: "periodic" (box with minimum-image convention) or "open"
    (nanobeam-like box, no images). dimensions are the box edge lengths (nm);
    positions live in [0, L) per axis for periodic, [-L/2, L/2] for open.
    """

    positions: np.ndarray  # (N, 3) nm
    group: NvGroup
    boundary: str = "periodic"
    dimensions: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r_uv: float = DEFAULT_UV_CUTOFF_NM
    polarizations: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        self.dimensions = np.asarray(self.dimensions, dtype=float)
        if self.boundary not in ("periodic", "open"):
            raise GeometryError(f"unknown boundary {self.boundary!r}")
        if self.polarizations is None:
            self.polarizations = np.ones(len(self.positions))
        else:
            self.polarizations = np.asarray(self.polarizations, dtype=float)
            if self.polarizations.shape != (len(self.positions),):
                raise GeometryError("polarizations shape mismatch")
            if np.any(self.polarizations < 0) or np.any(self.polarizations > 1):
                raise GeometryError("polarizations must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def volume_nm3(self) -> float:
        return float(np.prod(self.dimensions))

    @property
    def density_per_nm3(self) -> float:
        return len(self) / self.volume_nm3

    def displacements(self) -> np.ndarray:
        """All pairwise displacement vectors r_i - r_j, shape (N, N, 3),
        minimum-image under periodic boundary."""
        d = self.positions[:, None, :] - self.positions[None, :, :]
        if self.boundary == "periodic":
            d -= np.round(d / self.dimensions) * self.dimensions
        return d

    def min_pair_distance(self) -> float:
        d = self.displacements()
        r = np.linalg.norm(d, axis=-1)
        np.fill_diagonal(r, np.inf)
        return float(r.min())


def sample_positions(
    dimensions,
    number_density: float,
    r_uv: float = DEFAULT_UV_CUTOFF_NM,
    seed: int = 0,
    group: NvGroup | None = None,
    boundary: str = "periodic",
    max_attempts: int = 1000,
) -> SpinEnsemble:
    """Hard-sphere rejection sampling of N = round(density * volume) spins.

    Reproducible for a fixed seed; raises PackingError if a spin cannot be
    placed within max_attempts draws (packing too dense).
    """
    dims = np.asarray(dimensions, dtype=float)
    if dims.shape != (3,) or np.any(dims <= 0):
        raise GeometryError("dimensions must be three positive lengths (nm)")
    volume = float(np.prod(dims))
    n_target = int(round(number_density * volume))
    if n_target < 1:
        raise GeometryError("region volume x density < 1")
    if group is None:
        group = nv_group_axes()[0]

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    positions = np.empty((n_target, 3))
    r_uv2 = r_uv * r_uv
    for i in range(n_target):
        for attempt in range(max_attempts):
            cand = rng.random(3) * dims
            if i == 0:
                break
            d = positions[:i] - cand
            if boundary == "periodic":
                d -= np.round(d / dims) * dims
            if np.min(np.einsum("ij,ij->i", d, d)) >= r_uv2:
                break
        else:
            raise PackingError(
                f"could not place spin {i} within {max_attempts} attempts"
            )
        positions[i] = cand
    if boundary == "open":
        positions -= dims / 2.0  # center the open box on the origin
    return SpinEnsemble(
        positions=positions,
        group=group,
        boundary=boundary,
        dimensions=dims,
        r_uv=r_uv,
    )


# ---------------------------------------------------------------------------
# coil fields
# ---------------------------------------------------------------------------


@dataclass
class CoilPath:
    """Polygonal current path: ordered vertices (um) carrying current (mA)."""

    vertices: np.ndarray  # (M, 3) um
    current_ma: float

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if len(self.vertices) < 2:
            raise GeometryError("coil path needs at least 2 vertices")
        seg = np.diff(self.vertices, axis=0)
        if np.any(np.linalg.norm(seg, axis=1) == 0.0):
            raise GeometryError("consecutive coil vertices must be distinct")


@dataclass
class GradientSpec:
    """Effective gradient vector of the projected field B.eta (mT/um)."""

    vector_mt_per_um: np.ndarray
    source: str = "coil-model"

    def __post_init__(self):
        self.vector_mt_per_um = np.asarray(self.vector_mt_per_um, dtype=float)
        if not np.all(np.isfinite(self.vector_mt_per_um)):
            raise GeometryError("gradient components must be finite")

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.vector_mt_per_um))


def biot_savart_field(path: CoilPath, point) -> np.ndarray:
    """Exact field of a polygonal current loop at `point` (um), in mT.

    Per segment with endpoints p1, p2 and a = p1 - x, b = p2 - x:
        B = (mu0 I / 4pi) (a x b)(|a| + |b|) / (|a||b| (|a||b| + a.b))
    (numerically stable finite-segment form; singular on the wire).
    """
    x = np.asarray(point, dtype=float)
    a = path.vertices[:-1] - x  # (M-1, 3)
    b = path.vertices[1:] - x
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    dot = np.einsum("ij,ij->i", a, b)
    # na*nb + a.b -> 0 exactly when the point sits on the segment.
    if np.any(na == 0.0) or np.any(nb == 0.0) or np.any(
        na * nb + dot <= 1e-12 * na * nb
    ):
        raise GeometryError("field point lies on a coil segment")
    denom = na * nb * (na * nb + dot)
    cross = np.cross(a, b)
    coeff = (na + nb) / denom
    return (
        MU0_OVER_4PI_MT_UM_PER_MA
        * path.current_ma
        * (cross * coeff[:, None]).sum(axis=0)
    )


def effective_gradient(
    field_fn, eta: np.ndarray, point, step_nm: float = 1.0, source: str = "coil-model"
) -> GradientSpec:
    """Central finite difference of B(x).eta around `point` (um), step in nm.

    Returns the gradient of the projected field in mT/um. Exact for fields
    linear in position.
    """
    eta = _check_unit(eta, "eta")
    if step_nm <= 0:
        raise GeometryError("step must be positive")
    x = np.asarray(point, dtype=float)
    h = step_nm * 1e-3  # um
    grad = np.empty(3)
    for k in range(3):
        dx = np.zeros(3)
        dx[k] = h
        fp = float(np.asarray(field_fn(x + dx)) @ eta)
        fm = float(np.asarray(field_fn(x - dx)) @ eta)
        grad[k] = (fp - fm) / (2.0 * h)
    return GradientSpec(vector_mt_per_um=grad, source=source)


def esr_detuning_profile(field_fn, group: NvGroup, points) -> np.ndarray:
    """Detuning gamma * (B.eta) in MHz for each point (um) along the beam."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        out[i] = GAMMA_MHZ_PER_MT * float(np.asarray(field_fn(p)) @ group.axis)
    return out


def example_gradient_coil(current_ma: float = 50.0) -> CoilPath:
    """Small rectangular microcoil next to the sample region.

    A single rectangular winding, 20 um x 4 um, standing 1.5 um to the side of
    the origin in x and displaced 1 um below in z: at the 50 mA maximum rated
    current the working point at the origin sees a projected-field gradient
    of ~2.3 mT/um.
    """
    x0 = 1.5
    loop = np.array(
        [
            [x0, -10.0, -1.0],
            [x0 + 4.0, -10.0, -1.0],
            [x0 + 4.0, 10.0, -1.0],
            [x0, 10.0, -1.0],
            [x0, -10.0, -1.0],
        ]
    )
    return CoilPath(vertices=loop, current_ma=current_ma)
