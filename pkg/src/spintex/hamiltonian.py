"""Engineered XXZ interactions and pulse-sequence frame analysis.

The interaction family is H = sum_{i<j} J(r_ij) (g0 S_i.S_j + g2 S_i^z S_j^z),
with the one-parameter experimental family g0 = 2(1+lambda)/3, g2 = -2 lambda.

Pulse programs (ideal +-X/+-Y pulses of 90 or 180 degrees separated by free
evolution windows) are analyzed in the toggling-frame picture: the frame of a
window is the image of z under the inverse of the accumulated pulse rotation.
For sequences built from 90/180-degree pulses every accumulated rotation is a
signed axis permutation, so valid frames are always sign-axis aligned.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SNAP_TOL = 1e-9

_AXES = {"x": 0, "y": 1, "z": 2}
_AXIS_VECS = {
    "+x": np.array([1.0, 0.0, 0.0]),
    "-x": np.array([-1.0, 0.0, 0.0]),
    "+y": np.array([0.0, 1.0, 0.0]),
    "-y": np.array([0.0, -1.0, 0.0]),
    "+z": np.array([0.0, 0.0, 1.0]),
    "-z": np.array([0.0, 0.0, -1.0]),
}


class SequenceError(ValueError):
    pass


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# XXZ family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XXZModel:
    """Anisotropy coefficients multiplying J(r_ij)."""

    g0: float
    g2: float
    lam: float | None = None

    @property
    def anisotropy_ratio(self) -> float:
        return anisotropy_ratio(self.g0, self.g2)


def xxz_from_lambda(lam: float) -> tuple[float, float]:
    """(g0, g2) = (2(1+lambda)/3, -2 lambda) for lambda in (-1, 2]."""
    if not (-1.0 < lam <= 2.0):
        raise ModelError(f"lambda {lam} outside (-1, 2]")
    if lam == 0.0:
        return (2.0 / 3.0, 0.0)  # exact rational endpoint
    if lam == 2.0:
        return (2.0, -4.0)
    return (2.0 * (1.0 + lam) / 3.0, -2.0 * lam)


def model_from_lambda(lam: float) -> XXZModel:
    g0, g2 = xxz_from_lambda(lam)
    return XXZModel(g0=g0, g2=g2, lam=lam)


def lambda_from_ratio(ratio: float) -> float:
    """Invert ratio = (g0+g2)/g0 = 1 - 3 lambda/(1+lambda)."""
    lam = (1.0 - ratio) / (2.0 + ratio)
    if not (-1.0 < lam <= 2.0):
        raise ModelError(f"ratio {ratio} maps to lambda {lam} outside (-1, 2]")
    return lam


def anisotropy_ratio(g0: float, g2: float) -> float:
    """g_Z / g_XX = (g0 + g2)/g0."""
    if g0 == 0.0:
        raise ModelError("g0 = 0: anisotropy ratio undefined")
    return (g0 + g2) / g0


# ---------------------------------------------------------------------------
# pulse programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pulse:
    axis: str  # one of +X -X +Y -Y
    angle_deg: float  # 90 or 180
    spacing_ns: float  # free evolution window BEFORE this pulse

    def __post_init__(self):
        if self.axis not in ("+X", "-X", "+Y", "-Y"):
            raise SequenceError(f"bad pulse axis {self.axis!r}")
        if self.angle_deg not in (90.0, 180.0):
            raise SequenceError(f"bad pulse angle {self.angle_deg}")
        if self.spacing_ns < 0:
            raise SequenceError("negative spacing")


@dataclass
class PulseSequence:
    pulses: list[Pulse]
    tail_ns: float = 0.0  # free evolution after the last pulse
    name: str = ""

    @property
    def cycle_ns(self) -> float:
        return sum(p.spacing_ns for p in self.pulses) + self.tail_ns

    def __post_init__(self):
        if self.tail_ns < 0:
            raise SequenceError("negative tail window")
        if self.cycle_ns <= 0:
            raise SequenceError("total cycle duration must be positive")

    def mirrored(self) -> "PulseSequence":
        """Time-reversed program with inverted pulse axes (net rotation of
        sequence + mirror is always the identity)."""
        flip = {"+X": "-X", "-X": "+X", "+Y": "-Y", "-Y": "+Y"}
        pulses = []
        prev = self.tail_ns
        for p in reversed(self.pulses):
            pulses.append(Pulse(flip[p.axis], p.angle_deg, prev))
            prev = p.spacing_ns
        return PulseSequence(pulses=pulses, tail_ns=prev,
                             name=self.name + "-mirror")


def parse_sequence(text: str, name: str = "") -> PulseSequence:
    """Parse the line-oriented pulse program format.

    Lines: `AXIS ANGLE_DEG SPACING_NS` (e.g. `+X 90 30`), `WAIT SPACING_NS`
    for a bare trailing window, `#` comments, blank lines ignored.
    """
    pulses: list[Pulse] = []
    tail = 0.0
    seen_wait = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0].upper() == "WAIT":
                if len(parts) != 2:
                    raise SequenceError("WAIT takes exactly one duration")
                if seen_wait:
                    raise SequenceError("multiple WAIT lines")
                tail = float(parts[1])
                seen_wait = True
            else:
                if seen_wait:
                    raise SequenceError("pulse after WAIT")
                if len(parts) != 3:
                    raise SequenceError("expected `AXIS ANGLE SPACING`")
                pulses.append(Pulse(parts[0], float(parts[1]), float(parts[2])))
        except (ValueError, SequenceError) as exc:
            raise SequenceError(f"line {lineno}: {exc}") from None
    if not pulses and not seen_wait:
        raise SequenceError("empty pulse program")
    return PulseSequence(pulses=pulses, tail_ns=tail, name=name)


def load_sequence(path) -> PulseSequence:
    p = Path(path)
    return parse_sequence(p.read_text(), name=p.stem)


def format_sequence(seq: PulseSequence) -> str:
    lines = [f"{p.axis} {p.angle_deg:g} {p.spacing_ns:g}" for p in seq.pulses]
    if seq.tail_ns > 0:
        lines.append(f"WAIT {seq.tail_ns:g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# frame compilation
# ---------------------------------------------------------------------------


@dataclass
class FrameTrajectory:
    """Signed-axis toggling frames: list of (label, unit vector, duration)."""

    frames: list[tuple[str, np.ndarray, float]]
    cycle_ns: float

    def __post_init__(self):
        total = sum(d for _, _, d in self.frames)
        if abs(total - self.cycle_ns) > 1e-9 * max(self.cycle_ns, 1.0):
            raise SequenceError("frame durations do not sum to cycle duration")


def _rotation(axis: str, angle_deg: float) -> np.ndarray:
    phi = np.deg2rad(angle_deg)
    if axis[0] == "-":
        phi = -phi
    c, s = np.cos(phi), np.sin(phi)
    if axis[1].lower() == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def _snap_axis(v: np.ndarray) -> str:
    for label, vec in _AXIS_VECS.items():
        if np.max(np.abs(v - vec)) < SNAP_TOL:
            return label
    raise SequenceError(
        f"frame {np.round(v, 6)} is not axis-aligned: sequence invalid for "
        "frame-average analysis"
    )


def compile_frames(seq: PulseSequence) -> FrameTrajectory:
    """Toggling frames of the free-evolution windows.

    The frame during window k (after pulses R_1..R_k) is (R_k...R_1)^T z,
    snapped to a signed axis; zero-duration windows are dropped.
    """
    frames: list[tuple[str, np.ndarray, float]] = []
    accum = np.eye(3)

    def push(duration: float):
        if duration <= 0.0:
            return
        v = accum.T @ np.array([0.0, 0.0, 1.0])
        label = _snap_axis(v)
        frames.append((label, _AXIS_VECS[label].copy(), duration))

    for pulse in seq.pulses:
        push(pulse.spacing_ns)
        accum = _rotation(pulse.axis, pulse.angle_deg) @ accum
    push(seq.tail_ns)
    if not frames:
        raise SequenceError("sequence has no finite free-evolution window")
    return FrameTrajectory(frames=frames, cycle_ns=seq.cycle_ns)


def average_hamiltonian(frames: FrameTrajectory) -> tuple[float, float, float]:
    """Leading-order frame-average coefficients (c_x, c_y, c_z) on
    S^x S^x, S^y S^y, S^z S^z in native units: c_mu = 1 - 2 f_mu with f_mu the
    fractional window time the frame spends along +-mu."""
    f = np.zeros(3)
    for label, _, dur in frames.frames:
        f[_AXES[label[1]]] += dur
    f /= frames.cycle_ns
    c = 1.0 - 2.0 * f
    return (float(c[0]), float(c[1]), float(c[2]))


def disorder_residual(frames: FrameTrajectory) -> np.ndarray:
    """Time integral of the signed frame axis over the cycle (normalized):
    zero means static on-site disorder cancels at leading order."""
    acc = np.zeros(3)
    for _, vec, dur in frames.frames:
        acc += vec * dur
    return acc / frames.cycle_ns


def model_from_frames(
    frames: FrameTrajectory, tol: float = 1e-9
) -> XXZModel:
    """Map an XX-symmetric frame average (c_x = c_y) onto (g0, g2).

    Convention: g0 = 2 c_x, g2 = 2 (c_z - c_x), so the all-z (native) frame
    gives (2, -4) and an equal-thirds frame gives (2/3, 0).
    """
    cx, cy, cz = average_hamiltonian(frames)
    if abs(cx - cy) > tol:
        raise ModelError(
            f"frame average is not XX-symmetric (c_x={cx}, c_y={cy})"
        )
    cx = 0.5 * (cx + cy)
    return XXZModel(g0=2.0 * cx, g2=2.0 * (cz - cx))
