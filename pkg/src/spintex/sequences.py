"""Builders for the shipped pulse programs and access to the packaged files.

Two programs ship with the package:

* ``xy4.seq`` — the XY4 echo train (pi pulses on alternating X/Y, symmetric
  half-windows at the ends). Frames alternate +z/-z: native-form interaction
  with zero leading-order disorder residual.

* ``cxy4_droid_vxy4_symm.seq`` — an isotropic-exchange (equal-thirds)
  engineering program. Base block: (X90, Y90)^3 with windows tau/2, 5 x tau,
  tau/2 — its six frames visit every signed axis exactly once and its net
  rotation is the identity. Four blocks are concatenated with XY4-patterned
  pi pulses at the block junctions (each junction pi pulse sits between the
  two half-windows), alternate blocks toggle pulse-axis signs, and the whole
  program is followed by its time-reversed axis-inverted mirror so the net
  rotation is the identity by construction.
"""

from importlib import resources
from pathlib import Path

from .hamiltonian import Pulse, PulseSequence, load_sequence

_BLOCK_AXES = ("+X", "+Y", "+X", "+Y", "+X", "+Y")
_FLIP = {"+X": "-X", "-X": "+X", "+Y": "-Y", "-Y": "+Y"}


def xy4_sequence(tau_ns: float = 30.0) -> PulseSequence:
    """XY4: tau/2 - X180 - tau - Y180 - tau - X180 - tau - Y180 - tau/2."""
    half = tau_ns / 2.0
    pulses = [
        Pulse("+X", 180.0, half),
        Pulse("+Y", 180.0, tau_ns),
        Pulse("+X", 180.0, tau_ns),
        Pulse("+Y", 180.0, tau_ns),
    ]
    return PulseSequence(pulses=pulses, tail_ns=half, name="xy4")


def six_axis_block(tau_ns: float, invert: bool = False) -> list[Pulse]:
    """(X90, Y90)^3 with windows tau/2, tau x 5 (the closing tau/2 is left to
    the caller). The six windows visit all six signed axes exactly once."""
    axes = [_FLIP[a] if invert else a for a in _BLOCK_AXES]
    spacings = [tau_ns / 2.0] + [tau_ns] * 5
    return [Pulse(a, 90.0, s) for a, s in zip(axes, spacings)]


def isotropic_engineering_sequence(tau_ns: float = 25.0) -> PulseSequence:
    """The shipped cxy4_droid_vxy4_symm program (see module docstring).

    Each of the four blocks occupies exactly 6 tau (opening and closing
    half-windows in its start frame); the XY4-patterned junction pi pulses sit
    between consecutive half-windows, and the mirror half restores the closing
    half-window of the last block, so every signed axis accumulates exactly
    one sixth of the total cycle.
    """
    junction = ("+X", "+Y", "+X")  # XY4-patterned pi pulses between blocks
    pulses: list[Pulse] = []
    for k in range(4):
        pulses.extend(six_axis_block(tau_ns, invert=bool(k % 2)))
        if k < 3:
            pulses.append(Pulse(junction[k], 180.0, tau_ns / 2.0))
    forward = PulseSequence(pulses=pulses, tail_ns=tau_ns / 2.0,
                            name="cxy4_droid_vxy4")
    mirror = forward.mirrored()
    # The window at the forward/mirror seam is shared: the forward tail and
    # the mirror's leading spacing are the same half-window reflected about
    # the midpoint, so the seam pulse gets their sum as its spacing.
    seam = mirror.pulses[0]
    seam = Pulse(seam.axis, seam.angle_deg,
                 seam.spacing_ns + forward.tail_ns)
    return PulseSequence(
        pulses=list(forward.pulses) + [seam] + list(mirror.pulses[1:]),
        tail_ns=mirror.tail_ns,
        name="cxy4_droid_vxy4_symm",
    )


def shipped_sequence_path(name: str) -> Path:
    """Filesystem path of a packaged .seq file (``xy4`` or
    ``cxy4_droid_vxy4_symm``)."""
    ref = resources.files("spintex").joinpath(f"data/{name}.seq")
    return Path(str(ref))


def load_shipped_sequence(name: str) -> PulseSequence:
    return load_sequence(shipped_sequence_path(name))
