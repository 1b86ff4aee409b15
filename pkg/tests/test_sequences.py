"""Tests for the shipped pulse programs and their compiled properties."""

import numpy as np
import pytest

from spintex.hamiltonian import (
    average_hamiltonian,
    compile_frames,
    disorder_residual,
    format_sequence,
    model_from_frames,
    parse_sequence,
)
from spintex.sequences import (
    isotropic_engineering_sequence,
    load_shipped_sequence,
    shipped_sequence_path,
    six_axis_block,
    xy4_sequence,
)

TOL = 1e-12


class TestXY4:
    def test_default_structure(self):
        seq = xy4_sequence(30.0)
        assert seq.cycle_ns == 120.0
        assert [p.axis for p in seq.pulses] == ["+X", "+Y", "+X", "+Y"]
        assert all(p.angle_deg == 180.0 for p in seq.pulses)
        assert [p.spacing_ns for p in seq.pulses] == [15.0, 30.0, 30.0, 30.0]
        assert seq.tail_ns == 15.0

    def test_compiles_to_native_model(self):
        traj = compile_frames(xy4_sequence(30.0))
        c = average_hamiltonian(traj)
        np.testing.assert_allclose(c, [1.0, 1.0, -1.0], atol=TOL)
        np.testing.assert_allclose(disorder_residual(traj), 0.0, atol=TOL)
        m = model_from_frames(traj)
        assert abs(m.g0 - 2.0) < TOL and abs(m.g2 + 4.0) < TOL


class TestSixAxisBlock:
    def test_block_visits_six_distinct_axes(self):
        from spintex.hamiltonian import PulseSequence

        block = six_axis_block(24.0)
        # close the block with its own half-window: the start axis is split
        # across the opening and closing windows, the rest get one window each
        seq = PulseSequence(pulses=block, tail_ns=12.0, name="block")
        traj = compile_frames(seq)
        labels = [f[0] for f in traj.frames]
        assert len(labels) == 7
        assert labels[0] == labels[-1] == "+z"
        assert set(labels) == {"+x", "-x", "+y", "-y", "+z", "-z"}
        # each signed axis carries the same total window time
        totals = {}
        for lab, _, dur in traj.frames:
            totals[lab] = totals.get(lab, 0.0) + dur
        assert all(t == pytest.approx(24.0) for t in totals.values())

    def test_inverted_block_visits_same_axes(self):
        from spintex.hamiltonian import PulseSequence

        block = six_axis_block(24.0, invert=True)
        seq = PulseSequence(pulses=block, tail_ns=12.0, name="block")
        labels = [f[0] for f in compile_frames(seq).frames]
        assert set(labels) == {"+x", "-x", "+y", "-y", "+z", "-z"}


class TestIsotropicProgram:
    def test_equal_thirds_and_zero_residual(self):
        traj = compile_frames(isotropic_engineering_sequence(25.0))
        c = average_hamiltonian(traj)
        np.testing.assert_allclose(c, 1.0 / 3.0, atol=TOL)
        np.testing.assert_allclose(disorder_residual(traj), 0.0, atol=TOL)

    def test_maps_to_heisenberg_point(self):
        traj = compile_frames(isotropic_engineering_sequence(25.0))
        m = model_from_frames(traj)
        assert abs(m.g0 - 2.0 / 3.0) < TOL
        assert abs(m.g2) < TOL

    def test_time_symmetric(self):
        seq = isotropic_engineering_sequence(25.0)
        # window pattern reads the same forwards and backwards
        windows = [p.spacing_ns for p in seq.pulses] + [seq.tail_ns]
        assert windows == windows[::-1]

    def test_cycle_scales_with_tau(self):
        assert isotropic_engineering_sequence(25.0).cycle_ns == 1200.0
        assert isotropic_engineering_sequence(50.0).cycle_ns == 2400.0


class TestShippedFiles:
    @pytest.mark.parametrize("name", ["xy4", "cxy4_droid_vxy4_symm"])
    def test_file_exists_and_parses(self, name):
        path = shipped_sequence_path(name)
        assert path.exists()
        seq = load_shipped_sequence(name)
        assert seq.cycle_ns > 0

    @pytest.mark.parametrize(
        "name,c_expected",
        [("xy4", (1.0, 1.0, -1.0)),
         ("cxy4_droid_vxy4_symm", (1 / 3, 1 / 3, 1 / 3))],
    )
    def test_compiled_weights(self, name, c_expected):
        traj = compile_frames(load_shipped_sequence(name))
        np.testing.assert_allclose(
            average_hamiltonian(traj), c_expected, atol=TOL
        )
        np.testing.assert_allclose(disorder_residual(traj), 0.0, atol=TOL)

    @pytest.mark.parametrize("name", ["xy4", "cxy4_droid_vxy4_symm"])
    def test_all_frames_axis_aligned(self, name):
        traj = compile_frames(load_shipped_sequence(name))
        for label, vec, dur in traj.frames:
            v = np.abs(np.asarray(vec))
            assert np.isclose(v.max(), 1.0, atol=TOL)
            assert np.sum(v > 0.5) == 1

    @pytest.mark.parametrize("name", ["xy4", "cxy4_droid_vxy4_symm"])
    def test_file_round_trips_through_formatter(self, name):
        seq = load_shipped_sequence(name)
        text = shipped_sequence_path(name).read_text()
        assert parse_sequence(format_sequence(seq), name=seq.name) == seq
        # the shipped file is exactly what the formatter produces
        assert text == format_sequence(seq)

    def test_unknown_name_rejected(self):
        with pytest.raises(FileNotFoundError):
            load_shipped_sequence("nonexistent_program")
