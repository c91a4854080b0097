import struct

import numpy as np
import pytest

from gchlab.errors import SnapshotError
from gchlab.model import PRESETS, ModelParams
from gchlab.snapshot import MAGIC, VERSION, read_snapshot, write_snapshot
from gchlab.spectral import Field, GridSpec
from gchlab.timestepper import SolverState

from conftest import bandlimited


def make_state(n=64, length=11.5, t=0.123456789):
    rng = np.random.default_rng(0)
    return SolverState(t=t, u=Field(GridSpec(n, length), rng.normal(size=n)), step=17)


class TestRoundTrip:
    def test_bit_identical(self, tmp_path):
        st = make_state()
        prm = ModelParams(2, 3, -0.75, (0, 0, 1))
        path = tmp_path / "s.gchs"
        write_snapshot(st, prm, path)
        back, bprm = read_snapshot(path, g_coeffs=prm.g_coeffs)
        assert back.t == st.t
        assert back.u.grid == st.u.grid
        assert back.u.values.tobytes() == st.u.values.tobytes()
        assert bprm == prm
        assert not (tmp_path / "s.gchs.tmp").exists()

    def test_layout(self, tmp_path):
        st = make_state(n=8)
        path = tmp_path / "s.gchs"
        write_snapshot(st, PRESETS["novikov"], path)
        blob = path.read_bytes()
        head = struct.unpack_from("<4sIQddIId", blob)
        assert head == (MAGIC, VERSION, 8, 11.5, st.t, 1, 2, 3.0)
        assert len(blob) == struct.calcsize("<4sIQddIId") + 8 * 8

    def test_special_values_survive(self, tmp_path):
        g = GridSpec(16)
        v = bandlimited(g, 2).values.copy()
        v[3] = -0.0
        v[4] = 5e-324
        path = tmp_path / "s.gchs"
        write_snapshot(SolverState(0.0, Field(g, v)), PRESETS["camassa_holm"], path)
        assert read_snapshot(path)[0].u.values.tobytes() == v.tobytes()


class TestRejections:
    def write(self, tmp_path):
        path = tmp_path / "s.gchs"
        write_snapshot(make_state(), PRESETS["camassa_holm"], path)
        return path

    def test_truncated_data(self, tmp_path):
        path = self.write(tmp_path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(SnapshotError, match="truncated"):
            read_snapshot(path)

    def test_truncated_header(self, tmp_path):
        path = self.write(tmp_path)
        path.write_bytes(path.read_bytes()[:10])
        with pytest.raises(SnapshotError, match="truncated"):
            read_snapshot(path)

    def test_version_mismatch(self, tmp_path):
        path = self.write(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[4:8] = struct.pack("<I", VERSION + 1)
        path.write_bytes(bytes(blob))
        with pytest.raises(SnapshotError, match="version"):
            read_snapshot(path)

    def test_bad_magic_and_trailing(self, tmp_path):
        path = self.write(tmp_path)
        good = path.read_bytes()
        path.write_bytes(b"XXXX" + good[4:])
        with pytest.raises(SnapshotError, match="magic"):
            read_snapshot(path)
        path.write_bytes(good + b"\0")
        with pytest.raises(SnapshotError, match="trailing"):
            read_snapshot(path)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            read_snapshot(tmp_path / "nope.gchs")
