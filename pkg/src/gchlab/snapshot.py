"""Binary checkpoint of a solver state for bit-exact restarts.

Layout (little-endian): magic ``b"GCHS"``, version ``u32``, N ``u64``,
L ``f64``, t ``f64``, k ``u32``, p ``u32``, b ``f64``, then N ``f64`` samples.
The nonlinearity ``g`` is not stored; a resumed run takes it from its config.
"""

import os
import struct

import numpy as np

from .errors import SnapshotError
from .model import ModelParams
from .spectral import Field, GridSpec
from .timestepper import SolverState

MAGIC = b"GCHS"
VERSION = 1
_HEADER = struct.Struct("<4sIQddIId")


def write_snapshot(state, params, path):
    """Write atomically (temp file + rename) so a crash never leaves a torn file."""
    grid = state.u.grid
    header = _HEADER.pack(MAGIC, VERSION, grid.n_points, grid.length, state.t, params.k, params.p, params.b)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.u.values, dtype="<f8").tobytes())
    os.replace(tmp, path)


def read_snapshot(path, g_coeffs=()):
    """Return ``(SolverState, ModelParams)``; ``g_coeffs`` fills in the unstored ``g``."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, n, length, t, k, p, b = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: not a snapshot (bad magic {magic!r})")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version} (expected {VERSION})")
    expected = _HEADER.size + 8 * n
    if len(blob) < expected:
        raise SnapshotError(f"{path}: truncated data ({len(blob)} of {expected} bytes)")
    if len(blob) > expected:
        raise SnapshotError(f"{path}: {len(blob) - expected} trailing bytes after data")
    try:
        grid = GridSpec(int(n), length)
        params = ModelParams(k, p, b, tuple(g_coeffs))
    except ValueError as exc:
        raise SnapshotError(f"{path}: invalid header: {exc}") from None
    values = np.frombuffer(blob, dtype="<f8", count=n, offset=_HEADER.size).astype(np.float64)
    return SolverState(t=t, u=Field(grid, values)), params
