"""Initial-data generators with a resolution guard."""

import math

import numpy as np

from .config import InitialData
from .errors import ConfigError
from .lemmas import SamplerConfig, random_bandlimited
from .spectral import Field, _irfft, _rfft

__all__ = ["make_initial", "spectral_tail", "TAIL_TOL", "RANDOM_INITIAL_DECAY"]

# largest coefficient allowed in the top 1/8 of the resolved band, relative
# to the largest coefficient overall
TAIL_TOL = 1e-8
RANDOM_INITIAL_DECAY = 2.0


def spectral_tail(u):
    """``max |c_j|`` over ``j >= 7N/16`` divided by ``max_j |c_j|``."""
    c = np.abs(_rfft(u.values))
    peak = c.max()
    if peak == 0:
        return 0.0
    start = (7 * u.grid.n_points) // 16
    return float(c[start:].max() / peak)


def _periodic_offset(grid, center):
    """Signed distance ``x - center`` wrapped into ``[-L/2, L/2)``."""
    L = grid.length
    return (grid.x - center + 0.5 * L) % L - 0.5 * L


def _gaussian(data, grid):
    L = grid.length
    y = _periodic_offset(grid, data.center)
    reach = int(math.ceil(8 * data.width / L)) + 1
    out = np.zeros(grid.n_points)
    for n in range(-reach, reach + 1):
        out += np.exp(-(((y + n * L) / data.width) ** 2))
    return data.amplitude * out


def _cosine_packet(data, grid):
    theta = 2 * np.pi * grid.x / grid.length
    out = np.zeros(grid.n_points)
    for m, a, phase in data.modes:
        if m >= grid.nyquist:
            raise ConfigError("initial.modes", f"mode {m} is not resolved on {grid.n_points} points")
        out += a * np.cos(m * theta + phase)
    return out


def _mollified_peakon(data, grid):
    # Fourier coefficients of the periodic sum of a*exp(-|x - x0|), damped by
    # those of the unit-mass Gaussian exp(-x^2/w^2)/(w sqrt(pi)).
    xi = grid.rwavenumbers
    w = data.mollify_width
    c = (2.0 / grid.length) / (1.0 + xi**2) * np.exp(-0.25 * (xi * w) ** 2)
    c = data.amplitude * c * np.exp(-1j * xi * data.center)
    c[-1] = c[-1].real
    return _irfft(c, grid.n_points)


def make_initial(data, grid, seed=0, check_resolution=True):
    """Sample ``data`` on ``grid``.

    Raises :class:`ConfigError` when the field's spectrum is not resolved
    (see :func:`spectral_tail`), unless ``check_resolution`` is false.
    """
    if not isinstance(data, InitialData):
        raise TypeError("data must be an InitialData")
    if data.kind == "gaussian":
        values = _gaussian(data, grid)
    elif data.kind == "cosine_packet":
        values = _cosine_packet(data, grid)
    elif data.kind == "mollified_peakon":
        values = _mollified_peakon(data, grid)
    else:
        cfg = SamplerConfig(seed=seed, spectral_decay=RANDOM_INITIAL_DECAY, n_samples=1)
        values = random_bandlimited(cfg, grid, amplitude=data.amplitude).values
    u = Field(grid, values)
    if check_resolution:
        tail = spectral_tail(u)
        if tail > TAIL_TOL:
            key = "initial.mollify_width" if data.kind == "mollified_peakon" else "initial.width"
            raise ConfigError(
                key,
                f"{data.kind} is not resolved on {grid.n_points} points "
                f"(spectral tail {tail:.2e} > {TAIL_TOL:.0e}); refine the grid or widen the profile",
            )
    return u
