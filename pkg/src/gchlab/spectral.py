"""
Fourier-multiplier calculus on a uniform periodic grid.

Conventions
-----------
Grid points are ``x_i = i * L / N`` for ``i = 0, ..., N-1`` and the
coefficients of a field satisfy

    f(x_i) = sum_j c_j exp(i xi_j x_i),    xi_j = 2 pi j / L,

so ``c_0`` is the mean of ``f``. Norms use the Parseval representative

    ||f||_{H^s}^2 = L * sum_j (1 + xi_j^2)^s |c_j|^2,

which coincides with the uniform Riemann sum for ``s = 0``.

The public operations take and return :class:`Field` / :class:`Spectrum`.
The underscore helpers work on raw arrays along the last axis (real-FFT
layout, ``N // 2 + 1`` coefficients) and are what the solver and the
batched lemma checks use on their hot paths.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import NonFiniteError

__all__ = [
    "GridSpec",
    "Field",
    "Spectrum",
    "forward_transform",
    "inverse_transform",
    "apply_lambda",
    "apply_gamma",
    "derivative",
    "sobolev_norm",
    "lp_norm",
    "dealiased_product",
    "fine_size",
]

# relative tolerance for Hermitian symmetry of spectra representing real fields
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Periodic 1-D grid on ``[0, length)`` with ``n_points`` samples."""

    n_points: int
    length: float = 2 * math.pi

    def __post_init__(self):
        n = self.n_points
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValueError(f"n_points must be an integer, got {n!r}")
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be positive and finite, got {self.length!r}")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self):
        return self.length / self.n_points

    @cached_property
    def x(self):
        x = np.arange(self.n_points) * self.dx
        x.setflags(write=False)
        return x

    @cached_property
    def mode_indices(self):
        """Integer mode numbers in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1."""
        j = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).round().astype(np.int64)
        j.setflags(write=False)
        return j

    @cached_property
    def wavenumbers(self):
        xi = (2 * np.pi / self.length) * self.mode_indices
        xi.setflags(write=False)
        return xi

    @cached_property
    def rwavenumbers(self):
        """Non-negative wavenumbers matching the real-FFT layout."""
        xi = (2 * np.pi / self.length) * np.arange(self.n_points // 2 + 1)
        xi.setflags(write=False)
        return xi

    @property
    def nyquist(self):
        return self.n_points // 2

    def refined(self, factor=2):
        return GridSpec(self.n_points * factor, self.length)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a periodic function on ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_points))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients in FFT order (see ``GridSpec.wavenumbers``)."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def hermitian_defect(self):
        """Largest violation of ``c(-j) = conj(c(j))``, relative to ``max |c|``."""
        c = self.coeffs
        scale = np.max(np.abs(c))
        if scale == 0:
            return 0.0
        mirrored = np.conj(np.roll(c[::-1], 1))  # entry j holds conj(c(-j))
        return float(np.max(np.abs(c - mirrored)) / scale)


# ---------------------------------------------------------------------------
# array-level helpers


def _check_finite(values, what="field"):
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{what} contains non-finite values")


def _rfft(values):
    n = values.shape[-1]
    return np.fft.rfft(values, axis=-1) / n


def _irfft(coeffs, n):
    return np.fft.irfft(coeffs * n, n=n, axis=-1)


def _lambda_symbol(grid, s):
    return (1.0 + grid.rwavenumbers**2) ** (0.5 * s)


def _derivative_symbol(grid, order):
    sym = (1j * grid.rwavenumbers) ** order
    if order % 2:
        sym[-1] = 0.0
    return sym


def _parseval_weights(n):
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


def _sobolev_sq(coeffs, grid, s):
    """Squared H^s norms of real-FFT coefficient arrays (last axis)."""
    w = _parseval_weights(grid.n_points) * (1.0 + grid.rwavenumbers**2) ** s
    return grid.length * np.sum(w * (coeffs.real**2 + coeffs.imag**2), axis=-1)


def fine_size(n, degree):
    """Padded grid size that makes a degree-``degree`` product alias-free."""
    target = math.ceil((degree + 1) / 2) * n
    return 1 << (target - 1).bit_length()


def _pad(coeffs, m):
    """Embed real-FFT coefficients of an N-grid into an M-grid (M >= N)."""
    nh = coeffs.shape[-1] - 1
    if m == 2 * nh:
        return np.array(coeffs, dtype=np.complex128)
    out = np.zeros(coeffs.shape[:-1] + (m // 2 + 1,), dtype=np.complex128)
    out[..., :nh] = coeffs[..., :nh]
    # the Nyquist cosine splits evenly between +N/2 and -N/2 on the fine grid
    out[..., nh] = 0.5 * coeffs[..., nh].real
    return out


def _truncate(coeffs_fine, n):
    """Project fine-grid real-FFT coefficients back onto an N-grid."""
    nh = n // 2
    out = np.array(coeffs_fine[..., : nh + 1], dtype=np.complex128)
    if coeffs_fine.shape[-1] == nh + 1:
        return out
    out[..., nh] = 2.0 * coeffs_fine[..., nh].real
    return out


def _to_fine(coeffs, m):
    return _irfft(_pad(coeffs, m), m)


def _from_fine(values_fine, n):
    return _truncate(_rfft(values_fine), n)


# ---------------------------------------------------------------------------
# public operations


def forward_transform(f):
    """Fourier coefficients of ``f`` normalised so that ``c_0`` is the mean."""
    _check_finite(f.values)
    return Spectrum(f.grid, np.fft.fft(f.values) / f.grid.n_points)


def inverse_transform(s):
    """Real field with the given coefficients; rejects non-Hermitian spectra."""
    if not np.all(np.isfinite(s.coeffs)):
        raise NonFiniteError("spectrum contains non-finite coefficients")
    defect = s.hermitian_defect()
    if defect > HERMITIAN_TOL:
        raise ValueError(
            f"spectrum is not Hermitian-symmetric (relative defect {defect:.3e}); "
            "it does not represent a real field"
        )
    values = np.fft.ifft(s.coeffs * s.grid.n_points)
    return Field(s.grid, values.real)


def _apply_multiplier(f, symbol):
    _check_finite(f.values)
    n = f.grid.n_points
    return Field(f.grid, _irfft(_rfft(f.values) * symbol, n))


def apply_lambda(f, s):
    """Bessel potential: multiply mode ``j`` by ``(1 + xi_j^2)^(s/2)``."""
    if s == 0:
        _check_finite(f.values)
        return Field(f.grid, f.values.copy())
    return _apply_multiplier(f, _lambda_symbol(f.grid, s))


def apply_gamma(f, k, inverse=False):
    """``(1 - d_xx)^k f``, or its inverse."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k!r}")
    return apply_lambda(f, -2 * k if inverse else 2 * k)


def derivative(f, order=1):
    """Spectral derivative; odd orders drop the Nyquist mode."""
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise ValueError(f"derivative order must be an integer >= 1, got {order!r}")
    return _apply_multiplier(f, _derivative_symbol(f.grid, int(order)))


def sobolev_norm(f, s):
    _check_finite(f.values)
    return float(np.sqrt(_sobolev_sq(_rfft(f.values), f.grid, s)))


def lp_norm(f, p=2):
    """L^p norm by the uniform Riemann sum; ``p`` in {1, 2, inf}."""
    v = f.values
    if p in (np.inf, "inf"):
        return float(np.max(np.abs(v)))
    if p == 1:
        return float(f.grid.dx * np.sum(np.abs(v)))
    if p == 2:
        return float(np.sqrt(f.grid.dx * np.dot(v, v)))
    raise ValueError(f"unsupported Lebesgue exponent {p!r}; use 1, 2 or inf")


def dealiased_product(factors, total_degree=None):
    """Pointwise product of ``factors`` without aliasing.

    Each factor is interpolated onto a zero-padded grid large enough for a
    product of ``total_degree`` band-limited factors, multiplied there, and
    the result is projected back onto the original grid.
    """
    factors = list(factors)
    if total_degree is None:
        total_degree = len(factors)
    if total_degree < 2 or total_degree != len(factors):
        raise ValueError(
            f"total_degree must equal the number of factors (>= 2); "
            f"got {total_degree} for {len(factors)} factors"
        )
    grid = factors[0].grid
    for f in factors[1:]:
        if f.grid != grid:
            raise ValueError(f"factors live on different grids: {grid} vs {f.grid}")
    for f in factors:
        _check_finite(f.values)
    n = grid.n_points
    m = fine_size(n, total_degree)
    prod = _to_fine(_rfft(factors[0].values), m)
    for f in factors[1:]:
        prod = prod * _to_fine(_rfft(f.values), m)
    return Field(grid, _irfft(_from_fine(prod, n), n))
