"""
The generalized Camassa-Holm equation

    m_t + u^p m_x + b u^(p-1) u_x m = -(g(u))_x + (b+1) u^p u_x,
    m = (1 - d_xx)^k u,

in two algebraically equivalent evolution forms for u:

* nonlocal (u-form):  u_t = -u^p u_x + f(u), with
  f(u) = Gamma^{-1}([Gamma, u^p] u_x - b u^(p-1) u_x Gamma u - g(u)_x + (b+1) u^p u_x)
* momentum (m-form):  u_t = Gamma^{-1}(m_t) with m_t read off the equation.

All products are formed alias-free on a padded grid. The two forms share no
code beyond the spectral core, so their agreement is a genuine check of the
commutator algebra.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import BlowUpError
from .spectral import (
    Field,
    _derivative_symbol,
    _from_fine,
    _irfft,
    _lambda_symbol,
    _rfft,
    _to_fine,
    apply_gamma,
    dealiased_product,
    derivative,
    fine_size,
)

__all__ = [
    "ModelParams",
    "PRESETS",
    "preset",
    "momentum",
    "velocity_from_momentum",
    "g_eval",
    "g_prime_eval",
    "commutator_gamma",
    "commutator_closed_form_k1",
    "nonlinearity_f",
    "rhs_u_form",
    "rhs_m_form",
    "rhs_values",
]


def _as_int(name, value, minimum):
    if isinstance(value, bool) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} >= {minimum} required, got {value}")
    return int(value)


@dataclass(frozen=True)
class ModelParams:
    """Equation instance: momentum order ``k``, power ``p``, balance ``b`` and
    ``g(u) = sum_i g_coeffs[i] * u**i`` (``g_coeffs[0]`` must be 0)."""

    k: int
    p: int
    b: float
    g_coeffs: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "k", _as_int("k", self.k, 1))
        object.__setattr__(self, "p", _as_int("p", self.p, 1))
        b = float(self.b)
        if not np.isfinite(b):
            raise ValueError(f"b must be finite, got {self.b!r}")
        object.__setattr__(self, "b", b)
        g = tuple(float(c) for c in self.g_coeffs)
        if g and g[0] != 0.0:
            raise ValueError("g must satisfy g(0) = 0 (g_coeffs[0] must be 0)")
        if not all(np.isfinite(g)):
            raise ValueError("g_coeffs must be finite")
        while g and g[-1] == 0.0:
            g = g[:-1]
        object.__setattr__(self, "g_coeffs", g)

    @property
    def g_degree(self):
        return len(self.g_coeffs) - 1 if self.g_coeffs else 0

    @property
    def conserves_i1(self):
        return self.b == self.p + 1

    @property
    def product_degree(self):
        """Highest polynomial degree among the nonlinear terms."""
        return max(self.p + 1, self.g_degree, 2)


PRESETS = {
    "camassa_holm": ModelParams(k=1, p=1, b=2.0),
    "degasperis_procesi": ModelParams(k=1, p=1, b=3.0),
    "novikov": ModelParams(k=1, p=2, b=3.0),
    "higher_order_k2": ModelParams(k=2, p=2, b=3.0),
    "higher_order_k3": ModelParams(k=3, p=2, b=3.0),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def momentum(u, params):
    return apply_gamma(u, params.k)


def velocity_from_momentum(m, params):
    return apply_gamma(m, params.k, inverse=True)


def _g_poly(params):
    return np.array(params.g_coeffs) if params.g_coeffs else np.zeros(1)


def g_eval(u, params):
    return Field(u.grid, P.polyval(u.values, _g_poly(params)))


def g_prime_eval(u, params):
    return Field(u.grid, P.polyval(u.values, P.polyder(_g_poly(params))))


# ---------------------------------------------------------------------------
# u-form (hot path: one padded evaluation shared by every product)


class _Pieces:
    """Coarse spectra of the products appearing in the nonlocal form."""

    def __init__(self, values, grid, params):
        n = grid.n_points
        p = params.p
        self.grid = grid
        self.gamma = _lambda_symbol(grid, 2 * params.k)
        self.dx = _derivative_symbol(grid, 1)
        m = fine_size(n, params.product_degree)
        uh = _rfft(values)
        uxh = self.dx * uh
        with np.errstate(over="ignore", invalid="ignore"):
            u = _to_fine(uh, m)
            ux = _to_fine(uxh, m)
            gu = _to_fine(self.gamma * uh, m)
            gux = _to_fine(self.gamma * uxh, m)
            up = u**p
            upm1 = u ** (p - 1)
            self.adv = _from_fine(up * ux, n)  # u^p u_x
            self.adv_gamma = _from_fine(up * gux, n)  # u^p Gamma(u_x)
            self.stretch = _from_fine(upm1 * ux * gu, n)  # u^(p-1) u_x Gamma u
            if params.g_coeffs:
                self.g = _from_fine(P.polyval(u, _g_poly(params)), n)
            else:
                self.g = np.zeros_like(uh)

    def commutator(self):
        return self.gamma * self.adv - self.adv_gamma

    def f_hat(self, params):
        b = params.b
        inner = self.commutator() - b * self.stretch - self.dx * self.g + (b + 1.0) * self.adv
        return inner / self.gamma


def _finite_or_raise(values, what):
    if not np.all(np.isfinite(values)):
        raise BlowUpError(f"non-finite values while evaluating {what}")
    return values


def rhs_values(values, grid, params):
    """``u_t`` from the nonlocal form, on raw samples (used by the integrator)."""
    pc = _Pieces(values, grid, params)
    rh = pc.f_hat(params) - pc.adv
    rh[..., -1] = 0.0
    return _finite_or_raise(_irfft(rh, grid.n_points), "rhs_u_form")


def commutator_gamma(u, params):
    """``[Gamma, u^p] u_x = Gamma(u^p u_x) - u^p Gamma(u_x)``."""
    pc = _Pieces(u.values, u.grid, params)
    return Field(u.grid, _finite_or_raise(_irfft(pc.commutator(), u.grid.n_points), "commutator"))


def commutator_closed_form_k1(u, p):
    """Pointwise ``p(p-1) u^(p-2) u_x^3 + 3p u^(p-1) u_x u_xx``.

    This is the k = 1 expansion with the sign obtained from
    ``d_xx(u^p u_x) - u^p u_xxx``; with ``Gamma = 1 - d_xx`` it equals
    ``-commutator_gamma(u)``. Evaluated pointwise, so ``u`` must be
    band-limited well below the grid's Nyquist mode.
    """
    v = u.values
    ux = derivative(u, 1).values
    uxx = derivative(u, 2).values
    out = 3 * p * v ** (p - 1) * ux * uxx
    if p >= 2:
        out = out + p * (p - 1) * v ** (p - 2) * ux**3
    return Field(u.grid, out)


def nonlinearity_f(u, params):
    pc = _Pieces(u.values, u.grid, params)
    fh = pc.f_hat(params)
    fh[..., -1] = 0.0
    return Field(u.grid, _finite_or_raise(_irfft(fh, u.grid.n_points), "f(u)"))


def rhs_u_form(u, params):
    return Field(u.grid, rhs_values(u.values, u.grid, params))


# ---------------------------------------------------------------------------
# m-form (reference route through the public spectral API)


def _dealiased_g(u, params):
    """g(u) with every monomial formed as an alias-free product."""
    out = np.zeros(u.grid.n_points)
    for i, c in enumerate(params.g_coeffs):
        if c == 0.0 or i == 0:
            continue
        term = u.values if i == 1 else dealiased_product([u] * i).values
        out = out + c * term
    return Field(u.grid, out)


def rhs_m_form(u, params):
    """``Gamma^{-1}`` of ``m_t`` taken directly from the momentum equation."""
    p, b = params.p, params.b
    m = momentum(u, params)
    mx = derivative(m, 1)
    ux = derivative(u, 1)
    transport = dealiased_product([u] * p + [mx])
    stretch = dealiased_product([u] * (p - 1) + [ux, m])
    source = dealiased_product([u] * p + [ux])
    mt = -transport.values - b * stretch.values + (b + 1.0) * source.values
    if params.g_coeffs:
        mt = mt - derivative(_dealiased_g(u, params), 1).values
    mth = _rfft(_finite_or_raise(mt, "m_t")) / _lambda_symbol(u.grid, 2 * params.k)
    mth[-1] = 0.0
    return Field(u.grid, _irfft(mth, u.grid.n_points))

