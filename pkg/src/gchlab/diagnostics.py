"""
Conservation-law and growth-bound instrumentation.

``I1 = int u m dx`` is conserved when ``b = p + 1``; otherwise it changes at
the rate ``2 (p + 1 - b) int u^p u_x m dx``. The momentum L2 norm obeys a
Gronwall envelope whose constants are instantiated here from the suprema
observed along a run, and ``||u||_{H^{2k}}`` is checked against the
interpolation bound built on top of it.
"""

from dataclasses import dataclass, fields
import csv
import math
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import HypothesisError
from .model import momentum
from .spectral import _rfft, _sobolev_sq, dealiased_product, derivative, lp_norm, sobolev_norm
from .timestepper import slope_sup

__all__ = [
    "DiagnosticsRecord",
    "BoundReport",
    "CSV_COLUMNS",
    "conserved_i1",
    "i1_quadrature",
    "i1_sobolev_sum",
    "di1_residual",
    "record",
    "m_growth_check",
    "h2k_bound_check",
    "write_csv",
    "read_csv",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    i1: float
    i1_sobolev_sum: float
    hs_norm: float
    hk_norm: float
    h2k_norm: float
    m_l2: float
    u_inf: float
    ux_inf: float
    di1_residual: float
    dt_used: float


CSV_COLUMNS = (
    "t",
    "i1",
    "i1_sobolev_sum",
    "hk_norm",
    "h2k_norm",
    "hs_norm",
    "m_l2",
    "u_inf",
    "ux_inf",
    "di1_residual",
    "dt_used",
)


def conserved_i1(u, params):
    """``int u (1 - d_xx)^k u dx`` in Parseval form (exactly nonnegative)."""
    return float(_sobolev_sq(_rfft(u.values), u.grid, params.k))


def i1_quadrature(u, params):
    """Riemann-sum quadrature of ``u * m``; cross-check for :func:`conserved_i1`."""
    m = momentum(u, params)
    return float(u.grid.dx * np.dot(u.values, m.values))


def i1_sobolev_sum(u, params):
    """``sum_j binom(k, j) ||d^j u||_{L2}^2`` for ``j = 0..k``."""
    total = lp_norm(u, 2) ** 2
    for j in range(1, params.k + 1):
        total += comb(params.k, j) * lp_norm(derivative(u, j), 2) ** 2
    return total


def di1_residual(u, params):
    """Predicted ``dI1/dt``; exactly zero when ``b = p + 1``."""
    coef = 2.0 * (params.p + 1 - params.b)
    if coef == 0.0:
        return 0.0
    ux = derivative(u, 1)
    flux = dealiased_product([u] * params.p + [ux])
    m = momentum(u, params)
    return float(coef * u.grid.dx * np.dot(flux.values, m.values))


def record(state, params, s_monitor, dt_used=0.0):
    u = state.u
    if not u.is_finite():
        nan = math.nan
        return DiagnosticsRecord(state.t, nan, nan, nan, nan, nan, nan, math.inf, math.inf, nan, dt_used)
    k = params.k
    return DiagnosticsRecord(
        t=state.t,
        i1=conserved_i1(u, params),
        i1_sobolev_sum=i1_sobolev_sum(u, params),
        hs_norm=sobolev_norm(u, s_monitor),
        hk_norm=sobolev_norm(u, k),
        h2k_norm=sobolev_norm(u, 2 * k),
        m_l2=lp_norm(momentum(u, params), 2),
        u_inf=lp_norm(u, np.inf),
        ux_inf=slope_sup(u),
        di1_residual=di1_residual(u, params),
        dt_used=float(dt_used),
    )


# ---------------------------------------------------------------------------
# growth bounds


@dataclass
class BoundReport:
    passed: bool
    margins: list
    first_failure: int | None
    constants: dict


def _g_prime_sup(params, radius):
    """``sup_{|z| <= radius} |g'(z)|`` for the polynomial ``g``."""
    if not params.g_coeffs or radius == 0:
        gp = P.polyder(np.array(params.g_coeffs or [0.0]))
        return abs(float(P.polyval(0.0, gp)))
    gp = P.polyder(np.array(params.g_coeffs))
    candidates = [-radius, radius]
    if len(gp) > 1:
        for r in P.polyroots(P.polyder(gp)):
            if abs(r.imag) < 1e-12 and abs(r.real) <= radius:
                candidates.append(r.real)
    return max(abs(float(P.polyval(z, gp))) for z in candidates)


def _require_balanced(history, params):
    if not history:
        raise ValueError("empty diagnostics history")
    if not params.conserves_i1:
        raise HypothesisError(f"growth bounds assume b = p + 1; got p={params.p}, b={params.b}")


def _growth_constants(history, params, sobolev_const):
    c_m = max(max(r.u_inf, r.ux_inf) for r in history)
    g_m = _g_prime_sup(params, c_m)
    big_m = max(r.hk_norm for r in history)
    p = params.p
    k1 = (p + 2) * c_m**p
    # the g-term enters as G_M * M * ||m||, hence the factor M
    k2 = 2 * (p + 2) * c_m ** (p + 1) + 2 * sobolev_const * g_m * big_m
    k = k1 + 1.0
    ell = k2**2 / 4.0
    return {"C_M": c_m, "G_M": g_m, "M": big_m, "K1": k1, "K2": k2, "K": k, "L": ell, "C0": k / 2.0}


def _report(margins, constants):
    bad = [i for i, m in enumerate(margins) if not m >= 0]
    return BoundReport(
        passed=not bad,
        margins=margins,
        first_failure=bad[0] if bad else None,
        constants=constants,
    )


def m_growth_check(history, params, m0_l2=None, sobolev_const=1.0):
    """Check ``||m(t)||^2 <= (||m0||^2 + L/K) e^{K t} - L/K`` on every record."""
    _require_balanced(history, params)
    const = _growth_constants(history, params, sobolev_const)
    t0 = history[0].t
    m0 = history[0].m_l2 if m0_l2 is None else m0_l2
    big_k, ell = const["K"], const["L"]
    margins = []
    for r in history:
        # (m0^2 + L/K) e^{Kt} - L/K, arranged so that t = 0 gives m0^2 exactly
        grow = math.expm1(big_k * (r.t - t0))
        envelope = m0**2 + (m0**2 + ell / big_k) * grow
        margins.append(envelope - r.m_l2**2)
    const["m0_l2"] = m0
    return _report(margins, const)


def _young_constant(alpha, eps):
    """``sup_N (N^alpha - eps N)`` for ``0 < alpha < 1``."""
    return (1 - alpha) * (alpha / eps) ** (alpha / (1 - alpha))


def h2k_bound_check(history, params, m0_l2=None, slack=2.0, sobolev_const=1.0):
    """Check ``||u||_{H^{2k}} <= slack * (M + e^{C0 t}||m0|| + C1 + C2 sum C(eps_j))``."""
    _require_balanced(history, params)
    const = _growth_constants(history, params, sobolev_const)
    k, big_m = params.k, const["M"]
    j1 = [j for j in range(k) if 2 * j <= k]
    j2 = [j for j in range(k) if 2 * j > k]
    alphas = {j: (2 * j - k) / k for j in j2}
    c1 = sum(comb(k, j) for j in j1) * big_m
    c2 = sum(comb(k, j) * sobolev_const * big_m ** (1 - alphas[j]) for j in j2)
    young = 0.0
    if c2 > 0:
        eps = 1.0 / (4.0 * c2 * len(j2))  # keeps C2 * sum(eps_j) = 1/4 < 1/2
        young = sum(_young_constant(alphas[j], eps) for j in j2)
    t0 = history[0].t
    m0 = history[0].m_l2 if m0_l2 is None else m0_l2
    margins = []
    for r in history:
        bound = slack * (big_m + math.exp(const["C0"] * (r.t - t0)) * m0 + c1 + c2 * young)
        margins.append(bound - r.h2k_norm)
    const.update(C1=c1, C2=c2, young_sum=young, slack=slack, m0_l2=m0)
    return _report(margins, const)


# ---------------------------------------------------------------------------
# CSV


def write_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(f"{getattr(r, name):.17e}" for name in CSV_COLUMNS)


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [dict(zip(header, map(float, row))) for row in reader]
    names = [f.name for f in fields(DiagnosticsRecord)]
    return [DiagnosticsRecord(**{n: row[n] for n in names}) for row in rows]
