"""
Randomized corroboration of the product, commutator and composition
inequalities used by the well-posedness argument.

Each check draws seeded band-limited samples, evaluates the ratio of the
left-hand side to the right-hand side of the inequality, and reports the
worst ratio found. The same draw is repeated on a grid of twice the size
(the low modes share their random numbers with the coarse draw), and the
check is called *stable* when the worst ratio moves by at most 5%.
A finite, stable ratio corroborates a resolution-independent constant; it
does not prove anything.

All products are formed on a zero-padded grid and their norms are taken
there, so no truncation enters the numerators.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import HypothesisError
from .spectral import (
    Field,
    GridSpec,
    _derivative_symbol,
    _irfft,
    _lambda_symbol,
    _pad,
    _rfft,
    _sobolev_sq,
    fine_size,
)

__all__ = [
    "SamplerConfig",
    "RatioReport",
    "SuiteEntry",
    "STABILITY_TOL",
    "random_bandlimited",
    "sample_batch",
    "leibniz_ratio",
    "commutator_ratio",
    "kato_ponce_ratio",
    "algebra_ratio",
    "composition_ratio",
    "check_fractional_leibniz",
    "check_commutator_lambda",
    "check_kato_ponce",
    "check_algebra",
    "check_composition",
    "default_suite",
    "run_entry",
    "format_report",
]

STABILITY_TOL = 0.05
_SUP_OVERSAMPLE = 4
_TINY = 1e-300


@dataclass(frozen=True)
class SamplerConfig:
    """``spectral_decay=None`` picks ``(highest Sobolev index in the ratio) + 1.5``."""

    seed: int = 0
    band_fraction: float = 0.25
    spectral_decay: float | None = None
    n_samples: int = 500

    def __post_init__(self):
        if not 0 < self.band_fraction <= 1 / 3:
            raise ValueError(f"band_fraction must lie in (0, 1/3], got {self.band_fraction}")
        if self.spectral_decay is not None and not self.spectral_decay >= 0:
            raise ValueError(f"spectral_decay must be >= 0, got {self.spectral_decay}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


@dataclass
class RatioReport:
    lemma_id: str
    parameters: dict
    n_samples: int
    max_ratio: float
    ratio_at_double_resolution: float
    stable: bool
    rejected: str | None = None
    detail: dict = field(default_factory=dict)

    @property
    def relative_change(self):
        a, b = self.max_ratio, self.ratio_at_double_resolution
        if not (math.isfinite(a) and math.isfinite(b)):
            return math.inf
        if a == b:
            return 0.0
        return abs(b - a) / max(abs(a), _TINY)

    @property
    def passed(self):
        return self.rejected is None and self.stable


# ---------------------------------------------------------------------------
# sampling


def _decay(cfg, default):
    return default if cfg.spectral_decay is None else cfg.spectral_decay


def sample_batch(cfg, grid, n_fields=1, decay=0.0, stream=0):
    """Real-FFT coefficients, shape ``(n_fields, n_samples, N//2 + 1)``.

    Each field has unit L2 norm. Random numbers are drawn mode by mode, so a
    draw on a grid of size 2N starts with exactly the numbers used at N.
    """
    n = grid.n_points
    top = int(math.floor(cfg.band_fraction * n / 2))
    rng = np.random.default_rng([cfg.seed, stream])
    z = rng.standard_normal((top + 1, cfg.n_samples, n_fields, 2))
    c = (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)
    c[0] = z[0, ..., 0]  # the mean is real
    c = c * (1.0 + grid.rwavenumbers[: top + 1, None, None] ** 2) ** (-0.5 * decay)
    out = np.zeros((n_fields, cfg.n_samples, n // 2 + 1), dtype=np.complex128)
    out[..., : top + 1] = np.transpose(c, (2, 1, 0))
    out /= np.sqrt(_sobolev_sq(out, grid, 0.0))[..., None]
    return out


def random_bandlimited(cfg, grid, amplitude=1.0):
    """One seeded band-limited field with L2 norm ``amplitude``."""
    single = SamplerConfig(cfg.seed, cfg.band_fraction, cfg.spectral_decay, 1)
    coeffs = sample_batch(single, grid, 1, _decay(cfg, 0.0))[0, 0]
    return Field(grid, amplitude * _irfft(coeffs, grid.n_points))


def _amplitudes(cfg, lo=0.05, hi=2.0):
    rng = np.random.default_rng([cfg.seed, 7919])
    return rng.uniform(lo, hi, cfg.n_samples)


# ---------------------------------------------------------------------------
# batched norm helpers (coefficients on ``grid``; products on a padded grid)


def _fine(grid, degree):
    return GridSpec(fine_size(grid.n_points, degree), grid.length)


def _values_on(coeffs, m):
    return _irfft(_pad(coeffs, m), m)


def _hs(coeffs, grid, s):
    return np.sqrt(_sobolev_sq(coeffs, grid, s))


def _sup(coeffs, grid):
    m = _SUP_OVERSAMPLE * grid.n_points
    return np.max(np.abs(_values_on(coeffs, m)), axis=-1)


def _product_hat(fh, gh, grid):
    fine = _fine(grid, 2)
    m = fine.n_points
    return fine, _rfft(_values_on(fh, m) * _values_on(gh, m))


def _commutator_hat(order, fh, gh, grid):
    """Coefficients of ``Lambda^order (fg) - f Lambda^order g`` on the padded grid."""
    fine, fg = _product_hat(fh, gh, grid)
    _, f_lg = _product_hat(fh, gh * _lambda_symbol(grid, order), grid)
    return fine, fg * _lambda_symbol(fine, order) - f_lg


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    keep = den > _TINY
    out = np.full(np.broadcast(num, den).shape, np.nan)
    np.divide(num, den, out=out, where=keep)
    return out


def _max_ratio(ratios):
    r = ratios[~np.isnan(ratios)]
    return float(np.max(r)) if r.size else 0.0


# ---------------------------------------------------------------------------
# hypotheses


def _require(cond, message):
    if not cond:
        raise HypothesisError(message)


def _leibniz_hyp(alpha, beta):
    _require(-beta < alpha <= beta, f"need -beta < alpha <= beta, got alpha={alpha}, beta={beta}")
    _require(beta != 0.5, "beta = 1/2 is excluded")


def _commutator_hyp(n, s_tilde, sigma):
    _require(n > 0, f"need n > 0, got {n}")
    _require(s_tilde >= 0, f"need s_tilde >= 0, got {s_tilde}")
    _require(1.5 < s_tilde + n <= sigma, f"need 3/2 < s_tilde + n <= sigma, got {s_tilde + n} vs sigma={sigma}")


def _positive_r(r):
    _require(r > 0, f"need r > 0, got {r}")


def _composition_hyp(g_coeffs, r):
    _require(r > 0.5, f"need r > 1/2, got {r}")
    _require(len(g_coeffs) > 0 and g_coeffs[0] == 0, "F must be a polynomial with F(0) = 0")


# ---------------------------------------------------------------------------
# ratio kernels (batched over leading axes)


def _leibniz(fh, gh, grid, alpha, beta):
    fine, ph = _product_hat(fh, gh, grid)
    s_num = alpha if beta > 0.5 else alpha + beta - 0.5
    return _safe_ratio(_hs(ph, fine, s_num), _hs(fh, grid, beta) * _hs(gh, grid, alpha))


def _commutator(fh, gh, grid, n, s_tilde, sigma):
    fine, ch = _commutator_hat(n, fh, gh, grid)
    return _safe_ratio(_hs(ch, fine, s_tilde), _hs(fh, grid, sigma) * _hs(gh, grid, s_tilde + n - 1))


def _kato_ponce(fh, gh, grid, r):
    fine, ch = _commutator_hat(r, fh, gh, grid)
    lhs = _hs(ch, fine, 0.0)
    dfx = _sup(fh * _derivative_symbol(grid, 1), grid)
    rhs = dfx * _hs(gh, grid, r - 1) + _hs(fh, grid, r) * _sup(gh, grid)
    return _safe_ratio(lhs, rhs)


def _algebra(fh, gh, grid, r):
    fine, ph = _product_hat(fh, gh, grid)
    rhs = _sup(fh, grid) * _hs(gh, grid, r) + _hs(fh, grid, r) * _sup(gh, grid)
    return _safe_ratio(_hs(ph, fine, r), rhs)


def _composition(uh, grid, g_coeffs, r):
    degree = max(len(g_coeffs) - 1, 1)
    fine = _fine(grid, degree)
    u = _values_on(uh, fine.n_points)
    fu = _rfft(P.polyval(u, np.asarray(g_coeffs, dtype=float)))
    return _safe_ratio(_hs(fu, fine, r), _hs(uh, grid, r))


def _pair(f, g):
    if f.grid != g.grid:
        raise ValueError("f and g must share a grid")
    return _rfft(f.values), _rfft(g.values)


def leibniz_ratio(f, g, alpha, beta):
    _leibniz_hyp(alpha, beta)
    return float(_leibniz(*_pair(f, g), f.grid, alpha, beta))


def commutator_ratio(f, g, n, s_tilde, sigma):
    _commutator_hyp(n, s_tilde, sigma)
    return float(_commutator(*_pair(f, g), f.grid, n, s_tilde, sigma))


def kato_ponce_ratio(f, g, r):
    _positive_r(r)
    return float(_kato_ponce(*_pair(f, g), f.grid, r))


def algebra_ratio(f, g, r):
    _positive_r(r)
    return float(_algebra(*_pair(f, g), f.grid, r))


def composition_ratio(u, g_coeffs, r):
    """``||F(u)||_{H^r} / ||u||_{H^r}`` with ``F(z) = sum_i g_coeffs[i] z^i``."""
    _composition_hyp(g_coeffs, r)
    return float(_composition(_rfft(u.values), u.grid, g_coeffs, r))


# ---------------------------------------------------------------------------
# checks


def _two_level(kernel, cfg, grid, decay, n_fields, **kw):
    levels = []
    for gr in (grid, grid.refined(2)):
        fields_ = sample_batch(cfg, gr, n_fields, decay)
        levels.append(_max_ratio(kernel(*fields_, gr, **kw)))
    return levels


def _report(lemma_id, params, cfg, levels, detail=None):
    r1, r2 = levels
    rep = RatioReport(lemma_id, params, cfg.n_samples, r1, r2, False, detail=detail or {})
    rep.stable = math.isfinite(r1) and math.isfinite(r2) and rep.relative_change <= STABILITY_TOL
    return rep


def check_fractional_leibniz(alpha, beta, cfg, grid):
    _leibniz_hyp(alpha, beta)
    decay = _decay(cfg, max(abs(alpha), abs(beta)) + 1.5)
    levels = _two_level(_leibniz, cfg, grid, decay, 2, alpha=alpha, beta=beta)
    return _report("leibniz", {"alpha": alpha, "beta": beta}, cfg, levels)


def check_commutator_lambda(n, s_tilde, sigma, cfg, grid):
    _commutator_hyp(n, s_tilde, sigma)
    decay = _decay(cfg, sigma + 1.5)
    levels = _two_level(_commutator, cfg, grid, decay, 2, n=n, s_tilde=s_tilde, sigma=sigma)
    return _report("commutator", {"n": n, "s_tilde": s_tilde, "sigma": sigma}, cfg, levels)


def check_kato_ponce(r, cfg, grid):
    _positive_r(r)
    decay = _decay(cfg, r + 1.5)
    levels = _two_level(_kato_ponce, cfg, grid, decay, 2, r=r)
    return _report("kato_ponce", {"r": r}, cfg, levels)


def check_algebra(r, cfg, grid):
    _positive_r(r)
    decay = _decay(cfg, r + 1.5)
    levels = _two_level(_algebra, cfg, grid, decay, 2, r=r)
    return _report("algebra", {"r": r}, cfg, levels)


def check_composition(g_coeffs, r, cfg, grid, n_bins=10):
    """Ratio ``||F(u)||_{H^r}/||u||_{H^r}`` binned by ``||u||_inf``.

    The bin maxima and their running maximum (a monotone envelope) are
    returned in ``detail``; ``max_ratio`` is the envelope's top value.
    """
    g_coeffs = tuple(float(c) for c in g_coeffs)
    _composition_hyp(g_coeffs, r)
    decay = _decay(cfg, r + 1.5)
    amp = _amplitudes(cfg)
    levels, sups, ratios = [], None, None
    for gr in (grid, grid.refined(2)):
        uh = sample_batch(cfg, gr, 1, decay)[0] * amp[:, None]
        rat = _composition(uh, gr, g_coeffs, r)
        levels.append(_max_ratio(rat))
        if sups is None:
            sups, ratios = _sup(uh, gr), rat
    edges = np.linspace(0.0, float(np.max(sups)), n_bins + 1)
    idx = np.clip(np.searchsorted(edges, sups, side="right") - 1, 0, n_bins - 1)
    bin_max = np.zeros(n_bins)
    for i in range(n_bins):
        sel = ratios[(idx == i) & ~np.isnan(ratios)]
        bin_max[i] = sel.max() if sel.size else 0.0
    envelope = np.maximum.accumulate(bin_max)
    detail = {
        "bin_edges": edges.tolist(),
        "bin_max": bin_max.tolist(),
        "envelope": envelope.tolist(),
        "bounded": bool(np.all(np.isfinite(bin_max))),
    }
    rep = _report("composition", {"g_coeffs": g_coeffs, "r": r}, cfg, levels, detail)
    rep.stable = rep.stable and detail["bounded"]
    return rep


# ---------------------------------------------------------------------------
# suite


@dataclass(frozen=True)
class SuiteEntry:
    lemma_id: str
    parameters: tuple  # positional arguments of the matching check


_DISPATCH = {
    "leibniz": check_fractional_leibniz,
    "commutator": check_commutator_lambda,
    "kato_ponce": check_kato_ponce,
    "algebra": check_algebra,
    "composition": check_composition,
}

_VALIDATORS = {
    "leibniz": _leibniz_hyp,
    "commutator": _commutator_hyp,
    "kato_ponce": _positive_r,
    "algebra": _positive_r,
    "composition": _composition_hyp,
}


def _r(x):
    return round(x, 12)


def _candidate_entries(k, p, s, delta=0.1):
    out = []
    leib = [(s - 2 * k, s - 2), (s - 2 * k - 1, s - 1), (s - 2 * k, s - 1), (s - 2, s - 1)]
    if 0.5 >= s - 2 * k:
        leib.append((s - 2 * k, 0.5 + delta))
    for m in range(1, k + 1):
        for j in range(2, 2 * m):
            leib.append((s - 2 * k, s - 2 * m + j - 1))
            leib.append((s - 2 * k, s - j - 1))
    out += [SuiteEntry("leibniz", (_r(a), _r(b))) for a, b in leib]
    out += [
        SuiteEntry("commutator", (_r(s - 1), 0.0, _r(s))),
        SuiteEntry("commutator", (1.0, _r(s - 1), _r(s))),
        SuiteEntry("kato_ponce", (_r(s),)),
    ]
    alg = [s - 1, s - 2 * k + 1, s - 2 * k, s]
    out += [SuiteEntry("algebra", (_r(r),)) for r in alg]
    power = tuple([0.0] * (p + 1) + [1.0])  # F(u) = u^(p+1)
    out += [SuiteEntry("composition", (power, _r(r))) for r in (s, s - 1)]
    return out


def default_suite(k, p, s=None):
    """Parameter tuples used by the existence/uniqueness argument for ``(k, p)``.

    Returns ``(valid, excluded)``; ``excluded`` pairs each tuple that falls
    outside its lemma's stated range with the reason. Duplicates are dropped.
    """
    if s is None:
        s = 2 * k - 0.5 + 0.1
    valid, excluded, seen = [], [], set()
    for e in _candidate_entries(k, p, s):
        if e in seen:
            continue
        seen.add(e)
        try:
            _VALIDATORS[e.lemma_id](*e.parameters)
        except HypothesisError as exc:
            excluded.append((e, str(exc)))
        else:
            valid.append(e)
    return valid, excluded


def run_entry(entry, cfg, grid):
    """Run one suite entry; a hypothesis violation becomes a rejected report."""
    try:
        check = _DISPATCH[entry.lemma_id]
    except KeyError:
        raise ValueError(f"unknown lemma {entry.lemma_id!r}") from None
    try:
        return check(*entry.parameters, cfg, grid)
    except HypothesisError as exc:
        names = {
            "leibniz": ("alpha", "beta"),
            "commutator": ("n", "s_tilde", "sigma"),
            "kato_ponce": ("r",),
            "algebra": ("r",),
            "composition": ("g_coeffs", "r"),
        }[entry.lemma_id]
        params = dict(zip(names, entry.parameters))
        return RatioReport(entry.lemma_id, params, cfg.n_samples, math.nan, math.nan, False, rejected=str(exc))


def format_report(rep):
    params = ",".join(f"{k}={v}" for k, v in rep.parameters.items())
    if rep.rejected:
        return f"{rep.lemma_id}\t{params}\t{rep.n_samples}\tREJECTED\t{rep.rejected}"
    flag = "stable" if rep.stable else "UNSTABLE"
    return (
        f"{rep.lemma_id}\t{params}\t{rep.n_samples}\t{rep.max_ratio:.6e}\t"
        f"{rep.ratio_at_double_resolution:.6e}\t{flag}"
    )
