"""Drivers: single runs, restarts, convergence studies and the lemma suite."""

from dataclasses import dataclass, field, replace
import math
import os

import numpy as np

from .config import default_monitor_s
from .diagnostics import record, write_csv
from .errors import BlowUpError, ConfigError
from .initial import make_initial
from .lemmas import SamplerConfig, default_suite, run_entry
from .snapshot import read_snapshot, write_snapshot
from .spectral import Field, GridSpec, _irfft, _pad, _rfft, _truncate
from .timestepper import SolverState, StepControl, advance, cfl_dt

__all__ = [
    "simulate",
    "run_simulation",
    "resume_simulation",
    "OrderReport",
    "run_convergence",
    "run_lemma_suite",
    "full_default_suite",
]


def _check_writable(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise PermissionError(f"output directory is not writable: {parent}")


def _snapshot_path(template, step):
    return template.format(step=step) if "{step}" in template else template


def simulate(state, params, control, monitor_s, outputs=None):
    """Advance ``state`` to ``control.t_end`` recording diagnostics.

    Returns ``(final_state, history)``. ``history[0]`` describes the starting
    state. With ``outputs`` given, the CSV is written at the end and snapshots
    at the record cadence (non-finite states are never written).
    """
    cadence = outputs.cadence if outputs is not None else 100
    csv_path = outputs.csv if outputs is not None else None
    snaps = outputs.snapshots if outputs is not None else None
    _check_writable(csv_path)
    if snaps is not None:
        _check_writable(_snapshot_path(snaps, 0))

    history = [record(state, params, monitor_s, 0.0)]

    def observe(st, dt):
        history.append(record(st, params, monitor_s, dt))
        if snaps is not None and st.u.is_finite():
            write_snapshot(st, params, _snapshot_path(snaps, st.step))

    try:
        final = advance(state, params, control, observer=observe, cadence=cadence)
    finally:
        if csv_path is not None:
            write_csv(history, csv_path)
    return final, history


def run_simulation(cfg, write_outputs=True):
    u0 = make_initial(cfg.initial, cfg.grid, cfg.seed)
    outputs = cfg.outputs if write_outputs else replace(cfg.outputs, csv=None, snapshots=None)
    return simulate(SolverState.initial(u0), cfg.model, cfg.control, cfg.monitor_s, outputs)


def resume_simulation(snapshot_path, t_end, cfg=None, dt=None, outputs=None):
    """Continue a run from a snapshot.

    ``g`` and the step policy come from ``cfg`` when given; its ``(k, p, b)``
    must match the snapshot. ``dt`` overrides the configured step.
    """
    g = cfg.model.g_coeffs if cfg is not None else ()
    state, params = read_snapshot(snapshot_path, g_coeffs=g)
    if cfg is not None:
        m = cfg.model
        if (m.k, m.p, m.b) != (params.k, params.p, params.b):
            raise ConfigError(
                "model",
                f"snapshot has (k, p, b) = {(params.k, params.p, params.b)}, config has {(m.k, m.p, m.b)}",
            )
        base = cfg.control
        monitor_s = cfg.monitor_s
        outputs = cfg.outputs if outputs is None else outputs
    else:
        base = StepControl(t_end=max(t_end, state.t))
        monitor_s = default_monitor_s(params.k)
    if t_end < state.t:
        raise ConfigError("t_end", f"t_end={t_end} precedes the snapshot time {state.t}")
    control = replace(base, t_end=float(t_end), dt=dt if dt is not None else base.dt)
    return simulate(state, params, control, monitor_s, outputs)


# ---------------------------------------------------------------------------
# convergence


@dataclass
class OrderReport:
    dts: list
    temporal_errors: list
    temporal_orders: list
    observed_order: float | None
    degenerate: bool
    ns: list = field(default_factory=list)
    spatial_errors: list = field(default_factory=list)
    spatial_ratios: list = field(default_factory=list)
    spatial_floored: list = field(default_factory=list)
    spatial_floor: float | None = None
    spatial_dt: float | None = None

    def spatial_ok(self, min_ratio=100.0):
        return all(f or r >= min_ratio for r, f in zip(self.spatial_ratios, self.spatial_floored))


def _fixed_run(u0, params, t_end, dt, threshold=1e6):
    control = StepControl(t_end=t_end, dt=dt, breaking_threshold=threshold)
    final = advance(SolverState.initial(u0), params, control)
    if final.breaking:
        raise BlowUpError(
            f"convergence study aborted: breaking at t={final.breaking_time} with dt={dt}; "
            "shorten t_end or smooth the data"
        )
    return final.u.values


def _resample(u, grid):
    """Spectral projection/interpolation of ``u`` onto ``grid`` (same length)."""
    c = _rfft(u.values)
    n = grid.n_points
    c = _pad(c, n) if n >= u.grid.n_points else _truncate(c, n)
    return Field(grid, _irfft(c, n))


def run_convergence(cfg, levels=3, spatial=True):
    """Richardson-style temporal study plus a spectral refinement study.

    Temporal: ``levels + 1`` runs on ``cfg.grid`` with ``dt0 / 2^i``
    (``dt0`` = configured dt, else the initial CFL step), compared with a
    reference at ``dt0 / 2^(levels + 1)``.
    Spatial: ``N0 * 2^i`` for ``i < levels`` compared with ``N0 * 2^levels``
    at one small fixed dt; a doubling whose finer error is already below
    ``max(dt^4, 1e-12) * max(1, |u|_inf)`` counts as floored.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    params, t_end = cfg.model, cfg.control.t_end
    u0 = make_initial(cfg.initial, cfg.grid, cfg.seed)
    dt0 = cfg.control.dt if cfg.control.dt is not None else cfl_dt(u0, params, cfg.control)
    dts = [dt0 / 2**i for i in range(levels + 1)]
    thr = cfg.control.breaking_threshold
    ref = _fixed_run(u0, params, t_end, dt0 / 2 ** (levels + 1), thr)
    errors = [float(np.max(np.abs(_fixed_run(u0, params, t_end, dt, thr) - ref))) for dt in dts]
    scale = max(1.0, float(np.max(np.abs(ref))))
    degenerate = max(errors) <= 1e-13 * scale
    if degenerate:
        orders, observed = [], None
    else:
        orders = [math.log2(a / b) if b > 0 else math.inf for a, b in zip(errors, errors[1:])]
        observed = float(np.polyfit(np.log(dts), np.log(np.maximum(errors, 1e-300)), 1)[0])
    rep = OrderReport(dts, errors, orders, observed, degenerate)
    if not spatial:
        return rep

    n0 = cfg.grid.n_points
    ns = [n0 * 2**i for i in range(levels)]
    ref_grid = GridSpec(n0 * 2**levels, cfg.grid.length)
    if cfg.initial.kind == "random_bandlimited":
        source = make_initial(cfg.initial, cfg.grid, cfg.seed)
    else:
        source = make_initial(cfg.initial, ref_grid, cfg.seed, check_resolution=False)
    u_ref0 = _resample(source, ref_grid)
    control = replace(cfg.control, dt=None)
    dt = min(dt0, cfl_dt(u_ref0, params, control))
    u_ref = _fixed_run(u_ref0, params, t_end, dt, thr)
    floor = max(dt**4, 1e-12) * max(1.0, float(np.max(np.abs(u_ref))))
    errs = []
    for n in ns:
        grid = GridSpec(n, cfg.grid.length)
        u_n = _fixed_run(_resample(u_ref0, grid), params, t_end, dt, thr)
        stride = ref_grid.n_points // n
        errs.append(float(np.max(np.abs(u_n - u_ref[::stride]))))
    ratios = [a / b if b > 0 else math.inf for a, b in zip(errs, errs[1:])]
    rep.ns, rep.spatial_errors, rep.spatial_ratios = ns, errs, ratios
    rep.spatial_floored = [b <= floor for b in errs[1:]]
    rep.spatial_floor, rep.spatial_dt = floor, dt
    return rep


# ---------------------------------------------------------------------------
# lemma suite


def full_default_suite(ks=(1, 2, 3), ps=(1, 2, 3)):
    """Union of the default tuples over ``ks`` x ``ps`` (duplicates dropped)."""
    valid, excluded, seen = [], [], set()
    for k in ks:
        for p in ps:
            v, ex = default_suite(k, p)
            for e in v:
                if e not in seen:
                    seen.add(e)
                    valid.append(e)
            for e, why in ex:
                if e not in seen:
                    seen.add(e)
                    excluded.append((e, why))
    return valid, excluded


def run_lemma_suite(cfg=None, entries=None, sampler=None, grid=None):
    """Run lemma checks; an entry outside its lemma's range yields a rejected report.

    Without ``entries`` the default tuples for ``cfg.model`` at
    ``s = cfg.monitor_s`` are used. Checks run on ``grid`` (default 256
    points on ``[0, 2 pi)``) and on its doubling.
    """
    if entries is None:
        if cfg is None:
            raise ValueError("need a config or an explicit entry list")
        entries = default_suite(cfg.model.k, cfg.model.p, cfg.monitor_s)[0]
    if sampler is None:
        sampler = SamplerConfig(seed=cfg.seed if cfg is not None else 0)
    grid = grid or GridSpec(256)
    return [run_entry(e, sampler, grid) for e in entries]
