"""Method-of-lines RK4 integration of the nonlocal form with breaking detection."""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import BlowUpError, StepLimitReached
from .model import rhs_values
from .spectral import Field, _derivative_symbol, _irfft, _rfft

__all__ = ["StepControl", "SolverState", "cfl_dt", "rk4_step", "advance", "detect_breaking", "slope_sup"]

# a step whose length differs from the remaining time by less than this
# (relative) lands exactly on t_end instead of leaving a sliver
_SNAP = 1e-9


@dataclass(frozen=True)
class StepControl:
    """Time-step policy. ``dt=None`` selects the CFL rule."""

    t_end: float
    dt: float | None = None
    cfl_safety: float = 0.3
    breaking_threshold: float = 1e6
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError(f"t_end must be finite and >= 0, got {self.t_end!r}")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety!r}")
        if not self.breaking_threshold > 0:
            raise ValueError("breaking_threshold must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class SolverState:
    t: float
    u: Field
    step: int = 0
    breaking: bool = False
    breaking_time: float | None = None

    @classmethod
    def initial(cls, u, t=0.0):
        return cls(t=float(t), u=u)


def slope_sup(u):
    """``max |u_x|`` on the grid (spectral derivative); ``inf`` for non-finite ``u``."""
    if not u.is_finite():
        return math.inf
    n = u.grid.n_points
    ux = _irfft(_rfft(u.values) * _derivative_symbol(u.grid, 1), n)
    return float(np.max(np.abs(ux)))


def detect_breaking(state, control):
    return slope_sup(state.u) >= control.breaking_threshold


def cfl_dt(u, params, control, t=0.0):
    """Step size for the next step starting at time ``t``.

    Fixed ``control.dt`` is used as given; otherwise
    ``cfl_safety * dx / max(1, max|u|^p)``. Never exceeds the remaining time.
    """
    remaining = control.t_end - t
    if control.dt is not None:
        dt = control.dt
    else:
        speed = max(1.0, float(np.max(np.abs(u.values))) ** params.p)
        dt = control.cfl_safety * u.grid.dx / speed
    if remaining <= dt * (1 + _SNAP):
        # within roundoff of a full step: keep dt so fixed-step sequences stay identical
        return dt if remaining > dt * (1 - _SNAP) else remaining
    return dt


def _rk4(values, dt, grid, params):
    k1 = rhs_values(values, grid, params)
    k2 = rhs_values(values + 0.5 * dt * k1, grid, params)
    k3 = rhs_values(values + 0.5 * dt * k2, grid, params)
    k4 = rhs_values(values + dt * k3, grid, params)
    return values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state, dt, params, t_next=None):
    """One classical RK4 step of length ``dt`` (negative ``dt`` steps backward).

    ``t_next`` overrides the reported new time (used to land exactly on t_end).
    A non-finite result marks the state as breaking.
    """
    if state.breaking:
        raise ValueError("cannot step a state that has already broken")
    if not math.isfinite(dt) or dt == 0:
        raise ValueError(f"dt must be finite and nonzero, got {dt!r}")
    t_new = state.t + dt if t_next is None else t_next
    grid = state.u.grid
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            new = _rk4(state.u.values, dt, grid, params)
        ok = bool(np.all(np.isfinite(new)))
    except BlowUpError:
        new = np.full(grid.n_points, np.nan)
        ok = False
    return SolverState(
        t=t_new,
        u=Field(grid, new),
        step=state.step + 1,
        breaking=not ok,
        breaking_time=None if ok else t_new,
    )


def advance(state, params, control, observer=None, cadence=1):
    """Step from ``state.t`` to ``control.t_end``.

    Stops early when the breaking detector fires. ``observer(state, dt)`` is
    called after every ``cadence``-th step and on the final state; it must not
    mutate the state. Raises :class:`StepLimitReached` when ``max_steps`` steps
    were taken without reaching ``t_end``.
    """
    if state.breaking or state.t >= control.t_end:
        return state
    taken = 0
    while True:
        dt = cfl_dt(state.u, params, control, state.t)
        last = state.t + dt >= control.t_end or control.t_end - state.t <= dt * (1 + _SNAP)
        state = rk4_step(state, dt, params, t_next=control.t_end if last else None)
        taken += 1
        if not state.breaking and detect_breaking(state, control):
            state = replace(state, breaking=True, breaking_time=state.t)
        done = state.breaking or last
        if observer is not None and (done or taken % cadence == 0):
            observer(state, dt)
        if done:
            return state
        if taken >= control.max_steps:
            raise StepLimitReached(state)
