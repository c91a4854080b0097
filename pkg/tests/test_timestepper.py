import math

import numpy as np
import pytest
from dataclasses import replace

from gchlab.errors import StepLimitReached
from gchlab.model import PRESETS, ModelParams
from gchlab.spectral import Field, GridSpec
from gchlab.timestepper import (
    SolverState,
    StepControl,
    advance,
    cfl_dt,
    detect_breaking,
    rk4_step,
    slope_sup,
)

from conftest import bandlimited

CH = PRESETS["camassa_holm"]


def gaussian(grid, amp=1.0, width=0.8):
    return Field(grid, amp * np.exp(-(((grid.x - grid.length / 2) / width) ** 2)))


class TestControl:
    @pytest.mark.parametrize(
        "kw", [dict(t_end=-1), dict(t_end=math.inf), dict(dt=0.0), dict(cfl_safety=0.0), dict(cfl_safety=1.5),
               dict(breaking_threshold=0), dict(max_steps=0)]
    )
    def test_rejects(self, kw):
        args = dict(t_end=1.0)
        args.update(kw)
        with pytest.raises(ValueError):
            StepControl(**args)


class TestCfl:
    def test_speed_floor(self):
        g = GridSpec(256)
        assert cfl_dt(Field.zeros(g), CH, StepControl(t_end=10)) == pytest.approx(0.3 * g.dx)

    def test_p2_scaling(self):
        g = GridSpec(256)
        u = Field(g, 2 * np.cos(g.x))
        assert cfl_dt(u, PRESETS["novikov"], StepControl(t_end=10)) == pytest.approx(0.3 * g.dx / 4)

    def test_fixed_dt_and_remaining_time(self):
        g = GridSpec(64)
        ctl = StepControl(t_end=1.0, dt=0.3)
        u = Field.zeros(g)
        assert cfl_dt(u, CH, ctl, t=0.0) == 0.3
        assert cfl_dt(u, CH, ctl, t=0.9) == pytest.approx(0.1)
        # a remainder within round-off of a full step keeps dt itself
        assert cfl_dt(u, CH, ctl, t=1.0 - 0.3 * (1 + 1e-12)) == 0.3

    def test_auto_never_exceeds_remaining(self):
        g = GridSpec(64)
        ctl = StepControl(t_end=1e-4)
        assert cfl_dt(Field.zeros(g), CH, ctl) <= 1e-4


class TestRk4:
    def test_static_state(self):
        g = GridSpec(32)
        st = SolverState.initial(Field(g, np.full(32, 0.3)))
        new = rk4_step(st, 0.1, CH)
        assert new.t == pytest.approx(0.1) and new.step == 1
        assert np.array_equal(new.u.values, st.u.values)

    def test_reversibility(self):
        g = GridSpec(64)
        st = SolverState.initial(bandlimited(g, 4))
        fwd = rk4_step(st, 1e-4, CH)
        back = rk4_step(fwd, -1e-4, CH)
        assert np.max(np.abs(back.u.values - st.u.values)) <= 1e-12

    def test_deterministic(self):
        g = GridSpec(128)
        st = SolverState.initial(bandlimited(g, 5))
        a = rk4_step(st, 1e-3, PRESETS["novikov"])
        b = rk4_step(st, 1e-3, PRESETS["novikov"])
        assert np.array_equal(a.u.values, b.u.values)

    def test_temporal_order(self):
        # Richardson: errors against a dt/16 reference should shrink by 2^4 per halving
        g = GridSpec(64)
        u0 = gaussian(g)
        finals = {}
        for div in (1, 2, 4, 16):
            dt = 0.05 / div
            finals[div] = advance(SolverState.initial(u0), CH, StepControl(t_end=0.5, dt=dt)).u.values
        e = [np.max(np.abs(finals[d] - finals[16])) for d in (1, 2, 4)]
        orders = [math.log2(e[0] / e[1]), math.log2(e[1] / e[2])]
        assert all(3.7 <= o <= 4.3 for o in orders), orders

    def test_non_finite_marks_breaking(self):
        g = GridSpec(16)
        st = SolverState.initial(Field(g, 1e200 * np.cos(g.x)))
        new = rk4_step(st, 0.1, PRESETS["novikov"])
        assert new.breaking and new.breaking_time == pytest.approx(0.1)
        with pytest.raises(ValueError):
            rk4_step(new, 0.1, CH)

    def test_rejects_zero_dt(self):
        st = SolverState.initial(Field.zeros(GridSpec(16)))
        with pytest.raises(ValueError):
            rk4_step(st, 0.0, CH)


class TestAdvance:
    def test_zero_horizon(self):
        st = SolverState.initial(Field.zeros(GridSpec(16)))
        out = advance(st, CH, StepControl(t_end=0.0))
        assert out is st and out.step == 0

    def test_constant_fixed_point(self):
        g = GridSpec(32)
        u0 = Field(g, np.full(32, 0.8))
        out = advance(SolverState.initial(u0), CH, StepControl(t_end=1.0))
        assert out.t == 1.0
        assert np.max(np.abs(out.u.values - u0.values)) <= 1e-12

    def test_clipping_lands_on_t_end(self):
        g = GridSpec(32)
        out = advance(SolverState.initial(bandlimited(g, 1)), CH, StepControl(t_end=0.37, dt=0.05))
        assert out.t == 0.37
        assert out.step == 8

    def test_observer_cadence(self):
        g = GridSpec(32)
        seen = []
        ctl = StepControl(t_end=1.0, dt=0.1)
        advance(SolverState.initial(bandlimited(g, 1)), CH, ctl, lambda s, dt: seen.append((s.step, dt)), 3)
        assert [s for s, _ in seen] == [3, 6, 9, 10]
        assert all(dt == 0.1 for _, dt in seen)

    def test_observer_does_not_change_trajectory(self):
        g = GridSpec(64)
        u0 = bandlimited(g, 2)
        ctl = StepControl(t_end=0.2, dt=0.01)
        a = advance(SolverState.initial(u0), CH, ctl)
        b = advance(SolverState.initial(u0), CH, ctl, observer=lambda s, dt: None, cadence=1)
        assert np.array_equal(a.u.values, b.u.values) and a.t == b.t

    def test_step_limit_is_not_breaking(self):
        g = GridSpec(32)
        ctl = StepControl(t_end=1.0, dt=0.01, max_steps=5)
        with pytest.raises(StepLimitReached) as info:
            advance(SolverState.initial(bandlimited(g, 1)), CH, ctl)
        assert info.value.state.step == 5
        assert not info.value.state.breaking

    def test_breaking_run_at_two_resolutions(self):
        # steep data for b != p + 1 (Degasperis-Procesi): the slope exceeds the
        # threshold at a time that is stable under grid refinement
        times = []
        for n in (512, 1024):
            g = GridSpec(n, 10.0)
            ctl = StepControl(t_end=1.0, breaking_threshold=20.0)
            out = advance(SolverState.initial(gaussian(g, 2.0, 0.3)), PRESETS["degasperis_procesi"], ctl)
            assert out.breaking and 0 < out.breaking_time < 1.0
            assert out.t == out.breaking_time
            assert slope_sup(out.u) >= 20.0
            times.append(out.breaking_time)
        assert abs(times[1] - times[0]) / times[1] <= 0.05


class TestDetectBreaking:
    def test_cases(self):
        g = GridSpec(64)
        ctl = StepControl(t_end=1.0, breaking_threshold=10.0)
        assert not detect_breaking(SolverState.initial(Field(g, 0.1 * np.sin(g.x))), ctl)
        v = np.zeros(64)
        v[5] = np.nan
        assert detect_breaking(SolverState.initial(Field(g, v)), ctl)
        steep = Field(g, 20.0 * np.sin(g.x))  # |u_x|_inf = 2 * threshold
        assert detect_breaking(SolverState.initial(steep), ctl)
        assert not detect_breaking(SolverState.initial(steep), replace(ctl, breaking_threshold=25.0))
