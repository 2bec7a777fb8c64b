import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from spikemram.analog import alpha, ideal_charge, output_interval
from spikemram.codec import InputVector
from spikemram.config import MacroConfig
from spikemram.device import program_array
from spikemram.engine import (Event, EventEngine, EventKind, Phase, run_mvm, run_mvm_batch,
                              schedule_inputs, write_trace_csv)
from spikemram.errors import DimensionError, ValidationError

NS = 1e-9


def iv(values, t0=0.0):
    return InputVector.from_digital(np.asarray(values), t0=t0)


def test_schedule_empty():
    assert schedule_inputs(iv([0, 0, 0])) == []


def test_schedule_single_row():
    q = schedule_inputs(iv([0, 100]))
    assert q[:2] == [Event(0, EventKind.SPIKE_RISE, 1), Event(20_000_000, EventKind.SPIKE_FALL, 1)]
    assert q[2] == Event(20_000_000, EventKind.GLOBAL_FLAG_FALL)


def test_schedule_global_flag_fall_at_latest_end():
    q = schedule_inputs(iv([100, 255]))
    assert q[-1].kind is EventKind.GLOBAL_FLAG_FALL and q[-1].time == 51_000_000


def test_tie_break_fall_before_rise():
    # row 0 ends at 20 ns exactly when row 1 starts
    q = schedule_inputs(iv([100, 50], t0=[0.0, 20 * NS]))
    at20 = [e for e in q if e.time == 20_000_000]
    assert [e.kind for e in at20] == [EventKind.SPIKE_FALL, EventKind.SPIKE_RISE]
    assert q == sorted(q)


def test_all_zero(cfg):
    arr = program_array(np.full((8, 4), 3), cfg)
    res = run_mvm(arr, iv(np.zeros(8, int)), cfg)
    assert res.event_count == 0 and res.t_first_out_fs == 0
    assert not res.t_out.any() and not res.v_charge_final.any()


def test_worst_case(cfg):
    arr = program_array(np.full((128, 128), 3), cfg)
    res = run_mvm(arr, iv(np.full(128, 255)), cfg)
    assert np.allclose(res.t_out, 10.88 * NS, rtol=1e-12, atol=0)
    assert np.allclose(res.v_charge_final, 1.088, rtol=1e-12, atol=0)
    assert not res.saturated.any()
    assert (res.t_out_fs == 10_880_000).all()
    assert res.t_first_out_fs == 51_000_000


def test_single_cell(cfg):
    res = run_mvm(program_array([[3]], cfg), iv([100]), cfg)
    assert res.t_out[0] == pytest.approx(33.333333333e-12, rel=1e-10)


def test_dimension_mismatch(cfg):
    with pytest.raises(DimensionError):
        run_mvm(program_array([[3]], cfg), iv([1, 2]), cfg)
    with pytest.raises(ValidationError):
        run_mvm(program_array([[3]], cfg), iv([1]), cfg, mode="bogus")


def test_phase_ends_done(cfg):
    eng = EventEngine(program_array([[1, 2]], cfg), cfg)
    eng.run(iv([10]))
    assert eng.state.phase is Phase.DONE and not eng.state.global_flag
    assert len(eng.state.column_charge) == 2


def _random_case(rng, rows, cols, offsets=True):
    w = rng.integers(0, 4, (rows, cols))
    d = rng.integers(0, 256, rows)
    d[rng.random(rows) < 0.2] = 0
    t0 = rng.integers(0, 100, rows) * 0.1 * NS if offsets else 0.0
    return w, d, t0


def test_matches_closed_form_random(cfg, rng):
    worst = 0.0
    for _ in range(1000):
        rows, cols = int(rng.integers(1, 40)), int(rng.integers(1, 12))
        w, d, t0 = _random_case(rng, rows, cols)
        arr = program_array(w, cfg)
        inputs = iv(d, t0)
        res = run_mvm(arr, inputs, cfg)
        for c in range(cols):
            expect = output_interval(ideal_charge(inputs.intervals, arr.conductances[:, c], cfg).v_charge, cfg)
            if expect == 0:
                assert res.t_out[c] == 0
            else:
                worst = max(worst, abs(res.t_out[c] / expect - 1))
    assert worst <= 1e-12


def test_event_count_bound(cfg, rng):
    for _ in range(50):
        w, d, t0 = _random_case(rng, 32, 8)
        res = run_mvm(program_array(w, cfg), iv(d, t0), cfg)
        z = int(np.count_nonzero(d))
        assert res.event_count <= 2 * z + 1 + 8


def test_permutation_invariance(cfg, rng):
    w, d, t0 = _random_case(rng, 64, 16)
    base = run_mvm(program_array(w, cfg), iv(d, t0), cfg).t_out
    perm = rng.permutation(64)
    permuted = run_mvm(program_array(w[perm], cfg), iv(d[perm], t0[perm]), cfg).t_out
    assert np.allclose(permuted, base, rtol=1e-12, atol=0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_superposition(seed):
    rng = np.random.default_rng(seed)
    cfg = MacroConfig()
    w, d, t0 = _random_case(rng, 48, 8)
    arr = program_array(w, cfg)
    mask = rng.random(48) < 0.5
    full = run_mvm(arr, iv(d, t0), cfg).t_out
    a = run_mvm(arr, iv(np.where(mask, d, 0), t0), cfg).t_out
    b = run_mvm(arr, iv(np.where(mask, 0, d), t0), cfg).t_out
    assert np.allclose(a + b, full, rtol=1e-12, atol=0)


def test_mirror_gain_linearity(rng):
    w, d, _ = _random_case(rng, 32, 8)
    r1 = run_mvm(program_array(w, MacroConfig()), iv(d), MacroConfig())
    cfg2 = MacroConfig(k_mirror=2.0)
    r2 = run_mvm(program_array(w, cfg2), iv(d), cfg2)
    assert np.allclose(r2.t_out, 2 * r1.t_out, rtol=1e-14, atol=0)
    assert np.allclose(r2.v_charge_final, 2 * r1.v_charge_final, rtol=1e-14, atol=0)


def test_determinism_and_batch(cfg, rng):
    w, d, t0 = _random_case(rng, 32, 8)
    arr = program_array(w, cfg)
    a = run_mvm(arr, iv(d, t0), cfg, trace=True)
    b = run_mvm(arr, iv(d, t0), cfg, trace=True)
    assert a == b
    assert run_mvm_batch(arr, [], cfg) == []
    batch = run_mvm_batch(arr, [iv(d, t0), iv(d, t0)], cfg)
    assert batch[0] == batch[1]
    other = iv(np.roll(d, 1))
    fwd = run_mvm_batch(arr, [iv(d, t0), other], cfg)
    rev = run_mvm_batch(arr, [other, iv(d, t0)], cfg)
    assert fwd[0] == rev[1] and fwd[1] == rev[0]


def _ode_column(inputs, g_col, cfg):
    """Brute-force direct charging via an ODE solver over the active-row schedule."""
    starts, ends = inputs.starts * 1e-15, inputs.ends * 1e-15
    t_end = ends.max()
    bps = np.unique(np.concatenate([starts, ends, [0.0]]))
    v = 0.0
    for a, b in zip(bps[:-1], bps[1:]):
        mid = 0.5 * (a + b)
        g = g_col[(starts <= mid) & (ends > mid)].sum()
        sol = solve_ivp(lambda t, y: g * (cfg.v_read - y) / cfg.c_rt, (a, b), [v],
                        rtol=1e-12, atol=1e-18)
        v = sol.y[0, -1]
        if b >= t_end:
            break
    return v


def test_nonideal_matches_ode(cfg, rng):
    w, d, t0 = _random_case(rng, 12, 3)
    d[0] = 200
    arr = program_array(w, cfg)
    inputs = iv(d, t0)
    res = run_mvm(arr, inputs, cfg, mode="nonideal")
    for c in range(3):
        assert res.v_charge_final[c] == pytest.approx(_ode_column(inputs, arr.conductances[:, c], cfg), rel=1e-8)
    ideal = run_mvm(arr, inputs, cfg, mode="ideal")
    assert np.all(res.t_out < ideal.t_out)


def test_nonideal_mode_from_config(rng):
    cfg = MacroConfig(mode="nonideal")
    w, d, _ = _random_case(rng, 16, 4)
    arr = program_array(w, cfg)
    assert run_mvm(arr, iv(d), cfg) == run_mvm(arr, iv(d), cfg, mode="nonideal")


def test_trace(cfg, tmp_path):
    arr = program_array([[3, 0]], cfg)
    res = run_mvm(arr, iv([100]), cfg, trace=True)
    names = {name for _, name, _ in res.trace}
    assert {"global_flag", "row_flag[0]", "out_spike_first", "out_spike[0]", "v_charge[1]"} <= names
    times = [t for t, _, _ in res.trace]
    assert times == sorted(times)
    final = [v for t, n, v in res.trace if n == "v_charge[0]"][-1]
    assert final == pytest.approx(res.v_charge_final[0], rel=1e-15)
    p = tmp_path / "trace.csv"
    write_trace_csv(p, res.trace)
    assert p.read_text().splitlines()[0] == "time_fs,signal_name,value"
