from fractions import Fraction

import numpy as np
import pytest

from spikemram import workload
from spikemram.analog import alpha
from spikemram.codec import InputVector
from spikemram.config import MacroConfig
from spikemram.device import program_array
from spikemram.engine import run_mvm
from spikemram.errors import (DimensionError, EncodingError, RegressionError, ValidationError)
from spikemram.workload import (TilePlan, baseline_correct, calibrated_comparison,
                                exact_mac_oracle, fit_line, level_multipliers, linearity_sweep,
                                max_relative_error, nonideal_comparison, tile_matrix)

NS = 1e-9


def brute_oracle(d, w, tmr=Fraction(1)):
    """Direct rational sum, one Fraction per cell."""
    out = []
    for c in range(w.shape[1]):
        total = Fraction(0)
        for i in range(len(d)):
            r = Fraction(1) * (1 + tmr * (1 - (w[i, c] & 1))) + 2 * (1 + tmr * (1 - (w[i, c] >> 1)))
            total += Fraction(int(d[i])) / r
        out.append(total)
    return out


def test_level_multipliers():
    assert level_multipliers(1) == ((10, 12, 15, 20), 60)


def test_oracle_examples(cfg):
    assert exact_mac_oracle([0, 0], [1, 2], cfg)[0].value == 0
    one = exact_mac_oracle([100], [3], cfg)[0]
    assert one.value == Fraction(100, 3)
    assert one.to_float(cfg) == pytest.approx(20 * NS / 3e6, rel=1e-15)
    full = exact_mac_oracle([255] * 128, [3] * 128, cfg)[0]
    assert full.value == Fraction(10880)
    assert full.to_float(cfg) == pytest.approx(2.176e-12, rel=1e-15)


@pytest.mark.parametrize("tmr", [Fraction(1), Fraction(1, 2), Fraction(3, 7)])
def test_oracle_matches_brute_force(rng, tmr):
    cfg = MacroConfig(tmr=float(tmr))
    w = rng.integers(0, 4, (20, 5))
    d = rng.integers(0, 256, 20)
    fast = [v.value for v in exact_mac_oracle(d, w, cfg)]
    assert fast == brute_oracle(d, w, Fraction(cfg.tmr))


def test_oracle_ranges(cfg):
    with pytest.raises(EncodingError):
        exact_mac_oracle([256], [0], cfg)
    with pytest.raises(EncodingError):
        exact_mac_oracle([1], [4], cfg)
    with pytest.raises(DimensionError):
        exact_mac_oracle([1, 2], [0], cfg)


def test_exhaustive_single_cell(cfg):
    a = alpha(cfg)
    for w in range(4):
        arr = program_array([[w]], cfg)
        for d in range(256):
            res = run_mvm(arr, InputVector.from_digital([d]), cfg)
            exact = exact_mac_oracle([d], [w], cfg)[0].to_float(cfg)
            assert max_relative_error([res.t_out[0] / a], [exact]) <= 1e-12


def test_max_relative_error():
    assert max_relative_error([0.0, 2.0], [0.0, 2.0]) == 0.0
    assert max_relative_error([1e-30], [0.0]) == float("inf")
    assert max_relative_error([1.1], [1.0]) == pytest.approx(0.1)


def test_fit_line():
    x = np.linspace(0, 1, 11)
    fit = fit_line(x, 3 * x + 2)
    assert fit.slope == pytest.approx(3) and fit.intercept == pytest.approx(2)
    assert fit.r_squared == pytest.approx(1.0)
    with pytest.raises(RegressionError):
        fit_line([1.0, 1.0], [2.0, 3.0])


def test_sweep_ideal(cfg):
    rep = linearity_sweep(30, seed=1, cfg=cfg)
    assert rep.n_points == 30 * 128
    assert abs(rep.slope / alpha(cfg) - 1) <= 1e-9
    assert abs(rep.intercept) <= 1e-15
    assert rep.r_squared >= 1 - 1e-12
    assert rep.max_rel_error <= 1e-9


def test_sweep_reproducible(cfg):
    a = linearity_sweep(3, seed=9, cfg=cfg, rows=16, cols=4)
    b = linearity_sweep(3, seed=9, cfg=cfg, rows=16, cols=4)
    assert np.array_equal(a.t_out, b.t_out) and np.array_equal(a.sum_tg, b.sum_tg)
    c = linearity_sweep(3, seed=10, cfg=cfg, rows=16, cols=4)
    assert not np.array_equal(a.t_out, c.t_out)


def test_sweep_nonideal_droops(cfg):
    rep = linearity_sweep(10, seed=2, cfg=cfg, mode="nonideal", rows=32, cols=8)
    assert rep.slope < alpha(cfg)


def test_sweep_validation(cfg):
    with pytest.raises(ValidationError):
        linearity_sweep(1, cfg=cfg)


def test_sweep_degenerate_flagged(cfg, monkeypatch):
    monkeypatch.setattr(workload, "_sweep_case",
                        lambda *a: (np.array([1e-13]), np.array([5e-10])))
    rep = linearity_sweep(2, cfg=cfg, rows=1, cols=1)
    assert rep.degenerate


def test_scatter_csv(tmp_path, cfg):
    rep = linearity_sweep(2, seed=0, cfg=cfg, rows=4, cols=2)
    p = tmp_path / "s.csv"
    rep.write_scatter_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "case_id,sum_tg,t_out" and len(lines) == 5


def test_nonideal_comparison(cfg):
    rows = nonideal_comparison([1e-15, 5 * NS, 10 * NS], 17.8e-6, cfg)
    assert rows[0].degradation < 1e-6
    assert rows[1].degradation == pytest.approx(0.193, abs=0.005)
    assert rows[1].paper_degradation == 0.193
    assert rows[2].degradation == pytest.approx(0.338, abs=0.01)
    assert rows[2].paper_degradation == 0.396
    assert all(r.v_nonideal <= r.v_ideal for r in rows)


def test_nonideal_comparison_zero_and_errors(cfg):
    assert all(r.degradation == 0 for r in nonideal_comparison([5 * NS], 0.0, cfg))
    with pytest.raises(ValidationError):
        nonideal_comparison([], 1e-6, cfg)
    with pytest.raises(ValidationError):
        nonideal_comparison([-1.0], 1e-6, cfg)


def test_calibrated_comparison(cfg):
    g, rows = calibrated_comparison(cfg)
    assert rows[0].degradation == pytest.approx(0.193, abs=1e-9)
    assert rows[1].degradation == pytest.approx(0.338, abs=0.01)


def test_tile_plan():
    plan = TilePlan.build(130, 130, 128, 128)
    assert plan.grid == (2, 2)
    assert plan.row_ranges == ((0, 128), (128, 130))
    cover = np.zeros((130, 130), int)
    for (r0, r1), (c0, c1) in plan.tiles():
        cover[r0:r1, c0:c1] += 1
    assert (cover == 1).all()
    with pytest.raises(DimensionError):
        TilePlan.build(0, 5, 128, 128)


def _oracle_floats(d, w, cfg):
    return np.array([v.to_float(cfg) for v in exact_mac_oracle(d, w, cfg)])


def test_tile_single_equals_run_mvm(cfg, rng):
    w = rng.integers(0, 4, (128, 128))
    d = rng.integers(0, 256, 128)
    res = tile_matrix(w, d, cfg)
    direct = run_mvm(program_array(w, cfg), InputVector.from_digital(d), cfg).t_out / alpha(cfg)
    assert res.plan.grid == (1, 1)
    assert np.array_equal(res.decoded, direct)


@pytest.mark.parametrize("shape,grid", [((256, 128), (2, 1)), ((130, 130), (2, 2))])
def test_tile_matches_oracle(cfg, rng, shape, grid):
    w = rng.integers(0, 4, shape)
    d = rng.integers(0, 256, shape[0])
    res = tile_matrix(w, d, cfg)
    assert res.plan.grid == grid
    assert max_relative_error(res.decoded, _oracle_floats(d, w, cfg)) <= 1e-9


def test_tile_row_superposition(cfg, rng):
    w = rng.integers(0, 4, (256, 128))
    d = rng.integers(0, 256, 256)
    total = tile_matrix(w, d, cfg).decoded
    top = tile_matrix(w[:128], d[:128], cfg).decoded
    bottom = tile_matrix(w[128:], d[128:], cfg).decoded
    np.testing.assert_allclose(total, top + bottom, rtol=1e-12)


def test_tile_errors(cfg):
    with pytest.raises(DimensionError):
        tile_matrix(np.zeros((0, 3), int), [], cfg)
    with pytest.raises(DimensionError):
        tile_matrix(np.zeros((3, 3), int), [1, 2], cfg)
    with pytest.raises(DimensionError):
        tile_matrix(np.zeros((3, 3), int), [1, 2, 3], cfg, tile_rows=200)


def test_baseline_correct(cfg):
    d = np.array([10, 200, 0, 7])
    w0 = np.zeros((4, 1), int)
    dec = run_mvm(program_array(w0, cfg), InputVector.from_digital(d), cfg).t_out / alpha(cfg)
    assert baseline_correct(dec, d, cfg)[0] == pytest.approx(0.0, abs=1e-27)
    dec = run_mvm(program_array([[3]], cfg), InputVector.from_digital([100]), cfg).t_out / alpha(cfg)
    assert baseline_correct(dec, [100], cfg)[0] == pytest.approx(3.3333333e-15, rel=1e-7)
    zero = baseline_correct(np.zeros(3), InputVector.from_digital([0, 0]), cfg)
    assert not zero.any()
