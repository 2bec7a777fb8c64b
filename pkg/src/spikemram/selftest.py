"""Built-in consistency suites run by ``spikemram selftest``."""
from __future__ import annotations

from typing import Callable, List, Tuple

import numpy as np

from .analog import alpha, calibrate_gtotal
from .codec import InputVector
from .config import EnergyConfig, MacroConfig
from .device import program_array
from .energy import energy_report
from .engine import run_mvm
from .workload import exact_mac_oracle, max_relative_error, nonideal_comparison


def oracle_exhaustion(cfg: MacroConfig) -> str:
    """Every (input, weight) pair on a 1x1 array against the exact oracle."""
    worst = 0.0
    a = alpha(cfg)
    for w in range(4):
        arr = program_array([[w]], cfg)
        for d in range(cfg.timing.max_code + 1):
            res = run_mvm(arr, InputVector.from_digital([d], cfg.timing), cfg, "ideal")
            exact = exact_mac_oracle([d], [w], cfg)[0].to_float(cfg)
            worst = max(worst, max_relative_error(res.t_out[:1] / a, [exact]))
    if worst > 1e-12:
        raise AssertionError(f"max relative error {worst:.3e} > 1e-12")
    return f"max rel error {worst:.2e}"


def superposition(cfg: MacroConfig, seed: int = 0, trials: int = 20) -> str:
    rng = np.random.default_rng(seed)
    rows, cols = min(cfg.rows, 32), min(cfg.cols, 16)
    worst = 0.0
    for _ in range(trials):
        arr = program_array(rng.integers(0, 4, (rows, cols)), cfg)
        d = rng.integers(0, cfg.timing.max_code + 1, rows)
        mask = rng.random(rows) < 0.5
        full = run_mvm(arr, InputVector.from_digital(d, cfg.timing), cfg, "ideal").t_out
        a = run_mvm(arr, InputVector.from_digital(np.where(mask, d, 0), cfg.timing), cfg, "ideal").t_out
        b = run_mvm(arr, InputVector.from_digital(np.where(mask, 0, d), cfg.timing), cfg, "ideal").t_out
        worst = max(worst, max_relative_error(a + b, full))
    if worst > 1e-12:
        raise AssertionError(f"superposition error {worst:.3e}")
    return f"max rel error {worst:.2e}"


def calibration(cfg: MacroConfig) -> str:
    checks = []
    default = MacroConfig()
    if abs(alpha(default) - 5000.0) > 5000.0 * 1e-12:
        raise AssertionError(f"alpha {alpha(default)} != 5000 Ohm")
    res = run_mvm(program_array(np.full((128, 128), 3), default),
                  InputVector.from_digital(np.full(128, 255), default.timing), default, "ideal")
    if abs(res.v_charge_final[0] / 1.088 - 1) > 1e-9 or res.saturated.any():
        raise AssertionError(f"worst-case V_charge {res.v_charge_final[0]!r}")
    checks.append(f"V_worst={res.v_charge_final[0]:.6g}V")
    rep = energy_report(1, EnergyConfig())
    if abs(rep.tops_per_watt / 243.6 - 1) > 0.005:
        raise AssertionError(f"efficiency {rep.tops_per_watt}")
    checks.append(f"TOPS/W={rep.tops_per_watt:.4g}")
    g = calibrate_gtotal(0.193, 5e-9, default)
    rows = nonideal_comparison([5e-9, 10e-9], g, default)
    if abs(rows[0].degradation - 0.193) > 0.005 or abs(rows[1].degradation - 0.338) > 0.01:
        raise AssertionError(f"degradation {rows[0].degradation}, {rows[1].degradation}")
    checks.append(f"deg5ns={rows[0].degradation:.3f} deg10ns={rows[1].degradation:.3f}")
    return " ".join(checks)


SUITES: List[Tuple[str, Callable[[MacroConfig], str]]] = [
    ("oracle_exhaustion", oracle_exhaustion),
    ("superposition", superposition),
    ("calibration", calibration),
]


def run_selftest(cfg: MacroConfig, echo=print) -> bool:
    ok = True
    for name, suite in SUITES:
        try:
            detail = suite(cfg)
        except AssertionError as exc:
            ok = False
            echo(f"FAIL {name}: {exc}")
        else:
            echo(f"PASS {name}: {detail}")
    return ok
