"""Exact MAC oracle, experiment drivers, tiling and error metrics.

The oracle never touches floating point: with times in units of ``dt_lsb``
and resistances in units of ``r_low``, every cell conductance is a rational
``1 / (3 + tmr*(3 - w))`` and a column sum is an integer over a common
denominator (60 for ``tmr = 1``).  It therefore shares no arithmetic with the
event engine it checks.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence

import numpy as np

from .analog import (alpha, calibrate_gtotal, degradation, ideal_direct_charge,
                     nonideal_charge_trace)
from .codec import InputVector, decode_interval
from .config import MacroConfig
from .device import N_LEVELS, exact_level_resistance, level_conductances, program_array
from .engine import run_mvm
from .errors import DimensionError, EncodingError, RegressionError, ValidationError

#: direct-charging degradation values read off the reference measurement
PAPER_DEGRADATION = {5e-9: 0.193, 10e-9: 0.396}


@dataclass(frozen=True)
class ExactMacValue:
    """Exact ``sum_i d_i / R_i`` in units of ``dt_lsb / r_low``."""

    value: Fraction

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def to_exact_siemens_seconds(self, cfg: MacroConfig) -> Fraction:
        return self.value * Fraction(cfg.timing.dt_lsb) / Fraction(cfg.r_low)

    def to_float(self, cfg: MacroConfig) -> float:
        return float(self.to_exact_siemens_seconds(cfg))


def level_multipliers(tmr) -> tuple:
    """Integer conductance per code and their common denominator.

    Returns ``(mult, denom)`` such that ``1/R(w) = mult[w] / denom`` in units of
    ``1/r_low``.
    """
    inv = [1 / exact_level_resistance(w, tmr) for w in range(N_LEVELS)]
    denom = reduce(math.lcm, (q.denominator for q in inv))
    return tuple(int(q * denom) for q in inv), denom


def _check_ranges(d, w, cfg):
    if d.ndim != 1 or w.ndim != 2 or w.shape[0] != d.shape[0]:
        raise DimensionError(f"inputs {d.shape} do not match weights {w.shape}")
    if d.size and (d.min() < 0 or d.max() > cfg.timing.max_code):
        raise EncodingError(f"inputs must lie in [0, {cfg.timing.max_code}]")
    if w.size and (w.min() < 0 or w.max() >= N_LEVELS):
        raise EncodingError("weight codes must lie in [0, 3]")


def exact_mac_numerators(digital_inputs, weights, cfg: MacroConfig):
    """Integer column sums ``N_c`` with ``sum T*G = N_c / denom`` (oracle units)."""
    d = np.asarray(digital_inputs, dtype=np.int64)
    w = np.asarray(weights, dtype=np.int64)
    if w.ndim == 1:
        w = w[:, None]
    _check_ranges(d, w, cfg)
    mult, denom = level_multipliers(cfg.tmr)
    bound = cfg.timing.max_code * max(mult) * max(len(d), 1)
    dtype = np.int64 if bound < 2**62 else object
    table = np.array(mult, dtype=dtype)
    return d.astype(dtype) @ table[w], denom


def exact_mac_oracle(digital_inputs, weights, cfg: MacroConfig) -> List[ExactMacValue]:
    """Exact ``sum_i T_in,i * G_i`` for every column of ``weights``.

    ``weights`` is rows x cols, or a 1-D list for a single column.
    """
    nums, denom = exact_mac_numerators(digital_inputs, weights, cfg)
    return [ExactMacValue(Fraction(int(n), denom)) for n in nums]


def _oracle_floats(nums, denom, cfg):
    unit = float(Fraction(cfg.timing.dt_lsb) / (denom * Fraction(cfg.r_low)))
    # numerators below 2**53 convert exactly; one rounding each for unit and product
    return np.asarray(nums, dtype=np.float64) * unit


def max_relative_error(estimate, exact) -> float:
    """Largest ``|estimate - exact| / |exact|``; zero references must match exactly."""
    estimate = np.asarray(estimate, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    nz = exact != 0
    if (estimate[~nz] != 0).any():
        return math.inf
    if not nz.any():
        return 0.0
    return float((np.abs(estimate[nz] - exact[nz]) / np.abs(exact[nz])).max())


@dataclass
class LineFit:
    slope: float
    intercept: float
    r_squared: float
    degenerate: bool = False


def fit_line(x, y) -> LineFit:
    """Ordinary least squares ``y = slope*x + intercept`` on centred data."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2:
        raise RegressionError("need at least two points")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise RegressionError("all regressor values are identical")
    slope = float(dx @ dy) / sxx
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    syy = float(dy @ dy)
    r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 1.0
    return LineFit(slope, intercept, min(max(r2, 0.0), 1.0))


@dataclass
class SweepReport:
    n_cases: int
    n_points: int
    mode: str
    alpha: float
    max_rel_error: float
    slope: float = math.nan
    intercept: float = math.nan
    r_squared: float = math.nan
    degenerate: bool = False
    case_id: np.ndarray = field(default=None, repr=False)
    sum_tg: np.ndarray = field(default=None, repr=False)
    t_out: np.ndarray = field(default=None, repr=False)

    def summary_pairs(self):
        return [("n_cases", self.n_cases), ("n_points", self.n_points), ("mode", self.mode),
                ("alpha_ohm", f"{self.alpha:.12g}"), ("slope_ohm", f"{self.slope:.12g}"),
                ("slope_rel_error", f"{abs(self.slope / self.alpha - 1):.3e}"),
                ("intercept_s", f"{self.intercept:.6e}"), ("r_squared", f"{self.r_squared:.15f}"),
                ("max_rel_error", f"{self.max_rel_error:.3e}"),
                ("degenerate", str(self.degenerate).lower())]

    def write_scatter_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["case_id", "sum_tg", "t_out"])
            for c, x, y in zip(self.case_id.tolist(), self.sum_tg.tolist(), self.t_out.tolist()):
                w.writerow([c, repr(x), repr(y)])


def _sweep_case(case: int, seed: int, cfg: MacroConfig, mode: str, rows: int, cols: int):
    rng = np.random.default_rng([seed, case])
    weights = rng.integers(0, N_LEVELS, size=(rows, cols))
    d = rng.integers(0, cfg.timing.max_code + 1, size=rows)
    res = run_mvm(program_array(weights, cfg), InputVector.from_digital(d, cfg.timing), cfg, mode)
    nums, denom = exact_mac_numerators(d, weights, cfg)
    return _oracle_floats(nums, denom, cfg), res.t_out


def linearity_sweep(n_cases: int, seed: int = 0, cfg: MacroConfig = MacroConfig(),
                    mode: Optional[str] = None, rows: Optional[int] = None,
                    cols: Optional[int] = None) -> SweepReport:
    """Seeded uniform sweep over the input-weight space.

    Each case draws a fresh weight matrix and input vector (from an RNG keyed
    on ``(seed, case)`` so cases are independent of execution order), runs the
    engine and pairs every column's ``t_out`` with the exact oracle value.
    """
    if n_cases < 2:
        raise ValidationError("linearity sweep needs n_cases >= 2")
    mode = cfg.mode if mode is None else mode
    rows = cfg.rows if rows is None else rows
    cols = cfg.cols if cols is None else cols
    xs, ys = [], []
    for case in range(n_cases):
        x, y = _sweep_case(case, seed, cfg, mode, rows, cols)
        xs.append(x)
        ys.append(y)
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    case_id = np.repeat(np.arange(n_cases), cols)
    a = alpha(cfg)
    decoded = decode_interval(y, a)
    max_rel = max_relative_error(decoded, x)
    rep = SweepReport(n_cases, x.size, mode, a, max_rel, case_id=case_id, sum_tg=x, t_out=y)
    try:
        fit = fit_line(x, y)
    except RegressionError:
        rep.degenerate = True
    else:
        rep.slope, rep.intercept, rep.r_squared = fit.slope, fit.intercept, fit.r_squared
    return rep


@dataclass
class ComparisonRow:
    t: float
    v_ideal: float
    v_nonideal: float
    degradation: float
    paper_degradation: Optional[float] = None


def nonideal_comparison(durations: Sequence[float], g_total: float,
                        cfg: MacroConfig = MacroConfig()) -> List[ComparisonRow]:
    """Direct-charging vs linear charging of C_rt at constant bitline conductance.

    Where a duration matches one of the reference measurements its value is
    attached for side-by-side reporting.
    """
    durations = list(durations)
    if not durations:
        raise ValidationError("at least one duration is required")
    if g_total < 0:
        raise ValidationError("g_total must be non-negative")
    rows = []
    for t in durations:
        if not t > 0:
            raise ValidationError(f"durations must be positive, got {t!r}")
        state, _ = nonideal_charge_trace(g_total, cfg, t, n_samples=2)
        v_id = ideal_direct_charge(g_total, t, cfg)
        deg = degradation(state.v_charge, v_id) if v_id > 0 else 0.0
        ref = next((v for k, v in PAPER_DEGRADATION.items() if abs(k - t) <= 1e-15), None)
        rows.append(ComparisonRow(t, v_id, state.v_charge, deg, ref))
    return rows


def calibrated_comparison(cfg: MacroConfig = MacroConfig(), target: float = 0.193,
                          at: float = 5e-9, durations=(5e-9, 10e-9)):
    """Calibrate G_total to ``target`` degradation at ``at`` and tabulate."""
    g = calibrate_gtotal(target, at, cfg)
    return g, nonideal_comparison(durations, g, cfg)


def write_comparison_csv(path, rows: Sequence[ComparisonRow], g_total: float):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_fs", "g_total_S", "v_ideal_V", "v_nonideal_V", "degradation",
                    "paper_degradation"])
        for r in rows:
            w.writerow([int(round(r.t * 1e15)), f"{g_total:.9g}", f"{r.v_ideal:.9g}",
                        f"{r.v_nonideal:.9g}", f"{r.degradation:.9g}",
                        "" if r.paper_degradation is None else f"{r.paper_degradation:.9g}"])


@dataclass(frozen=True)
class TilePlan:
    grid: tuple
    row_ranges: tuple
    col_ranges: tuple
    order: str = "row-major"

    @classmethod
    def build(cls, m: int, n: int, tile_rows: int, tile_cols: int) -> "TilePlan":
        if m < 1 or n < 1:
            raise DimensionError("cannot tile an empty matrix")
        if tile_rows < 1 or tile_cols < 1:
            raise ValidationError("tile dimensions must be positive")
        rr = tuple((i, min(i + tile_rows, m)) for i in range(0, m, tile_rows))
        cr = tuple((j, min(j + tile_cols, n)) for j in range(0, n, tile_cols))
        return cls((len(rr), len(cr)), rr, cr)

    def tiles(self):
        for r0, r1 in self.row_ranges:
            for c0, c1 in self.col_ranges:
                yield (r0, r1), (c0, c1)


@dataclass
class TileResult:
    decoded: np.ndarray  # S*s per output column
    plan: TilePlan


def tile_matrix(weights, inputs, cfg: MacroConfig = MacroConfig(), mode: Optional[str] = None,
                tile_rows: Optional[int] = None, tile_cols: Optional[int] = None) -> TileResult:
    """Run an arbitrary M x N weight matrix as a grid of macro-sized tiles.

    Each tile's output intervals are decoded to ``sum T*G`` and the partial
    sums of the row tiles are combined per output column with ``math.fsum``,
    which is exactly rounded and so independent of accumulation order.
    """
    w = np.asarray(weights)
    d = np.asarray(inputs)
    if w.ndim != 2 or w.size == 0:
        raise DimensionError("weights must be a non-empty 2-D matrix")
    if d.shape != (w.shape[0],):
        raise DimensionError(f"inputs of length {d.size} do not match {w.shape[0]} weight rows")
    tile_rows = cfg.rows if tile_rows is None else tile_rows
    tile_cols = cfg.cols if tile_cols is None else tile_cols
    if tile_rows > cfg.rows or tile_cols > cfg.cols:
        raise DimensionError("tile larger than the macro array")
    plan = TilePlan.build(w.shape[0], w.shape[1], tile_rows, tile_cols)
    a = alpha(cfg)
    partial = [[] for _ in range(w.shape[1])]
    for (r0, r1), (c0, c1) in plan.tiles():
        arr = program_array(w[r0:r1, c0:c1], cfg)
        res = run_mvm(arr, InputVector.from_digital(d[r0:r1], cfg.timing), cfg, mode)
        for j, v in enumerate(decode_interval(res.t_out, a).tolist()):
            partial[c0 + j].append(v)
    return TileResult(np.array([math.fsum(p) for p in partial]), plan)


def baseline_correct(decoded, inputs, cfg: MacroConfig = MacroConfig()):
    """Remove the code-0 conductance floor: ``decoded - G(0) * sum_i T_in,i``.

    ``inputs`` is either an :class:`InputVector` or digital values.
    """
    if not isinstance(inputs, InputVector):
        inputs = InputVector.from_digital(np.asarray(inputs), cfg.timing)
    g0 = level_conductances(cfg.r_low, cfg.tmr)[0]
    return np.asarray(decoded) - g0 * math.fsum(inputs.intervals.tolist())
