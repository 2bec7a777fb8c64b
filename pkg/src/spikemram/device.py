"""MTJ devices, the 3T-2MTJ series cell and the crossbar conductance matrix.

A cell stores a 2-bit weight code ``w = (b1, b0)``.  Bit 0 drives J1 and bit 1
drives J2, with J2 built at twice J1's resistance; a set bit puts the junction
in its low-resistance state.  On the read path the two junctions are in
series, so with ``tmr = 1`` the cell resistance is ``r_low * (6 - w)``.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .config import MacroConfig
from .errors import CorruptionError, DimensionError, EncodingError, ParseError

N_LEVELS = 4
#: relative tolerance when matching a resistance to a programmed state
STATE_RTOL = 1e-9


class MtjState(enum.Enum):
    LOW = "LowRes"
    HIGH = "HighRes"


@dataclass(frozen=True)
class MtjDevice:
    r_low: float
    tmr: float
    state: MtjState = MtjState.LOW

    def __post_init__(self):
        if not self.r_low > 0:
            raise ValueError(f"r_low must be positive, got {self.r_low!r}")
        if not self.tmr >= 0:
            raise ValueError(f"tmr must be non-negative, got {self.tmr!r}")


def mtj_resistance(device: MtjDevice) -> float:
    if device.state is MtjState.LOW:
        return device.r_low
    return device.r_low * (1.0 + device.tmr)


@dataclass(frozen=True)
class Cell3T2J:
    """Two MTJs in series on the read path.

    ``variation`` is a multiplicative factor on the series resistance used by
    the device-variation hook; it is 1.0 for a nominal cell.
    """

    j1: MtjDevice
    j2: MtjDevice
    variation: float = 1.0

    def __post_init__(self):
        if abs(self.j2.r_low - 2.0 * self.j1.r_low) > STATE_RTOL * self.j2.r_low:
            raise ValueError("J2 must be built with twice the resistance of J1")
        if self.j1.tmr != self.j2.tmr:
            raise ValueError("J1 and J2 must share one TMR")
        if not self.variation > 0:
            raise ValueError("variation factor must be positive")

    @property
    def resistance(self) -> float:
        return (mtj_resistance(self.j1) + mtj_resistance(self.j2)) * self.variation

    @property
    def conductance(self) -> float:
        return 1.0 / self.resistance


def _check_code(w) -> int:
    if isinstance(w, (bool, np.bool_)) or not isinstance(w, (int, np.integer)):
        raise EncodingError(f"weight code must be an integer, got {w!r}")
    if not 0 <= w < N_LEVELS:
        raise EncodingError(f"weight code {w} outside [0, {N_LEVELS - 1}]")
    return int(w)


def program_cell(w: int, base_r: float, tmr: float = 1.0) -> Cell3T2J:
    """Build the cell storing weight code ``w`` with J1 low resistance ``base_r``."""
    w = _check_code(w)
    b0, b1 = w & 1, (w >> 1) & 1
    j1 = MtjDevice(base_r, tmr, MtjState.LOW if b0 else MtjState.HIGH)
    j2 = MtjDevice(2.0 * base_r, tmr, MtjState.LOW if b1 else MtjState.HIGH)
    return Cell3T2J(j1, j2)


def level_resistances(base_r: float, tmr: float = 1.0) -> np.ndarray:
    """Nominal read-path resistance for codes 0..3."""
    return np.array([program_cell(w, base_r, tmr).resistance for w in range(N_LEVELS)])


def level_conductances(base_r: float, tmr: float = 1.0) -> np.ndarray:
    return 1.0 / level_resistances(base_r, tmr)


def exact_level_resistance(w: int, tmr) -> Fraction:
    """Read-path resistance of code ``w`` in units of ``base_r``, exactly.

    J1 contributes ``1 + tmr*(1-b0)`` and J2 ``2*(1 + tmr*(1-b1))``, which sums
    to ``3 + tmr*(3 - w)``.
    """
    w = _check_code(w)
    return 3 + Fraction(tmr) * (3 - w)


def read_weight(cell: Cell3T2J) -> int:
    """Recover the weight code from a cell's read-path resistance."""
    levels = level_resistances(cell.j1.r_low, cell.j1.tmr)
    r = cell.resistance
    matches = np.flatnonzero(np.abs(levels - r) <= STATE_RTOL * levels)
    if len(matches) != 1:
        raise CorruptionError(
            f"cell resistance {r:.6g} Ohm matches none of the states {levels.tolist()}"
            if len(matches) == 0
            else f"cell resistance {r:.6g} Ohm is ambiguous (tmr = 0 collapses states)"
        )
    return int(matches[0])


class CrossbarArray:
    """A programmed array: weight codes plus the derived conductance matrix.

    Instances are read-only after construction.  ``cells`` materialises the
    per-cell objects lazily; the engine only ever touches ``conductances``.
    """

    def __init__(self, weights: np.ndarray, conductances: np.ndarray, base_r: float,
                 tmr: float, variation: np.ndarray | None = None):
        self.weights = weights
        self.conductances = conductances
        self.base_r = base_r
        self.tmr = tmr
        self.variation = variation
        for arr in (self.weights, self.conductances, self.variation):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]

    @property
    def shape(self):
        return self.weights.shape

    def cell(self, r: int, c: int) -> Cell3T2J:
        cell = program_cell(int(self.weights[r, c]), self.base_r, self.tmr)
        if self.variation is not None:
            cell = Cell3T2J(cell.j1, cell.j2, float(self.variation[r, c]))
        return cell

    @cached_property
    def cells(self):
        return tuple(tuple(self.cell(r, c) for c in range(self.cols)) for r in range(self.rows))

    def __repr__(self):
        return f"CrossbarArray(rows={self.rows}, cols={self.cols}, base_r={self.base_r:g})"


def program_array(weights, cfg: MacroConfig) -> CrossbarArray:
    """Program a weight-code matrix into a crossbar.

    The matrix may be smaller than the configured array; unused physical rows
    and columns are simply not instantiated.
    """
    w = np.asarray(weights)
    if w.ndim != 2 or w.size == 0:
        raise DimensionError(f"weights must be a non-empty 2-D matrix, got shape {w.shape}")
    if w.shape[0] > cfg.rows or w.shape[1] > cfg.cols:
        raise DimensionError(
            f"weight matrix {w.shape[0]}x{w.shape[1]} exceeds array {cfg.rows}x{cfg.cols}"
        )
    if not np.issubdtype(w.dtype, np.integer):
        raise EncodingError(f"weight codes must be integers, got dtype {w.dtype}")
    bad = np.argwhere((w < 0) | (w >= N_LEVELS))
    if len(bad):
        r, c = bad[0]
        raise EncodingError(f"weight {w[r, c]} at row {r}, col {c} outside [0, {N_LEVELS - 1}]")
    w = w.astype(np.int8)
    resist = level_resistances(cfg.r_low, cfg.tmr)[w]
    variation = None
    if cfg.variation_sigma > 0:
        rng = np.random.default_rng(cfg.variation_seed)
        variation = np.exp(cfg.variation_sigma * rng.standard_normal(w.shape))
        resist = resist * variation
    g = np.ascontiguousarray(1.0 / resist, dtype=np.float64)
    return CrossbarArray(w, g, cfg.r_low, cfg.tmr, variation)


def read_weights_csv(path, cfg: MacroConfig | None = None) -> np.ndarray:
    """Parse a weight matrix: integers 0..3, comma separated, no header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not x.strip() for x in rec):
                continue
            row = []
            for col, tok in enumerate(rec):
                try:
                    v = int(tok.strip())
                except ValueError:
                    raise ParseError(f"col {col}: not an integer: {tok!r}", path, lineno) from None
                if not 0 <= v < N_LEVELS:
                    raise ParseError(f"row {len(rows)}, col {col}: weight {v} outside [0, 3]",
                                     path, lineno)
                row.append(v)
            if rows and len(row) != len(rows[0]):
                raise ParseError(f"expected {len(rows[0])} columns, got {len(row)}", path, lineno)
            rows.append(row)
    if not rows:
        raise ParseError("empty weight matrix", path)
    w = np.array(rows, dtype=np.int64)
    if cfg is not None and (w.shape[0] > cfg.rows or w.shape[1] > cfg.cols):
        raise DimensionError(f"weight matrix {w.shape} exceeds array {cfg.rows}x{cfg.cols}")
    return w
