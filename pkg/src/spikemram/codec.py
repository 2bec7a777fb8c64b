"""Dual-spike encoding of digital activations and decoding of output intervals.

A value ``d`` becomes two spikes separated by ``d * dt_lsb``.  Times are kept
in integer femtoseconds so that event ordering is exact.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import TimingConfig
from .errors import EncodingError, ParseError, ValidationError

FS = 1e-15


def to_fs(seconds: float) -> int:
    return int(round(seconds / FS))


@dataclass(frozen=True, order=True)
class SpikePair:
    """Two spikes at absolute times ``t_first <= t_second`` (integer fs)."""

    t_first: int
    t_second: int

    def __post_init__(self):
        if self.t_first < 0:
            raise ValidationError(f"spike time must be >= 0, got {self.t_first}")
        if self.t_second < self.t_first:
            raise ValidationError("second spike precedes the first")

    @property
    def interval_fs(self) -> int:
        return self.t_second - self.t_first


def encode(d: int, t0: float = 0.0, cfg: TimingConfig = TimingConfig()) -> SpikePair:
    """Encode ``d`` as a spike pair starting at ``t0`` seconds."""
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise EncodingError(f"input value must be an integer, got {d!r}")
    if not 0 <= d <= cfg.max_code:
        raise EncodingError(f"input value {d} outside [0, {cfg.max_code}]")
    if t0 < 0:
        raise EncodingError(f"t0 must be >= 0, got {t0!r}")
    start = to_fs(t0)
    return SpikePair(start, start + int(d) * cfg.dt_lsb_fs)


def interval(p: SpikePair) -> float:
    """Inter-spike interval in seconds."""
    return p.interval_fs * FS


def decode_interval(t_out, alpha: float):
    """Map an output interval back to ``sum_i T_in,i * G_i`` (S*s).

    Works elementwise on arrays.
    """
    if isinstance(t_out, (list, tuple)):
        t_out = np.asarray(t_out, dtype=np.float64)
    return t_out / alpha


class InputVector:
    """Per-row spike pairs applied to the array in one MVM.

    Stored as two int64 arrays (``starts``, ``ends``) in femtoseconds.
    """

    __slots__ = ("starts", "ends")

    def __init__(self, starts, ends):
        starts = np.asarray(starts, dtype=np.int64)
        ends = np.asarray(ends, dtype=np.int64)
        if starts.shape != ends.shape or starts.ndim != 1:
            raise ValidationError("starts/ends must be 1-D arrays of equal length")
        if (starts < 0).any():
            raise ValidationError("spike times must be non-negative")
        if (ends < starts).any():
            raise ValidationError("second spike precedes the first")
        self.starts = starts
        self.ends = ends

    @classmethod
    def from_pairs(cls, pairs: Sequence[SpikePair]) -> "InputVector":
        return cls([p.t_first for p in pairs], [p.t_second for p in pairs])

    @classmethod
    def from_digital(cls, values, cfg: TimingConfig = TimingConfig(), t0=0.0) -> "InputVector":
        """Encode a vector of digital values; ``t0`` may be scalar or per row."""
        d = np.asarray(values)
        if d.ndim != 1:
            raise ValidationError(f"input vector must be 1-D, got shape {d.shape}")
        if d.size and not np.issubdtype(d.dtype, np.integer):
            raise EncodingError(f"input values must be integers, got dtype {d.dtype}")
        d = d.astype(np.int64)
        bad = np.flatnonzero((d < 0) | (d > cfg.max_code))
        if len(bad):
            raise EncodingError(f"input {d[bad[0]]} at row {bad[0]} outside [0, {cfg.max_code}]")
        t0 = np.broadcast_to(np.asarray(t0, dtype=np.float64), d.shape)
        if (t0 < 0).any():
            raise EncodingError("t0 must be >= 0")
        starts = np.rint(t0 / FS).astype(np.int64)
        return cls(starts, starts + d * cfg.dt_lsb_fs)

    def __len__(self):
        return len(self.starts)

    def __getitem__(self, i) -> SpikePair:
        return SpikePair(int(self.starts[i]), int(self.ends[i]))

    @property
    def entries(self):
        return [self[i] for i in range(len(self))]

    @property
    def intervals_fs(self) -> np.ndarray:
        return self.ends - self.starts

    @property
    def intervals(self) -> np.ndarray:
        return self.intervals_fs * FS

    def permuted(self, order) -> "InputVector":
        return InputVector(self.starts[order], self.ends[order])

    def __eq__(self, other):
        if not isinstance(other, InputVector):
            return NotImplemented
        return np.array_equal(self.starts, other.starts) and np.array_equal(self.ends, other.ends)

    def __repr__(self):
        return f"InputVector(rows={len(self)}, active={int((self.intervals_fs > 0).sum())})"


def read_inputs_csv(path, cfg: TimingConfig = TimingConfig()) -> np.ndarray:
    """Parse digital inputs: one column or one row of integers."""
    values = []
    shape = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            toks = [t for t in rec if t.strip()]
            if not toks:
                continue
            kind = "row" if len(toks) > 1 else "col"
            if shape is None:
                shape = kind
            elif shape == "row" or kind == "row":
                raise ParseError("input vector must be a single row or a single column",
                                 path, lineno)
            for tok in toks:
                try:
                    v = int(tok.strip())
                except ValueError:
                    raise ParseError(f"not an integer: {tok!r}", path, lineno) from None
                if not 0 <= v <= cfg.max_code:
                    raise ParseError(f"input {v} outside [0, {cfg.max_code}]", path, lineno)
                values.append(v)
    if not values:
        raise ParseError("empty input vector", path)
    return np.array(values, dtype=np.int64)
