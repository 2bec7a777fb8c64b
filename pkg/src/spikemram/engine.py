"""Event-driven macro simulation.

Input spike pairs raise and lower per-row event flags.  The global flag is
the OR of the row flags and stays high until the last input event completes;
while it is high every column integrates its active conductance onto C_rt.
When it falls, the first output spike fires and the reference ramp starts;
each column's comparator crossing fires the second spike.

No clock exists anywhere: work is only done at event boundaries, and rows
whose input is zero generate no events at all.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np

from . import kernels
from .analog import ChargeState, charge_from_integral
from .codec import FS, InputVector
from .config import IDEAL, MODES, NONIDEAL, MacroConfig
from .device import CrossbarArray
from .errors import DimensionError, ValidationError


class EventKind(enum.IntEnum):
    # value doubles as the tie-break rank for simultaneous events
    SPIKE_FALL = 0
    SPIKE_RISE = 1
    GLOBAL_FLAG_FALL = 2
    COMPARATOR_CROSS = 3


@dataclass(frozen=True, order=True)
class Event:
    time: int  # fs
    kind: EventKind
    index: int = -1  # row for spikes, column for crossings


class Phase(enum.IntEnum):
    IDLE = 0
    ACCUMULATING = 1
    COMPARING = 2
    DONE = 3


@dataclass
class MacroState:
    row_flags: np.ndarray
    global_flag: bool = False
    column_charge: List[ChargeState] = field(default_factory=list)
    phase: Phase = Phase.IDLE

    def advance(self, phase: Phase):
        if phase < self.phase:
            raise RuntimeError(f"illegal phase transition {self.phase.name} -> {phase.name}")
        self.phase = phase


@dataclass
class MvmResult:
    """Outcome of one MVM.

    ``t_out`` is per-column in seconds (not rounded to the fs grid);
    ``t_first_out_fs`` is the shared first output spike, i.e. the global
    flag fall.
    """

    t_first_out_fs: int
    t_out: np.ndarray
    v_charge_final: np.ndarray
    saturated: np.ndarray
    event_count: int
    mode: str = IDEAL
    trace: Optional[list] = None

    @property
    def t_out_fs(self) -> np.ndarray:
        return np.rint(self.t_out / FS).astype(np.int64)

    @property
    def t_second_out(self) -> np.ndarray:
        return self.t_first_out_fs * FS + self.t_out

    def __eq__(self, other):
        if not isinstance(other, MvmResult):
            return NotImplemented
        return (self.t_first_out_fs == other.t_first_out_fs
                and np.array_equal(self.t_out, other.t_out)
                and np.array_equal(self.v_charge_final, other.v_charge_final)
                and np.array_equal(self.saturated, other.saturated)
                and self.event_count == other.event_count
                and self.mode == other.mode
                and self.trace == other.trace)


def _spike_arrays(inputs: InputVector):
    """Sorted (times, kinds, rows) for all rows with a nonzero interval."""
    active = np.flatnonzero(inputs.intervals_fs > 0)
    n = len(active)
    times = np.concatenate([inputs.starts[active], inputs.ends[active]])
    kinds = np.concatenate([np.full(n, kernels.RISE, np.int8), np.full(n, kernels.FALL, np.int8)])
    rows = np.concatenate([active, active]).astype(np.int64)
    order = np.lexsort((rows, kinds, times))
    return (np.ascontiguousarray(times[order]), np.ascontiguousarray(kinds[order]),
            np.ascontiguousarray(rows[order]))


def schedule_inputs(inputs: InputVector) -> List[Event]:
    """Ordered event queue for one input vector.

    Spike rise/fall per active row, followed by the global flag fall at the
    end of the last input event.  An all-zero vector schedules nothing.
    """
    if (inputs.starts < 0).any():
        raise ValidationError("negative spike time")
    times, kinds, rows = _spike_arrays(inputs)
    queue = [Event(int(t), EventKind(int(k)), int(r)) for t, k, r in zip(times, kinds, rows)]
    if queue:
        queue.append(Event(int(times.max()), EventKind.GLOBAL_FLAG_FALL))
    return queue


class EventEngine:
    """Single-threaded simulator for one macro."""

    def __init__(self, array: CrossbarArray, cfg: MacroConfig):
        self.array = array
        self.cfg = cfg
        self.state = MacroState(np.zeros(array.rows, dtype=bool))

    def run(self, inputs: InputVector, mode: Optional[str] = None,
            trace: bool = False) -> MvmResult:
        cfg = self.cfg
        mode = cfg.mode if mode is None else mode
        if mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
        if len(inputs) != self.array.rows:
            raise DimensionError(f"input vector has {len(inputs)} rows, array has {self.array.rows}")
        cols = self.array.cols
        self.state = state = MacroState(np.zeros(self.array.rows, dtype=bool))
        times, kinds, rows = _spike_arrays(inputs)
        n = len(times)

        state.advance(Phase.ACCUMULATING)
        state.global_flag = n > 0
        nonideal = mode == NONIDEAL
        G = self.array.conductances
        snaps = None
        if n == 0:
            out = np.zeros(cols)
        elif trace:
            out, snaps = kernels.accumulate_py(times, kinds, rows, G, nonideal,
                                               cfg.v_read, cfg.c_rt, snapshots=True)
        else:
            out = kernels.accumulate(times, kinds, rows, G, nonideal, cfg.v_read, cfg.c_rt)
        out = np.asarray(out)

        # global flag fall: charging stops, first output spike, ramp starts
        state.global_flag = False
        state.advance(Phase.COMPARING)
        v = out if nonideal else self._ideal_voltage(out)
        saturated = v > cfg.v_limit
        state.column_charge = [ChargeState(float(x), bool(s)) for x, s in zip(v, saturated)]

        if n == 0:
            t_out = np.zeros(cols)
            t_first = 0
            count = 0
        else:
            ramp = np.maximum(cfg.c_com * (v + cfg.comparator_offset) / cfg.i_com, 0.0)
            t_out = ramp + cfg.comparator_delay
            t_first = int(times[-1])
            count = n + 1 + cols
        state.advance(Phase.DONE)

        rec = None
        if trace:
            rec = self._trace(times, kinds, rows, snaps, nonideal, t_first, t_out)
        return MvmResult(t_first, t_out, v, saturated, count, mode, rec)

    def _ideal_voltage(self, tg_fs):
        return charge_from_integral(tg_fs * FS, self.cfg)

    def _trace(self, times, kinds, rows, snaps, nonideal, t_first, t_out):
        """Signal log as (time_fs, signal_name, value) rows."""
        rec = []
        cols = self.array.cols
        for i in range(len(times)):
            t = int(times[i])
            v = snaps[i] if nonideal else self._ideal_voltage(snaps[i])
            for c in range(cols):
                rec.append((t, f"v_charge[{c}]", float(v[c])))
            if i == 0:
                rec.append((t, "global_flag", 1))
            rec.append((t, f"row_flag[{int(rows[i])}]", int(kinds[i] == kernels.RISE)))
        if len(times):
            final = self.state.column_charge
            for c in range(cols):
                rec.append((t_first, f"v_charge[{c}]", final[c].v_charge))
            rec.append((t_first, "global_flag", 0))
            rec.append((t_first, "out_spike_first", 1))
            for c in range(cols):
                rec.append((t_first + int(round(t_out[c] / FS)), f"out_spike[{c}]", 1))
        rec.sort(key=lambda r: r[0])
        return rec


def run_mvm(array: CrossbarArray, inputs: InputVector, cfg: MacroConfig,
            mode: Optional[str] = None, trace: bool = False) -> MvmResult:
    return EventEngine(array, cfg).run(inputs, mode, trace)


def run_mvm_batch(array: CrossbarArray, batch: Iterable[InputVector], cfg: MacroConfig,
                  mode: Optional[str] = None) -> List[MvmResult]:
    engine = EventEngine(array, cfg)
    return [engine.run(inputs, mode) for inputs in batch]


def write_trace_csv(path, trace):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_fs", "signal_name", "value"])
        for t, name, value in trace:
            w.writerow([t, name, f"{value:.9g}" if isinstance(value, float) else value])
