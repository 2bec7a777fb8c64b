"""Readout-path models: clamped read, mirrored charge on C_rt, reference ramp.

Charge balance at the second output spike::

    k * V_read * sum_i(T_i * G_i) = C_rt * V_charge      (mirrored charge)
    C_com * V_charge = I_com * T_out                     (reference ramp)

so ``T_out = alpha * sum_i(T_i * G_i)`` with
``alpha = k * V_read * C_com / (I_com * C_rt)``.  Charge balance puts C_com in
the numerator; the two capacitors default to the same 200 fF so the
distinction is only visible when they are set unequal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .config import MacroConfig
from .errors import DegradationError, DimensionError, ValidationError


@dataclass(frozen=True)
class ChargeState:
    v_charge: float
    saturated: bool = False


def alpha(cfg: MacroConfig) -> float:
    """Proportionality constant (Ohm) between ``sum T*G`` and ``T_out``."""
    return cfg.k_mirror * cfg.v_read * cfg.c_com / (cfg.i_com * cfg.c_rt)


def charge_from_integral(tg_sum: float, cfg: MacroConfig) -> float:
    """V_charge produced by mirrored accumulation of ``sum T*G`` (S*s)."""
    return cfg.k_mirror * cfg.v_read * tg_sum / cfg.c_rt


def ideal_charge(intervals: Sequence[float], conductances: Sequence[float],
                 cfg: MacroConfig) -> ChargeState:
    """Closed-form C_rt voltage with the clamp + current mirror in place."""
    t = np.asarray(intervals, dtype=np.float64)
    g = np.asarray(conductances, dtype=np.float64)
    if t.shape != g.shape:
        raise DimensionError(f"{t.size} intervals vs {g.size} conductances")
    if (t < 0).any():
        raise ValidationError("intervals must be non-negative")
    if (g <= 0).any():
        raise ValidationError("conductances must be positive")
    v = charge_from_integral(math.fsum((t * g).tolist()), cfg)
    return ChargeState(v, v > cfg.v_limit)


def output_interval(v_charge: float, cfg: MacroConfig) -> float:
    """Time for the I_com ramp on C_com to reach ``v_charge`` (s)."""
    if v_charge < 0:
        raise ValidationError(f"v_charge must be >= 0, got {v_charge!r}")
    ramp = cfg.c_com * (v_charge + cfg.comparator_offset) / cfg.i_com
    return max(ramp, 0.0) + cfg.comparator_delay


def rc_step(v, g_total, dt, cfg: MacroConfig):
    """Advance direct bitline charging of C_rt by ``dt`` at constant conductance.

    Exact solution of ``dV/dt = G (V_read - V) / C_rt`` over one segment.
    """
    return v - (cfg.v_read - v) * np.expm1(-np.asarray(g_total) * dt / cfg.c_rt)


def _segments(profile, duration):
    """Normalise a profile to sorted ``(t_start, g)`` breakpoints from t=0."""
    if np.ndim(profile) == 0:
        profile = [(0.0, float(profile))]
    pts = sorted((float(t), float(g)) for t, g in profile)
    if not pts or pts[0][0] > 0:
        pts.insert(0, (0.0, 0.0))
    if any(g < 0 for _, g in pts):
        raise ValidationError("conductance profile must be non-negative")
    if any(t < 0 for t, _ in pts):
        raise ValidationError("profile breakpoints must be >= 0")
    return [(t, g) for t, g in pts if t < duration] or [(0.0, 0.0)]


@dataclass(frozen=True)
class ChargeTrace:
    t: np.ndarray
    v_ideal: np.ndarray
    v_nonideal: np.ndarray


def nonideal_charge_trace(active_profile, cfg: MacroConfig, duration: float,
                          n_samples: int = 101):
    """Charge C_rt directly from the bitline over a piecewise-constant profile.

    Parameters
    ----------
    active_profile : float or sequence of (t_start, g_total)
        Total active bitline conductance (S); a scalar means constant.
    duration : float
        Charging window (s).

    Returns
    -------
    (ChargeState, ChargeTrace)
        Final state and samples on a uniform grid.  ``v_ideal`` is the
        droop-free linear charge ``V_read * integral(G dt) / C_rt``.
    """
    if not duration > 0:
        raise ValidationError(f"duration must be positive, got {duration!r}")
    segs = _segments(active_profile, duration)
    starts = np.array([t for t, _ in segs])
    gs = np.array([g for _, g in segs])
    ends = np.append(starts[1:], duration)

    # voltages at segment starts
    v0 = np.zeros(len(segs))
    q0 = np.zeros(len(segs))
    for i in range(1, len(segs)):
        dt = ends[i - 1] - starts[i - 1]
        v0[i] = rc_step(v0[i - 1], gs[i - 1], dt, cfg)
        q0[i] = q0[i - 1] + gs[i - 1] * dt

    t = np.linspace(0.0, duration, max(int(n_samples), 2))
    idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(segs) - 1)
    local = t - starts[idx]
    v_non = rc_step(v0[idx], gs[idx], local, cfg)
    v_id = cfg.v_read * (q0[idx] + gs[idx] * local) / cfg.c_rt

    last = len(segs) - 1
    v_final = float(rc_step(v0[last], gs[last], ends[last] - starts[last], cfg))
    return ChargeState(v_final, v_final > cfg.v_limit), ChargeTrace(t, v_id, v_non)


def ideal_direct_charge(g_total: float, duration: float, cfg: MacroConfig) -> float:
    """Linear charge with the same initial slope as direct charging."""
    return cfg.v_read * g_total * duration / cfg.c_rt


def degradation(nonideal_v: float, ideal_v: float) -> float:
    """Fractional voltage loss ``1 - nonideal/ideal`` clamped to [0, 1]."""
    if ideal_v == 0:
        raise DegradationError("degradation undefined for zero ideal voltage")
    return min(max(1.0 - nonideal_v / ideal_v, 0.0), 1.0)


def single_pole_degradation(x):
    """Closed-form degradation ``1 - (1 - e^-x)/x`` at ``x = t * G / C_rt``."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 1.0 + np.expm1(-x) / x
    return np.where(x == 0, 0.0, out)


def calibrate_gtotal(target: float, duration: float, cfg: MacroConfig) -> float:
    """Constant bitline conductance giving ``target`` degradation at ``duration``."""
    if not 0 < target < 1:
        raise ValidationError("target degradation must lie in (0, 1)")
    x = brentq(lambda x: float(single_pole_degradation(x)) - target, 1e-12, 1e4, xtol=1e-15)
    return x * cfg.c_rt / duration
