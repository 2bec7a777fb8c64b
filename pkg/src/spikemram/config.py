"""Circuit, timing and energy configuration.

Every default below is a circuit constant of the 28 nm macro (Table-I style
parameters) or a documented modelling choice.  Configurations are frozen
dataclasses; :func:`load_config` / :func:`dump_config` move them to and from
JSON, rejecting unknown keys.
"""
from __future__ import annotations

import dataclasses
import json
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

IDEAL = "ideal"
NONIDEAL = "nonideal"
MODES = (IDEAL, NONIDEAL)

#: full-array MVM ops at 128x128 with 2 ops per MAC
_DEFAULT_OPS = 128 * 128 * 2
#: reported peak efficiency used to back-solve the per-MVM energy
PEAK_TOPS_PER_W = 243.6
#: reported output-spike-generator share of total power
OSG_FRACTION = 0.726


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be a positive finite number, got {value!r}")


def _nonnegative(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        raise ConfigError(f"{name} must be a non-negative finite number, got {value!r}")


@dataclass(frozen=True)
class TimingConfig:
    """Dual-spike timing: one input LSB maps to ``dt_lsb`` seconds of interval."""

    dt_lsb: float = 0.2e-9
    input_bits: int = 8

    def __post_init__(self):
        _positive("timing.dt_lsb", self.dt_lsb)
        if not isinstance(self.input_bits, int) or self.input_bits < 1:
            raise ConfigError(f"timing.input_bits must be an integer >= 1, got {self.input_bits!r}")
        if round(self.dt_lsb * 1e15) < 1:
            raise ConfigError("timing.dt_lsb must be at least 1 fs")

    @property
    def max_code(self) -> int:
        return (1 << self.input_bits) - 1

    @property
    def dt_lsb_fs(self) -> int:
        """LSB interval in integer femtoseconds (engine time base)."""
        return int(round(self.dt_lsb * 1e15))


@dataclass(frozen=True)
class MacroConfig:
    """All circuit constants of one macro.

    Parameters
    ----------
    v_clamp, v_in_clamp : float
        Bitline clamp and input clamp voltages (V).  The cell read voltage is
        their difference.
    c_rt, c_com : float
        Result and reference capacitors (F).
    k_mirror : float
        Current-mirror gain from bitline to ``c_rt``.
    i_com : float
        Reference ramp current charging ``c_com`` (A).
    vdd : float
        Supply (V).
    saturation_limit : float or None
        ``v_charge`` above this is flagged saturated; ``None`` means ``vdd``.
    r_low, tmr : float
        J1 low-resistance value (Ohm) and tunnel magnetoresistance ratio.
        J2 is built with twice J1's resistance.
    rows, cols : int
        Physical array size.
    variation_sigma, variation_seed
        Per-cell multiplicative resistance spread; 0 disables it.
    comparator_offset, comparator_delay
        Comparator non-idealities (V, s); both 0 for the ideal comparator.
    mode : {"ideal", "nonideal"}
        ``ideal`` charges ``c_rt`` through the clamp + current mirror;
        ``nonideal`` charges it directly from the bitline (single-pole droop).
    """

    v_clamp: float = 0.4
    v_in_clamp: float = 0.3
    c_rt: float = 200e-15
    c_com: float = 200e-15
    k_mirror: float = 1.0
    i_com: float = 20e-6
    vdd: float = 1.1
    saturation_limit: typing.Optional[float] = None
    r_low: float = 1e6
    tmr: float = 1.0
    rows: int = 128
    cols: int = 128
    variation_sigma: float = 0.0
    variation_seed: int = 0
    comparator_offset: float = 0.0
    comparator_delay: float = 0.0
    mode: str = IDEAL
    timing: TimingConfig = field(default_factory=TimingConfig)

    def __post_init__(self):
        for name in ("c_rt", "c_com", "k_mirror", "i_com", "vdd", "r_low"):
            _positive(name, getattr(self, name))
        for name in ("v_clamp", "v_in_clamp", "tmr", "variation_sigma", "comparator_delay"):
            _nonnegative(name, getattr(self, name))
        if not math.isfinite(self.comparator_offset):
            raise ConfigError("comparator_offset must be finite")
        if self.v_read <= 0:
            raise ConfigError(
                f"v_clamp ({self.v_clamp}) must exceed v_in_clamp ({self.v_in_clamp})"
            )
        if self.v_clamp > self.vdd:
            raise ConfigError(f"v_clamp ({self.v_clamp}) exceeds vdd ({self.vdd})")
        if self.saturation_limit is not None:
            _positive("saturation_limit", self.saturation_limit)
        for name in ("rows", "cols"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.timing, TimingConfig):
            raise ConfigError("timing must be a TimingConfig")

    @property
    def v_read(self) -> float:
        return self.v_clamp - self.v_in_clamp

    @property
    def v_limit(self) -> float:
        return self.vdd if self.saturation_limit is None else self.saturation_limit

    def replace(self, **changes) -> "MacroConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PowerBreakdown:
    """Fraction of total energy per macro component."""

    osg: float = OSG_FRACTION
    smu: float = 0.12
    array: float = 0.10
    control: float = 0.054

    #: components whose share is a placeholder rather than a reported number
    UNCALIBRATED: typing.ClassVar[tuple] = ("smu", "array", "control")

    def __post_init__(self):
        for name, value in self.items():
            _nonnegative(f"breakdown.{name}", value)
        total = sum(value for _, value in self.items())
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"power breakdown fractions sum to {total!r}, expected 1.0")

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in dataclasses.fields(self)]


@dataclass(frozen=True)
class EnergyConfig:
    """Per-MVM energy calibration.

    ``e_mvm`` defaults to the energy that makes one full 128x128 MVM at 2 ops
    per MAC hit the reported 243.6 TOPS/W (about 134.52 pJ).  It is a
    calibration constant, not a prediction.
    """

    e_mvm: float = _DEFAULT_OPS / (PEAK_TOPS_PER_W * 1e12)
    ops_per_mac: int = 2
    e_per_spike: float = 0.0
    breakdown: PowerBreakdown = field(default_factory=PowerBreakdown)

    def __post_init__(self):
        _positive("energy.e_mvm", self.e_mvm)
        _nonnegative("energy.e_per_spike", self.e_per_spike)
        if self.ops_per_mac not in (1, 2):
            raise ConfigError(f"energy.ops_per_mac must be 1 or 2, got {self.ops_per_mac!r}")


@dataclass(frozen=True)
class RunConfig:
    macro: MacroConfig = field(default_factory=MacroConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")


def _from_dict(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{where or 'config'}: unknown field(s) {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        hint = hints[name]
        key = f"{where}.{name}" if where else name
        if dataclasses.is_dataclass(hint):
            kwargs[name] = _from_dict(hint, value, key)
        elif hint is float and isinstance(value, int) and not isinstance(value, bool):
            kwargs[name] = float(value)
        else:
            if isinstance(value, bool) or (hint is int and not isinstance(value, int)):
                raise ConfigError(f"{key}: expected {getattr(hint, '__name__', hint)}, got {value!r}")
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    return _from_dict(RunConfig, data, "")


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)


def load_config(path) -> RunConfig:
    """Read a JSON run configuration.  Missing keys take defaults."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"
