"""Event-driven behavioural simulator of a dual-spike SOT-MRAM compute-in-memory macro."""
from .analog import (ChargeState, alpha, calibrate_gtotal, degradation, ideal_charge,
                     nonideal_charge_trace, output_interval)
from .codec import InputVector, SpikePair, decode_interval, encode, interval
from .config import EnergyConfig, MacroConfig, PowerBreakdown, RunConfig, TimingConfig
from .device import (Cell3T2J, CrossbarArray, MtjDevice, MtjState, mtj_resistance,
                     program_array, program_cell, read_weight)
from .energy import EnergyReport, efficiency, energy_report, ops_count
from .engine import Event, EventKind, MvmResult, run_mvm, run_mvm_batch, schedule_inputs
from .kernels import BACKEND
from .workload import (ExactMacValue, SweepReport, TilePlan, baseline_correct,
                       exact_mac_oracle, linearity_sweep, nonideal_comparison, tile_matrix)

__version__ = "0.1.0"
