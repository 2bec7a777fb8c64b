"""Energy and efficiency accounting.

Energy is charged per MVM window.  The default per-MVM energy is back-solved
from the reported peak efficiency (243.6 TOPS/W for a 128x128 MVM at 2 ops
per MAC, about 134.52 pJ), so reproducing that efficiency with the defaults is
a calibration identity rather than a prediction.  Only the output spike
generator share (72.6 %) is a reported figure; the other shares are
placeholders and are labelled ``uncalibrated`` in every report.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict

from .config import EnergyConfig, PowerBreakdown
from .errors import ValidationError


def ops_count(rows: int, cols: int, ops_per_mac: int = 2) -> int:
    if rows < 1 or cols < 1:
        raise ValidationError("array dimensions must be positive")
    return rows * cols * ops_per_mac


def efficiency(ops: int, total_energy: float) -> float:
    """Ops per joule in TOPS/W."""
    if not total_energy > 0:
        raise ValidationError("efficiency undefined for non-positive energy")
    return ops / total_energy / 1e12


@dataclass
class EnergyReport:
    total_energy: float
    per_component: Dict[str, float] = field(default_factory=dict)
    ops: int = 0
    tops_per_watt: float = 0.0
    n_mvm: int = 0
    uncalibrated: tuple = PowerBreakdown.UNCALIBRATED

    def as_pairs(self):
        pairs = [("n_mvm", self.n_mvm), ("ops", self.ops),
                 ("total_energy_J", f"{self.total_energy:.9g}"),
                 ("tops_per_watt", f"{self.tops_per_watt:.9g}")]
        for name, e in self.per_component.items():
            pairs.append((f"energy_{name}_J", f"{e:.9g}"))
        pairs.append(("uncalibrated_components", ",".join(self.uncalibrated)))
        return pairs

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_pairs())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "energy_J", "fraction", "calibrated"])
        for name, e in self.per_component.items():
            frac = e / self.total_energy if self.total_energy else 0.0
            w.writerow([name, f"{e:.9g}", f"{frac:.9g}", name not in self.uncalibrated])
        w.writerow(["total", f"{self.total_energy:.9g}", "1" if self.total_energy else "0", ""])
        w.writerow(["ops", self.ops, "", ""])
        w.writerow(["tops_per_watt", f"{self.tops_per_watt:.9g}", "", ""])
        return buf.getvalue()


def energy_report(n_mvm: int, cfg: EnergyConfig = EnergyConfig(), rows: int = 128,
                  cols: int = 128, n_spikes: int = 0) -> EnergyReport:
    """Energy of ``n_mvm`` full-array MVMs, split by the configured breakdown.

    ``n_spikes`` adds ``cfg.e_per_spike`` per input spike (0 J by default);
    that extra energy is attributed to the spike modulation unit.
    """
    if n_mvm < 0 or n_spikes < 0:
        raise ValidationError("n_mvm and n_spikes must be non-negative")
    bd = cfg.breakdown
    if abs(sum(v for _, v in bd.items()) - 1.0) > 1e-9:
        raise ValidationError("invalid power breakdown")
    window = n_mvm * cfg.e_mvm
    per = {name: frac * window for name, frac in bd.items()}
    per["smu"] += n_spikes * cfg.e_per_spike
    total = sum(per.values())
    ops = n_mvm * ops_count(rows, cols, cfg.ops_per_mac)
    tops = efficiency(ops, total) if total > 0 else 0.0
    return EnergyReport(total, per, ops, tops, n_mvm)
