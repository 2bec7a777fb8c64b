"""Command-line front end.

Exit codes: 0 ok, 1 validation failure, 2 I/O failure.  Log verbosity comes
from ``SPIKEMRAM_LOG`` (e.g. ``DEBUG``; default ``WARNING``).
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import re
import sys
import time

from . import kernels
from .analog import alpha, calibrate_gtotal
from .codec import InputVector, read_inputs_csv
from .config import MODES, RunConfig, dump_config, load_config
from .device import program_array, read_weights_csv
from .energy import energy_report
from .engine import run_mvm, write_trace_csv
from .errors import CorruptionError, RegressionError, ValidationError
from .selftest import run_selftest
from .workload import linearity_sweep, nonideal_comparison, write_comparison_csv

log = logging.getLogger("spikemram")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2

_PREFIX = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "": 1.0}
_QUANTITY = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([fpnuµm]?)(s|S)?\s*$")


def parse_quantity(text: str, unit: str) -> float:
    """Parse ``5ns``, ``17.8uS``, ``1e-9`` and similar into SI base units."""
    m = _QUANTITY.match(text)
    if not m or (m.group(3) and m.group(3) != unit):
        raise ValidationError(f"cannot parse {text!r} as a quantity in {unit}")
    if m.group(2) and not m.group(3):
        raise ValidationError(f"{text!r}: SI prefix without unit")
    return float(m.group(1)) * _PREFIX[m.group(2)]


def _config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def cmd_simulate(args) -> int:
    rc = _config(args)
    cfg = rc.macro
    weights = read_weights_csv(args.weights, cfg)
    d = read_inputs_csv(args.inputs, cfg.timing)
    if len(d) != weights.shape[0]:
        raise ValidationError(f"input vector has {len(d)} entries, weight matrix has "
                              f"{weights.shape[0]} rows")
    array = program_array(weights, cfg)
    res = run_mvm(array, InputVector.from_digital(d, cfg.timing), cfg, args.mode,
                  trace=bool(args.trace))
    a = alpha(cfg)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["col", "t_out_fs", "v_charge_V", "decoded_Ss", "saturated"])
        for c in range(array.cols):
            w.writerow([c, int(res.t_out_fs[c]), f"{res.v_charge_final[c]:.9g}",
                        f"{res.t_out[c] / a:.9g}", int(res.saturated[c])])
    if args.trace:
        write_trace_csv(args.trace, res.trace)
    n_sat = int(res.saturated.sum())
    if n_sat:
        log.warning("%d column(s) saturated above %.3g V", n_sat, cfg.v_limit)
    print(f"events={res.event_count} t_first_out_fs={res.t_first_out_fs} saturated={n_sat}")
    return EXIT_OK


def cmd_sweep_linearity(args) -> int:
    rc = _config(args)
    if args.n < 2:
        raise ValidationError("--n must be >= 2")
    seed = rc.seed if args.seed is None else args.seed
    t0 = time.perf_counter()
    rep = linearity_sweep(args.n, seed, rc.macro, args.mode, args.rows, args.cols)
    log.info("sweep of %d cases took %.2f s (%s kernel)", args.n, time.perf_counter() - t0,
             kernels.BACKEND)
    rep.write_scatter_csv(args.out)
    summary = "".join(f"{k}={v}\n" for k, v in rep.summary_pairs())
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_nonideal_compare(args) -> int:
    rc = _config(args)
    times = [parse_quantity(t, "s") for t in args.times.split(",") if t.strip()]
    if not times:
        raise ValidationError("--times must list at least one duration")
    if args.gtotal is None:
        g = calibrate_gtotal(0.193, 5e-9, rc.macro)
        log.info("calibrated g_total=%.6g S for 19.3%% at 5 ns", g)
    else:
        g = parse_quantity(args.gtotal, "S")
    rows = nonideal_comparison(times, g, rc.macro)
    write_comparison_csv(args.out, rows, g)
    for r in rows:
        ref = "" if r.paper_degradation is None else f" reported={100 * r.paper_degradation:.1f}%"
        print(f"t={r.t * 1e9:.6g}ns g_total={g:.6g}S degradation={100 * r.degradation:.2f}%{ref}")
    return EXIT_OK


def cmd_energy_report(args) -> int:
    rc = _config(args)
    if args.mvms < 0:
        raise ValidationError("--mvms must be >= 0")
    rep = energy_report(args.mvms, rc.energy, rc.macro.rows, rc.macro.cols)
    text = rep.to_csv() if str(args.out).endswith(".csv") else rep.to_text()
    with open(args.out, "w") as fh:
        fh.write(text)
    sys.stdout.write(rep.to_text())
    return EXIT_OK


def cmd_selftest(args) -> int:
    rc = _config(args)
    print(f"kernel backend: {kernels.BACKEND}")
    return EXIT_OK if run_selftest(rc.macro) else EXIT_VALIDATION


class _Parser(argparse.ArgumentParser):
    # usage errors are validation failures; exit code 2 is reserved for I/O
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spikemram",
                description="Event-driven dual-spike SOT-MRAM CIM macro simulator")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--print-config", action="store_true",
                   help="print the effective configuration and exit")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")

    sp = sub.add_parser("simulate", help="run one MVM")
    common(sp)
    sp.add_argument("--weights", required=True)
    sp.add_argument("--inputs", required=True)
    sp.add_argument("--mode", choices=MODES, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--trace")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep-linearity", help="seeded linearity sweep against the exact oracle")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=MODES, default=None)
    sp.add_argument("--rows", type=int)
    sp.add_argument("--cols", type=int)
    sp.add_argument("--out", required=True, help="scatter CSV (case_id,sum_tg,t_out)")
    sp.add_argument("--summary", help="also write the key=value summary here")
    sp.set_defaults(func=cmd_sweep_linearity)

    sp = sub.add_parser("nonideal-compare", help="direct vs mirrored charging of C_rt")
    common(sp)
    sp.add_argument("--gtotal", help="bitline conductance, e.g. 17.8uS (default: calibrated)")
    sp.add_argument("--times", required=True, help="comma list, e.g. 5ns,10ns")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_nonideal_compare)

    sp = sub.add_parser("energy-report", help="energy and TOPS/W accounting")
    common(sp)
    sp.add_argument("--mvms", type=int, default=1)
    sp.add_argument("--out", required=True, help=".csv for CSV, anything else for key=value")
    sp.set_defaults(func=cmd_energy_report)

    sp = sub.add_parser("selftest", help="oracle, superposition and calibration suites")
    common(sp)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SPIKEMRAM_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.print_config:
            sys.stdout.write(dump_config(_config(args)))
            return EXIT_OK
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_VALIDATION
        return args.func(args)
    except (ValidationError, CorruptionError, RegressionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
