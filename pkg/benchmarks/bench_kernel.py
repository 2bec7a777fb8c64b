"""Compare the compiled and numpy charge-accumulation kernels.

    python benchmarks/bench_kernel.py --cases 500
"""
import argparse
import time

import numpy as np

from spikemram import kernels
from spikemram.codec import InputVector
from spikemram.config import MacroConfig
from spikemram.device import program_array
from spikemram.engine import _spike_arrays


def make_cases(n, rows, cols, seed):
    cfg = MacroConfig(rows=rows, cols=cols)
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        arr = program_array(rng.integers(0, 4, (rows, cols)), cfg)
        d = rng.integers(0, 256, rows)
        t0 = rng.integers(0, 100, rows) * 1e-10
        cases.append((_spike_arrays(InputVector.from_digital(d, cfg.timing, t0)), arr.conductances))
    return cfg, cases


def bench(fn, cfg, cases, nonideal, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for ev, G in cases:
            fn(*ev, G, nonideal, cfg.v_read, cfg.c_rt)
        best = min(best, time.perf_counter() - start)
    return best / len(cases)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--rows", type=int, default=128)
    p.add_argument("--cols", type=int, default=128)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    cfg, cases = make_cases(args.cases, args.rows, args.cols, args.seed)
    impls = {"python": kernels.accumulate_py}
    try:
        from spikemram._kernel import accumulate
        impls["cython"] = accumulate
    except ImportError:
        print("compiled kernel not built; timing the numpy fallback only")

    print(f"{args.cases} MVMs, {args.rows}x{args.cols}, best of {args.repeat}")
    for mode, nonideal in (("ideal", False), ("nonideal", True)):
        times = {name: bench(fn, cfg, cases, nonideal, args.repeat) for name, fn in impls.items()}
        line = "  ".join(f"{name} {t * 1e6:8.1f} us/MVM" for name, t in times.items())
        if "cython" in times:
            line += f"  speedup {times['python'] / times['cython']:5.1f}x"
        print(f"{mode:9s} {line}")


if __name__ == "__main__":
    main()
