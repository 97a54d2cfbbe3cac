"""Throughput of the two Monte Carlo back ends.

    python3 benchmarks/bench_montecarlo.py [--trials N] [--repeat R]

The numba back end is compiled (or loaded from cache) before timing.
"""
import argparse
import time

import numpy as np

from mimome_tas import SystemConfig
from mimome_tas import montecarlo as mc
from mimome_tas._jit import HAS_NUMBA

CONFIGS = {
    "M=16 L=8 Nr=Ne=2": SystemConfig(16, 8, 2, 2, 1.0, 10 ** -0.5),
    "M=128 L=8 Nr=4 Ne=8": SystemConfig(128, 8, 4, 8, 1.0, 0.1),
    "M=128 L=32 Nr=4 Ne=2": SystemConfig(128, 32, 4, 2, 1.0, 0.1),
}


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    if HAS_NUMBA:
        t0 = time.perf_counter()
        mc.simulate_trials(CONFIGS["M=16 L=8 Nr=Ne=2"], 10, 0, backend="numba")
        print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.2f} s")
    else:
        print("numba unavailable or disabled; timing the numpy back end only")

    print(f"{'config':<24}{'backend':<8}{'seconds':>10}{'trials/s':>12}{'max |diff|':>12}")
    for name, cfg in CONFIGS.items():
        ref = mc.simulate_trials(cfg, args.trials, 1, backend="numpy").R_s
        for backend in backends:
            run = lambda: mc.simulate_trials(cfg, args.trials, 1, backend=backend)  # noqa: E731
            seconds = best_time(run, args.repeat)
            diff = float(np.max(np.abs(run().R_s - ref)))
            print(f"{name:<24}{backend:<8}{seconds:>10.3f}{args.trials / seconds:>12.0f}"
                  f"{diff:>12.1e}")


if __name__ == "__main__":
    main()
