"""Compare the numba and pure-numpy kernel paths.

Kernel timings call both twins directly on the same inputs.  The end-to-end
timing runs a small campaign in two subprocesses, one with TRACELAB_NUMBA=0.

    python3 benchmarks/bench_kernels.py [--sizes 8 64 512] [--repeat 200]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from tracelab import _kernels as K

KERNELS = ("canonical_steps", "weighted_sum", "distribution", "mu_eval", "mu_inf")

CAMPAIGN = """
import time
from tracelab._kernels import BACKEND
from tracelab.harness import TrialConfig, run_campaign
cfg = TrialConfig(master_seed=1, trials=1, tuple_sizes=(2,))
run_campaign(cfg, ["tr1", "mt1"])  # warm up (numba compiles or loads its cache)
t = time.perf_counter()
run_campaign(TrialConfig(master_seed=1, trials={trials}, tuple_sizes=(2, 3)), ["tr1", "mt1", "cor3.3"])
print(BACKEND, time.perf_counter() - t)
"""


def inputs(k, rng):
    values = rng.gamma(2.0, size=k)
    values[: k // 4] = values[0]  # some ties, so canonicalization merges
    lengths = rng.uniform(0.25, 4.0, size=k)
    cv, cl = K.canonical_steps_np(values, lengths)
    ts = rng.uniform(0, lengths.sum(), size=64)
    return {
        "canonical_steps": (values, lengths),
        "weighted_sum": (values, lengths),
        "distribution": (values, lengths, ts),
        "mu_eval": (cv, cl, ts),
        "mu_inf": (values, lengths, ts),
    }


def bench_kernels(sizes, repeat):
    if not K.HAS_NUMBA:
        print("numba not importable; only the numpy path exists")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':16s} {'size':>6s} {'numpy us':>10s} {'numba us':>10s} {'speedup':>8s}")
    for k in sizes:
        args = inputs(k, rng)
        for name in KERNELS:
            f_np = getattr(K, name + "_np")
            f_nb = getattr(K, name + "_nb")
            f_nb(*args[name])  # compile outside the timing
            t_np = min(timeit.repeat(lambda: f_np(*args[name]), number=repeat, repeat=3)) / repeat
            t_nb = min(timeit.repeat(lambda: f_nb(*args[name]), number=repeat, repeat=3)) / repeat
            print(f"{name:16s} {k:6d} {t_np * 1e6:10.2f} {t_nb * 1e6:10.2f} {t_np / t_nb:8.2f}")


def bench_campaign(trials):
    print(f"\nend to end: tr1 + mt1 + cor3.3, {trials} trials per configuration")
    for flag in ("1", "0"):
        env = dict(os.environ, TRACELAB_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", CAMPAIGN.format(trials=trials)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:6s} {float(out[1]):8.3f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 64, 512])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--trials", type=int, default=50)
    args = ap.parse_args()
    bench_kernels(args.sizes, args.repeat)
    bench_campaign(args.trials)


if __name__ == "__main__":
    main()
