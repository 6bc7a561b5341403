"""Benchmark the delay integrator kernel: numba backend vs pure numpy.

Runs the same method-of-steps integration in both backends by launching a
subprocess with SURPLUS_CONSENSUS_PURE_NUMPY=1 for the numpy side, so each
process imports a clean copy of the kernel module.

Usage: python benchmarks/bench_integrator.py [--n 40] [--t-final 80] [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

_WORKER = """
import json, os, sys, time
import numpy as np
import surplus_consensus as sc
from surplus_consensus import _integrator

n, t_final, repeats, seed = json.loads(sys.argv[1])
g = sc.random_strongly_connected(n, extra_edges=3, seed=seed)
rng = np.random.default_rng(seed)
cfg = sc.SimConfig(epsilon=1.0, tau=0.1, x0=rng.uniform(-5, 5, n),
                   dt=0.001, t_final=t_final)
system = sc.build_system(g, cfg.epsilon)
sc.simulate(system, cfg)  # warm-up (includes JIT compilation on the numba path)
times = []
for _ in range(repeats):
    t0 = time.perf_counter()
    sc.simulate(system, cfg)
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": _integrator.backend(), "best": min(times),
                  "mean": sum(times) / len(times)}))
"""


def run_backend(pure_numpy, args):
    env = dict(os.environ)
    env["SURPLUS_CONSENSUS_PURE_NUMPY"] = "1" if pure_numpy else "0"
    payload = json.dumps([args.n, args.t_final, args.repeats, args.seed])
    out = subprocess.run([sys.executable, "-c", _WORKER, payload],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=40, help="graph size")
    parser.add_argument("--t-final", type=float, default=80.0)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    print("integrator benchmark: n=%d t_final=%g dt=0.001 repeats=%d"
          % (args.n, args.t_final, args.repeats))
    results = [run_backend(False, args), run_backend(True, args)]
    for r in results:
        print("  %-6s best=%.4fs mean=%.4fs" % (r["backend"], r["best"], r["mean"]))
    if results[0]["backend"] == results[1]["backend"]:
        print("  (numba unavailable; both runs used the numpy path)")
    else:
        print("  speedup (numpy/numba, best): %.1fx"
              % (results[1]["best"] / results[0]["best"]))


if __name__ == "__main__":
    main()
