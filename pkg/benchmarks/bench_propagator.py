"""Time the compiled and pure-Python integrators on the same gate run.

    python3 benchmarks/bench_propagator.py [--repeat N] [--n-max M]
"""

import argparse
import math
import time

import numpy as np

from tripodgate.hamiltonian import hamiltonian_spec
from tripodgate.hilbert import build_space, embed_product
from tripodgate.propagator import available_backends, integrate
from tripodgate.pulses import GateConfig, build_gate_schedule, mhz


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    space = build_space(args.n_max)
    cfg = GateConfig(kappa=mhz(2.05))
    spec = hamiltonian_spec(space, build_gate_schedule(cfg), cfg)
    kd = spec.kernel_data()
    psi0 = embed_product(space, np.array([1, 1]) / math.sqrt(2), [1, 0]).amplitudes
    times = np.array([spec.schedule.t_start, spec.schedule.t_end])

    print(f"dim={space.dim} nnz={len(kd.vals)} span={spec.schedule.duration:.3f} us tol={args.tol:g}")
    results = {}
    for name in available_backends():
        best = math.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            states, n_acc, n_rej = integrate(kd, psi0, times, args.tol, backend=name)
            best = min(best, time.perf_counter() - t0)
        results[name] = states[-1]
        print(f"{name:>9}: {best * 1e3:9.1f} ms  ({n_acc} steps, {n_rej} rejected)")
    if len(results) == 2:
        diff = np.abs(results["compiled"] - results["python"]).max()
        print(f"max |compiled - python| = {diff:.2e}")
    else:
        print("compiled extension not available; only the Python backend was timed")


if __name__ == "__main__":
    main()
