"""Benchmark the compiled Gillespie batch loop against the pure-Python fallback.

Both backends consume the same random stream in the same order, so for a
fixed seed they must produce identical success counts.  This script checks
that and reports the throughput of each backend.

Run as: python3 benchmarks/bench_gillespie.py
"""

import time

import numpy as np

from ptaseplab import make_step_ic
from ptaseplab.simulator import _observation_arrays
from ptaseplab import _gillespie_py

try:
    from ptaseplab import _gillespie
except ImportError:
    _gillespie = None

from ptaseplab.core import Observation


def run(backend, n_traj, seed=12345):
    ic = make_step_ic(8, 4)
    obs = (Observation(2, 1.0, -1), Observation(3, 2.0, 0))
    kidx, ts, thr = _observation_arrays(ic, obs)
    pos0 = np.asarray(ic.y, dtype=np.int64)
    bg = np.random.Philox(key=seed)
    t0 = time.perf_counter()
    succ = backend.run_batch(pos0, ic.params.L, n_traj, kidx, ts, thr, bg)
    dt = time.perf_counter() - t0
    return succ, dt


def main():
    n_traj = 200_000
    py_succ, py_dt = run(_gillespie_py, n_traj)
    print(f"python : {n_traj} trajectories in {py_dt:8.3f}s "
          f"({n_traj / py_dt:12.0f}/s)  successes={py_succ}")
    if _gillespie is None:
        print("compiled backend not built; skipping comparison")
        return
    cy_succ, cy_dt = run(_gillespie, n_traj)
    print(f"cython : {n_traj} trajectories in {cy_dt:8.3f}s "
          f"({n_traj / cy_dt:12.0f}/s)  successes={cy_succ}")
    assert cy_succ == py_succ, "backends diverged on identical seed"
    print(f"speedup: {py_dt / cy_dt:.1f}x, counts identical")


if __name__ == "__main__":
    main()
