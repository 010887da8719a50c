"""Pure-Python Gillespie batch loop.

Consumes the bit generator stream in exactly the same order as the compiled
loop, so both backends produce identical results for the same seed.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def run_batch(pos0, L, n_traj, kidx, ts, thr, bit_generator) -> int:
    """Count trajectories where every recorded position meets its threshold.

    pos0: initial covering-line positions (sorted, int64).
    kidx/ts/thr: per-observation particle index, time (sorted), and threshold.
    """
    gen = np.random.Generator(bit_generator)
    next_double = gen.random
    N = len(pos0)
    m = len(ts)
    successes = 0
    pos = [0] * N
    for _ in range(n_traj):
        for i in range(N):
            pos[i] = int(pos0[i])
        t = 0.0
        p = 0
        ok = True
        while ok and p < m:
            elig = [
                i
                for i in range(N)
                if pos[(i + 1) % N] + (L if i == N - 1 else 0) > pos[i] + 1
            ]
            n_elig = len(elig)
            if n_elig:
                u = next_double()
                tn = t - math.log(1.0 - u) / n_elig
            else:
                tn = math.inf
            while p < m and ts[p] <= tn:
                if pos[kidx[p]] < thr[p]:
                    ok = False
                    break
                p += 1
            if not ok or p >= m:
                break
            t = tn
            u = next_double()
            j = min(int(u * n_elig), n_elig - 1)
            pos[elig[j]] += 1
        if ok:
            successes += 1
    return successes
