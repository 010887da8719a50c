# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gillespie batch loop.

Draws doubles straight from the numpy bit generator through its C interface,
in the same order as the pure-Python fallback.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log, INFINITY

import numpy as np

from numpy.random cimport bitgen_t

BACKEND = "cython"


def run_batch(pos0, long L, long n_traj, kidx, ts, thr, bit_generator):
    """Count trajectories where every recorded position meets its threshold."""
    cdef long[::1] pos0_v = np.ascontiguousarray(pos0, dtype=np.int64)
    cdef long[::1] kidx_v = np.ascontiguousarray(kidx, dtype=np.int64)
    cdef double[::1] ts_v = np.ascontiguousarray(ts, dtype=np.float64)
    cdef long[::1] thr_v = np.ascontiguousarray(thr, dtype=np.int64)
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator"
    )
    cdef long N = pos0_v.shape[0]
    cdef long m = ts_v.shape[0]
    cdef long[::1] pos = np.empty(N, dtype=np.int64)
    cdef long[::1] elig = np.empty(N, dtype=np.int64)
    cdef long successes = 0, tr, i, p, n_elig, j, nxt
    cdef double t, tn, u
    cdef bint ok

    for tr in range(n_traj):
        for i in range(N):
            pos[i] = pos0_v[i]
        t = 0.0
        p = 0
        ok = True
        while ok and p < m:
            n_elig = 0
            for i in range(N):
                nxt = pos[(i + 1) % N] + (L if i == N - 1 else 0)
                if nxt > pos[i] + 1:
                    elig[n_elig] = i
                    n_elig += 1
            if n_elig > 0:
                u = rng.next_double(rng.state)
                tn = t - log(1.0 - u) / n_elig
            else:
                tn = INFINITY
            while p < m and ts_v[p] <= tn:
                if pos[kidx_v[p]] < thr_v[p]:
                    ok = False
                    break
                p += 1
            if (not ok) or p >= m:
                break
            t = tn
            u = rng.next_double(rng.state)
            j = <long>(u * n_elig)
            if j >= n_elig:
                j = n_elig - 1
            pos[elig[j]] += 1
        if ok:
            successes += 1
    return successes
