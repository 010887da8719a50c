"""Stochastic and exact Markov-chain references for the determinant formulas.

Two independent oracles live here: a Gillespie simulator (compiled batch loop
with a pure-Python fallback chosen at import time) and an exact
continuous-time Markov chain evaluation by uniformization.  Both express
joint events in particle coordinates on the covering line.
"""

from __future__ import annotations

import math

import numpy as np

from .core import InitialCondition, Observation, validate_observations
from .errors import ParameterError, ResourceError

try:
    from ._gillespie import BACKEND, run_batch
except ImportError:  # compiled extension unavailable
    from ._gillespie_py import BACKEND, run_batch

__all__ = [
    "BACKEND",
    "run_batch",
    "estimate_joint_prob",
    "simulate_to",
    "ctmc_exact_prob",
]


def _observation_arrays(ic: InitialCondition, obs):
    """Sorted (particle index, time, covering threshold) arrays.

    A label k outside [1, N] refers to the copy x_{k + jN} = x_k + jL, so the
    threshold is translated back onto the fundamental labels.
    """
    N = ic.params.N
    L = ic.params.L
    rows = []
    for o in obs:
        j, kidx = divmod(o.k - 1, N)
        rows.append((float(o.t), kidx, o.a - j * L))
    rows.sort()
    ts = np.array([r[0] for r in rows], dtype=np.float64)
    kidx = np.array([r[1] for r in rows], dtype=np.int64)
    thr = np.array([r[2] for r in rows], dtype=np.int64)
    return kidx, ts, thr


def estimate_joint_prob(
    ic: InitialCondition,
    obs,
    n_samples: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo estimate and standard error of P(x_{k_j}(t_j) >= a_j for all j)."""
    obs = validate_observations(obs)
    if n_samples < 1:
        raise ParameterError("need at least one sample")
    kidx, ts, thr = _observation_arrays(ic, obs)
    pos0 = np.asarray(ic.y, dtype=np.int64)
    bg = np.random.Philox(key=seed)
    succ = run_batch(pos0, ic.params.L, n_samples, kidx, ts, thr, bg)
    p = succ / n_samples
    se = math.sqrt(max(p * (1.0 - p), 1.0 / n_samples) / n_samples)
    return p, se


def simulate_to(ic: InitialCondition, t: float, seed: int = 0) -> np.ndarray:
    """One trajectory: covering-line positions at time t."""
    if t < 0:
        raise ParameterError("time must be nonnegative")
    N = ic.params.N
    L = ic.params.L
    gen = np.random.Generator(np.random.Philox(key=seed))
    pos = list(ic.y)
    now = 0.0
    while True:
        elig = [
            i
            for i in range(N)
            if pos[(i + 1) % N] + (L if i == N - 1 else 0) > pos[i] + 1
        ]
        if not elig:
            break
        now -= math.log(1.0 - gen.random()) / len(elig)
        if now > t:
            break
        j = min(int(gen.random() * len(elig)), len(elig) - 1)
        pos[elig[j]] += 1
    return np.array(pos, dtype=np.int64)


# ---------------------------------------------------------------------------
# Exact finite-state evaluation by uniformization.


def _poisson_weights(lam_t: float, tol: float) -> np.ndarray:
    """Poisson(lam_t) pmf truncated so the omitted tail mass is below tol."""
    if lam_t == 0.0:
        return np.array([1.0])
    weights = [math.exp(-lam_t)]
    k = 0
    total = weights[0]
    while 1.0 - total > tol:
        k += 1
        weights.append(weights[-1] * lam_t / k)
        total += weights[-1]
        if k > 10_000_000:
            raise ResourceError("Poisson truncation did not converge")
    return np.array(weights)


def _step_dist(dist: dict, N: int, L: int, lam: float) -> dict:
    """One step of the uniformized jump chain applied to a sparse distribution."""
    out: dict = {}
    for state, mass in dist.items():
        elig = [
            i
            for i in range(N)
            if state[(i + 1) % N] + (L if i == N - 1 else 0) > state[i] + 1
        ]
        stay = (lam - len(elig)) / lam
        if stay > 0:
            out[state] = out.get(state, 0.0) + mass * stay
        for i in elig:
            nxt = list(state)
            nxt[i] += 1
            key = tuple(nxt)
            out[key] = out.get(key, 0.0) + mass / lam
    return out


def ctmc_exact_prob(
    ic: InitialCondition,
    obs,
    tol: float = 1e-12,
    max_states: int = 100_000,
) -> float:
    """Exact P(x_{k_j}(t_j) >= a_j for all j) by uniformization.

    The state is the full covering-position vector; between observation times
    the distribution is propagated with a Poisson-weighted jump-chain
    expansion, and at each observation the failing states are zeroed.
    """
    obs = validate_observations(obs)
    N = ic.params.N
    L = ic.params.L
    kidx, ts, thr = _observation_arrays(ic, obs)
    lam = float(N)

    dist = {tuple(int(v) for v in ic.y): 1.0}
    prev_t = 0.0
    for j in range(len(ts)):
        dt = ts[j] - prev_t
        if dt > 0:
            weights = _poisson_weights(lam * dt, tol)
            acc: dict = {}
            cur = dist
            for i, w in enumerate(weights):
                for state, mass in cur.items():
                    acc[state] = acc.get(state, 0.0) + w * mass
                if i + 1 < len(weights):
                    cur = _step_dist(cur, N, L, lam)
                    if len(cur) > max_states:
                        raise ResourceError(
                            f"state space exceeded {max_states} states"
                        )
            dist = acc
        dist = {
            state: mass
            for state, mass in dist.items()
            if state[kidx[j]] >= thr[j]
        }
        prev_t = ts[j]
    return float(sum(dist.values()))
