"""Generalized Vandermonde ratios and the initial-condition weight functions.

The weight of a configuration enters the contour integrand through two
scalars built from the right Bethe roots: a global energy (a symmetric
determinant ratio) and a characteristic function (the relative change of
that ratio when one right root is swapped for a left root).  Evenly spaced
configurations admit closed-form product evaluations, implemented here as
fast paths.
"""

from __future__ import annotations

import cmath
from math import comb

import numpy as np

from .bethe import BetheRootSet
from .core import InitialCondition, lambda_of
from .errors import BranchCutError, ConditioningError, ParameterError, PoleError

_COND_LIMIT = 1e8
_MP_DPS = 60


def _det_ratio(A: np.ndarray, B: np.ndarray) -> complex:
    """det(A)/det(B) with a high-precision fallback when ill-conditioned."""
    sa, la = np.linalg.slogdet(A)
    sb, lb = np.linalg.slogdet(B)
    if (
        sa != 0
        and sb != 0
        and np.linalg.cond(A) < _COND_LIMIT
        and np.linalg.cond(B) < _COND_LIMIT
    ):
        return complex(sa / sb * np.exp(la - lb))
    import mpmath

    with mpmath.workdps(_MP_DPS):
        da = mpmath.det(mpmath.matrix(A.tolist()))
        db = mpmath.det(mpmath.matrix(B.tolist()))
        if db == 0:
            raise ConditioningError("denominator determinant vanished")
        return complex(da / db)


def g_lambda(lam, W) -> complex:
    """det[w_i^{N-j} (w_i+1)^{lam_j}] / det[w_i^{N-j}] over the points W."""
    W = np.asarray(W, dtype=complex)
    N = len(W)
    if len(lam) != N:
        raise ParameterError("weight vector and point set must have equal length")
    j = np.arange(1, N + 1)
    A = W[:, None] ** (N - j)[None, :] * (W[:, None] + 1.0) ** np.asarray(lam)[None, :]
    B = W[:, None] ** (N - j)[None, :]
    return _det_ratio(A, B)


def g_tilde(lam, W, N2: int) -> complex:
    """Variant of g_lambda whose columns beyond N2 drop one power of w.

    Column j <= N2 is w^{N-j} (w+1)^{lam_j}; column j > N2 is
    w^{N-j-1} (w+1)^{lam_{N2}+1}.  Requires every point to be nonzero.
    """
    W = np.asarray(W, dtype=complex)
    N = len(W)
    if not 1 <= N2 <= N:
        raise ParameterError(f"need 1 <= N2 <= N, got N2={N2}, N={N}")
    if len(lam) < N2:
        raise ParameterError("weight vector must have at least N2 entries")
    if np.any(W == 0):
        raise PoleError("g_tilde has a pole at w = 0")
    A = np.empty((N, N), dtype=complex)
    for j in range(1, N + 1):
        if j <= N2:
            A[:, j - 1] = W ** (N - j) * (W + 1.0) ** lam[j - 1]
        else:
            A[:, j - 1] = W ** (N - j - 1) * (W + 1.0) ** (lam[N2 - 1] + 1)
    j = np.arange(1, N + 1)
    B = W[:, None] ** (N - j)[None, :]
    return _det_ratio(A, B)


def energy(ic: InitialCondition, rs: BetheRootSet) -> complex:
    """Global energy of a deterministic configuration: g_lambda at the right roots."""
    return g_lambda(lambda_of(ic), rs.right)


def char_fn(ic: InitialCondition, rs: BetheRootSet, v: complex, u: complex) -> complex:
    """Relative energy change when right root v is replaced by left root u."""
    lam = lambda_of(ic)
    denom = g_lambda(lam, rs.right)
    if abs(denom) < 1e-10:
        raise PoleError("energy too close to zero for a stable ratio")
    W = np.array(rs.right, dtype=complex)
    idx = int(np.argmin(np.abs(W - v)))
    if abs(W[idx] - v) > 1e-9 * (1.0 + abs(v)):
        raise ParameterError("v is not one of the right roots")
    W[idx] = u
    return g_lambda(lam, W) / denom


def _sqrt_log(x: complex) -> complex:
    """Log of the principal square root, rejecting points on the branch cut."""
    if x.real < 0 and x.imag == 0:
        raise BranchCutError(f"square-root factor {x} lies on the branch cut")
    return 0.5 * cmath.log(x)


def energy_flat(rs: BetheRootSet, d: int) -> complex:
    """Product form of the energy for evenly spaced particles with L = d N.

    Every square root is the principal branch taken factor by factor.
    """
    if rs.L != d * rs.N:
        raise ParameterError(f"flat geometry needs L = d N, got L={rs.L}, N={rs.N}")
    V = rs.right
    U = rs.left
    N = rs.N
    acc = 0j
    for v in V:
        acc += d * _sqrt_log(v + 1.0)
        acc -= _sqrt_log(d * v + 1.0)
        acc -= (d - 1) * N * _sqrt_log(v + 1.0)
    for u in U:
        acc -= N * _sqrt_log(-u)
    for v in V:
        for u in U:
            acc += _sqrt_log(v - u)
    return cmath.exp(acc)


def _spacing_poly(w, d: int):
    """p(w) = w (w+1)^{d-1}, the spacing map of evenly spaced configurations."""
    return w * (w + 1.0) ** (d - 1)


def g_pair(w: complex, wp: complex, d: int) -> complex:
    """Divided difference (p(w) - p(w')) / (w - w') of the spacing map."""
    if w == wp:
        return (d * w + 1.0) * (w + 1.0) ** (d - 2)
    return (_spacing_poly(w, d) - _spacing_poly(wp, d)) / (w - wp)


def companion_roots(v: complex, d: int) -> np.ndarray:
    """The d-1 roots w != v of p(w) = p(v) via the companion matrix."""
    # Coefficients (highest degree first) of p(w) - p(v), where
    # p(w) = w (w+1)^{d-1} expands to sum_k C(d-1,k) w^{k+1}.
    coeffs = np.zeros(d + 1, dtype=complex)
    for k in range(d):
        coeffs[d - 1 - k] = comb(d - 1, k)
    coeffs[d] -= _spacing_poly(v, d)
    # Synthetic division by (w - v).
    quot = np.empty(d, dtype=complex)
    acc = 0j
    for i in range(d):
        acc = coeffs[i] + acc * v
        quot[i] = acc
    return np.roots(quot)


def satellite_roots(rs: BetheRootSet, d: int) -> np.ndarray:
    """All p-partners of the right roots: (d-1) N points with Re(w) < -1/d."""
    return np.concatenate([companion_roots(v, d) for v in rs.right])


def energy_stepflat(rs: BetheRootSet, d: int, Ls: int) -> complex:
    """Product form of the energy for L = d N + Ls with 0 < Ls < L."""
    if rs.L != d * rs.N + Ls or not 0 < Ls < rs.L:
        raise ParameterError(
            f"step-flat geometry needs L = d N + Ls with 0 < Ls < L, "
            f"got L={rs.L}, N={rs.N}, d={d}, Ls={Ls}"
        )
    V = rs.right
    N = rs.N
    U = satellite_roots(rs, d)
    acc = 0j
    for v in V:
        acc += d * _sqrt_log(v + 1.0)
        acc -= _sqrt_log(d * v + 1.0)
        acc -= (d - 1) * N * _sqrt_log(v + 1.0)
    for u in U:
        acc -= N * _sqrt_log(-u)
    for v in V:
        for u in U:
            acc += _sqrt_log(v - u)
    return cmath.exp(acc)


def char_fn_flat(rs: BetheRootSet, d: int, v: complex, u: complex) -> complex:
    """Characteristic function for L = d N: nonzero only on p-paired (v, u)."""
    if rs.L != d * rs.N:
        raise ParameterError(f"flat geometry needs L = d N, got L={rs.L}, N={rs.N}")
    pu = _spacing_poly(u, d)
    pv = _spacing_poly(v, d)
    scale = abs(pu) + abs(pv) + 1e-30
    if abs(pu - pv) > 1e-8 * scale:
        return 0j
    # q'_R(v) u^N (u+1)^{d-1} (u - v) / (q_R(u) v^N (v+1)^{d-1})
    V = rs.right
    idx = int(np.argmin(np.abs(V - v)))
    acc = 0j
    for j, vp in enumerate(V):
        if j != idx:
            acc += np.log(v - vp)
        acc -= np.log(u - vp)
    acc += rs.N * (np.log(u) - np.log(v))
    acc += (d - 1) * (np.log(u + 1.0) - np.log(v + 1.0))
    return cmath.exp(acc) * (u - v)


def char_fn_stepflat(rs: BetheRootSet, d: int, Ls: int, v: complex, u: complex) -> complex:
    """Characteristic function for L = d N + Ls in divided-difference form."""
    if rs.L != d * rs.N + Ls:
        raise ParameterError("root set does not match the step-flat geometry")
    N = rs.N
    e = (d - 1) * (N - 1)
    pref = (
        e * (np.log(v + 1.0) - np.log(u + 1.0))
        + np.log(g_pair(v, v, d))
        - np.log(g_pair(u, v, d))
    )
    acc = complex(pref)
    for vp in rs.right:
        acc += np.log(g_pair(u, vp, d)) - np.log(g_pair(v, vp, d))
    return cmath.exp(acc)
