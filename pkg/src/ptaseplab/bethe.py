"""Root sets of q_z(w) = w^N (w+1)^{L-N} - z^L and derived scalar products.

For 0 < |z| < r0 the L roots split into a left group (Re w < -rho, L-N roots
clustering around -1) and a right group (Re w > -rho, N roots clustering
around 0).  All downstream formulas consume sums of logarithms of the roots,
so those sums are cached on the root set.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import ModelParams
from .errors import NumericalError, ParameterError

_PARTITION_GUARD = 1e-12
_REL_RESIDUAL = 1e-10


@dataclass(frozen=True)
class RescaledZ:
    """A point z_norm of the unit disk mapped onto the physical annulus."""

    z_norm: complex
    z_phys: complex


def rescale_z(z_norm: complex, params: ModelParams) -> RescaledZ:
    """Map z_norm with |z_norm| < 1 to z with z^L = (-1)^N r0^L z_norm.

    A fixed L-th root is chosen (principal); every quantity computed here
    depends on z only through z^L, so the choice is immaterial.
    """
    z_norm = complex(z_norm)
    if abs(z_norm) >= 1:
        raise ParameterError(f"|z_norm| must be < 1, got {abs(z_norm)}")
    if z_norm == 0:
        return RescaledZ(z_norm, 0j)
    sign = -1.0 if params.N % 2 else 1.0
    z_phys = params.r0 * cmath.exp(cmath.log(sign * z_norm) / params.L)
    return RescaledZ(z_norm, z_phys)


class BetheRootSet:
    """The left/right root partition for one value of z."""

    def __init__(
        self,
        z: complex,
        left: np.ndarray,
        right: np.ndarray,
        L: int,
        N: int,
        max_residual: float,
    ):
        self.z = complex(z)
        self.left = np.asarray(left, dtype=complex)
        self.right = np.asarray(right, dtype=complex)
        self.L = L
        self.N = N
        self.max_residual = max_residual

    @property
    def rho(self) -> float:
        return self.N / self.L

    @cached_property
    def zL(self) -> complex:
        return self.z**self.L

    @cached_property
    def sum_log_neg_left(self) -> complex:
        """Sum of Log(-u) over left roots."""
        return complex(np.sum(np.log(-self.left)))

    @cached_property
    def sum_log_right_p1(self) -> complex:
        """Sum of Log(v+1) over right roots."""
        return complex(np.sum(np.log(self.right + 1.0)))

    @cached_property
    def sum_log_right(self) -> complex:
        """Sum of Log(v) over right roots."""
        return complex(np.sum(np.log(self.right)))

    @cached_property
    def sum_right(self) -> complex:
        return complex(np.sum(self.right))

    @cached_property
    def log_vdm_right_left(self) -> complex:
        """Sum of Log(v - u) over right roots v and left roots u."""
        diff = self.right[:, None] - self.left[None, :]
        return complex(np.sum(np.log(diff)))


def _q_and_dq(w: np.ndarray, zL: complex, L: int, N: int):
    a = w**N
    b = (w + 1.0) ** (L - N)
    q = a * b - zL
    dq = a * b * (L * w + N) / (w * (w + 1.0))
    return q, dq


def _aberth(
    seeds: np.ndarray, zL: complex, L: int, N: int, max_iter: int = 300
) -> np.ndarray:
    w = seeds.astype(complex)
    for _ in range(max_iter):
        q, dq = _q_and_dq(w, zL, L, N)
        newton = q / dq
        diff = w[:, None] - w[None, :]
        np.fill_diagonal(diff, 1.0)
        srec = np.sum(1.0 / diff, axis=1)
        corr = newton / (1.0 - newton * srec)
        w = w - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(w))) < 1e-15:
            break
    # A few plain Newton polishing steps.
    for _ in range(4):
        q, dq = _q_and_dq(w, zL, L, N)
        w = w - q / dq
    return w


def _seeds(zL: complex, L: int, N: int) -> np.ndarray:
    right = np.exp(
        (cmath.log(zL) + 2j * np.pi * np.arange(N)) / N
    )
    sgn = -1.0 if N % 2 else 1.0
    left = -1.0 + np.exp(
        (cmath.log(sgn * zL) + 2j * np.pi * np.arange(L - N)) / (L - N)
    )
    return np.concatenate([right, left])


def _partition(w: np.ndarray, rho: float) -> tuple[np.ndarray, np.ndarray]:
    re = w.real + rho
    if np.min(np.abs(re)) < _PARTITION_GUARD:
        raise NumericalError("a root landed on the partition line Re(w) = -rho")
    left = w[re < 0]
    right = w[re > 0]
    return left, right


def solve_bethe_roots(params: ModelParams, z: complex) -> BetheRootSet:
    """Find all L roots of q_z and partition them at Re(w) = -rho."""
    L, N = params.L, params.N
    z = complex(z)
    r = abs(z)
    if not 0 < r < params.r0:
        raise ParameterError(f"need 0 < |z| < r0 = {params.r0:.6f}, got |z| = {r}")

    zL = z**L
    w = _aberth(_seeds(zL, L, N), zL, L, N)
    left, right = _try_partition(w, params)
    if left is None:
        # Continuation fallback: walk |z| up from a safe small magnitude,
        # reusing the previous roots as seeds at each step.
        w = _seeds((0.05 * z) ** L, L, N)
        for frac in np.linspace(0.05, 1.0, 40):
            w = _aberth(w, (frac * z) ** L, L, N)
        left, right = _try_partition(w, params)
        if left is None:
            raise NumericalError(
                f"root partition failed for L={L}, N={N}, z={z}"
            )

    # Relative residual against the natural magnitude of q_z near its roots.
    q, _ = _q_and_dq(w, zL, L, N)
    scale = np.abs(w) ** N * np.abs(w + 1.0) ** (L - N) + abs(zL)
    max_res = float(np.max(np.abs(q) / scale))
    if max_res > _REL_RESIDUAL:
        raise NumericalError(f"root residual {max_res:.2e} exceeds tolerance")

    left = left[np.argsort(np.angle(left + 1.0))]
    right = right[np.argsort(np.angle(right))]
    return BetheRootSet(z, left, right, L, N, max_res)


def _try_partition(w: np.ndarray, params: ModelParams):
    try:
        left, right = _partition(w, params.rho)
    except NumericalError:
        return None, None
    if len(left) != params.L - params.N or len(right) != params.N:
        return None, None
    # Reject collapsed clusters (duplicate roots).
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, np.inf)
    if np.min(d) < 1e-13:
        return None, None
    return left, right


def check_root_identities(rs: BetheRootSet) -> tuple[float, float]:
    """Relative errors of the two exact product identities of the root sets.

    prod(-u)^N = prod(v+1)^{L-N} and
    (-1)^{N-1} z^L = prod(-u) * prod(v).
    """
    lhs1 = rs.N * rs.sum_log_neg_left
    rhs1 = (rs.L - rs.N) * rs.sum_log_right_p1
    e1 = abs(cmath.exp(lhs1 - rhs1) - 1.0)

    lhs2 = cmath.exp(rs.sum_log_neg_left + rs.sum_log_right)
    rhs2 = (-1.0) ** (rs.N - 1) * rs.zL
    e2 = abs(lhs2 - rhs2) / abs(rhs2)
    return e1, e2


def log_H(rs: BetheRootSet | None, w) -> np.ndarray | complex:
    """Log of H_z(w): the half of q_z matching the opposite side of w.

    For Re(w) > -rho this is Log of prod(w-u)/(w+1)^{L-N}; for Re(w) < -rho
    it is Log of prod(w-v)/w^N.  For z = 0 (rs None) the value is 0.
    """
    if rs is None:
        return np.zeros_like(np.asarray(w, dtype=complex))
    w = np.asarray(w, dtype=complex)
    out = np.zeros_like(w)
    mask = w.real > -rs.rho
    if np.any(mask):
        wr = w[mask]
        out[mask] = np.sum(np.log(wr[:, None] - rs.left[None, :]), axis=1) - (
            rs.L - rs.N
        ) * np.log(wr + 1.0)
    if np.any(~mask):
        wl = w[~mask]
        out[~mask] = np.sum(
            np.log(wl[:, None] - rs.right[None, :]), axis=1
        ) - rs.N * np.log(wl)
    return out


def J_factor(w, L: int, rho: float):
    """The weight J(w) = w(w+1) / (L (w + rho)) attached to every root."""
    w = np.asarray(w, dtype=complex)
    return w * (w + 1.0) / (L * (w + rho))


def log_cross_vdm(rs_a: BetheRootSet, rs_b: BetheRootSet) -> complex:
    """Sum of Log(v - u) over right roots v of rs_a and left roots u of rs_b."""
    diff = rs_a.right[:, None] - rs_b.left[None, :]
    return complex(np.sum(np.log(diff)))
