"""Independent N x N determinant oracle and the generic block-matrix identity.

The multi-point distribution also equals a prefactor times an N x N
determinant whose entries are m-fold sums over entire root circles (left and
right together).  This form is valid on any nested radii, needs no
left/right interleaving, and serves as a cross-check oracle for the Fredholm
pipeline.  The module also implements the generic algebraic identity that
converts such N x N determinants into Fredholm determinants of block
matrices, checked on random instances.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .bethe import BetheRootSet, J_factor, solve_bethe_roots
from .core import InitialCondition, ModelParams, Observation, validate_observations
from .errors import ParameterError, PoleError, ResourceError
from .finite_dist import QuadConfig, _as_probability, nested_contour_integral

_BRUTE_FORCE_BUDGET = 10_000_000


# ---------------------------------------------------------------------------
# Toeplitz-like determinant formula.


def _log_G(w: np.ndarray, o: Observation, prev: Observation | None, L, rho):
    kp, ap, tp = (prev.k, prev.a, prev.t) if prev is not None else (0, 0, 0.0)
    return (
        (-o.k + kp) * np.log(w)
        + ((-o.a + o.k) - (-ap + kp)) * np.log(w + 1.0)
        + (o.t - tp) * w
    )


def toeplitz_D(
    ic: InitialCondition, obs: tuple[Observation, ...], rs_list: list[BetheRootSet]
) -> complex:
    """det of the N x N matrix of m-fold sums over the full root circles."""
    params = ic.params
    L, N, rho = params.L, params.N, params.rho
    y = ic.y

    def circle(rs: BetheRootSet) -> np.ndarray:
        return np.concatenate([rs.right, rs.left])

    w1 = circle(rs_list[0])
    G1 = J_factor(w1, L, rho) * np.exp(_log_G(w1, obs[0], None, L, rho))
    i = np.arange(1, N + 1)
    # Row i carries w^i (w+1)^{y_i - i}.
    V = (
        w1[None, :] ** i[:, None]
        * (w1[None, :] + 1.0) ** (np.asarray(y)[:, None] - i[:, None])
        * G1[None, :]
    )
    wprev = w1
    for ell in range(1, len(obs)):
        wc = circle(rs_list[ell])
        Gc = J_factor(wc, L, rho) * np.exp(
            _log_G(wc, obs[ell], obs[ell - 1], L, rho)
        )
        cauchy = Gc[:, None] / (wc[:, None] - wprev[None, :])
        V = V @ cauchy.T
        wprev = wc
    j = np.arange(1, N + 1)
    T = V @ (wprev[:, None] ** (-j)[None, :])
    return complex(np.linalg.det(T))


def c_factor(obs: tuple[Observation, ...], rs_list: list[BetheRootSet]) -> complex:
    """Prefactor multiplying the Toeplitz-like determinant.

    The overall sign carries one factor of -1 per extra level (the nested sum
    orients each difference w_l - w_{l-1} while the radius bracket orients
    the opposite way); without it the two-level probability comes out
    negative, as checked against the exact Markov-chain evaluation.
    """
    N = rs_list[0].N
    m = len(obs)
    km = obs[-1].k
    acc = cmath.log(rs_list[0].zL) * (obs[0].k - 1)
    for ell in range(1, m):
        za, zb = rs_list[ell - 1].zL, rs_list[ell].zL
        acc += (obs[ell].k - obs[ell - 1].k) * cmath.log(zb)
        ratio = zb / za - 1.0
        if abs(ratio) < 1e-13:
            raise PoleError("adjacent contour radii collide in z^L")
        acc += (N - 1) * cmath.log(ratio)
    sign = (-1.0) ** ((km - 1) * (N + 1) + (m - 1))
    return sign * cmath.exp(acc)


def toeplitz_integrand_at(
    ic: InitialCondition, obs, z_list
) -> complex:
    """The oracle integrand C(z) D_Y(z) at explicit nested physical z values."""
    obs = validate_observations(obs)
    mags = [abs(z) for z in z_list]
    if any(m2 >= m1 for m1, m2 in zip(mags, mags[1:])):
        raise ParameterError("|z| values must be strictly decreasing")
    rs_list = [solve_bethe_roots(ic.params, z) for z in z_list]
    return c_factor(obs, rs_list) * toeplitz_D(ic, obs, rs_list)


def multipoint_prob_oracle(
    ic: InitialCondition, obs, config: QuadConfig | None = None
) -> float:
    """Joint probability via the N x N determinant form (independent oracle)."""
    obs = validate_observations(obs)
    config = config or QuadConfig()
    val = nested_contour_integral(
        ic.params,
        len(obs),
        lambda rs_list: c_factor(obs, rs_list) * toeplitz_D(ic, obs, rs_list),
        config,
    )
    return _as_probability(val, config)


# ---------------------------------------------------------------------------
# Generic block-matrix identity.


@dataclass
class GenericIdentityInstance:
    """A random instance of the determinant identity.

    S[l] are the level point sets; R_index[l] picks the N distinguished
    points of level l; p/q hold the values of the N row/column functions on
    the first/last level; h[l] holds the level weight values on S[l].
    """

    S: list[np.ndarray]
    R_index: list[np.ndarray]
    p: np.ndarray
    q: np.ndarray
    h: list[np.ndarray]

    @property
    def m(self) -> int:
        return len(self.S)

    @property
    def N(self) -> int:
        return len(self.R_index[0])

    def R(self, ell: int) -> np.ndarray:
        return self.S[ell][self.R_index[ell]]

    def L_index(self, ell: int) -> np.ndarray:
        mask = np.ones(len(self.S[ell]), dtype=bool)
        mask[self.R_index[ell]] = False
        return np.where(mask)[0]


def _delta(V: np.ndarray) -> complex:
    """prod_{i<j} (V_j - V_i) in stored order."""
    n = len(V)
    acc = 1.0 + 0j
    for i in range(n):
        for j in range(i + 1, n):
            acc *= V[j] - V[i]
    return acc


def _delta_cross(A: np.ndarray, B: np.ndarray) -> complex:
    if len(A) == 0 or len(B) == 0:
        return 1.0 + 0j
    return complex(np.prod(A[:, None] - B[None, :]))


def _brute_det(inst: GenericIdentityInstance) -> complex:
    """det T where T_ij sums p_i q_j prod h / prod (w_l - w_{l-1}) over levels."""
    sizes = max(len(s) for s in inst.S)
    if sizes**inst.m * inst.N**2 > _BRUTE_FORCE_BUDGET:
        raise ResourceError("brute-force sum exceeds the size budget")
    V = inst.p * inst.h[0][None, :]
    wprev = inst.S[0]
    for ell in range(1, inst.m):
        wc = inst.S[ell]
        cauchy = inst.h[ell][:, None] / (wc[:, None] - wprev[None, :])
        V = V @ cauchy.T
        wprev = wc
    T = V @ inst.q.T
    return complex(np.linalg.det(T))


def _g_ratio(p_vals: np.ndarray, S: np.ndarray, R_idx: np.ndarray, swap_out: int, swap_in: int) -> complex:
    """G(R with one point swapped) / G(R) for row functions given by values.

    swap_out is a position within R_idx; swap_in is an index into S.
    """
    idx = np.array(R_idx, dtype=int)
    base = S[idx]
    P_base = p_vals[:, idx]
    g_base = np.linalg.det(P_base) / _delta(base)
    idx2 = idx.copy()
    idx2[swap_out] = swap_in
    pts = S[idx2]
    P_new = p_vals[:, idx2]
    g_new = np.linalg.det(P_new) / _delta(pts)
    return g_new / g_base


def _block_matrices(inst: GenericIdentityInstance):
    """Assemble the two block-diagonal kernels of the identity."""
    m, N = inst.m, inst.N

    R = [inst.R(l) for l in range(m)]
    Lp = [inst.S[l][inst.L_index(l)] for l in range(m)]
    Ridx = [inst.R_index[l] for l in range(m)]
    Lidx = [inst.L_index(l) for l in range(m)]

    def r(l, w):
        return np.prod(w - R[l]) if np.ndim(w) == 0 else np.prod(
            np.asarray(w)[:, None] - R[l][None, :], axis=1
        )

    def rp(l, j):
        # derivative of r_l at its j-th distinguished point
        v = R[l]
        return np.prod(np.delete(v - v[j], j))

    def hval(l, idx):
        return inst.h[l][idx]

    def B_generic(k):
        # rows: L_k then R_{k+1}; cols: R_k then L_{k+1}  (levels 0-based: k-1, k)
        a, b = k - 1, k
        rows = [("u", a, i) for i in range(len(Lp[a]))] + [
            ("v", b, i) for i in range(N)
        ]
        cols = [("v", a, i) for i in range(N)] + [
            ("u", b, i) for i in range(len(Lp[b]))
        ]
        B = np.zeros((len(rows), len(cols)), dtype=complex)
        for ri, (rt, rl, rj) in enumerate(rows):
            for ci, (ct, cl, cj) in enumerate(cols):
                if rt == "u" and ct == "v":
                    u = Lp[a][rj]
                    v = R[a][cj]
                    B[ri, ci] = (
                        hval(a, Lidx[a][rj])
                        * r(a, u) * r(b, v) / (rp(a, cj) * r(b, u)) / (u - v)
                    )
                elif rt == "u" and ct == "u":
                    u = Lp[a][rj]
                    u2 = Lp[b][cj]
                    B[ri, ci] = (
                        hval(a, Lidx[a][rj])
                        * r(a, u) * r(b, u2) / (r(b, u) * r(a, u2)) / (u - u2)
                    )
                elif rt == "v" and ct == "v":
                    v2 = R[b][rj]
                    v = R[a][cj]
                    B[ri, ci] = (
                        (1.0 / hval(b, Ridx[b][rj]))
                        * r(a, v2) * r(b, v) / (rp(b, rj) * rp(a, cj)) / (v2 - v)
                    )
                else:
                    v2 = R[b][rj]
                    u2 = Lp[b][cj]
                    B[ri, ci] = (
                        (1.0 / hval(b, Ridx[b][rj]))
                        * r(b, u2) * r(a, v2) / (rp(b, rj) * r(a, u2)) / (v2 - u2)
                    )
        return B

    def B_0():
        # rows: R_1; cols: L_1 (level 0)
        B = np.zeros((N, len(Lp[0])), dtype=complex)
        for i in range(N):
            v = R[0][i]
            for j in range(len(Lp[0])):
                u = Lp[0][j]
                g = _g_ratio(inst.p, inst.S[0], Ridx[0], i, Lidx[0][j])
                B[i, j] = (
                    g / hval(0, Ridx[0][i]) * r(0, u) / rp(0, i) / (v - u)
                )
        return B

    def B_m():
        # rows: L_m; cols: R_m (level m-1)
        lvl = m - 1
        B = np.zeros((len(Lp[lvl]), N), dtype=complex)
        for i in range(len(Lp[lvl])):
            u = Lp[lvl][i]
            for j in range(N):
                v = R[lvl][j]
                g = _g_ratio(inst.q, inst.S[lvl], Ridx[lvl], j, Lidx[lvl][i])
                B[i, j] = (
                    g * hval(lvl, Lidx[lvl][i]) * r(lvl, u) / rp(lvl, j) / (u - v)
                )
        return B

    blocks1 = []
    blocks2 = [B_0()]
    for k in range(1, m + 1):
        blk = B_m() if k == m else B_generic(k)
        if k % 2 == 1:
            blocks1.append(blk)
        else:
            blocks2.append(blk)

    def blockdiag(blocks):
        rtot = sum(b.shape[0] for b in blocks)
        ctot = sum(b.shape[1] for b in blocks)
        out = np.zeros((rtot, ctot), dtype=complex)
        r0 = c0 = 0
        for b in blocks:
            out[r0 : r0 + b.shape[0], c0 : c0 + b.shape[1]] = b
            r0 += b.shape[0]
            c0 += b.shape[1]
        return out

    return blockdiag(blocks1), blockdiag(blocks2)


def _closed_form_detM(inst: GenericIdentityInstance) -> complex:
    """The determinant restricted to the distinguished points, in closed form."""
    m, N = inst.m, inst.N
    R = [inst.R(l) for l in range(m)]
    sign = (-1.0) ** ((m - 1) * (N * (N - 1) // 2))
    detp = np.linalg.det(inst.p[:, inst.R_index[0]])
    detq = np.linalg.det(inst.q[:, inst.R_index[m - 1]])
    acc = sign * detp / _delta(R[0]) * detq / _delta(R[m - 1])
    for l in range(m):
        acc *= _delta(R[l]) ** 2
        acc *= np.prod(inst.h[l][inst.R_index[l]])
    for l in range(1, m):
        acc /= _delta_cross(R[l], R[l - 1])
    return complex(acc)


def generic_identity_check(
    inst: GenericIdentityInstance,
) -> tuple[complex, complex, float]:
    """Evaluate both sides of the block-matrix identity; returns (lhs, rhs, rel)."""
    lhs = _brute_det(inst)
    K1, K2 = _block_matrices(inst)
    rhs = _closed_form_detM(inst) * complex(
        np.linalg.det(np.eye(K1.shape[0], dtype=complex) - K1 @ K2)
    )
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return lhs, rhs, rel


def random_instance(
    rng: np.random.Generator, m: int, N: int, sizes: list[int], degree: int = 3
) -> GenericIdentityInstance:
    """Draw a well-separated random instance in the annulus 0.2 <= |w| <= 2."""
    if any(s < N for s in sizes):
        raise ParameterError("every level must contain at least N points")

    def draw_points(n, existing):
        pts = []
        while len(pts) < n:
            w = rng.uniform(0.2, 2.0) * np.exp(2j * np.pi * rng.uniform())
            if all(abs(w - o) >= 1e-2 for o in pts + existing):
                pts.append(w)
        return np.array(pts)

    S = []
    flat: list[complex] = []
    for s in sizes:
        pts = draw_points(s, flat)
        flat.extend(pts.tolist())
        S.append(pts)

    def poly_values(W, rows):
        coeffs = rng.normal(size=(rows, degree + 1)) + 1j * rng.normal(
            size=(rows, degree + 1)
        )
        return np.array([np.polyval(c, W) for c in coeffs])

    while True:
        R_index = [
            np.sort(rng.choice(len(S[l]), size=N, replace=False)) for l in range(m)
        ]
        p = poly_values(S[0], N)
        q = poly_values(S[-1], N)
        h = []
        ok = True
        for l in range(m):
            hv = np.polyval(
                rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1), S[l]
            )
            if np.min(np.abs(hv)) < 1e-2:
                ok = False
                break
            h.append(hv)
        if not ok:
            continue
        inst = GenericIdentityInstance(S, R_index, p, q, h)
        if (
            abs(np.linalg.det(p[:, R_index[0]])) > 1e-8
            and abs(np.linalg.det(q[:, R_index[-1]])) > 1e-8
        ):
            return inst
