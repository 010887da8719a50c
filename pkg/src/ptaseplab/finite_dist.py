"""Finite-time multi-point distributions on the ring.

The joint probability P(x_{k_1}(t_1) >= a_1, ..., x_{k_m}(t_m) >= a_m) is an
m-fold contour integral of a prefactor times a Fredholm determinant of two
block-sparse matrices indexed by interleaved left/right Bethe root sets of m
nested circles.  Circles are parametrized in the normalized variable (the
integrand depends on z only through z^L), where the contour measure becomes
a plain average over equally spaced angles and the trapezoid rule converges
spectrally.

All exponential factors are assembled in log space: each factor contributes
an integer multiple of a principal logarithm (or t*w with real t), and only
the combined O(1) exponent is exponentiated.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .bethe import (
    BetheRootSet,
    J_factor,
    log_H,
    log_cross_vdm,
    rescale_z,
    solve_bethe_roots,
)
from .core import (
    InitialCondition,
    ModelParams,
    Observation,
    lambda_of,
    validate_observations,
)
from .errors import NumericalError, ParameterError, PoleError
from . import symfun


# ---------------------------------------------------------------------------
# Initial-condition weights (energy + characteristic function).


class StepWeights:
    """Packed block ending at the origin: both weights are identically 1."""

    trivial = True

    def energy(self, rs: BetheRootSet) -> complex:
        return 1.0 + 0j

    def ch_matrix(self, rs: BetheRootSet) -> np.ndarray:
        return np.ones((rs.N, rs.L - rs.N), dtype=complex)


class GenericWeights:
    """Determinant-ratio weights for an arbitrary configuration."""

    trivial = False

    def __init__(self, ic: InitialCondition):
        self.lam = lambda_of(ic)

    def energy(self, rs: BetheRootSet) -> complex:
        return symfun.g_lambda(self.lam, rs.right)

    def ch_matrix(self, rs: BetheRootSet) -> np.ndarray:
        denom = symfun.g_lambda(self.lam, rs.right)
        if abs(denom) < 1e-10:
            raise PoleError("energy too close to zero for a stable ratio")
        out = np.empty((rs.N, rs.L - rs.N), dtype=complex)
        for i in range(rs.N):
            W = np.array(rs.right, dtype=complex)
            for j, u in enumerate(rs.left):
                W[i] = u
                out[i, j] = symfun.g_lambda(self.lam, W) / denom
            W[i] = rs.right[i]
        return out


class FlatWeights:
    """Product-form weights for evenly spaced particles, L = d N."""

    trivial = False

    def __init__(self, d: int):
        self.d = d

    def energy(self, rs: BetheRootSet) -> complex:
        return symfun.energy_flat(rs, self.d)

    def ch_matrix(self, rs: BetheRootSet) -> np.ndarray:
        out = np.empty((rs.N, rs.L - rs.N), dtype=complex)
        for i, v in enumerate(rs.right):
            for j, u in enumerate(rs.left):
                out[i, j] = symfun.char_fn_flat(rs, self.d, v, u)
        return out


class StepFlatWeights:
    """Product-form weights for evenly spaced particles, L = d N + Ls."""

    trivial = False

    def __init__(self, d: int, Ls: int):
        self.d = d
        self.Ls = Ls

    def energy(self, rs: BetheRootSet) -> complex:
        return symfun.energy_stepflat(rs, self.d, self.Ls)

    def ch_matrix(self, rs: BetheRootSet) -> np.ndarray:
        out = np.empty((rs.N, rs.L - rs.N), dtype=complex)
        for i, v in enumerate(rs.right):
            for j, u in enumerate(rs.left):
                out[i, j] = symfun.char_fn_stepflat(rs, self.d, self.Ls, v, u)
        return out


class PartialUniformWeights:
    """Weights averaging over a uniform left block plus a deterministic part."""

    trivial = False

    def __init__(self, lam: tuple[int, ...], N2: int):
        self.lam = lam
        self.N2 = N2

    def energy(self, rs: BetheRootSet) -> complex:
        return symfun.g_tilde(self.lam, rs.right, self.N2)

    def ch_matrix(self, rs: BetheRootSet) -> np.ndarray:
        denom = symfun.g_tilde(self.lam, rs.right, self.N2)
        if abs(denom) < 1e-10:
            raise PoleError("energy too close to zero for a stable ratio")
        out = np.empty((rs.N, rs.L - rs.N), dtype=complex)
        for i in range(rs.N):
            W = np.array(rs.right, dtype=complex)
            for j, u in enumerate(rs.left):
                W[i] = u
                out[i, j] = symfun.g_tilde(self.lam, W, self.N2) / denom
            W[i] = rs.right[i]
        return out


def weights_for(ic: InitialCondition, method: str = "auto"):
    """Pick the weight evaluation strategy for a configuration."""
    if method == "generic":
        return GenericWeights(ic)
    if method != "auto":
        raise ParameterError(f"unknown weight method {method!r}")
    if ic.kind == "step":
        return StepWeights()
    if ic.kind == "flat":
        return FlatWeights(ic.d)
    if ic.kind == "stepflat":
        return StepFlatWeights(ic.d, ic.Ls)
    return GenericWeights(ic)


# ---------------------------------------------------------------------------
# Contour prefactor.


def _log_energy_exponent(rs: BetheRootSet, o: Observation | None) -> complex:
    """Log of prod(-u)^{k-N-1} prod(v+1)^{-a+k-N} prod e^{t v}."""
    if o is None:
        return 0j
    N = rs.N
    return (
        (o.k - N - 1) * rs.sum_log_neg_left
        + (-o.a + o.k - N) * rs.sum_log_right_p1
        + o.t * rs.sum_right
    )


def c_step(
    obs: tuple[Observation, ...], rs_list: list[BetheRootSet]
) -> complex:
    """Prefactor of the integrand for the packed initial configuration."""
    m = len(obs)
    N = rs_list[0].N
    L = rs_list[0].L
    acc = 0j
    prev: Observation | None = None
    for o, rs in zip(obs, rs_list):
        acc += _log_energy_exponent(rs, o) - _log_energy_exponent(rs, prev)
        prev = o
    for rs in rs_list:
        acc += N * rs.sum_log_neg_left + (L - N) * rs.sum_log_right_p1
        acc -= rs.log_vdm_right_left
    for ell in range(1, m):
        za, zb = rs_list[ell - 1].zL, rs_list[ell].zL
        if abs(za - zb) < 1e-13 * abs(za):
            raise PoleError("adjacent contour radii collide in z^L")
        acc += cmath.log(za) - cmath.log(za - zb)
        acc += log_cross_vdm(rs_list[ell], rs_list[ell - 1])
        acc -= N * rs_list[ell - 1].sum_log_neg_left
        acc -= (L - N) * rs_list[ell].sum_log_right_p1
    return cmath.exp(acc)


# ---------------------------------------------------------------------------
# Kernels.


def _interleaved_points(rs_list: list[BetheRootSet]):
    """Interleaved point sets: odd circles contribute left/right to S1/S2,
    even circles the other way around.  Returns points and circle indices."""
    W1, C1, W2, C2 = [], [], [], []
    for i, rs in enumerate(rs_list, 1):
        a, b = (rs.left, rs.right) if i % 2 == 1 else (rs.right, rs.left)
        W1.extend(a)
        C1.extend([i] * len(a))
        W2.extend(b)
        C2.extend([i] * len(b))
    return (
        np.asarray(W1, dtype=complex),
        np.asarray(C1, dtype=int),
        np.asarray(W2, dtype=complex),
        np.asarray(C2, dtype=int),
    )


def _log_F(w: np.ndarray, o: Observation | None, N: int) -> np.ndarray:
    if o is None:
        return np.zeros_like(w)
    return (
        (-o.k + N + 1) * np.log(w)
        + (-o.a + o.k - N) * np.log(w + 1.0)
        + o.t * w
    )


def _log_f(w: np.ndarray, circ: np.ndarray, obs, N: int, rho: float) -> np.ndarray:
    """Log of the transport factor of circle `circ` at the points w."""
    out = np.empty_like(w)
    for i in range(1, len(obs) + 1):
        sel = circ == i
        if not np.any(sel):
            continue
        ws = w[sel]
        cur = _log_F(ws, obs[i - 1], N)
        prev = _log_F(ws, obs[i - 2] if i >= 2 else None, N)
        val = np.where(ws.real > -rho, prev - cur, cur - prev)
        out[sel] = val
    return out


def build_kernels_step(
    obs: tuple[Observation, ...], rs_list: list[BetheRootSet]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The two block-sparse kernel matrices for the packed configuration.

    Returns (K1, K2, W1, C1, W2, C2) where K1 maps the second point set to
    the first and K2 maps back.
    """
    m = len(obs)
    params = rs_list[0]
    N, L, rho = params.N, params.L, params.rho

    W1, C1, W2, C2 = _interleaved_points(rs_list)

    def rs_at(i: int) -> BetheRootSet | None:
        return rs_list[i - 1] if 1 <= i <= m else None

    def zl(i: int) -> complex:
        return rs_list[i - 1].zL if 1 <= i <= m else 0j

    # Partner circle indices: i -> i - (-1)^i for K1, i -> i + (-1)^i for K2.
    def minus(i):
        return i - (-1) ** i

    def plus(i):
        return i + (-1) ** i

    # Per-point logs of H against every circle that can appear.
    logH1 = {c: log_H(rs_at(c), W1) for c in range(0, m + 2)}
    logH2 = {c: log_H(rs_at(c), W2) for c in range(0, m + 2)}

    logf1 = _log_f(W1, C1, obs, N, rho)
    logf2 = _log_f(W2, C2, obs, N, rho)

    row1 = np.array(
        [
            logf1[a] + 2.0 * logH1[C1[a]][a] - logH1[minus(C1[a])][a]
            for a in range(len(W1))
        ]
    )
    col1 = np.array([-logH2[minus(C2[b])][b] for b in range(len(W2))])
    q1 = np.array([1.0 - zl(minus(C2[b])) / zl(C2[b]) for b in range(len(W2))])

    row2 = np.array(
        [
            logf2[b] + 2.0 * logH2[C2[b]][b] - logH2[plus(C2[b])][b]
            for b in range(len(W2))
        ]
    )
    col2 = np.array([-logH1[plus(C1[a])][a] for a in range(len(W1))])
    q2 = np.array([1.0 - zl(plus(C1[a])) / zl(C1[a]) for a in range(len(W1))])

    mask1 = (C2[None, :] == C1[:, None]) | (C2[None, :] == np.vectorize(minus)(C1)[:, None])
    mask2 = (C1[None, :] == C2[:, None]) | (C1[None, :] == np.vectorize(plus)(C2)[:, None])

    diff = W1[:, None] - W2[None, :]
    if np.any(mask1 & (np.abs(diff) < 1e-12)) or np.any(
        mask2.T & (np.abs(diff) < 1e-12)
    ):
        raise PoleError("interleaved point sets collide")
    safe1 = np.where(mask1, diff, 1.0)
    safe2 = np.where(mask2, -diff.T, 1.0)

    Jw1 = J_factor(W1, L, rho)
    Jw2 = J_factor(W2, L, rho)

    K1 = np.where(
        mask1,
        Jw1[:, None] * np.exp(row1[:, None] + col1[None, :]) * q1[None, :] / safe1,
        0.0,
    )
    K2 = np.where(
        mask2,
        Jw2[:, None] * np.exp(row2[:, None] + col2[None, :]) * q2[None, :] / safe2,
        0.0,
    )
    return K1, K2, W1, C1, W2, C2


def apply_Y_modification(
    K2: np.ndarray,
    C1: np.ndarray,
    C2: np.ndarray,
    rs1: BetheRootSet,
    weights,
) -> np.ndarray:
    """Multiply the innermost-circle block of K2 by the characteristic function.

    Rows of K2 on the first circle carry right roots, columns left roots;
    the interleaving stores both in the solver's sorted order.
    """
    if weights.trivial:
        return K2
    ch = weights.ch_matrix(rs1)
    K2 = K2.copy()
    rows = np.where(C2 == 1)[0]
    cols = np.where(C1 == 1)[0]
    K2[np.ix_(rows, cols)] *= ch
    return K2


def fredholm_det(K1: np.ndarray, K2: np.ndarray) -> complex:
    """det(I - K1 K2) evaluated on the smaller of the two index sets."""
    n1, n2 = K1.shape
    if n1 <= n2:
        M = np.eye(n1, dtype=complex) - K1 @ K2
    else:
        M = np.eye(n2, dtype=complex) - K2 @ K1
    return complex(np.linalg.det(M))


def integrand(
    obs: tuple[Observation, ...],
    rs_list: list[BetheRootSet],
    weights,
) -> complex:
    """The full integrand E_Y(z_1) * C_step * det(I - K1 K2^Y)."""
    E = weights.energy(rs_list[0])
    C = c_step(obs, rs_list)
    K1, K2, W1, C1, W2, C2 = build_kernels_step(obs, rs_list)
    K2 = apply_Y_modification(K2, C1, C2, rs_list[0], weights)
    return E * C * fredholm_det(K1, K2)


# ---------------------------------------------------------------------------
# Nested contour quadrature.


@dataclass(frozen=True)
class QuadConfig:
    """Controls for the nested trapezoid quadrature."""

    radii: tuple[float, ...] | None = None  # in normalized-z units
    n_nodes: int = 16
    max_nodes: int = 256
    tol: float = 1e-8
    max_retries: int = 5
    imag_tol: float = 1e-5


def default_radii(m: int) -> tuple[float, ...]:
    # Well separated radii: the trapezoid error decays like (r_{l+1}/r_l)^M
    # and r_1^M, so strong separation converges with far fewer nodes.
    return tuple(0.6 * 0.55**j for j in range(m))


class _RootCache:
    def __init__(self, params: ModelParams):
        self.params = params
        self._cache: dict[complex, BetheRootSet] = {}

    def get(self, z: complex) -> BetheRootSet:
        rs = self._cache.get(z)
        if rs is None:
            rs = solve_bethe_roots(self.params, z)
            self._cache[z] = rs
        return rs


def _quad_nodes(params: ModelParams, radii, M: int):
    """Per-circle physical z nodes: M equally spaced normalized angles."""
    nodes = []
    for ell, r in enumerate(radii, 1):
        angles = 2.0 * np.pi * (np.arange(M) + 0.31 * ell) / M
        nodes.append(
            [rescale_z(r * cmath.exp(1j * th), params).z_phys for th in angles]
        )
    return nodes


def nested_contour_integral(
    params: ModelParams,
    m: int,
    term,
    config: QuadConfig | None = None,
    report: dict | None = None,
) -> complex:
    """Average `term(rs_list)` over m nested circles, doubling nodes until
    the value stabilizes and growing all radii slightly if a node hits a pole.

    If `report` is given it is filled with the radii, node count, and retry
    count of the successful evaluation.
    """
    config = config or QuadConfig()
    radii = config.radii or default_radii(m)
    if len(radii) != m:
        raise ParameterError(f"expected {m} radii, got {len(radii)}")
    if any(r1 <= r2 for r1, r2 in zip(radii, radii[1:])) or radii[0] >= 1:
        raise ParameterError("radii must be strictly decreasing and below 1")

    last_err: Exception | None = None
    for attempt in range(config.max_retries + 1):
        fac = 1.01**attempt
        if radii[0] * fac >= 1:
            break
        try:
            val = _nested_quad_once(
                params, [r * fac for r in radii], term, config, report
            )
            if report is not None:
                report["radii"] = [r * fac for r in radii]
                report["retries"] = attempt
            return val
        except (PoleError, NumericalError) as exc:
            last_err = exc
    raise NumericalError(f"contour quadrature failed after retries: {last_err}")


def _nested_quad_once(params, radii, term, config: QuadConfig, report=None) -> complex:
    cache = _RootCache(params)
    m = len(radii)
    prev = None
    M = config.n_nodes
    while M <= config.max_nodes:
        nodes = _quad_nodes(params, radii, M)
        total = 0j
        for tup in itertools.product(*(range(M) for _ in range(m))):
            rs_list = [cache.get(nodes[ell][tup[ell]]) for ell in range(m)]
            total += term(rs_list)
        val = total / M**m
        if prev is not None and abs(val - prev) <= config.tol * max(1.0, abs(val)):
            if report is not None:
                report["M_final"] = M
            return val
        prev = val
        M *= 2
    raise NumericalError("contour quadrature did not converge within node budget")


def _as_probability(val: complex, config: QuadConfig) -> float:
    if abs(val.imag) > config.imag_tol * max(1.0, abs(val.real)):
        raise NumericalError(f"integral has a large imaginary part: {val}")
    p = val.real
    if p < -1e-6 or p > 1.0 + 1e-6:
        raise NumericalError(f"integral {p} is not a probability")
    return min(max(p, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Probability front-ends.


def multipoint_prob(
    ic: InitialCondition,
    obs,
    config: QuadConfig | None = None,
    method: str = "auto",
    report: dict | None = None,
) -> float:
    """P(x_{k_1}(t_1) >= a_1, ..., x_{k_m}(t_m) >= a_m) for a fixed start."""
    obs = validate_observations(obs)
    weights = weights_for(ic, method)
    config = config or QuadConfig()
    val = nested_contour_integral(
        ic.params,
        len(obs),
        lambda rs_list: integrand(obs, rs_list, weights),
        config,
        report,
    )
    if report is not None:
        report["imag_residual"] = abs(val.imag)
    return _as_probability(val, config)


def multipoint_prob_uniform(
    params: ModelParams,
    obs,
    config: QuadConfig | None = None,
    report: dict | None = None,
) -> float:
    """Joint probability when the initial condition is uniformly random."""
    obs = validate_observations(obs)
    obs_plus = tuple(replace(o, k=o.k + 1) for o in obs)
    weights = StepWeights()
    config = config or QuadConfig()
    pref = (-1.0) ** (params.N + 1) / math.comb(params.L, params.N)

    def term(rs_list):
        base = integrand(obs, rs_list, weights)
        plus = integrand(obs_plus, rs_list, weights)
        return (plus - base) / rs_list[0].zL

    val = pref * nested_contour_integral(params, len(obs), term, config, report)
    if report is not None:
        report["imag_residual"] = abs(val.imag)
    return _as_probability(val, config)


def multipoint_prob_partial_uniform(
    params: ModelParams,
    y_det,
    N1: int,
    obs,
    config: QuadConfig | None = None,
) -> float:
    """Joint probability when the leftmost N1 particles are uniformly random.

    The deterministic particles sit at y_det (strictly increasing, ending at
    0); the remaining N1 particles are uniform over the sites strictly left
    of y_det[0] and right of -L.
    """
    y_det = tuple(int(v) for v in y_det)
    N2 = len(y_det)
    if N2 < 1 or y_det[-1] != 0:
        raise ParameterError("deterministic part must end at the origin")
    if any(a >= b for a, b in zip(y_det, y_det[1:])):
        raise ParameterError("deterministic positions must be strictly increasing")
    if N1 + N2 != params.N:
        raise ParameterError("N1 + len(y_det) must equal N")
    y1 = y_det[0]
    if y1 + params.L - 1 < N1:
        raise ParameterError("not enough sites to place the uniform particles")
    obs = validate_observations(obs)
    lam = tuple(y_det[N2 - j] + j - 1 for j in range(1, N2 + 1))
    weights = PartialUniformWeights(lam, N2)
    config = config or QuadConfig()
    pref = 1.0 / math.comb(y1 + params.L - 1, N1)
    val = pref * nested_contour_integral(
        params, len(obs), lambda rs_list: integrand(obs, rs_list, weights), config
    )
    return _as_probability(val, config)


def fredholm_integrand_at(
    ic: InitialCondition,
    obs,
    z_list,
    method: str = "auto",
) -> complex:
    """The integrand C_Y(z) D_Y(z) at explicit nested physical z values."""
    obs = validate_observations(obs)
    if len(z_list) != len(obs):
        raise ParameterError("need one z per observation")
    mags = [abs(z) for z in z_list]
    if any(m2 >= m1 for m1, m2 in zip(mags, mags[1:])):
        raise ParameterError("|z| values must be strictly decreasing")
    rs_list = [solve_bethe_roots(ic.params, z) for z in z_list]
    return integrand(obs, rs_list, weights_for(ic, method))
