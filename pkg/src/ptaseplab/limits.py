"""Large-time limit laws on the relaxation scale.

As L grows with t ~ L^{3/2}, the rescaled Bethe roots condense onto the
discrete solution sets of e^{-zeta^2/2} = z and the finite-ring formulas
converge to limit distributions F_ic(x; gamma, tau).  This module evaluates
the limit objects directly: polylogarithm series, the log-resolvent h, the
pair energy B, the limiting node sets, the limit kernels, and the
initial-condition data (step, flat, step-flat, uniform, uniform-step).
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError, PoleError

_SQRT2PI = math.sqrt(2.0 * math.pi)
_MAX_ABS_Z = 0.95


# ---------------------------------------------------------------------------
# Series building blocks.


def polylog(s: float, z) -> np.ndarray | complex:
    """Li_s(z) by power series with a certified geometric tail bound.

    Restricted to |z| <= 0.95 so the truncation error is below 1e-15.
    """
    scalar = np.isscalar(z)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    r = float(np.max(np.abs(z)))
    if r > _MAX_ABS_Z:
        raise ParameterError(f"polylog series restricted to |z| <= {_MAX_ABS_Z}")
    if r == 0.0:
        out = np.zeros_like(z)
        return complex(out[0]) if scalar else out
    # Tail after K terms is bounded by r^{K+1} / ((K+1)^s (1-r)).
    K = max(12, int(math.ceil(math.log(1e-16 * (1.0 - r)) / math.log(r))))
    acc = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, K + 1):
        term = term * z
        acc += term / k**s
    return complex(acc[0]) if scalar else acc


def A1(z) -> complex:
    """Drift coefficient of the location variable in the limit prefactor."""
    return -polylog(1.5, z) / _SQRT2PI


def A2(z) -> complex:
    """Drift coefficient of the time variable in the limit prefactor."""
    return -polylog(2.5, z) / _SQRT2PI


def B_fn(z1: complex, z2: complex) -> complex:
    """Pair energy B(z1,z2) = (1/4pi) sum z1^k z2^k' / ((k+k') sqrt(k k'))."""
    if z1 == 0 or z2 == 0:
        return 0j
    r = max(abs(z1), abs(z2))
    if r > _MAX_ABS_Z:
        raise ParameterError(f"B series restricted to |z| <= {_MAX_ABS_Z}")
    K = max(12, int(math.ceil(math.log(1e-14 * (1.0 - r) ** 2 / 2.0) / math.log(r))))
    k = np.arange(1, K + 1)
    a = z1**k / np.sqrt(k)
    b = z2**k / np.sqrt(k)
    denom = k[:, None] + k[None, :]
    return complex(np.sum(a[:, None] * b[None, :] / denom)) / (4.0 * math.pi)


def B_diag(z: complex) -> complex:
    return B_fn(z, z)


def B_diag_quad(z: complex, n: int = 200) -> complex:
    """Cross-check form of B(z,z): the ray integral of Li_{1/2}(y)^2 / y."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    vals = polylog(0.5, z * t) ** 2 / t
    return complex(np.sum(wt * vals)) / (4.0 * math.pi)


# ---------------------------------------------------------------------------
# The log-resolvent h and the limiting node sets.


_H_NODES = 160
_H_CUTOFF = 10.0
_gl_x, _gl_w = np.polynomial.legendre.leggauss(_H_NODES)
_H_S = 0.5 * _H_CUTOFF * (_gl_x + 1.0)
_H_W = 0.5 * _H_CUTOFF * _gl_w


def h_fn(zeta, z: complex) -> np.ndarray | complex:
    """h(zeta, z): the half-plane log-resolvent of the Gaussian-weighted nodes.

    Evaluated through the ray integral of Li_{1/2} along Re(zeta) -> -inf,
    which stays smooth arbitrarily close to the imaginary axis; the right
    half-plane value is the mirror h(-zeta, z).
    """
    scalar = np.isscalar(zeta)
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    if abs(z) > _MAX_ABS_Z:
        raise ParameterError(f"h restricted to |z| <= {_MAX_ABS_Z}")
    zeff = np.where(zeta.real > 0, -zeta, zeta)
    arg = z * np.exp(zeff[:, None] * _H_S[None, :] - 0.5 * _H_S[None, :] ** 2)
    li = polylog(0.5, arg.ravel()).reshape(arg.shape)
    out = -np.sum(li * _H_W[None, :], axis=1) / _SQRT2PI
    return complex(out[0]) if scalar else out


def h_fn_alt(zeta: complex, z: complex, n: int = 4001, cutoff: float = 12.0) -> complex:
    """Cross-check form of h for Re(zeta) < 0: a Cauchy transform along the
    imaginary axis of log(1 - z e^{w^2/2})."""
    if zeta.real >= 0:
        raise ParameterError("this form needs Re(zeta) < 0")
    y = np.linspace(-cutoff, cutoff, n)
    vals = np.log(1.0 - z * np.exp(-0.5 * y**2)) / (1j * y - zeta)
    return complex(np.trapezoid(vals, y)) / (2.0 * math.pi)


def limiting_nodes(z: complex, Xi: float) -> tuple[np.ndarray, np.ndarray]:
    """All solutions of e^{-zeta^2/2} = z with |zeta| <= Xi, split by Re sign."""
    if z == 0 or abs(z) >= 1:
        raise ParameterError("need 0 < |z| < 1")
    base = -2.0 * cmath.log(z)
    kmax = int((Xi * Xi + 2.0 * abs(cmath.log(z))) / (4.0 * math.pi)) + 2
    right = []
    for k in range(-kmax, kmax + 1):
        zeta = cmath.sqrt(base - 4j * math.pi * k)
        if abs(zeta) <= Xi:
            if abs(zeta.real) < 1e-12:
                raise NumericalError("a limiting node landed on the imaginary axis")
            if zeta.real < 0:
                zeta = -zeta
            right.append(zeta)
    right = np.array(sorted(right, key=lambda w: w.imag), dtype=complex)
    left = -right
    return left, right


# ---------------------------------------------------------------------------
# Limit prefactor and kernels.


def C_step_limit(z_list, x, tau) -> complex:
    """The limit prefactor for the packed initial condition."""
    m = len(z_list)
    acc = 1.0 + 0j
    for ell in range(m):
        zc = z_list[ell]
        zn = z_list[ell + 1] if ell + 1 < m else 0j
        if abs(zc - zn) < 1e-13:
            raise PoleError("adjacent contour values collide")
        acc *= zc / (zc - zn)
        expo = x[ell] * A1(zc) + tau[ell] * A2(zc) + 2.0 * B_diag(zc)
        if zn != 0:
            expo -= x[ell] * A1(zn) + tau[ell] * A2(zn) + 2.0 * B_fn(zn, zc)
        acc *= cmath.exp(expo)
    return acc


def _log_f_limit(zeta: np.ndarray, circ: np.ndarray, x, gamma, tau) -> np.ndarray:
    out = np.empty_like(zeta)
    for i in range(1, len(x) + 1):
        sel = circ == i
        if not np.any(sel):
            continue
        zc = zeta[sel]
        dtau = tau[i - 1] - (tau[i - 2] if i >= 2 else 0.0)
        dgam = gamma[i - 1] - (gamma[i - 2] if i >= 2 else 0.0)
        dx = x[i - 1] - (x[i - 2] if i >= 2 else 0.0)
        expo = -dtau / 3.0 * zc**3 + dgam / 2.0 * zc**2 + dx * zc
        out[sel] = np.where(zc.real < 0, expo, -expo)
    return out


def build_kernels_limit(
    z_list, node_sets, x, gamma, tau
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The limit kernels on interleaved node sets of the m nested circles.

    node_sets[l] is the (left, right) pair for z_list[l].
    """
    m = len(z_list)
    W1, C1, W2, C2 = [], [], [], []
    for i in range(1, m + 1):
        left, right = node_sets[i - 1]
        a, b = (left, right) if i % 2 == 1 else (right, left)
        W1.extend(a)
        C1.extend([i] * len(a))
        W2.extend(b)
        C2.extend([i] * len(b))
    W1 = np.asarray(W1, dtype=complex)
    C1 = np.asarray(C1, dtype=int)
    W2 = np.asarray(W2, dtype=complex)
    C2 = np.asarray(C2, dtype=int)

    def zv(i: int) -> complex:
        return z_list[i - 1] if 1 <= i <= m else 0j

    def minus(i):
        return i - (-1) ** i

    def plus(i):
        return i + (-1) ** i

    def hmat(W):
        return {
            c: (h_fn(W, zv(c)) if 1 <= c <= m else np.zeros_like(W))
            for c in range(0, m + 2)
        }

    h1 = hmat(W1)
    h2 = hmat(W2)
    logf1 = _log_f_limit(W1, C1, x, gamma, tau)
    logf2 = _log_f_limit(W2, C2, x, gamma, tau)

    row1 = np.array(
        [logf1[a] + 2.0 * h1[C1[a]][a] - h1[minus(C1[a])][a] for a in range(len(W1))]
    )
    col1 = np.array([-h2[minus(C2[b])][b] for b in range(len(W2))])
    q1 = np.array([1.0 - zv(minus(C2[b])) / zv(C2[b]) for b in range(len(W2))])

    row2 = np.array(
        [logf2[b] + 2.0 * h2[C2[b]][b] - h2[plus(C2[b])][b] for b in range(len(W2))]
    )
    col2 = np.array([-h1[plus(C1[a])][a] for a in range(len(W1))])
    q2 = np.array([1.0 - zv(plus(C1[a])) / zv(C1[a]) for a in range(len(W1))])

    mask1 = (C2[None, :] == C1[:, None]) | (
        C2[None, :] == (C1 - (-1) ** C1)[:, None]
    )
    mask2 = (C1[None, :] == C2[:, None]) | (
        C1[None, :] == (C2 + (-1) ** C2)[:, None]
    )

    diff = W1[:, None] - W2[None, :]
    if np.any(mask1 & (np.abs(diff) < 1e-12)):
        raise PoleError("interleaved node sets collide")
    safe1 = np.where(mask1, diff, 1.0)
    safe2 = np.where(mask2, -diff.T, 1.0)

    K1 = np.where(
        mask1,
        np.exp(row1[:, None] + col1[None, :]) * q1[None, :] / (W1[:, None] * safe1),
        0.0,
    )
    K2 = np.where(
        mask2,
        np.exp(row2[:, None] + col2[None, :]) * q2[None, :] / (W2[:, None] * safe2),
        0.0,
    )
    return K1, K2, W1, C1, W2, C2


# ---------------------------------------------------------------------------
# Initial-condition data for the limit laws.


class StepLimitData:
    kind = "step"
    trivial = True

    def E(self, z: complex) -> complex:
        return 1.0 + 0j

    def chi_matrix(self, z, right, left) -> np.ndarray:
        return np.ones((len(right), len(left)), dtype=complex)


class FlatLimitData:
    kind = "flat"
    trivial = False

    def E(self, z: complex) -> complex:
        return cmath.exp(-0.25 * cmath.log(1.0 - z)) * cmath.exp(-B_diag(z))

    def chi_matrix(self, z, right, left) -> np.ndarray:
        hr = h_fn(right, z)
        out = np.zeros((len(right), len(left)), dtype=complex)
        for i, eta in enumerate(right):
            for j, xi in enumerate(left):
                if abs(xi + eta) < 1e-9 * (1.0 + abs(eta)):
                    out[i, j] = 2.0 * eta * eta * cmath.exp(-2.0 * hr[i])
        return out


class StepFlatLimitData:
    kind = "stepflat"
    trivial = False

    def __init__(self, mu: float, grid: int = 240, cutoff: float = 9.0):
        if mu <= 0:
            raise ParameterError(f"mu must be positive, got {mu}")
        self.mu = mu
        self.grid = grid
        self.cutoff = cutoff

    def E(self, z: complex) -> complex:
        mu = self.mu
        # Deform both contours to c + iR with e^{-c^2/2} > |z| so the log
        # factor stays away from its singularity even as mu -> 0.
        c = 0.85 * math.sqrt(-2.0 * math.log(abs(z)))
        y = np.linspace(-self.cutoff, self.cutoff, self.grid)
        eta = c + 1j * y
        denom = np.exp(-0.5 * eta**2) - z
        f = eta / denom
        logterm = np.log(eta[:, None] + eta[None, :] + 2.0 * mu)
        inner = f[:, None] * f[None, :] * logterm
        dy = y[1] - y[0]
        # d eta / (2 pi i) = dy / (2 pi) on each vertical contour, and the
        # integrand is analytic between the imaginary axis and the shifted
        # contour, so the value is unchanged by the deformation.
        integral = complex(np.sum(inner)) * dy * dy / (4.0 * math.pi**2)
        return cmath.exp(-0.5 * h_fn(mu, z) + 0.5 * z**2 * integral)

    def chi_matrix(self, z, right, left) -> np.ndarray:
        mu = self.mu
        out = np.empty((len(right), len(left)), dtype=complex)
        for i, eta in enumerate(right):
            h_meta = h_fn(-eta - 2.0 * mu, z)
            for j, xi in enumerate(left):
                if abs(xi + eta + 2.0 * mu) < 1e-12:
                    raise PoleError("step-flat kernel pole at xi + eta + 2 mu = 0")
                pref = 2.0 * (eta + mu) / (xi + eta + 2.0 * mu)
                if (xi + 2.0 * mu).real > 0:
                    out[i, j] = pref * cmath.exp(
                        h_fn(-xi - 2.0 * mu, z) - h_meta
                    )
                else:
                    out[i, j] = (
                        pref
                        * (1.0 - z * cmath.exp(0.5 * (xi + 2.0 * mu) ** 2))
                        * cmath.exp(-h_fn(xi + 2.0 * mu, z) - h_meta)
                    )
        return out


class UniformStepLimitData:
    kind = "uniformstep"
    trivial = False

    def __init__(self, alpha: float, grid: int = 400, cutoff: float = 9.0):
        if alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {alpha}")
        self.alpha = alpha
        self.grid = grid
        self.cutoff = cutoff

    def _line(self, c: float):
        y = np.linspace(-self.cutoff, self.cutoff, self.grid)
        return c + 1j * y, y[1] - y[0]

    def E(self, z: complex) -> complex:
        zeta, dy = self._line(0.0)
        vals = np.exp(-h_fn(zeta + self.alpha, z) + 0.5 * zeta**2)
        return complex(np.sum(vals)) * dy / _SQRT2PI

    def chi_matrix(self, z, right, left) -> np.ndarray:
        E = self.E(z)
        out = np.empty((len(right), len(left)), dtype=complex)
        for i, eta in enumerate(right):
            # Vertical contour right of the pole at zeta = eta - alpha but
            # kept near the origin so e^{zeta^2/2} stays O(1).
            c = max(0.0, eta.real - self.alpha + 0.5)
            zeta, dy = self._line(c)
            base = np.exp(-h_fn(zeta + self.alpha, z) + 0.5 * zeta**2)
            denom = zeta + self.alpha - eta
            for j, xi in enumerate(left):
                vals = base * (zeta + self.alpha - xi) / denom
                out[i, j] = np.sum(vals) * dy / _SQRT2PI / E
        return out


def ic_data(kind: str, **kw):
    """Initial-condition data (E, chi) for the limit laws."""
    if kind == "step":
        return StepLimitData()
    if kind == "flat":
        return FlatLimitData()
    if kind == "stepflat":
        return StepFlatLimitData(**kw)
    if kind == "uniformstep":
        return UniformStepLimitData(**kw)
    raise ParameterError(f"unknown initial-condition kind {kind!r}")


# ---------------------------------------------------------------------------
# The limit distributions.


@dataclass(frozen=True)
class LimitConfig:
    radii: tuple[float, ...] | None = None
    n_nodes: int = 12
    max_nodes: int = 192
    tol: float = 1e-7
    Xi: float = 5.0
    Xi_step: float = 2.0
    Xi_rounds: int = 2
    Xi_tol: float = 1e-5
    diff_step: float = 1e-4


def _limit_radii(m: int) -> tuple[float, ...]:
    # Strong separation keeps the trapezoid node count low; see default_radii.
    return tuple(0.55 * 0.55**j for j in range(m))


def _limit_integral(z_radii, term, config: LimitConfig) -> complex:
    m = len(z_radii)
    prev = None
    M = config.n_nodes
    while M <= config.max_nodes:
        nodes = [
            [
                r * cmath.exp(2j * math.pi * (j + 0.31 * ell) / M)
                for j in range(M)
            ]
            for ell, r in enumerate(z_radii, 1)
        ]
        total = 0j
        for tup in itertools.product(*(range(M) for _ in range(m))):
            z_list = [nodes[ell][tup[ell]] for ell in range(m)]
            total += term(z_list)
        val = total / M**m
        if prev is not None and abs(val - prev) <= config.tol * max(1.0, abs(val)):
            return val
        prev = val
        M *= 2
    raise NumericalError("limit quadrature did not converge within node budget")


def _F_at_Xi(x, gamma, tau, data, config: LimitConfig, Xi: float) -> complex:
    m = len(x)
    radii = config.radii or _limit_radii(m)
    node_cache: dict[complex, tuple[np.ndarray, np.ndarray]] = {}

    def nodes_for(z: complex):
        ns = node_cache.get(z)
        if ns is None:
            ns = limiting_nodes(z, Xi)
            node_cache[z] = ns
        return ns

    def term(z_list):
        node_sets = [nodes_for(z) for z in z_list]
        K1, K2, W1, C1, W2, C2 = build_kernels_limit(
            z_list, node_sets, x, gamma, tau
        )
        if not data.trivial:
            left, right = node_sets[0]
            chi = data.chi_matrix(z_list[0], right, left)
            K2 = K2.copy()
            rows = np.where(C2 == 1)[0]
            cols = np.where(C1 == 1)[0]
            K2[np.ix_(rows, cols)] *= chi
        n1 = K1.shape[0]
        D = complex(np.linalg.det(np.eye(n1, dtype=complex) - K1 @ K2))
        return data.E(z_list[0]) * C_step_limit(z_list, x, tau) * D

    return _limit_integral(radii, term, config)


def F_ic(
    kind: str,
    x,
    tau,
    gamma=None,
    config: LimitConfig | None = None,
    **ic_kw,
) -> float:
    """The limit law F_ic(x; gamma, tau) for a deterministic-type start."""
    config = config or LimitConfig()
    x = [float(v) for v in np.atleast_1d(x)]
    tau = [float(v) for v in np.atleast_1d(tau)]
    gamma = [0.0] * len(x) if gamma is None else [float(v) for v in np.atleast_1d(gamma)]
    if not len(x) == len(tau) == len(gamma):
        raise ParameterError("x, tau, gamma must have equal length")
    if any(t <= 0 for t in tau) or any(b < a for a, b in zip(tau, tau[1:])):
        raise ParameterError("tau must be positive and nondecreasing")
    data = ic_data(kind, **ic_kw)

    val = None
    Xi = config.Xi
    for _ in range(config.Xi_rounds + 1):
        new = _F_at_Xi(x, gamma, tau, data, config, Xi)
        if val is not None and abs(new - val) <= config.Xi_tol * max(1.0, abs(new)):
            val = new
            break
        val = new
        Xi += config.Xi_step
    if abs(val.imag) > 1e-4 * max(1.0, abs(val.real)):
        raise NumericalError(f"limit law has a large imaginary part: {val}")
    return float(val.real)


def F_uniform(
    x,
    tau,
    gamma=None,
    config: LimitConfig | None = None,
    richardson: bool = False,
) -> float:
    """The limit law for the uniformly random start: a common-shift derivative
    of the packed-start integrand, taken inside the contour integral."""
    config = config or LimitConfig()
    x = [float(v) for v in np.atleast_1d(x)]
    tau = [float(v) for v in np.atleast_1d(tau)]
    gamma = [0.0] * len(x) if gamma is None else [float(v) for v in np.atleast_1d(gamma)]
    data = StepLimitData()
    m = len(x)
    radii = config.radii or _limit_radii(m)
    Xi = config.Xi + config.Xi_step  # skip the refinement loop; use a safe size

    def cd(z_list, eps, node_cache):
        xs = [v + eps for v in x]
        node_sets = []
        for z in z_list:
            ns = node_cache.get(z)
            if ns is None:
                ns = limiting_nodes(z, Xi)
                node_cache[z] = ns
            node_sets.append(ns)
        K1, K2, *_ = build_kernels_limit(z_list, node_sets, xs, gamma, tau)
        n1 = K1.shape[0]
        D = complex(np.linalg.det(np.eye(n1, dtype=complex) - K1 @ K2))
        return C_step_limit(z_list, xs, tau) * D

    def deriv(z_list, h, cache):
        return (cd(z_list, h, cache) - cd(z_list, -h, cache)) / (2.0 * h)

    cache: dict[complex, tuple[np.ndarray, np.ndarray]] = {}

    def term(z_list):
        h = config.diff_step
        d = deriv(z_list, h, cache)
        if richardson:
            d2 = deriv(z_list, 0.5 * h, cache)
            d = (4.0 * d2 - d) / 3.0
        return -_SQRT2PI / z_list[0] * d

    val = _limit_integral(radii, term, config)
    if abs(val.imag) > 1e-4 * max(1.0, abs(val.real)):
        raise NumericalError(f"limit law has a large imaginary part: {val}")
    return float(val.real)
