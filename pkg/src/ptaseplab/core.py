"""Ring geometry, initial conditions, and height/particle duality.

The model is TASEP on a ring of ``L`` sites with ``N`` particles.  Particle
positions are tracked on the covering line: ``x_1(t) < ... < x_N(t)`` with the
periodic extension ``x_{k+N}(t) = x_k(t) + L``.  Initial conditions are kept
in the normalized window ``y_N <= 0 < y_1 + L`` so that the index ``K`` with
``x_K(0) <= 0 < x_{K+1}(0)`` equals ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError, ResourceError

MAX_RING_SIZE = 512


@dataclass(frozen=True)
class ModelParams:
    """Ring size L and particle number N."""

    L: int
    N: int

    def __post_init__(self) -> None:
        if not (isinstance(self.L, int) and isinstance(self.N, int)):
            raise ParameterError("L and N must be integers")
        if not 1 <= self.N < self.L:
            raise ParameterError(f"need 1 <= N < L, got N={self.N}, L={self.L}")
        if self.L > MAX_RING_SIZE:
            raise ResourceError(
                f"ring size {self.L} exceeds supported maximum {MAX_RING_SIZE}"
            )

    @property
    def rho(self) -> float:
        return self.N / self.L

    @property
    def r0(self) -> float:
        """Radius of the annulus where left/right root sets stay separated."""
        rho = self.rho
        return rho**rho * (1.0 - rho) ** (1.0 - rho)


@dataclass(frozen=True)
class InitialCondition:
    """Particle configuration ``y_1 < ... < y_N`` with ``y_N <= 0 < y_1 + L``.

    ``label_shift`` records the relabeling applied by :func:`make_explicit_ic`:
    particle ``k`` of the original configuration is particle ``k - label_shift``
    here (on the covering line, ``x_{k+N} = x_k + L``).
    """

    params: ModelParams
    y: tuple[int, ...]
    kind: str = "explicit"
    label_shift: int = 0
    d: int | None = None
    Ls: int | None = None

    def __post_init__(self) -> None:
        L, N = self.params.L, self.params.N
        if len(self.y) != N:
            raise ParameterError(f"expected {N} positions, got {len(self.y)}")
        if any(self.y[i] >= self.y[i + 1] for i in range(N - 1)):
            raise ParameterError("positions must be strictly increasing")
        if not (self.y[-1] <= 0 < self.y[0] + L):
            raise ParameterError(
                f"positions must satisfy y_N <= 0 < y_1 + L, got {self.y}"
            )

    def to_json_dict(self) -> dict:
        return {"L": self.params.L, "N": self.params.N, "y": list(self.y)}


def make_step_ic(L: int, N: int) -> InitialCondition:
    """Packed block ending at the origin: y_i = i - N."""
    params = ModelParams(L, N)
    return InitialCondition(params, tuple(i - N for i in range(1, N + 1)), kind="step")


def make_flat_ic(N: int, d: int) -> InitialCondition:
    """Evenly spaced particles y_i = (i - N) d on a ring of L = d N sites."""
    if d < 2:
        raise ParameterError(f"flat spacing must satisfy d >= 2, got d={d}")
    params = ModelParams(d * N, N)
    return InitialCondition(
        params, tuple((i - N) * d for i in range(1, N + 1)), kind="flat", d=d
    )


def make_stepflat_ic(N: int, d: int, Ls: int) -> InitialCondition:
    """Evenly spaced particles y_i = (i - N) d on a ring of L = d N + Ls sites."""
    if d < 2:
        raise ParameterError(f"spacing must satisfy d >= 2, got d={d}")
    L = d * N + Ls
    if not 0 < Ls < L:
        raise ParameterError(f"need 0 < Ls < L, got Ls={Ls}, L={L}")
    params = ModelParams(L, N)
    return InitialCondition(
        params, tuple((i - N) * d for i in range(1, N + 1)), kind="stepflat", d=d, Ls=Ls
    )


def make_explicit_ic(L: int, y: tuple[int, ...] | list[int]) -> InitialCondition:
    """Normalize an arbitrary configuration into the window y_N <= 0 < y_1 + L.

    The input must be strictly increasing with y_N < y_1 + L.  Normalization
    relabels along the covering line and records the shift.
    """
    y = tuple(int(v) for v in y)
    N = len(y)
    params = ModelParams(L, N)
    if any(y[i] >= y[i + 1] for i in range(N - 1)):
        raise ParameterError("positions must be strictly increasing")
    if y[-1] >= y[0] + L:
        raise ParameterError("positions must fit in one period: y_N < y_1 + L")
    # K = largest covering-line index with position <= 0.
    K = max(j + 1 + math.floor(-yj / L) * N for j, yj in enumerate(y))
    shift = K - N
    norm = tuple(_covering_position(y, L, j + shift) for j in range(1, N + 1))
    return InitialCondition(params, norm, kind="explicit", label_shift=shift)


def _covering_position(y: tuple[int, ...], L: int, k: int) -> int:
    """Position x_k on the covering line given one period of labels."""
    N = len(y)
    q, r = divmod(k - 1, N)
    return y[r] + q * L


def covering_position(ic: InitialCondition, k: int) -> int:
    """Initial position of particle k for any integer label k."""
    return _covering_position(ic.y, ic.params.L, k)


def lambda_of(ic: InitialCondition) -> tuple[int, ...]:
    """Weakly decreasing weight vector lambda_j = y_{N+1-j} + j - 1."""
    N = ic.params.N
    return tuple(ic.y[N - j] + j - 1 for j in range(1, N + 1))


def initial_height(ic: InitialCondition, ell: int) -> int:
    """Height function h(ell, 0) of the initial configuration (h(0,0) = 0)."""
    L = ic.params.L
    # Signed count of occupied sites in (0, ell]; negative range counts (ell, 0].
    occ = sum(math.floor((ell - yi) / L) - math.floor(-yi / L) for yi in ic.y)
    return ell - 2 * occ


def height_event_to_particle_event(
    ell: int, b: int, ic: InitialCondition
) -> tuple[int, int]:
    """Translate the height event {h(ell,t) >= b} into {x_k(t) >= a}."""
    if (b - ell) % 2 != 0:
        raise ParameterError(f"b - ell must be even, got b={b}, ell={ell}")
    h0 = initial_height(ic, ell)
    if b < h0:
        raise ParameterError(
            f"threshold b={b} below the initial height h({ell},0)={h0}"
        )
    # Normalized configurations have K = N.
    k = ic.params.N - (b - ell) // 2 + 1
    return k, ell + 1


@dataclass(frozen=True)
class Observation:
    """One constraint {x_k(t) >= a}."""

    k: int
    t: float
    a: int

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or not isinstance(self.a, int):
            raise ParameterError("k and a must be integers")
        if not math.isfinite(self.t) or self.t < 0:
            raise ParameterError(f"time must be finite and nonnegative, got {self.t}")


def validate_observations(
    obs: tuple[Observation, ...] | list[Observation], require_positive_t: bool = True
) -> tuple[Observation, ...]:
    obs = tuple(obs)
    if not obs:
        raise ParameterError("at least one observation is required")
    for o1, o2 in zip(obs, obs[1:]):
        if o2.t < o1.t:
            raise ParameterError("observation times must be nondecreasing")
    if require_positive_t and obs[0].t <= 0:
        raise ParameterError("the first observation time must be positive")
    if len({(o.k, o.t) for o in obs}) != len(obs):
        raise ParameterError("(k, t) pairs must be distinct")
    return obs


@dataclass(frozen=True)
class LimitCoordinate:
    """Relaxation-scale coordinates: location gamma, time tau, fluctuation x."""

    gamma: float
    tau: float
    x: float

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")


def scaled_params(
    coords: list[LimitCoordinate] | tuple[LimitCoordinate, ...],
    params: ModelParams,
) -> tuple[tuple[Observation, ...], tuple[float, ...]]:
    """Map relaxation-scale coordinates onto finite-ring observations.

    Returns the observations (with particle labels normalized into 1..N by
    whole-period translations) and the effective fluctuation values implied
    by integer rounding; the latter drift from the requested x by O(L^-1/2).
    """
    L, N = params.L, params.N
    rho = params.rho
    sigma = math.sqrt(rho * (1.0 - rho))
    out = []
    x_eff = []
    for c in coords:
        t = c.tau * L**1.5 / sigma
        s = c.gamma * L
        ell = round(s + (1.0 - 2.0 * rho) * t)
        center = (1.0 - 2.0 * rho) * s + (1.0 - 2.0 * rho + 2.0 * rho * rho) * t
        b_f = center - 2.0 * c.x * sigma * math.sqrt(L)
        b = round(b_f)
        if (b - ell) % 2 != 0:
            b += 1 if b_f >= b else -1
        x_eff.append((center - b) / (2.0 * sigma * math.sqrt(L)))
        k = N - (b - ell) // 2 + 1
        a = ell + 1
        # Translate by whole periods to bring the label into 1..N.
        j = -((k - 1) // N)
        out.append(Observation(k + j * N, t, a + j * L))
    return tuple(out), tuple(x_eff)
