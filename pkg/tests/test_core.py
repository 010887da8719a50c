"""Model parameters, initial conditions, observations, and scaling maps."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptaseplab import (
    LimitCoordinate,
    ModelParams,
    Observation,
    ParameterError,
    ResourceError,
    make_explicit_ic,
    make_flat_ic,
    make_step_ic,
    make_stepflat_ic,
    scaled_params,
)
from ptaseplab.core import (
    covering_position,
    height_event_to_particle_event,
    initial_height,
    lambda_of,
    validate_observations,
)


def test_model_params_basics():
    p = ModelParams(8, 2)
    assert p.rho == 0.25
    assert p.r0 == pytest.approx(0.25**0.25 * 0.75**0.75)
    with pytest.raises(ParameterError):
        ModelParams(4, 0)
    with pytest.raises(ParameterError):
        ModelParams(4, 4)
    with pytest.raises(ResourceError):
        ModelParams(1024, 3)


def test_step_ic_positions():
    ic = make_step_ic(5, 3)
    assert ic.y == (-2, -1, 0)
    assert ic.params.L == 5
    # the window constraint y_N <= 0 < y_1 + L holds
    assert ic.y[-1] <= 0 < ic.y[0] + 5


def test_flat_ic_positions():
    ic = make_flat_ic(3, 2)
    assert ic.params.L == 6
    assert ic.y == (-4, -2, 0)


def test_stepflat_ic_positions():
    ic = make_stepflat_ic(2, 3, 2)
    assert ic.params.L == 8
    assert ic.y == (-3, 0)


def test_explicit_ic_normalizes_labels():
    # positions outside the window are shifted by multiples of (N, L)
    ic = make_explicit_ic(6, (1, 3, 5))
    assert ic.y[-1] <= 0 < ic.y[0] + 6
    # all three occupied ring sites survive the normalization
    sites = sorted(y % 6 for y in ic.y)
    assert sites == [1, 3, 5]


def test_explicit_ic_rejects_collisions():
    with pytest.raises(ParameterError):
        make_explicit_ic(6, (0, 0, 3))


def test_covering_position_periodicity():
    ic = make_step_ic(6, 3)
    for k in range(-3, 10):
        j, k0 = divmod(k - 1, 3)
        assert covering_position(ic, k) == ic.y[k0] + 6 * j


def test_lambda_of_step():
    ic = make_step_ic(7, 3)
    # step positions y = (-2,-1,0) give lambda_j = y_{N-j} + j - 1 = 0
    assert lambda_of(ic) == (0, 0, 0)


def test_height_duality_translation():
    ic = make_step_ic(6, 3)
    ell, b = 2, initial_height(ic, 2) + 2
    k, a = height_event_to_particle_event(ell, b, ic)
    assert (b - ell) % 2 == 0
    assert a == ell + 1


def test_observation_validation():
    obs = (Observation(1, 1.0, 0), Observation(2, 1.0, 1), Observation(1, 2.0, 2))
    assert validate_observations(obs) == obs
    with pytest.raises(ParameterError):
        validate_observations((Observation(1, 2.0, 0), Observation(1, 1.0, 1)))
    with pytest.raises(ParameterError):
        validate_observations((Observation(1, 0.0, 0),))
    with pytest.raises(ParameterError):
        validate_observations((Observation(1, 1.0, 0), Observation(1, 1.0, 5)))


def test_scaled_params_parity_and_window():
    p = ModelParams(64, 32)
    obs, x_eff = scaled_params([LimitCoordinate(0.5, 1.0, 0.0)], p)
    assert len(obs) == 1 and len(x_eff) == 1
    o = obs[0]
    # the rounded height threshold stays within half a lattice unit of x
    assert abs(x_eff[0]) < 0.5
    assert o.t > 0
    # the particle label refers to a copy of a fundamental label
    j, k0 = divmod(o.k - 1, 32)
    assert 0 <= k0 < 32


@given(
    L=st.integers(2, 12),
    data=st.data(),
)
@settings(max_examples=60, deadline=None)
def test_explicit_ic_window_property(L, data):
    N = data.draw(st.integers(1, L - 1))
    base = data.draw(st.lists(st.integers(0, L - 1), min_size=N, max_size=N, unique=True))
    shift = data.draw(st.integers(-L, L))
    sites = [s + shift for s in sorted(base)]
    ic = make_explicit_ic(L, sites)
    assert ic.y[-1] <= 0 < ic.y[0] + L
    assert all(a < b for a, b in zip(ic.y, ic.y[1:]))
    assert sorted(y % L for y in ic.y) == sorted(s % L for s in sites)
