"""Joint distribution front-ends against exact Markov-chain references.

The expected values below were produced by the uniformization oracle
(ctmc_exact_prob with tol=1e-13), which shares no code with the contour
integral pipeline under test.
"""

import itertools
import math

import pytest

from ptaseplab import (
    ModelParams,
    Observation,
    QuadConfig,
    make_explicit_ic,
    make_flat_ic,
    make_step_ic,
    make_stepflat_ic,
    multipoint_prob,
    multipoint_prob_partial_uniform,
    multipoint_prob_uniform,
)
from ptaseplab.simulator import ctmc_exact_prob

CTMC_CASES = [
    # (ic factory, observations, uniformization value)
    (lambda: make_step_ic(4, 2),
     (Observation(1, 0.8, 0), Observation(2, 1.5, 1)),
     0.1912078645889842),
    (lambda: make_flat_ic(3, 2),
     (Observation(2, 1.2, 0),),
     0.1864159381212798),
    (lambda: make_stepflat_ic(2, 2, 3),
     (Observation(1, 0.7, -1), Observation(2, 1.4, 0)),
     0.5034146962085637),
    (lambda: make_explicit_ic(7, (-4, -2, 1)),
     (Observation(1, 0.5, -2), Observation(3, 1.1, 2)),
     7.979479392695856e-08),
    (lambda: make_step_ic(6, 3),
     (Observation(2, 1.0, 0),),
     0.26424111765708946),
]


@pytest.mark.parametrize("make_ic,obs,expect", CTMC_CASES)
def test_multipoint_prob_matches_uniformization(make_ic, obs, expect):
    p = multipoint_prob(make_ic(), obs)
    assert p == pytest.approx(expect, rel=1e-9, abs=1e-12)


def test_single_particle_ring_is_poisson():
    # L=2, N=1: the particle always has a free target site, so its position
    # is a unit-rate Poisson counting process
    ic = make_step_ic(2, 1)
    t, a = 1.3, 2
    expect = 0.37317687602177096  # P(Poisson(1.3) >= 2), scipy.stats frozen
    p = multipoint_prob(ic, (Observation(1, t, a),))
    assert p == pytest.approx(expect, abs=1e-9)


def test_uniform_equals_average_over_starts():
    params = ModelParams(4, 2)
    obs = (Observation(1, 1.1, 0),)
    p_uni = multipoint_prob_uniform(params, obs)
    total = 0.0
    configs = list(itertools.combinations(range(4), 2))
    for pos in configs:
        y = tuple(sorted(s - 4 if s > 0 else s for s in pos))
        total += multipoint_prob(make_explicit_ic(4, y), obs)
    assert p_uni == pytest.approx(total / len(configs), abs=1e-10)


def test_partial_uniform_equals_average_over_starts():
    params = ModelParams(5, 2)
    obs = (Observation(1, 0.9, -1),)
    p = multipoint_prob_partial_uniform(params, (0,), 1, obs)
    starts = [(-s, 0) for s in range(1, 5)]
    total = sum(multipoint_prob(make_explicit_ic(5, y), obs) for y in starts)
    assert p == pytest.approx(total / len(starts), abs=1e-10)


def test_report_contents():
    ic = make_step_ic(4, 2)
    report = {}
    multipoint_prob(ic, (Observation(1, 0.5, 0),), report=report)
    assert set(report) >= {"radii", "retries", "M_final", "imag_residual"}
    assert report["imag_residual"] < 1e-10


def test_quad_config_radii_validation():
    ic = make_step_ic(4, 2)
    obs = (Observation(1, 0.5, 0), Observation(2, 1.0, 0))
    from ptaseplab.errors import ParameterError

    with pytest.raises(ParameterError):
        multipoint_prob(ic, obs, config=QuadConfig(radii=[0.5]))
    with pytest.raises(ParameterError):
        multipoint_prob(ic, obs, config=QuadConfig(radii=[0.5, 0.7]))


def test_result_independent_of_radii():
    ic = make_step_ic(4, 2)
    obs = (Observation(2, 1.0, 1),)
    p1 = multipoint_prob(ic, obs, config=QuadConfig(radii=[0.5]))
    p2 = multipoint_prob(ic, obs, config=QuadConfig(radii=[0.75]))
    assert p1 == pytest.approx(p2, abs=1e-10)


def test_uniformization_self_consistency():
    # the frozen table above reproduces under a looser truncation
    ic = make_step_ic(4, 2)
    obs = (Observation(1, 0.8, 0), Observation(2, 1.5, 1))
    assert ctmc_exact_prob(ic, obs, tol=1e-10) == pytest.approx(
        0.1912078645889842, abs=1e-9
    )
