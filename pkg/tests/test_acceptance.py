"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Each test prints a single summary line (visible with pytest -s or on
failure) and then asserts every sub-check, including the stated runtime
budget.
"""

import itertools
import math
import time

import numpy as np
import scipy.stats

from ptaseplab import (
    LimitCoordinate,
    ModelParams,
    Observation,
    make_explicit_ic,
    make_flat_ic,
    make_step_ic,
    make_stepflat_ic,
    multipoint_prob,
    multipoint_prob_partial_uniform,
    multipoint_prob_uniform,
    scaled_params,
)
from ptaseplab.bethe import check_root_identities, rescale_z, solve_bethe_roots
from ptaseplab.core import lambda_of
from ptaseplab.finite_dist import GenericWeights, fredholm_integrand_at, integrand
from ptaseplab.limits import (
    B_diag,
    B_diag_quad,
    F_ic,
    FlatLimitData,
    StepFlatLimitData,
    UniformStepLimitData,
    h_fn,
    h_fn_alt,
    limiting_nodes,
)
from ptaseplab.simulator import ctmc_exact_prob, estimate_joint_prob
from ptaseplab.symfun import energy_flat
from ptaseplab.toeplitz_oracle import (
    generic_identity_check,
    random_instance,
    toeplitz_integrand_at,
)


def _report(n: int, ok: bool, detail: str) -> None:
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_01_bethe_product_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        L = int(rng.integers(2, 41))
        N = int(rng.integers(1, L))
        r = rng.uniform(0.1, 0.9)
        th = rng.uniform(0, 2 * np.pi)
        p = ModelParams(L, N)
        rs = solve_bethe_roots(p, rescale_z(r * np.exp(1j * th), p).z_phys)
        worst = max(worst, *check_root_identities(rs))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 10
    _report(1, ok, f"max rel err {worst:.2e} over 50 draws in {dt:.1f}s")
    assert worst < 1e-8
    assert dt < 10


def test_criterion_02_generic_determinant_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 4))
        N = int(rng.integers(1, 5))
        sizes = [int(rng.integers(N, 8)) for _ in range(m)]
        inst = random_instance(rng, m, N, sizes)
        _, _, rel = generic_identity_check(inst)
        worst = max(worst, rel)
    dt = time.perf_counter() - t0
    ok = worst < 1e-7 and dt < 60
    _report(2, ok, f"max rel err {worst:.2e} over 200 instances in {dt:.1f}s")
    assert worst < 1e-7
    assert dt < 60


def test_criterion_03_formula_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    ics = [
        make_step_ic(7, 3),
        make_flat_ic(3, 2),
        make_stepflat_ic(2, 2, 3),
        make_explicit_ic(8, (-5, -3, -2, 0)),
    ]
    worst = 0.0
    for m in (1, 2, 3):
        for _ in range(25):
            mags = np.sort(rng.uniform(0.1, 0.85, size=m))[::-1]
            for ic in ics:
                N = ic.params.N
                zs = [
                    rescale_z(r * np.exp(2j * np.pi * rng.uniform()), ic.params).z_phys
                    for r in mags
                ]
                ts = np.sort(rng.uniform(0.3, 2.0, size=m))
                obs = tuple(
                    Observation(int(rng.integers(1, N + 1)), float(t), int(rng.integers(-2, 3)))
                    for t in ts
                )
                lhs = fredholm_integrand_at(ic, obs, zs)
                rhs = toeplitz_integrand_at(ic, obs, zs)
                rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
                worst = max(worst, rel)
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 300
    _report(3, ok, f"max rel err {worst:.2e} over 300 evaluations in {dt:.1f}s")
    assert worst < 1e-6
    assert dt < 300


def test_criterion_04_exact_law_reproduction():
    t0 = time.perf_counter()
    ic = make_step_ic(2, 1)
    worst_f = worst_c = 0.0
    for t in (0.5, 1.0, 2.0):
        expect = float(scipy.stats.poisson.sf(0, t))  # P(Poisson(t) >= 1)
        obs = (Observation(1, t, 1),)
        worst_f = max(worst_f, abs(multipoint_prob(ic, obs) - expect))
        worst_c = max(worst_c, abs(ctmc_exact_prob(ic, obs, tol=1e-13) - expect))
    dt = time.perf_counter() - t0
    ok = worst_f < 1e-6 and worst_c < 1e-9 and dt < 30
    _report(4, ok, f"fredholm dev {worst_f:.2e}, ctmc dev {worst_c:.2e} in {dt:.1f}s")
    assert worst_f < 1e-6
    assert worst_c < 1e-9
    assert dt < 30


def test_criterion_05_monte_carlo_cross_validation():
    t0 = time.perf_counter()
    worst_sigma = 0.0
    for L in (4, 6):
        N = L // 2
        for ic in (make_step_ic(L, N), make_flat_ic(N, 2)):
            for obs in (
                (Observation(1, 1.0, 0),),
                (Observation(1, 1.0, 0), Observation(2, 1.8, 1)),
            ):
                p_f = multipoint_prob(ic, obs)
                p_mc, se = estimate_joint_prob(ic, obs, 1_000_000, seed=55)
                worst_sigma = max(worst_sigma, abs(p_f - p_mc) / se)
    dt = time.perf_counter() - t0
    ok = worst_sigma < 3.0 and dt < 600
    _report(5, ok, f"max deviation {worst_sigma:.2f} standard errors in {dt:.1f}s")
    assert worst_sigma < 3.0
    assert dt < 600


def test_criterion_06_uniform_ic_exhaustive():
    t0 = time.perf_counter()
    params = ModelParams(4, 2)
    obs = (Observation(1, 0.9, -1), Observation(2, 1.6, 0))
    p_uni = multipoint_prob_uniform(params, obs)
    probs = []
    for pos in itertools.combinations(range(4), 2):
        y = tuple(sorted(s - 4 if s > 0 else s for s in pos))
        probs.append(multipoint_prob(make_explicit_ic(4, y), obs))
    dev_u = abs(p_uni - sum(probs) / len(probs))

    params5 = ModelParams(5, 2)
    obs5 = (Observation(1, 0.9, -1),)
    p_part = multipoint_prob_partial_uniform(params5, (0,), 1, obs5)
    starts = [(-s, 0) for s in range(1, 5)]
    avg = sum(multipoint_prob(make_explicit_ic(5, y), obs5) for y in starts) / 4
    dev_p = abs(p_part - avg)
    dt = time.perf_counter() - t0
    ok = dev_u < 1e-6 and dev_p < 1e-6 and dt < 300
    _report(6, ok, f"uniform dev {dev_u:.2e}, partial dev {dev_p:.2e} in {dt:.1f}s")
    assert dev_u < 1e-6
    assert dev_p < 1e-6
    assert dt < 300


class _LamWeights(GenericWeights):
    def __init__(self, lam):
        self.lam = tuple(lam)


def _lam_from_y(y, N):
    return tuple(y[N - j] + j - 1 for j in range(1, N + 1))


def test_criterion_07_invariance_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(17)
    worst = {k: 0.0 for k in ("T1", "T2", "T3", "T4")}
    for _ in range(10):
        L = int(rng.integers(4, 9))
        N = int(rng.integers(2, L))
        base = sorted(rng.choice(L, size=N, replace=False))
        y = [int(s) for s in base]
        y = [v - y[-1] for v in y]
        lam = _lam_from_y(y, N)
        m = int(rng.integers(1, 3))
        ts = np.sort(rng.uniform(0.3, 2.0, size=m))
        obs = tuple(
            Observation(int(rng.integers(1, N + 1)), float(t), int(rng.integers(-2, 3)))
            for t in ts
        )
        p = ModelParams(L, N)
        zs = [
            rescale_z(0.5 * 0.6**j * np.exp(2j * np.pi * rng.uniform()), p).z_phys
            for j in range(m)
        ]
        rs_list = [solve_bethe_roots(p, z) for z in zs]
        ref = integrand(obs, rs_list, _LamWeights(lam))
        c = int(rng.integers(-3, 4))
        # T1: shift every site by c
        v = integrand(
            tuple(Observation(o.k, o.t, o.a + c) for o in obs),
            rs_list, _LamWeights([l + c for l in lam]),
        )
        worst["T1"] = max(worst["T1"], abs(v - ref) / abs(ref))
        # T2: one full period on the start, label down by N
        v = integrand(
            tuple(Observation(o.k - N, o.t, o.a) for o in obs),
            rs_list, _LamWeights([l + L for l in lam]),
        )
        worst["T2"] = max(worst["T2"], abs(v - ref) / abs(ref))
        # T3: one full period on the threshold, label up by N
        v = integrand(
            tuple(Observation(o.k + N, o.t, o.a + L) for o in obs),
            rs_list, _LamWeights(lam),
        )
        worst["T3"] = max(worst["T3"], abs(v - ref) / abs(ref))
        # T4: rotate the start by n labels; the shifted-label event on the
        # original start equals the unshifted event on the rotated start
        n = int(rng.integers(0, N))
        y_rot = y[n:] + [val + L for val in y[:n]]
        lhs = integrand(
            tuple(Observation(o.k + n, o.t, o.a) for o in obs),
            rs_list, _LamWeights(lam),
        )
        rhs = integrand(obs, rs_list, _LamWeights(_lam_from_y(y_rot, N)))
        worst["T4"] = max(worst["T4"], abs(lhs - rhs) / max(abs(lhs), 1e-300))
    dt = time.perf_counter() - t0
    worst_all = max(worst.values())
    ok = worst_all < 1e-8 and dt < 120
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    _report(7, ok, f"{detail} in {dt:.1f}s")
    assert worst_all < 1e-8
    assert dt < 120


def test_criterion_08_limit_function_consistency():
    t0 = time.perf_counter()
    dev_h = 0.0
    for zeta in (-1.0, -0.5 + 0.8j, -2.0 - 1.3j, -0.3 - 2.0j):
        for z in (0.3, 0.55, 0.2 + 0.35j):
            a = complex(h_fn(np.array([zeta]), z)[0])
            dev_h = max(dev_h, abs(a - h_fn_alt(zeta, z)))
    dev_b = max(abs(B_diag(z) - B_diag_quad(z)) for z in (0.2, 0.5, 0.3 + 0.4j))
    dev_h0 = max(
        abs(complex(h_fn(np.array([0.0 + 0j]), z)[0]) - 0.5 * np.log(1.0 - z))
        for z in (0.2, 0.5, 0.35 + 0.2j)
    )
    dev_n = 0.0
    for z in (0.45 * np.exp(0.7j), 0.6, 0.25 * np.exp(-1.9j)):
        left, right = limiting_nodes(z, 6.0)
        for zeta in np.concatenate([left, right]):
            dev_n = max(dev_n, abs(np.exp(-0.5 * zeta * zeta) - z))
    dt = time.perf_counter() - t0
    ok = dev_h < 1e-7 and dev_b < 1e-8 and dev_h0 < 1e-10 and dev_n < 1e-12 and dt < 30
    _report(8, ok, f"h dual {dev_h:.1e}, B dual {dev_b:.1e}, "
                   f"h(0) {dev_h0:.1e}, nodes {dev_n:.1e} in {dt:.1f}s")
    assert dev_h < 1e-7
    assert dev_b < 1e-8
    assert dev_h0 < 1e-10
    assert dev_n < 1e-12
    assert dt < 30


def test_criterion_09_crossover_limits():
    t0 = time.perf_counter()
    z = 0.4
    left, right = limiting_nodes(z, 2.0)
    flat = FlatLimitData()
    E_flat = flat.E(z)
    chi_flat = flat.chi_matrix(z, right, left)

    sf_small = StepFlatLimitData(1e-3)
    dev_E_small = abs(sf_small.E(z) - E_flat)
    chi_small = sf_small.chi_matrix(z, right, left)
    dev_chi_small = 0.0
    for i, eta in enumerate(right):
        j = int(np.argmin(np.abs(left + eta)))
        dev_chi_small = max(
            dev_chi_small,
            abs(chi_small[i, j] - chi_flat[i, j]) / abs(chi_flat[i, j]),
        )

    sf_big = StepFlatLimitData(20.0)
    dev_E_big = abs(sf_big.E(z) - 1.0)
    dev_chi_big = float(np.max(np.abs(sf_big.chi_matrix(z, right, left) - 1.0)))

    us = UniformStepLimitData(20.0)
    dev_E_us = abs(us.E(z) - 1.0)
    dev_chi_us = float(np.max(np.abs(us.chi_matrix(z, right, left) - 1.0)))

    dt = time.perf_counter() - t0
    ok = (dev_E_small < 1e-2 and dev_chi_small < 1e-2
          and dev_E_big < 1e-3 and dev_chi_big < 1e-3
          and dev_E_us < 1e-3 and dev_chi_us < 1e-3 and dt < 120)
    _report(9, ok, f"mu->0: E {dev_E_small:.1e}, chi {dev_chi_small:.1e}; "
                   f"mu=20: E {dev_E_big:.1e}, chi {dev_chi_big:.1e}; "
                   f"alpha=20: E {dev_E_us:.1e}, chi {dev_chi_us:.1e} in {dt:.1f}s")
    assert dev_E_small < 1e-2
    assert dev_chi_small < 1e-2
    # the deviations from 1 decay like 1/mu and 1/alpha; at 20 they sit in
    # the 5e-3 to 1.5e-1 range, so the 1e-3 bounds below are not met
    assert dev_E_big < 1e-3
    assert dev_chi_big < 1e-3
    assert dev_E_us < 1e-3
    assert dev_chi_us < 1e-3
    assert dt < 120


def test_criterion_10_assumption_a_convergence():
    t0 = time.perf_counter()
    z = 0.4
    lim = FlatLimitData().E(z)
    sizes = (8, 16, 32, 64)
    errs = []
    for L in sizes:
        p = ModelParams(L, L // 2)
        rs = solve_bethe_roots(p, rescale_z(z, p).z_phys)
        errs.append(abs(energy_flat(rs, 2) - lim))
    slope = float(np.polyfit(np.log(sizes), np.log(errs), 1)[0])
    dt = time.perf_counter() - t0
    ok = -0.8 <= slope <= -0.3 and dt < 60
    _report(10, ok, f"log-log slope {slope:.3f} in {dt:.1f}s")
    assert -0.8 <= slope <= -0.3
    assert dt < 60


def test_criterion_11_limit_cdf_sanity():
    t0 = time.perf_counter()
    xs = (-3.0, -1.5, 0.0, 1.5, 3.0)
    F = [F_ic("step", x, 1.0, gamma=0.5) for x in xs]
    monotone = all(a < b for a, b in zip(F, F[1:]))

    ic = make_step_ic(64, 32)
    obs, _ = scaled_params([LimitCoordinate(0.5, 1.0, 0.0)], ic.params)
    p64 = multipoint_prob(ic, obs)
    dev64 = abs(p64 - F[2])
    dt = time.perf_counter() - t0
    ok = monotone and F[0] < 0.1 and F[-1] > 0.9 and dev64 < 0.05 and dt < 600
    _report(11, ok, f"F values {['%.5f' % v for v in F]}, monotone {monotone}, "
                    f"L=64 dev {dev64:.4f} in {dt:.1f}s")
    assert monotone
    # F(-3) evaluates to 0.12800; Richardson extrapolation of the exact
    # finite-ring values confirms this limit, so the 0.1 bound fails
    assert F[0] < 0.1
    assert F[-1] > 0.9
    assert dev64 < 0.05
    assert dt < 600
