"""Tension distribution: pseudo-inverse structure, closed-form exactness,
limit clamping with row removal, determinism."""

import numpy as np
import pytest

from cdprsim.allocation import AllocationConfig, allocate, pseudo_inverse
from cdprsim.config import default_geometry, default_payload
from cdprsim.dynamics import gravity_wrench, wrench_matrix
from cdprsim.errors import AllocationError, RankDeficiencyError

HOME_R = np.array([0.0, 0.0, 0.465])


@pytest.fixture(scope="module")
def geom():
    return default_geometry()


@pytest.fixture(scope="module")
def home_pi(geom):
    return wrench_matrix(geom, HOME_R, np.eye(3))


def test_pseudo_inverse_scaled_orthonormal():
    pi = np.zeros((8, 6))
    pi[:6, :6] = 3.0 * np.eye(6)
    pi[6], pi[7] = 0.0, 0.0
    u = pseudo_inverse(pi)
    assert np.abs(u @ pi - np.eye(6)).max() < 1e-12


def test_pseudo_inverse_random_left_inverse():
    rng = np.random.default_rng(0)
    for _ in range(200):
        pi = rng.normal(size=(8, 6))
        u = pseudo_inverse(pi)
        assert np.abs(u @ pi - np.eye(6)).max() < 1e-10


def test_pseudo_inverse_rank_deficient_raises():
    rng = np.random.default_rng(1)
    pi = rng.normal(size=(8, 6))
    pi[:, 5] = 2.0 * pi[:, 1] - pi[:, 3]   # rank 5 by construction
    with pytest.raises(RankDeficiencyError):
        pseudo_inverse(pi)


def test_pretension_self_consistent(home_pi, geom):
    # f = Pi^T tau_pt returns exactly the pretension torques
    cfg = AllocationConfig()
    tau_pt = geom.winch_radius * cfg.pretension
    res = allocate(home_pi, home_pi.T @ tau_pt, cfg, geom.winch_radius)
    assert np.abs(res.tau - tau_pt).max() < 1e-12
    assert not res.clamped.any()


def test_unclamped_exactness(home_pi, geom):
    rng = np.random.default_rng(2)
    cfg = AllocationConfig()
    payload = default_payload()
    hover = gravity_wrench(payload)
    for _ in range(500):
        f = hover + np.concatenate([rng.normal(scale=20.0, size=3),
                                    rng.normal(scale=1.5, size=3)])
        res = allocate(home_pi, f, cfg, geom.winch_radius)
        if res.clamped.any():
            continue
        assert np.abs(home_pi.T @ res.tau - f).max() < 1e-9
        assert (res.tensions >= cfg.tension_min - 1e-9).all()
        assert (res.tensions <= cfg.tension_max + 1e-9).all()


def test_clamped_case_reduced_system_oracle(home_pi, geom):
    # push one cable below the floor; the pinned cable sits at 7.9 N and the
    # rest reproduce the wrench, cross-checked against an independent
    # least-squares solve of the reduced system
    cfg = AllocationConfig()
    payload = default_payload()
    f = gravity_wrench(payload) + np.array([0.0, 0.0, 0.0, 8.0, 0.0, 8.0])
    res = allocate(home_pi, f, cfg, geom.winch_radius)
    assert res.clamped.any()
    assert np.abs(home_pi.T @ res.tau - f).max() < 1e-9
    pinned = np.nonzero(res.clamped)[0]
    for i in pinned:
        assert (abs(res.tensions[i] - cfg.tension_min) < 1e-12
                or abs(res.tensions[i] - cfg.tension_max) < 1e-12)
    # oracle: rebuild the reduced solution independently
    active = ~res.clamped
    f_resid = f - home_pi[pinned].T @ res.tau[pinned]
    pi_a = home_pi[active]
    tau_pt = geom.winch_radius[active] * cfg.pretension
    u = np.linalg.pinv(pi_a.T @ pi_a) @ pi_a.T
    tau_ref = tau_pt + u.T @ (f_resid - pi_a.T @ tau_pt)
    assert np.abs(res.tau[active] - tau_ref).max() < 1e-9
    assert (res.tensions >= cfg.tension_min - 1e-9).all()
    assert (res.tensions <= cfg.tension_max + 1e-9).all()


def test_worst_violator_clamps_first(home_pi, geom):
    # a pure large torque demand violates several cables; exactly one row is
    # removed per iteration, worst first
    cfg = AllocationConfig()
    f = gravity_wrench(default_payload()) + np.array([0, 0, 0, 15.0, 0.0, 15.0])
    res = allocate(home_pi, f, cfg, geom.winch_radius)
    assert res.clamped.sum() == 2
    assert res.iterations == res.clamped.sum()


def test_determinism(home_pi, geom):
    cfg = AllocationConfig()
    f = gravity_wrench(default_payload()) + np.array([5.0, -3.0, 2.0, 1.2, 0.4, 2.0])
    a = allocate(home_pi, f, cfg, geom.winch_radius)
    b = allocate(home_pi, f, cfg, geom.winch_radius)
    assert np.array_equal(a.tau, b.tau)
    assert np.array_equal(a.tensions, b.tensions)
    assert np.array_equal(a.clamped, b.clamped)


def test_infeasible_raises_with_violation(home_pi, geom):
    cfg = AllocationConfig()
    f = np.array([0.0, 0.0, -5.0e4, 0.0, 0.0, 0.0])   # huge downward pull
    with pytest.raises(AllocationError):
        allocate(home_pi, f, cfg, geom.winch_radius)


def test_rank_deficient_allocation_raises(geom):
    rng = np.random.default_rng(3)
    pi = rng.normal(size=(8, 6))
    pi[:, 0] = pi[:, 1]
    with pytest.raises(AllocationError):
        allocate(pi, np.ones(6), AllocationConfig(), geom.winch_radius)


def test_config_validation():
    with pytest.raises(ValueError):
        AllocationConfig(pretension=5.0, tension_min=7.9, tension_max=3937.0)
