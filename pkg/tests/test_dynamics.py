"""Plant models: cable geometry, wrench matrix, rigid-body dynamics, the
elastic cable law and forward kinematics."""

import numpy as np
import pytest

import cdprsim.attitude as att
from cdprsim.allocation import AllocationConfig, allocate
from cdprsim.config import default_geometry, default_payload
from cdprsim.dynamics import (CdprGeometry, PayloadParams, cable_vectors,
                              coriolis_matrix, elastic_tensions,
                              forward_kinematics, gravity_wrench,
                              task_space_dynamics, winch_accelerations,
                              wrench_matrix)
from cdprsim.errors import (ConvergenceError, DegenerateGeometryError,
                            RankDeficiencyError)

HOME_R = np.array([0.0, 0.0, 0.465])


@pytest.fixture(scope="module")
def geom():
    return default_geometry()


@pytest.fixture(scope="module")
def payload():
    return default_payload()


def random_pose(rng, scale_r=0.08, max_angle=0.3):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return (HOME_R + rng.normal(scale=scale_r, size=3),
            att.dcm_from_rotvec(axis * rng.uniform(0.0, max_angle)))


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def test_cable_one_length_at_home(geom):
    # winch [0.71, 0.38, 0.93], attachment [0.03, 0.075, -0.0375] at the
    # home pose with identity attitude
    lengths, units = cable_vectors(geom, HOME_R, np.eye(3))
    expected = np.linalg.norm(np.array([0.71, 0.38, 0.93])
                              - (HOME_R + np.array([0.03, 0.075, -0.0375])))
    assert abs(lengths[0] - expected) < 1e-14
    assert np.allclose(np.linalg.norm(units, axis=1), 1.0, atol=1e-14)


def test_cable_vector_unit_offset():
    geom = CdprGeometry(
        winch_positions=np.tile([0.0, 0.0, 1.0], (8, 1)),
        attachment_points=np.zeros((8, 3)),
        winch_radius=np.full(8, 0.025),
        winch_inertia=np.full(8, 1e-5),
        cable_density=0.005, axial_stiffness=4.0e5,
        tension_min=1.0, tension_max=100.0)
    lengths, units = cable_vectors(geom, np.zeros(3), np.eye(3))
    assert np.allclose(lengths, 1.0, atol=1e-15)
    assert np.allclose(units, np.tile([0.0, 0.0, 1.0], (8, 1)), atol=1e-15)


def test_cable_lengths_positive_in_workspace(geom):
    rng = np.random.default_rng(0)
    for _ in range(200):
        r, c = random_pose(rng)
        lengths, _ = cable_vectors(geom, r, c)
        assert (lengths > 0.05).all()


def test_degenerate_geometry_raises(geom):
    # put the third attachment point exactly on its winch
    r = geom.winch_positions[2] - geom.attachment_points[2]
    with pytest.raises(DegenerateGeometryError):
        cable_vectors(geom, r, np.eye(3))


# ---------------------------------------------------------------------------
# wrench matrix
# ---------------------------------------------------------------------------

def test_wrench_matrix_finite_difference(geom):
    # Pi nu must equal the winch-rate convention -ldot / r along arbitrary
    # twists (lengths differenced through the exact pose flow)
    rng = np.random.default_rng(1)
    eps = 1.0e-7
    worst = 0.0
    for _ in range(100):
        r, c = random_pose(rng)
        nu = rng.normal(size=6)
        pi = wrench_matrix(geom, r, c)
        lp, _ = cable_vectors(geom, r + eps * nu[:3],
                              att.dcm_from_rotvec(eps * nu[3:]) @ c)
        lm, _ = cable_vectors(geom, r - eps * nu[:3],
                              att.dcm_from_rotvec(-eps * nu[3:]) @ c)
        ldot = (lp - lm) / (2.0 * eps)
        worst = max(worst, np.abs(pi @ nu + ldot / geom.winch_radius).max())
    assert worst < 1e-5


def test_power_balance_identity(geom):
    rng = np.random.default_rng(2)
    for _ in range(100):
        r, c = random_pose(rng)
        pi = wrench_matrix(geom, r, c)
        tau, nu = rng.normal(size=8), rng.normal(size=6)
        assert abs(tau @ (pi @ nu) - (pi.T @ tau) @ nu) < 1e-12


def test_rank_at_home_pose(geom):
    # SVD oracle: the home pose is deep inside the wrench-feasible workspace
    pi = wrench_matrix(geom, HOME_R, np.eye(3))
    sv = np.linalg.svd(pi, compute_uv=False)
    assert (sv > 1e-6 * sv[0]).sum() == 6


def test_static_equilibrium_feasible(geom, payload):
    # there are positive in-range tensions holding the payload against
    # gravity at the home pose
    pi = wrench_matrix(geom, HOME_R, np.eye(3))
    res = allocate(pi, gravity_wrench(payload), AllocationConfig(),
                   geom.winch_radius)
    assert (res.tensions > 0.0).all()
    assert np.abs(pi.T @ res.tau - gravity_wrench(payload)).max() < 1e-9


def test_wrench_rank_deficiency_raises(payload):
    # all attachment points collapsed to the center of mass: no torque
    # authority, rank 3
    geom = CdprGeometry(
        winch_positions=default_geometry().winch_positions,
        attachment_points=np.zeros((8, 3)),
        winch_radius=np.full(8, 0.0254),
        winch_inertia=np.full(8, 2.5e-5),
        cable_density=0.0046, axial_stiffness=4.0e5,
        tension_min=7.9, tension_max=3937.0)
    with pytest.raises(RankDeficiencyError):
        wrench_matrix(geom, HOME_R, np.eye(3))


# ---------------------------------------------------------------------------
# rigid-body task-space dynamics
# ---------------------------------------------------------------------------

def test_hover_balance(payload):
    nudot = task_space_dynamics(payload, np.zeros(6), gravity_wrench(payload))
    assert np.abs(nudot).max() < 1e-14


def test_free_body_momentum_conservation(payload):
    from cdprsim.audits import free_rigid_body_drift
    drift = free_rigid_body_drift(payload, omega0=[0.7, -0.4, 1.1],
                                  duration=2.0, dt=1e-3)
    assert drift < 1e-9


def test_coriolis_skew_property(payload):
    # nu^T (Mdot - 2 D) nu = -2 nu^T D nu must vanish: M is constant and
    # w . (w x I w) = 0
    rng = np.random.default_rng(3)
    for _ in range(200):
        nu = rng.normal(size=6)
        d = coriolis_matrix(payload, nu)
        scale = max(1.0, np.abs(nu).max() ** 3 * np.abs(payload.inertia).max())
        assert abs(nu @ (d @ nu)) < 1e-12 * scale


def test_param_vector_order(payload):
    a = payload.param_vector()
    assert a[0] == payload.mass
    assert np.allclose(a[1:4], np.diag(payload.inertia))


# ---------------------------------------------------------------------------
# elastic cable law
# ---------------------------------------------------------------------------

def test_elastic_unstretched_and_slack(geom):
    l0 = np.full(8, 0.7)
    zeros = np.zeros(8)
    t = elastic_tensions(geom, l0.copy(), zeros, l0, zeros, zeros)
    assert np.array_equal(t, np.zeros(8))
    t = elastic_tensions(geom, l0 - 0.01, zeros, l0, zeros, zeros)
    assert np.array_equal(t, np.zeros(8))


def test_elastic_strain_arithmetic(geom):
    # strain 1e-4 on a 1 m cable with EA = 127e9 * pi * (1e-3)^2
    ea = 127.0e9 * np.pi * 1.0e-6
    assert abs(geom.axial_stiffness - ea) < 1e-6 * ea
    l0 = np.ones(8)
    zeros = np.zeros(8)
    t = elastic_tensions(geom, l0 * (1.0 + 1.0e-4), zeros, l0, zeros, zeros)
    assert np.allclose(t, ea * 1.0e-4, rtol=1e-12)


def test_winch_rotor_dynamics(geom):
    tau = np.full(8, 1.5)
    t = np.full(8, 40.0)
    acc = winch_accelerations(geom, tau, t)
    assert np.allclose(acc, (1.5 - geom.winch_radius * 40.0) / geom.winch_inertia)


# ---------------------------------------------------------------------------
# forward kinematics
# ---------------------------------------------------------------------------

def quat_angle(c):
    q = att.quat_from_dcm(c)
    return 2.0 * np.arctan2(np.linalg.norm(q[:3]), q[3])


def test_fk_round_trip(geom):
    rng = np.random.default_rng(4)
    for _ in range(100):
        r, c = random_pose(rng, scale_r=0.05, max_angle=0.25)
        lengths, _ = cable_vectors(geom, r, c)
        guess_r = r + rng.normal(scale=0.01, size=3)
        guess_c = att.dcm_from_rotvec(rng.normal(scale=0.02, size=3)) @ c
        r2, c2, rms, n_iter = forward_kinematics(geom, lengths, guess_r, guess_c)
        assert np.abs(r2 - r).max() < 1e-8
        assert quat_angle(c2 @ c.T) < 1e-8
        assert rms < 1e-12
        assert n_iter <= 10


def test_fk_overdetermined_least_squares(geom):
    # one perturbed length: the fit reports a genuine residual
    rng = np.random.default_rng(5)
    r, c = random_pose(rng)
    lengths, _ = cable_vectors(geom, r, c)
    lengths[0] += 1.0e-3
    _, _, rms, _ = forward_kinematics(geom, lengths, r, c)
    assert 1e-5 < rms < 1e-3


def test_fk_rank_deficient_jacobian():
    geom = CdprGeometry(
        winch_positions=default_geometry().winch_positions,
        attachment_points=np.zeros((8, 3)),
        winch_radius=np.full(8, 0.0254),
        winch_inertia=np.full(8, 2.5e-5),
        cable_density=0.0046, axial_stiffness=4.0e5,
        tension_min=7.9, tension_max=3937.0)
    lengths, _ = cable_vectors(geom, HOME_R, np.eye(3))
    with pytest.raises(RankDeficiencyError):
        forward_kinematics(geom, lengths, HOME_R, np.eye(3))


def test_fk_nonconvergence_raises(geom):
    lengths, _ = cable_vectors(geom, HOME_R, np.eye(3))
    with pytest.raises(ConvergenceError):
        forward_kinematics(geom, lengths, HOME_R + [0.3, -0.2, 0.2],
                           att.dcm_from_rotvec([0.5, 0.4, -0.3]), max_iter=2)


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_payload_validation():
    with pytest.raises(ValueError):
        PayloadParams(mass=-1.0, inertia=np.eye(3))
    with pytest.raises(ValueError):
        PayloadParams(mass=1.0, inertia=np.diag([1.0, 1.0, -1.0]))


def test_geometry_validation():
    with pytest.raises(ValueError):
        CdprGeometry(
            winch_positions=np.zeros((7, 3)),
            attachment_points=np.zeros((8, 3)),
            winch_radius=np.full(8, 0.02),
            winch_inertia=np.full(8, 1e-5),
            cable_density=0.005, axial_stiffness=1e5,
            tension_min=1.0, tension_max=10.0)
