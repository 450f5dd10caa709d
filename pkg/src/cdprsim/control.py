"""Adaptive passivity-based pose tracking controller.

The controller is the sum of an adaptive feedforward ``W(nu_r, nur_dot, w)
ahat`` and an SPR-filtered feedback ``-P^{-T} y_c``.  Each attitude
parameterization supplies its own error block ``(ptil, P, Pdot, nu_d, ...)``
such that the filtered error ``s = ptil_dot + Lam ptil`` satisfies
``nutil_r = P s`` exactly; that identity is what makes the feedback
interconnection passive and is asserted by the test suite for every block.

All rate quantities entering the blocks are computed kinematically from the
current velocities and the analytic desired trajectory, never by numeric
differentiation.
"""

from dataclasses import dataclass, field

import numpy as np

from . import attitude as att
from .attitude import cross, cross3
from .errors import SingularityError

#: Guard on the quaternion error scalar part (inverse in P needs it).
QUAT_ETA_GUARD = 1.0e-6
#: Guard on ``trace(C_pd) - 1`` (SO(3) block singularity at 90 deg).
SO3_TRACE_GUARD = 1.0e-6

CONTROLLER_KINDS = (
    "euler321", "rotvec", "mrp", "quat", "so3",
    "simplified-euler", "simplified-fb-euler",
)

_I3 = np.eye(3)
_E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class ControllerGains:
    """SPD gain set: ``lam`` shapes the filtered error, ``upsilon`` the
    adaptation rate, ``kd``/``omega_c`` the SPR low-pass feedback."""

    lam: np.ndarray        # (6,6)
    upsilon: np.ndarray    # (7,7)
    kd: np.ndarray         # (6,6)
    omega_c: float         # rad/s

    def __post_init__(self):
        for name, m in (("lam", self.lam), ("upsilon", self.upsilon),
                        ("kd", self.kd)):
            m = np.asarray(m, dtype=float)
            object.__setattr__(self, name, m)
            if np.abs(m - m.T).max() > 1.0e-12 or np.any(np.linalg.eigvalsh(m) <= 0.0):
                raise ValueError(f"{name} must be symmetric positive definite")
        if self.omega_c <= 0.0:
            raise ValueError("omega_c must be positive")


def reference_gains(controller="so3", cables="rigid",
                quat_kd_factor=2.0, mrp_att_kd_factor=16.0):
    """Reference gain set of the benchmark robot.

    Rigid-cable values are ``Lam = 10 I``, ``Upsilon = 5 I``,
    ``Kd = diag(125 I3, 16 2/3 I3)`` and ``omega_c = 2 pi``; elastic runs
    reduce ``Kd`` by 5 and ``Lam`` by 2.  The quaternion controller doubles
    ``Kd``; the MRP controller scales the attitude block of ``Kd`` so its
    small-angle feedback matches the Euler baseline (the MRP error and
    mapping matrix each carry a factor 4 near the identity).
    """
    lam = 10.0 * np.eye(6)
    upsilon = 5.0 * np.eye(7)
    kd = np.diag([125.0] * 3 + [50.0 / 3.0] * 3)
    if cables == "elastic":
        kd = kd / 5.0
        lam = lam / 2.0
    if controller == "quat":
        kd = quat_kd_factor * kd
    elif controller == "mrp":
        kd = kd.copy()
        kd[3:, 3:] *= mrp_att_kd_factor
    return ControllerGains(lam=lam, upsilon=upsilon, kd=kd, omega_c=2.0 * np.pi)


@dataclass(frozen=True)
class DesiredState:
    """Analytic desired trajectory sample (position and attitude with two
    derivatives; angular quantities resolved in the desired frame)."""

    r_d: np.ndarray
    rd_dot: np.ndarray
    rd_ddot: np.ndarray
    c_da: np.ndarray
    omega_da: np.ndarray
    omegad_dot: np.ndarray


@dataclass
class ErrorBlock:
    """Filtered-error signals of one attitude parameterization."""

    ptil: np.ndarray       # (6,)
    ptil_dot: np.ndarray   # (6,)
    p_mat: np.ndarray      # (6,6)  P
    p_dot: np.ndarray      # (6,6)  dP/dt
    nu_d: np.ndarray       # (6,)
    nud_dot: np.ndarray    # (6,)
    s: np.ndarray          # (6,)
    nu_r: np.ndarray       # (6,)
    nur_dot: np.ndarray    # (6,)
    nutil_r: np.ndarray    # (6,)


def _assemble(lam, nu, rtil, rtil_dot, ptil_att, ptil_att_dot,
              p_att, p_att_dot, nud_att, nudd_att, rd_dot, rd_ddot):
    ptil = np.concatenate([rtil, ptil_att])
    ptil_dot = np.concatenate([rtil_dot, ptil_att_dot])
    p_mat = np.zeros((6, 6))
    p_mat[:3, :3] = _I3
    p_mat[3:, 3:] = p_att
    p_dot = np.zeros((6, 6))
    p_dot[3:, 3:] = p_att_dot
    nu_d = np.concatenate([rd_dot, nud_att])
    nud_dot = np.concatenate([rd_ddot, nudd_att])
    lam_ptil = lam @ ptil
    lam_ptil_dot = lam @ ptil_dot
    s = ptil_dot + lam_ptil
    nu_r = nu_d - p_mat @ lam_ptil
    nur_dot = nud_dot - p_dot @ lam_ptil - p_mat @ lam_ptil_dot
    nutil_r = nu - nu_r
    return ErrorBlock(ptil, ptil_dot, p_mat, p_dot, nu_d, nud_dot,
                      s, nu_r, nur_dot, nutil_r)


def error_block_unconstrained(kind, state, desired, lam,
                              margin=att.GIMBAL_MARGIN):
    """Error block for a three-parameter attitude description:
    ``P = blkdiag(1, S(q))`` evaluated at the payload attitude,
    ``ptil = [r - r_d; q - q_d]``."""
    w = state.nu[3:]
    q = att.from_dcm(kind, state.c, margin)
    s_map = att.mapping_matrix(kind, q, margin)
    qdot = np.linalg.solve(s_map, w)
    sdot = att.mapping_matrix_dot(kind, q, qdot)

    q_d = att.from_dcm(kind, desired.c_da, margin)
    s_map_d = att.mapping_matrix(kind, q_d, margin)
    qd_dot = np.linalg.solve(s_map_d, desired.omega_da)
    sdot_d = att.mapping_matrix_dot(kind, q_d, qd_dot)
    qd_ddot = np.linalg.solve(s_map_d, desired.omegad_dot - sdot_d @ qd_dot)

    return _assemble(
        lam, state.nu,
        state.r - desired.r_d, state.nu[:3] - desired.rd_dot,
        q - q_d, qdot - qd_dot,
        s_map, sdot,
        s_map @ qd_dot, sdot @ qd_dot + s_map @ qd_ddot,
        desired.rd_dot, desired.rd_ddot)


def error_block_small_angle(state, desired, lam, margin=att.GIMBAL_MARGIN):
    """Euler-321 block with the mapping matrix replaced by the identity
    (``w ~= qdot``), i.e. the linearized design the full controllers are
    compared against.  Consistently with that assumption, the raw Euler
    rates of the desired trajectory stand in for the desired angular
    velocity."""
    w = state.nu[3:]
    q = att.euler321_from_dcm(state.c, margin)
    q_d = att.euler321_from_dcm(desired.c_da, margin)
    s_map_d = att.mapping_matrix(att.EULER321, q_d, margin)
    qd_dot = np.linalg.solve(s_map_d, desired.omega_da)
    sdot_d = att.mapping_matrix_dot(att.EULER321, q_d, qd_dot)
    qd_ddot = np.linalg.solve(s_map_d, desired.omegad_dot - sdot_d @ qd_dot)
    return _assemble(
        lam, state.nu,
        state.r - desired.r_d, state.nu[:3] - desired.rd_dot,
        q - q_d, w - qd_dot,
        _I3, np.zeros((3, 3)),
        qd_dot, qd_ddot,
        desired.rd_dot, desired.rd_ddot)


def _inv_eta_plus_cross(de, deta):
    # (deta 1 + cross(de))^{-1} for a unit error quaternion:
    # (a 1 + v^x)^{-1} = (a^2 1 - a v^x + v v^T) / (a (a^2 + v.v)),
    # and a^2 + v.v = 1 here.
    return deta * _I3 - cross(de) + np.outer(de, de) / deta


def error_block_quaternion(state, desired, lam):
    """Quaternion error block: multiplicative error
    ``dq = q (x) q_d^{-1}``, ``P = blkdiag(1, 2 (deta 1 + cross(de))^{-1})``,
    with the angular-rate correction ``2 (.)^{-1} (w_d x de)`` inside
    ``nu_d``.  Requires ``|deta| > 1e-6`` (payload within ~90 deg of the
    desired attitude)."""
    w = state.nu[3:]
    q = att.quat_from_dcm(state.c)
    q_d = att.quat_from_dcm(desired.c_da)
    dq = att.quat_error(q, q_d)
    de, deta = dq[:3], dq[3]
    if abs(deta) <= QUAT_ETA_GUARD:
        raise SingularityError(
            f"quaternion error block singular (delta-eta {deta:.3e})", deta)
    binv = _inv_eta_plus_cross(de, deta)
    p_att = 2.0 * binv

    c_pd = state.c @ desired.c_da.T
    w_pd = w - c_pd @ desired.omega_da
    de_dot = 0.5 * (deta * w_pd + cross3(de, w_pd))
    deta_dot = -0.5 * (de @ w_pd)
    bdot = deta_dot * _I3 + cross(de_dot)
    p_att_dot = -2.0 * binv @ bdot @ binv

    wd_x_de = cross3(desired.omega_da, de)
    nud_att = desired.omega_da + p_att @ wd_x_de
    nudd_att = (desired.omegad_dot + p_att_dot @ wd_x_de
                + p_att @ (cross3(desired.omegad_dot, de)
                           + cross3(desired.omega_da, de_dot)))

    return _assemble(
        lam, state.nu,
        state.r - desired.r_d, state.nu[:3] - desired.rd_dot,
        de, de_dot,
        p_att, p_att_dot,
        nud_att, nudd_att,
        desired.rd_dot, desired.rd_ddot)


def error_block_so3(state, desired, lam):
    """SO(3) error block: ``C_pd = C C_d^T``,
    ``ptil_att = uncross(antisym(C_pd))``,
    ``P = blkdiag(1, -2 (trace(C_pd) 1 - C_pd)^{-1})``.  Requires
    ``|trace(C_pd) - 1| > 1e-6`` (payload within ~90 deg of desired)."""
    w = state.nu[3:]
    c_pd = state.c @ desired.c_da.T
    tr = c_pd[0, 0] + c_pd[1, 1] + c_pd[2, 2]
    if abs(tr - 1.0) <= SO3_TRACE_GUARD:
        raise SingularityError(
            f"SO(3) error block singular (trace {tr:.6f})", tr)
    a_mat = tr * _I3 - c_pd
    gamma = np.linalg.inv(a_mat)
    p_att = -2.0 * gamma

    ptil_att = 0.5 * np.array([c_pd[2, 1] - c_pd[1, 2],
                               c_pd[0, 2] - c_pd[2, 0],
                               c_pd[1, 0] - c_pd[0, 1]])
    wd_p = c_pd @ desired.omega_da        # desired rate seen from the payload
    w_pd = w - wd_p
    ptil_att_dot = -0.5 * (a_mat @ w_pd)

    c_pd_dot = -cross(w_pd) @ c_pd
    a_dot = np.trace(c_pd_dot) * _I3 - c_pd_dot
    p_att_dot = 2.0 * gamma @ a_dot @ gamma

    nud_att = wd_p
    nudd_att = -cross3(w, wd_p) + c_pd @ desired.omegad_dot

    return _assemble(
        lam, state.nu,
        state.r - desired.r_d, state.nu[:3] - desired.rd_dot,
        ptil_att, ptil_att_dot,
        p_att, p_att_dot,
        nud_att, nudd_att,
        desired.rd_dot, desired.rd_ddot)


def controller_blocks(kind, state, desired, lam, margin=att.GIMBAL_MARGIN):
    """Feedforward and feedback error blocks for a controller kind.

    The two coincide except for the simplified Euler variants: the
    full simplification uses the small-angle block everywhere, while
    ``simplified-fb-euler`` keeps the exact Euler-block signals in the adaptive
    feedforward and linearizes only the feedback path.
    """
    if kind in (att.EULER321, att.ROTVEC, att.MRP):
        eb = error_block_unconstrained(kind, state, desired, lam, margin)
        return eb, eb
    if kind == "quat":
        eb = error_block_quaternion(state, desired, lam)
        return eb, eb
    if kind == "so3":
        eb = error_block_so3(state, desired, lam)
        return eb, eb
    if kind == "simplified-euler":
        eb = error_block_small_angle(state, desired, lam, margin)
        return eb, eb
    if kind == "simplified-fb-euler":
        eb_ff = error_block_unconstrained(att.EULER321, state, desired, lam,
                                          margin)
        eb_fb = error_block_small_angle(state, desired, lam, margin)
        return eb_ff, eb_fb
    raise ValueError(f"unknown controller kind {kind!r}")


# ---------------------------------------------------------------------------
# regressor, adaptation, feedback
# ---------------------------------------------------------------------------

def _inertia_columns(v):
    # L(v) with I @ v == L(v) @ [I11, I22, I33, I12, I13, I23]
    return np.array([
        [v[0], 0.0, 0.0, v[1], v[2], 0.0],
        [0.0, v[1], 0.0, v[0], 0.0, v[2]],
        [0.0, 0.0, v[2], 0.0, v[0], v[1]],
    ])


def regressor(nu_r, nur_dot, w, gravity=9.81):
    """Regressor ``W`` with ``W @ a`` equal to the desired feedforward wrench
    for every parameter vector ``a = [m, I11, I22, I33, I12, I13, I23]``."""
    w_mat = np.zeros((6, 7))
    w_mat[:3, 0] = nur_dot[:3] + gravity * _E3
    w_mat[3:, 1:] = _inertia_columns(nur_dot[3:]) + cross(w) @ _inertia_columns(nu_r[3:])
    return w_mat


def adaptation_rate(w_mat, nutil_r, upsilon):
    """Continuous-time update ``d ahat/dt = -Upsilon W^T nutil_r``."""
    return -upsilon @ (w_mat.T @ nutil_r)


def adaptive_update(ahat, w_mat, nutil_r, upsilon, dt):
    """One explicit-Euler step of the adaptive update law (the closed-loop
    simulation instead integrates the same rate inside its RK4 stages)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return ahat + dt * adaptation_rate(w_mat, nutil_r, upsilon)


@dataclass(frozen=True)
class SprFilter:
    """First-order strictly positive real feedback block
    ``y_c(s) = Kd diag(omega_c / (s + omega_c)) s(s)`` realized as
    ``A_c = -omega_c 1``, ``B_c = omega_c 1``, ``C_c = Kd``.

    Construction checks the SPR certificate: ``P_c = Kd / omega_c`` solves
    ``P_c B_c = C_c^T`` exactly and ``-(P_c A_c + A_c^T P_c) = 2 Kd`` is
    positive definite.
    """

    kd: np.ndarray
    omega_c: float
    p_c: np.ndarray = field(init=False)
    q_c: np.ndarray = field(init=False)

    def __post_init__(self):
        kd = np.asarray(self.kd, dtype=float)
        object.__setattr__(self, "kd", kd)
        p_c = kd / self.omega_c
        q_c = 2.0 * kd
        if np.abs(p_c * self.omega_c - kd.T).max() > 1.0e-12 * np.abs(kd).max():
            raise ValueError("SPR certificate P_c B_c = C_c^T failed")
        if np.any(np.linalg.eigvalsh(q_c) <= 0.0):
            raise ValueError("SPR certificate Q_c > 0 failed")
        object.__setattr__(self, "p_c", p_c)
        object.__setattr__(self, "q_c", q_c)

    def step(self, x_c, s, dt):
        """Advance ``xdot_c = -omega_c x_c + omega_c s`` exactly over ``dt``
        (zero-order hold on ``s``); returns ``(y_c, x_c_next)`` with the
        output evaluated at the end of the interval."""
        decay = np.exp(-self.omega_c * dt)
        x_next = s + (x_c - s) * decay
        return self.kd @ x_next, x_next

    def state_rate(self, x_c, s):
        return self.omega_c * (s - x_c)

    def output(self, x_c):
        return self.kd @ x_c


def spr_feedback(filt, x_c, s, p_mat, dt):
    """Discrete SPR feedback step: filter ``s``, wrap with ``-P^{-T}``.

    Returns ``(f_fb, x_c_next)``.
    """
    y_c, x_next = filt.step(x_c, s, dt)
    return -np.linalg.solve(p_mat.T, y_c), x_next


def feedback_wrench(filt, x_c, p_mat):
    """Instantaneous feedback ``-P^{-T} y_c`` from the current filter state."""
    return -np.linalg.solve(p_mat.T, filt.output(x_c))


def control_wrench(eb_ff, eb_fb, w, ahat, x_c, filt, gravity=9.81):
    """Total commanded wrench ``W ahat - P^{-T} y_c`` plus monitor signals.

    ``w`` is the payload angular velocity.  Returns ``(f, monitors)`` where
    the monitors carry the feedforward and feedback parts, the filter output
    and the passivity-rate sample ``s^T fbar_fb`` with
    ``fbar_fb = P^T f_fb = -y_c``.
    """
    w_mat = regressor(eb_ff.nu_r, eb_ff.nur_dot, w, gravity)
    f_ff = w_mat @ ahat
    y_c = filt.output(x_c)
    f_fb = -np.linalg.solve(eb_fb.p_mat.T, y_c)
    monitors = {
        "f_ff": f_ff,
        "f_fb": f_fb,
        "y_c": y_c,
        "s_dot_fbar_fb": float(-(eb_fb.s @ y_c)),
        "regressor": w_mat,
    }
    return f_ff + f_fb, monitors


def v1_value(mass_matrix, upsilon, nutil_r, atil):
    """Storage function ``V1 = nutil_r^T M nutil_r / 2 + atil^T Ups^{-1} atil / 2``."""
    return float(0.5 * nutil_r @ (mass_matrix @ nutil_r)
                 + 0.5 * atil @ np.linalg.solve(upsilon, atil))


def v2_value(v1, x_c, p_c):
    """Lyapunov function ``V2 = V1 + x_c^T P_c x_c / 2`` whose derivative is
    ``-x_c^T Q_c x_c / 2`` along nominal rigid-cable trajectories."""
    return float(v1 + 0.5 * x_c @ (p_c @ x_c))
