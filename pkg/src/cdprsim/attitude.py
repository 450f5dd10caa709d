"""Attitude parameterizations, conversions and kinematic mapping matrices.

Conventions used throughout the package:

* The DCM ``C`` resolves inertial-frame coordinates into payload-frame
  coordinates, ``v_p = C @ v_a``, and satisfies Poisson's equation
  ``Cdot = -cross(w) @ C`` with ``w`` the body angular velocity.
* Quaternions are stored vector-first, ``q = [e1, e2, e3, eta]``, with the
  attitude matrix ``C(q) = (eta^2 - e.e) 1 + 2 e e^T - 2 eta cross(e)``.
  Extraction from a DCM returns the representative with ``eta >= 0``.
* The 3-2-1 Euler sequence is ``q = [roll, pitch, yaw]`` with
  ``C = C1(roll) @ C2(pitch) @ C3(yaw)``.
* The rotation vector ``phi`` satisfies ``C = expm(-cross(phi))``; the MRP is
  ``sigma = e / (1 + eta)``.
* Mapping matrices satisfy ``w = S(q) @ qdot`` for each three-parameter
  description.
"""

import numpy as np

from .errors import MalformedMatrixError, SingularityError

EULER321 = "euler321"
ROTVEC = "rotvec"
MRP = "mrp"
UNCONSTRAINED_KINDS = (EULER321, ROTVEC, MRP)

#: Margin (rad) kept away from the 3-2-1 pitch singularity at +/- pi/2.
GIMBAL_MARGIN = 1.0e-3

_I3 = np.eye(3)


def cross(v):
    """Skew-symmetric matrix of ``v`` such that ``cross(v) @ w == v x w``."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def cross3(a, b):
    """Plain 3-vector cross product (cheaper than ``np.cross`` for scalars)."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def uncross(a, tol=1.0e-9):
    """Inverse of :func:`cross`.

    Raises :class:`MalformedMatrixError` if ``a`` is not antisymmetric
    within ``tol`` (largest element of ``a + a^T``).
    """
    a = np.asarray(a, dtype=float)
    defect = np.abs(a + a.T).max()
    if defect > tol:
        raise MalformedMatrixError(
            f"matrix is not antisymmetric (defect {defect:.3e} > {tol:.1e})")
    return np.array([a[2, 1], a[0, 2], a[1, 0]])


def antisym_project(u):
    """Antisymmetric part ``(u - u^T) / 2`` of a 3x3 matrix."""
    u = np.asarray(u, dtype=float)
    return 0.5 * (u - u.T)


def project_to_so3(c):
    """Nearest rotation matrix (Frobenius) to ``c`` via the polar factor."""
    w, _, vt = np.linalg.svd(c)
    d = np.sign(np.linalg.det(w @ vt))
    return w @ np.diag([1.0, 1.0, d]) @ vt


def is_dcm(c, tol=1.0e-9):
    """True if ``c`` is orthonormal with unit determinant within ``tol``."""
    c = np.asarray(c, dtype=float)
    return (np.abs(c.T @ c - _I3).max() < tol
            and abs(np.linalg.det(c) - 1.0) < tol)


# ---------------------------------------------------------------------------
# elementary rotations / conversions
# ---------------------------------------------------------------------------

def _c1(a):
    ca, sa = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, ca, sa], [0.0, -sa, ca]])


def _c2(a):
    ca, sa = np.cos(a), np.sin(a)
    return np.array([[ca, 0.0, -sa], [0.0, 1.0, 0.0], [sa, 0.0, ca]])


def _c3(a):
    ca, sa = np.cos(a), np.sin(a)
    return np.array([[ca, sa, 0.0], [-sa, ca, 0.0], [0.0, 0.0, 1.0]])


def dcm_from_euler321(q):
    """DCM of the 3-2-1 sequence ``q = [roll, pitch, yaw]``."""
    return _c1(q[0]) @ _c2(q[1]) @ _c3(q[2])


def euler321_from_dcm(c, margin=GIMBAL_MARGIN):
    """Extract 3-2-1 angles; errors out within ``margin`` of gimbal lock."""
    pitch = np.arcsin(np.clip(-c[0, 2], -1.0, 1.0))
    if abs(pitch) > np.pi / 2.0 - margin:
        raise SingularityError(
            f"3-2-1 extraction at gimbal lock (pitch {pitch:.6f} rad)", pitch)
    roll = np.arctan2(c[1, 2], c[2, 2])
    yaw = np.arctan2(c[0, 1], c[0, 0])
    return np.array([roll, pitch, yaw])


def dcm_from_quat(q):
    """DCM of a unit quaternion ``[e1, e2, e3, eta]``."""
    e, eta = q[:3], q[3]
    return (eta * eta - e @ e) * _I3 + 2.0 * np.outer(e, e) - 2.0 * eta * cross(e)


def quat_from_dcm(c):
    """Quaternion of a DCM via the numerically stable four-branch method.

    Returns the representative with a non-negative scalar part.
    """
    tr = c[0, 0] + c[1, 1] + c[2, 2]
    # pick the largest of (eta, e1, e2, e3) to divide by
    choices = [tr, c[0, 0], c[1, 1], c[2, 2]]
    k = int(np.argmax(choices))
    if k == 0:
        eta = 0.5 * np.sqrt(1.0 + tr)
        f = 0.25 / eta
        e = f * np.array([c[1, 2] - c[2, 1], c[2, 0] - c[0, 2], c[0, 1] - c[1, 0]])
    else:
        i = k - 1
        j, l = (i + 1) % 3, (i + 2) % 3
        ei = 0.5 * np.sqrt(1.0 + c[i, i] - c[j, j] - c[l, l])
        f = 0.25 / ei
        e = np.empty(3)
        e[i] = ei
        e[j] = f * (c[i, j] + c[j, i])
        e[l] = f * (c[i, l] + c[l, i])
        eta = f * (c[j, l] - c[l, j])
    q = np.array([e[0], e[1], e[2], eta])
    if q[3] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def rotvec_from_dcm(c):
    """Rotation vector (angle times unit axis, angle in [0, pi])."""
    q = quat_from_dcm(c)
    e, eta = q[:3], q[3]
    n = np.linalg.norm(e)
    if n < 1.0e-12:
        return 2.0 * e  # small angle: phi ~= 2 e
    return (2.0 * np.arctan2(n, eta) / n) * e


def dcm_from_rotvec(phi):
    """DCM ``expm(-cross(phi))`` by the Rodrigues formula."""
    ang = np.linalg.norm(phi)
    px = cross(phi)
    if ang < 1.0e-8:
        return _I3 - px + 0.5 * (px @ px)
    return _I3 - (np.sin(ang) / ang) * px + ((1.0 - np.cos(ang)) / ang ** 2) * (px @ px)


def mrp_from_dcm(c):
    """Modified Rodrigues parameters ``e / (1 + eta)`` (inner set, |sigma|<=1)."""
    q = quat_from_dcm(c)
    return q[:3] / (1.0 + q[3])


def dcm_from_mrp(sigma):
    """DCM of an MRP vector."""
    n = sigma @ sigma
    eta = (1.0 - n) / (1.0 + n)
    e = 2.0 * sigma / (1.0 + n)
    return dcm_from_quat(np.array([e[0], e[1], e[2], eta]))


def dcm_from(kind, q):
    """Dispatch ``q`` (three-parameter attitude of type ``kind``) to a DCM."""
    if kind == EULER321:
        return dcm_from_euler321(q)
    if kind == ROTVEC:
        return dcm_from_rotvec(q)
    if kind == MRP:
        return dcm_from_mrp(q)
    raise ValueError(f"unknown attitude kind {kind!r}")


def from_dcm(kind, c, margin=GIMBAL_MARGIN):
    """Extract the three-parameter attitude of type ``kind`` from a DCM."""
    if kind == EULER321:
        return euler321_from_dcm(c, margin)
    if kind == ROTVEC:
        return rotvec_from_dcm(c)
    if kind == MRP:
        return mrp_from_dcm(c)
    raise ValueError(f"unknown attitude kind {kind!r}")


# ---------------------------------------------------------------------------
# rate mapping matrices  w = S(q) qdot  and their time derivatives
# ---------------------------------------------------------------------------

def _s_euler321(q, margin):
    roll, pitch = q[0], q[1]
    if abs(abs(pitch) - np.pi / 2.0) < margin:
        raise SingularityError(
            f"3-2-1 mapping matrix singular (pitch {pitch:.6f} rad)", pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    return np.array([
        [1.0, 0.0, -sp],
        [0.0, cr, sr * cp],
        [0.0, -sr, cr * cp],
    ])


def _sdot_euler321(q, qdot):
    roll, pitch = q[0], q[1]
    rd, pd = qdot[0], qdot[1]
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    return np.array([
        [0.0, 0.0, -cp * pd],
        [0.0, -sr * rd, cr * cp * rd - sr * sp * pd],
        [0.0, -cr * rd, -sr * cp * rd - cr * sp * pd],
    ])


def _rotvec_coeffs(ang):
    # a1 = (1 - cos x)/x^2, a2 = (x - sin x)/x^3 with series fallbacks
    if ang < 1.0e-4:
        x2 = ang * ang
        a1 = 0.5 - x2 / 24.0 + x2 * x2 / 720.0
        a2 = 1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0
        # g_i = a_i'(x)/x, finite at x = 0
        g1 = -1.0 / 12.0 + x2 / 180.0
        g2 = -1.0 / 60.0 + x2 / 1260.0
    else:
        s, c = np.sin(ang), np.cos(ang)
        a1 = (1.0 - c) / ang ** 2
        a2 = (ang - s) / ang ** 3
        g1 = (ang * s - 2.0 * (1.0 - c)) / ang ** 4
        g2 = (ang * (1.0 - c) - 3.0 * (ang - s)) / ang ** 5
    return a1, a2, g1, g2


def _s_rotvec(phi, margin):
    ang = np.linalg.norm(phi)
    if ang > 2.0 * np.pi - margin:
        raise SingularityError(
            f"rotation-vector mapping singular (angle {ang:.6f} rad)", ang)
    a1, a2, _, _ = _rotvec_coeffs(ang)
    px = cross(phi)
    return _I3 - a1 * px + a2 * (px @ px)


def _sdot_rotvec(phi, phidot):
    ang = np.linalg.norm(phi)
    a1, a2, g1, g2 = _rotvec_coeffs(ang)
    dots = phi @ phidot  # = ang * angdot
    px, pdx = cross(phi), cross(phidot)
    return (-g1 * dots * px - a1 * pdx
            + g2 * dots * (px @ px) + a2 * (pdx @ px + px @ pdx))


def _s_mrp(sigma, margin):
    n = sigma @ sigma
    bt = (1.0 - n) * _I3 - 2.0 * cross(sigma) + 2.0 * np.outer(sigma, sigma)
    return 4.0 * bt / (1.0 + n) ** 2


def _sdot_mrp(sigma, sigmadot):
    n = sigma @ sigma
    ndot = 2.0 * (sigma @ sigmadot)
    btdot = (-ndot * _I3 - 2.0 * cross(sigmadot)
             + 2.0 * (np.outer(sigmadot, sigma) + np.outer(sigma, sigmadot)))
    bt = (1.0 - n) * _I3 - 2.0 * cross(sigma) + 2.0 * np.outer(sigma, sigma)
    return 4.0 * btdot / (1.0 + n) ** 2 - 8.0 * ndot * bt / (1.0 + n) ** 3


def mapping_matrix(kind, q, margin=GIMBAL_MARGIN):
    """Mapping matrix ``S(q)`` with ``w = S(q) @ qdot``.

    Raises :class:`SingularityError` within ``margin`` of the
    parameterization's kinematic singularity.
    """
    if kind == EULER321:
        return _s_euler321(q, margin)
    if kind == ROTVEC:
        return _s_rotvec(q, margin)
    if kind == MRP:
        return _s_mrp(q, margin)
    raise ValueError(f"unknown attitude kind {kind!r}")


def mapping_matrix_dot(kind, q, qdot):
    """Time derivative of ``S(q)`` along ``qdot``."""
    if kind == EULER321:
        return _sdot_euler321(q, qdot)
    if kind == ROTVEC:
        return _sdot_rotvec(q, qdot)
    if kind == MRP:
        return _sdot_mrp(q, qdot)
    raise ValueError(f"unknown attitude kind {kind!r}")


def rates_from_omega(kind, q, w, margin=GIMBAL_MARGIN):
    """Parameter rates ``qdot = S(q)^{-1} w``."""
    return np.linalg.solve(mapping_matrix(kind, q, margin), w)


# ---------------------------------------------------------------------------
# quaternion kinematics and error constructions
# ---------------------------------------------------------------------------

def quat_kinematics(q, w):
    """Quaternion rate for body angular velocity ``w``:
    ``edot = (eta 1 + cross(e)) w / 2``, ``etadot = -e.w / 2``."""
    e, eta = q[:3], q[3]
    edot = 0.5 * (eta * w + np.cross(e, w))
    return np.array([edot[0], edot[1], edot[2], -0.5 * (e @ w)])


def omega_from_quat_rate(q, qdot):
    """Body angular velocity from a quaternion rate:
    ``w = 2 [eta 1 - cross(e), -e] qdot``."""
    e, eta = q[:3], q[3]
    return 2.0 * (eta * qdot[:3] - np.cross(e, qdot[:3]) - qdot[3] * e)


def quat_error(q, q_d):
    """Multiplicative quaternion error of ``q`` relative to desired ``q_d``.

    ``dq = [eta_d e - eta e_d + cross(e) e_d,  eta eta_d + e.e_d]``; its DCM
    equals ``dcm_error(C(q), C(q_d))``.  Unit norm is preserved.
    """
    e, eta = q[:3], q[3]
    ed, etad = q_d[:3], q_d[3]
    de = etad * e - eta * ed + np.cross(e, ed)
    return np.array([de[0], de[1], de[2], eta * etad + e @ ed])


def dcm_error(c, c_d):
    """Multiplicative DCM error ``C_pd = C @ C_d^T``."""
    return c @ c_d.T


def error_angle(c_pd):
    """Angle of the axis-angle form of a DCM, ``acos((tr - 1)/2)`` in [0, pi]."""
    tr = c_pd[0, 0] + c_pd[1, 1] + c_pd[2, 2]
    return float(np.arccos(np.clip(0.5 * (tr - 1.0), -1.0, 1.0)))


def poisson_step(c, w, dt):
    """Advance Poisson's equation over ``dt`` holding ``w`` constant.

    Uses the exact exponential-map update ``expm(-cross(w) dt) @ C`` followed
    by a polar re-orthonormalization so the SO(3) invariants survive long runs.
    """
    c_new = dcm_from_rotvec(np.asarray(w, dtype=float) * dt) @ c
    return project_to_so3(c_new)
