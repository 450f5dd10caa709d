"""CDPR geometry, wrench matrix, payload dynamics and cable models.

Sign conventions fixed here (and verified by the static-equilibrium tests):

* Cable unit vectors ``u_i`` point from the payload attachment toward the
  winch, so a positive tension pulls the payload toward the winch.
* Winch angles increase when cable is reeled in: ``thetadot = Pi @ nu``
  equals ``-ldot / r``.  Positive winch torque therefore increases tension,
  and the winch rotor obeys ``J thetaddot = tau - r t``.
* Wrenches stack a force resolved in the inertial frame on top of a torque
  resolved in the payload frame.
"""

from dataclasses import dataclass, field

import numpy as np

from .attitude import cross, cross3
from .errors import ConvergenceError, DegenerateGeometryError, RankDeficiencyError
from .fastpath import cable_kernel, fk_kernel, wrench_kernel

_E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CdprGeometry:
    """Winch and attachment layout plus cable properties.

    ``winch_positions`` are inertial (8x3, m); ``attachment_points`` are
    payload-frame offsets from the center of mass (8x3, m).
    """

    winch_positions: np.ndarray
    attachment_points: np.ndarray
    winch_radius: np.ndarray          # (8,) m
    winch_inertia: np.ndarray         # (8,) kg m^2
    cable_density: float              # kg/m
    axial_stiffness: float            # EA, N
    tension_min: float                # N
    tension_max: float                # N

    def __post_init__(self):
        object.__setattr__(self, "winch_positions",
                           np.asarray(self.winch_positions, dtype=float))
        object.__setattr__(self, "attachment_points",
                           np.asarray(self.attachment_points, dtype=float))
        object.__setattr__(self, "winch_radius",
                           np.asarray(self.winch_radius, dtype=float))
        object.__setattr__(self, "winch_inertia",
                           np.asarray(self.winch_inertia, dtype=float))
        if self.winch_positions.shape != (8, 3):
            raise ValueError("expected 8 winch positions")
        if self.attachment_points.shape != (8, 3):
            raise ValueError("expected 8 attachment points")
        if np.any(self.winch_radius <= 0.0) or np.any(self.winch_inertia <= 0.0):
            raise ValueError("winch radii and inertias must be positive")
        if not self.tension_min < self.tension_max:
            raise ValueError("tension_min must be below tension_max")

    @property
    def n_cables(self):
        return 8


@dataclass(frozen=True)
class PayloadParams:
    """Rigid payload mass properties and gravity."""

    mass: float
    inertia: np.ndarray               # (3,3) kg m^2, symmetric positive definite
    gravity: float = 9.81

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        if self.mass <= 0.0:
            raise ValueError("payload mass must be positive")
        if np.abs(self.inertia - self.inertia.T).max() > 1.0e-12:
            raise ValueError("payload inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0.0):
            raise ValueError("payload inertia must be positive definite")

    def param_vector(self):
        """Minimal parameter vector [m, I11, I22, I33, I12, I13, I23]."""
        ip = self.inertia
        return np.array([self.mass, ip[0, 0], ip[1, 1], ip[2, 2],
                         ip[0, 1], ip[0, 2], ip[1, 2]])

    def mass_matrix(self):
        m = np.zeros((6, 6))
        m[:3, :3] = self.mass * np.eye(3)
        m[3:, 3:] = self.inertia
        return m


@dataclass
class PayloadState:
    """Payload pose (position + DCM) and augmented velocity ``nu = [rdot; w]``."""

    r: np.ndarray
    c: np.ndarray
    nu: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def copy(self):
        return PayloadState(self.r.copy(), self.c.copy(), self.nu.copy())


def cable_vectors(geom, r, c):
    """Cable lengths and unit directions (attachment toward winch).

    Returns ``(lengths (8,), units (8,3))`` with the attachment points at
    ``r + C^T b_i`` in inertial coordinates.
    """
    lengths, units, status = cable_kernel(
        geom.winch_positions, geom.attachment_points,
        np.ascontiguousarray(r, dtype=float),
        np.ascontiguousarray(c, dtype=float))
    if status:
        raise DegenerateGeometryError(f"cable {status} has zero length")
    return lengths, units


def wrench_matrix(geom, r, c, check_rank=True, cables=None):
    """Wrench matrix ``Pi`` (8x6) with ``thetadot = Pi nu`` and ``f = Pi^T tau``.

    Row ``i`` is ``[u_i^T, (b_i x C u_i)^T] / r_i``; ``cables`` may pass a
    precomputed ``(lengths, units)`` pair.  Raises
    :class:`RankDeficiencyError` when the pose has left the wrench-feasible
    workspace (rank below 6).
    """
    if cables is None:
        cables = cable_vectors(geom, r, c)
    pi = wrench_kernel(geom.attachment_points, geom.winch_radius, cables[1],
                       np.ascontiguousarray(c, dtype=float))
    if check_rank:
        sv = np.linalg.svd(pi, compute_uv=False)
        if sv[-1] < 1.0e-10 * sv[0]:
            raise RankDeficiencyError(
                f"wrench matrix rank-deficient (sigma_min/sigma_max "
                f"{sv[-1] / sv[0]:.3e})")
    return pi


def gravity_wrench(params):
    """Wrench the cables must supply to hold the payload at rest."""
    f = np.zeros(6)
    f[:3] = params.mass * params.gravity * _E3
    return f


def task_space_dynamics(params, nu, f):
    """Acceleration ``nudot = M^{-1} (f - D(w) nu - g)`` of the rigid payload.

    Gravity acts along -z inertial; ``f`` stacks an inertial force over a
    payload-frame torque.
    """
    w = nu[3:]
    ip_w = params.inertia @ w
    nudot = np.empty(6)
    nudot[:3] = f[:3] / params.mass
    nudot[2] -= params.gravity
    nudot[3:] = np.linalg.solve(params.inertia, f[3:] - cross3(w, ip_w))
    return nudot


def coriolis_matrix(params, nu):
    """Task-space ``D(rho, nu)`` (only the gyroscopic block is nonzero)."""
    d = np.zeros((6, 6))
    d[3:, 3:] = cross(nu[3:]) @ params.inertia
    return d


def angular_momentum_inertial(params, state):
    """Angular momentum ``C^T I w`` resolved in the inertial frame."""
    return state.c.T @ (params.inertia @ state.nu[3:])


# ---------------------------------------------------------------------------
# elastic cable model (lumped axial spring-damper, slack-aware)
# ---------------------------------------------------------------------------

def elastic_tensions(geom, lengths, ldots, l0, l0dots, damping):
    """Per-cable tensions ``max(0, EA/l0 (l - l0) + c_d (ldot - l0dot))``.

    ``l0`` are the unstretched lengths slaved to the winch angles; slack
    cables carry exactly zero tension.
    """
    t = geom.axial_stiffness / l0 * (lengths - l0) + damping * (ldots - l0dots)
    return np.maximum(t, 0.0)


def winch_accelerations(geom, tau, tensions):
    """Winch rotor dynamics ``thetaddot = (tau - r t) / J``."""
    return (tau - geom.winch_radius * tensions) / geom.winch_inertia


def critical_damping(geom, payload_mass, lengths, ratio=0.005):
    """Axial damping coefficients at ``ratio`` of critical for each cable,
    using an equal split of the payload mass across the cables."""
    k = geom.axial_stiffness / lengths
    m_eff = payload_mass / geom.n_cables
    return 2.0 * ratio * np.sqrt(k * m_eff)


# ---------------------------------------------------------------------------
# forward kinematics from winch rotation (Gauss-Newton least squares)
# ---------------------------------------------------------------------------

def forward_kinematics(geom, lengths_target, r0, c0,
                       step_tol=1.0e-10, max_iter=50):
    """Pose that best reproduces the eight target cable lengths.

    Gauss-Newton on ``sum_i (l_i(pose) - target_i)^2`` with a multiplicative
    attitude update, warm-started from ``(r0, c0)``.  Returns
    ``(r, c, residual_rms, n_iter)``.  Raises :class:`ConvergenceError`
    when the step-norm tolerance is not met in ``max_iter`` iterations and
    :class:`RankDeficiencyError` on a degenerate Jacobian.
    """
    r, c, rms, n_iter, status = fk_kernel(
        geom.winch_positions, geom.attachment_points,
        np.ascontiguousarray(lengths_target, dtype=float),
        np.ascontiguousarray(r0, dtype=float),
        np.ascontiguousarray(c0, dtype=float), step_tol, max_iter)
    if status == 1:
        raise RankDeficiencyError("forward-kinematics Jacobian is rank deficient")
    if status == 2:
        raise ConvergenceError(
            f"forward kinematics did not converge in {max_iter} iterations "
            f"(residual rms {rms:.3e} m)", residual=float(rms))
    return r, c, float(rms), int(n_iter)
