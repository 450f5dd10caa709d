"""Physics audits: conservation checks for the two plant models.

These run the plants open loop (no controller) so that the conserved
quantities are exact invariants of the continuous dynamics and any drift
measures integrator and model errors only.
"""

import numpy as np

from . import attitude as att
from .allocation import allocate
from .dynamics import cable_vectors, gravity_wrench, wrench_matrix


def free_rigid_body_drift(payload, omega0, duration=10.0, dt=1.0e-3,
                          c0=None):
    """Maximum drift of the inertially-resolved angular momentum ``C^T I w``
    of a torque-free rigid body (gravity off, cables off) under the same
    RK4 + re-orthonormalization scheme the closed loop uses."""
    c = np.eye(3) if c0 is None else np.array(c0, dtype=float)
    w = np.array(omega0, dtype=float)
    inertia = payload.inertia
    h0 = c.T @ (inertia @ w)
    n_steps = int(round(duration / dt))

    def rhs(y):
        ck = y[:9].reshape(3, 3)
        wk = y[9:]
        ydot = np.empty(12)
        ydot[:9] = (-att.cross(wk) @ ck).ravel()
        ydot[9:] = np.linalg.solve(inertia, -np.cross(wk, inertia @ wk))
        return ydot

    y = np.concatenate([c.ravel(), w])
    drift = 0.0
    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y[:9] = att.project_to_so3(y[:9].reshape(3, 3)).ravel()
        h = y[:9].reshape(3, 3).T @ (inertia @ y[9:])
        drift = max(drift, float(np.linalg.norm(h - h0)))
    return drift


def elastic_energy_audit(geom, payload, alloc_cfg, duration=1.0, dt=1.0e-4,
                         velocity_perturbation=(0.03, 0.0, 0.03),
                         position=(0.0, 0.0, 0.465)):
    """Energy drift of the undamped elastic plant over ``duration``.

    The payload starts at the static equilibrium (cables pre-strained to the
    allocated gravity-compensating tensions, winch torques held constant at
    that allocation) with a small translational velocity perturbation.  The
    audited energy is kinetic + gravitational + elastic minus the constant
    winch-torque work, which is an exact invariant of the continuous model.

    Returns ``(relative_drift, energy_trace)`` where the drift is relative
    to ``max(|E(0)|, peak kinetic energy)``.
    """
    r = np.array(position, dtype=float)
    c = np.eye(3)
    radii = geom.winch_radius
    lengths0, _ = cable_vectors(geom, r, c)
    pi = wrench_matrix(geom, r, c)
    res = allocate(pi, gravity_wrench(payload), alloc_cfg, radii)
    t_static = res.tensions
    tau_const = radii * t_static
    l0_init = lengths0 * geom.axial_stiffness / (geom.axial_stiffness + t_static)

    inertia = payload.inertia
    m = payload.mass
    g = payload.gravity
    ea = geom.axial_stiffness
    j_w = geom.winch_inertia

    # state: r(3) C(9) nu(6) theta(8) thetadot(8)
    y = np.zeros(34)
    y[:3] = r
    y[3:12] = c.ravel()
    y[12:15] = np.asarray(velocity_perturbation, dtype=float)

    def rhs(yk):
        rk = yk[:3]
        ck = yk[3:12].reshape(3, 3)
        nu = yk[12:18]
        theta = yk[18:26]
        thetadot = yk[26:34]
        wk = nu[3:]
        lengths, _ = cable_vectors(geom, rk, ck)
        pik = wrench_matrix(geom, rk, ck, check_rank=False)
        l0 = l0_init - radii * theta
        tension = np.maximum(ea / l0 * (lengths - l0), 0.0)
        f = pik.T @ (radii * tension)
        ydot = np.empty(34)
        ydot[:3] = nu[:3]
        ydot[3:12] = (-att.cross(wk) @ ck).ravel()
        ydot[12:15] = f[:3] / m
        ydot[14] -= g
        ydot[15:18] = np.linalg.solve(inertia, f[3:] - np.cross(wk, inertia @ wk))
        ydot[18:26] = thetadot
        ydot[26:34] = (tau_const - radii * tension) / j_w
        return ydot

    def energy(yk):
        rk = yk[:3]
        ck = yk[3:12].reshape(3, 3)
        nu = yk[12:18]
        theta = yk[18:26]
        thetadot = yk[26:34]
        lengths, _ = cable_vectors(geom, rk, ck)
        l0 = l0_init - radii * theta
        stretch = np.maximum(lengths - l0, 0.0)
        ke = 0.5 * m * nu[:3] @ nu[:3] + 0.5 * nu[3:] @ (inertia @ nu[3:])
        ke_w = 0.5 * float(j_w @ thetadot ** 2)
        pe_g = m * g * (rk[2] - position[2])
        pe_e = 0.5 * float((ea / l0) @ stretch ** 2)
        work = float(tau_const @ theta)
        return ke + ke_w + pe_g + pe_e - work, ke + ke_w

    n_steps = int(round(duration / dt))
    e0, _ = energy(y)
    energies = np.empty(n_steps + 1)
    energies[0] = e0
    ke_peak = 0.0
    for k in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y[3:12] = att.project_to_so3(y[3:12].reshape(3, 3)).ravel()
        energies[k + 1], ke = energy(y)
        ke_peak = max(ke_peak, ke)
    scale = max(abs(e0), ke_peak, 1.0e-12)
    drift = float(np.abs(energies - e0).max() / scale)
    return drift, energies
