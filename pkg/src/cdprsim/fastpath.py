"""Jitted kernels for the simulation hot loop.

The public operations in :mod:`dynamics` and :mod:`allocation` wrap these
kernels with input validation and the package's exception types; the kernels
themselves only move floats.  When numba is unavailable the same functions
run as plain Python (slower, identical results).
"""

import numpy as np

try:
    from numba import njit
except ImportError:                      # pragma: no cover - numba installed
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


@njit(cache=True)
def cable_kernel(winch, attach, r, c):
    """Lengths and unit vectors (attachment toward winch); flags a
    degenerate (zero-length) cable in the status slot."""
    lengths = np.empty(8)
    units = np.empty((8, 3))
    status = 0
    for i in range(8):
        dx = winch[i, 0] - r[0] - (c[0, 0] * attach[i, 0]
                                   + c[1, 0] * attach[i, 1]
                                   + c[2, 0] * attach[i, 2])
        dy = winch[i, 1] - r[1] - (c[0, 1] * attach[i, 0]
                                   + c[1, 1] * attach[i, 1]
                                   + c[2, 1] * attach[i, 2])
        dz = winch[i, 2] - r[2] - (c[0, 2] * attach[i, 0]
                                   + c[1, 2] * attach[i, 1]
                                   + c[2, 2] * attach[i, 2])
        l = np.sqrt(dx * dx + dy * dy + dz * dz)
        lengths[i] = l
        if l < 1.0e-9:
            status = i + 1
            units[i, 0] = units[i, 1] = units[i, 2] = 0.0
        else:
            units[i, 0] = dx / l
            units[i, 1] = dy / l
            units[i, 2] = dz / l
    return lengths, units, status


@njit(cache=True)
def wrench_kernel(attach, radius, units, c):
    """Wrench-matrix rows ``[u_i, b_i x C u_i] / r_i``."""
    pi = np.empty((8, 6))
    for i in range(8):
        ux = c[0, 0] * units[i, 0] + c[0, 1] * units[i, 1] + c[0, 2] * units[i, 2]
        uy = c[1, 0] * units[i, 0] + c[1, 1] * units[i, 1] + c[1, 2] * units[i, 2]
        uz = c[2, 0] * units[i, 0] + c[2, 1] * units[i, 1] + c[2, 2] * units[i, 2]
        inv_r = 1.0 / radius[i]
        pi[i, 0] = units[i, 0] * inv_r
        pi[i, 1] = units[i, 1] * inv_r
        pi[i, 2] = units[i, 2] * inv_r
        pi[i, 3] = (attach[i, 1] * uz - attach[i, 2] * uy) * inv_r
        pi[i, 4] = (attach[i, 2] * ux - attach[i, 0] * uz) * inv_r
        pi[i, 5] = (attach[i, 0] * uy - attach[i, 1] * ux) * inv_r
    return pi


@njit(cache=True)
def fk_kernel(winch, attach, targets, r0, c0, step_tol, max_iter):
    """Gauss-Newton pose fit to eight cable lengths.

    Returns ``(r, c, residual_rms, iterations, status)`` with status
    0 = converged, 1 = rank-deficient Jacobian, 2 = iteration cap.
    """
    r = r0.copy()
    c = c0.copy()
    jac = np.empty((8, 6))
    resid = np.empty(8)
    for it in range(max_iter):
        lengths, units, _ = cable_kernel(winch, attach, r, c)
        for i in range(8):
            resid[i] = lengths[i] - targets[i]
            ux = (c[0, 0] * units[i, 0] + c[0, 1] * units[i, 1]
                  + c[0, 2] * units[i, 2])
            uy = (c[1, 0] * units[i, 0] + c[1, 1] * units[i, 1]
                  + c[1, 2] * units[i, 2])
            uz = (c[2, 0] * units[i, 0] + c[2, 1] * units[i, 1]
                  + c[2, 2] * units[i, 2])
            jac[i, 0] = -units[i, 0]
            jac[i, 1] = -units[i, 1]
            jac[i, 2] = -units[i, 2]
            jac[i, 3] = -(attach[i, 1] * uz - attach[i, 2] * uy)
            jac[i, 4] = -(attach[i, 2] * ux - attach[i, 0] * uz)
            jac[i, 5] = -(attach[i, 0] * uy - attach[i, 1] * ux)
        jtj = jac.T @ jac
        if np.abs(np.linalg.det(jtj)) < 1.0e-18:
            return r, c, 0.0, it, 1
        step = np.linalg.solve(jtj, -(jac.T @ resid))
        sn = 0.0
        for k in range(6):
            sn += step[k] * step[k]
        if np.sqrt(sn) < step_tol:
            rms = 0.0
            for i in range(8):
                rms += resid[i] * resid[i]
            return r, c, np.sqrt(rms / 8.0), it + 1, 0
        r[0] += step[0]
        r[1] += step[1]
        r[2] += step[2]
        # C <- expm(-cross(phi)) C by the Rodrigues formula
        px, py, pz = step[3], step[4], step[5]
        ang = np.sqrt(px * px + py * py + pz * pz)
        if ang > 0.0:
            if ang < 1.0e-8:
                s_a = 1.0 - ang * ang / 6.0
                c_a = 0.5 - ang * ang / 24.0
            else:
                s_a = np.sin(ang) / ang
                c_a = (1.0 - np.cos(ang)) / (ang * ang)
            rot = np.empty((3, 3))
            rot[0, 0] = 1.0 + c_a * (-pz * pz - py * py)
            rot[0, 1] = s_a * pz + c_a * px * py
            rot[0, 2] = -s_a * py + c_a * px * pz
            rot[1, 0] = -s_a * pz + c_a * px * py
            rot[1, 1] = 1.0 + c_a * (-px * px - pz * pz)
            rot[1, 2] = s_a * px + c_a * py * pz
            rot[2, 0] = s_a * py + c_a * px * pz
            rot[2, 1] = -s_a * px + c_a * py * pz
            rot[2, 2] = 1.0 + c_a * (-px * px - py * py)
            c = rot @ c
    rms = 0.0
    for i in range(8):
        rms += resid[i] * resid[i]
    return r, c, np.sqrt(rms / 8.0), max_iter, 2


@njit(cache=True)
def alloc_kernel(pi, f, radii, pretension, t_min, t_max, max_clamp_iter):
    """Closed-form tension distribution with worst-first limit clamping.

    Returns ``(tau, tensions, clamped, iterations, status, worst)`` with
    status 0 = ok, 1 = under-determined (fewer than 6 active cables),
    2 = reduced matrix rank deficient, 3 = infeasible at the iteration cap.
    """
    n = pi.shape[0]
    tensions = np.zeros(n)
    tau = np.zeros(n)
    clamped = np.zeros(n, dtype=np.bool_)
    active = np.ones(n, dtype=np.bool_)
    f_resid = f.copy()
    for iteration in range(max_clamp_iter + 1):
        na = 0
        for i in range(n):
            if active[i]:
                na += 1
        if na < 6:
            return tau, tensions, clamped, iteration, 1, 0.0
        pi_a = np.empty((na, 6))
        radii_a = np.empty(na)
        idx = np.empty(na, dtype=np.int64)
        k = 0
        for i in range(n):
            if active[i]:
                pi_a[k] = pi[i]
                radii_a[k] = radii[i]
                idx[k] = i
                k += 1
        q_f, r_f = np.linalg.qr(pi_a)
        q_f = np.ascontiguousarray(q_f)
        min_d = np.inf
        max_d = 0.0
        for k in range(6):
            d = abs(r_f[k, k])
            if d < min_d:
                min_d = d
            if d > max_d:
                max_d = d
        if min_d <= 1.0e-10 * max_d:
            return tau, tensions, clamped, iteration, 2, 0.0
        tau_pt = radii_a * pretension
        rhs = f_resid - pi_a.T @ tau_pt
        # tau_a = tau_pt + U^T rhs with U = R^-1 Q^T
        z = np.linalg.solve(r_f.T, rhs)
        tau_a = tau_pt + q_f @ z
        t_a = tau_a / radii_a

        worst_k = -1
        worst_v = 0.0
        for k in range(na):
            v_lo = t_min - t_a[k]
            v_hi = t_a[k] - t_max
            v = v_lo if v_lo > v_hi else v_hi
            if v > worst_v:
                worst_v = v
                worst_k = k
        # keep the latest (clipped) iterate as the best-effort answer for
        # the caller's saturation policy
        for k in range(na):
            t_clip = t_a[k]
            if t_clip < t_min:
                t_clip = t_min
            elif t_clip > t_max:
                t_clip = t_max
            tensions[idx[k]] = t_clip
        for i in range(n):
            tau[i] = tensions[i] * radii[i]
        if worst_k < 0:
            return tau, tensions, clamped, iteration, 0, 0.0
        if iteration == max_clamp_iter:
            return tau, tensions, clamped, iteration, 3, worst_v

        i_w = idx[worst_k]
        limit = t_min if (t_min - t_a[worst_k]) >= (t_a[worst_k] - t_max) else t_max
        tensions[i_w] = limit
        clamped[i_w] = True
        active[i_w] = False
        contrib = radii[i_w] * limit
        for k in range(6):
            f_resid[k] -= pi[i_w, k] * contrib
    return tau, tensions, clamped, max_clamp_iter, 3, 0.0
