"""Closed-loop fixed-step simulation, logging, metrics and audits.

One scenario runs controller -> tension allocation -> plant inside a single
classical RK4 integration; the adaptive update and the SPR filter state are
integrated within the same stages (continuous-time idealization).  In
elastic mode the controller sees only a pose reconstructed from the rigid
winch rotations (Gauss-Newton forward kinematics) and a velocity fit from
the winch rates, while the logged tracking errors always use the true
payload pose.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import attitude as att
from . import control as ctl
from .allocation import allocate
from .config import Scenario, scenario_summary
from .dynamics import (PayloadState, cable_vectors, critical_damping,
                       elastic_tensions, forward_kinematics, gravity_wrench,
                       wrench_matrix)
from .errors import CdprError, RankDeficiencyError
from .fastpath import alloc_kernel
from .trajectory import desired_state

# flat state layout (rigid uses the first 32 entries)
_R = slice(0, 3)
_C = slice(3, 12)
_NU = slice(12, 18)
_AH = slice(18, 25)
_XC = slice(25, 31)
_PINT = 31
_TH = slice(32, 40)
_THD = slice(40, 48)
_N_RIGID = 32
_N_ELASTIC = 48

CSV_COLUMNS = (
    ["t", "rx", "ry", "rz", "rdx", "rdy", "rdz", "q1", "q2", "q3", "q4",
     "err_angle_rad", "rtil_x", "rtil_y", "rtil_z"]
    + [f"t{i}" for i in range(1, 9)]
    + [f"tau{i}" for i in range(1, 9)]
    + [f"ahat{i}" for i in range(1, 8)]
    + [f"s{i}" for i in range(1, 7)]
    + ["passivity_integral", "V1", "V2"]
)


@dataclass
class SimLog:
    """Uniform-grid time series of one run plus an optional failure record."""

    t: np.ndarray
    r: np.ndarray
    r_d: np.ndarray
    quat: np.ndarray
    err_angle: np.ndarray
    rtil: np.ndarray
    tensions: np.ndarray
    torques: np.ndarray
    ahat: np.ndarray
    s: np.ndarray
    passivity_integral: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    clamp_count: np.ndarray
    fk_rms: np.ndarray
    scenario: dict
    failure: dict | None = None

    def to_matrix(self):
        return np.column_stack([
            self.t, self.r, self.r_d, self.quat, self.err_angle, self.rtil,
            self.tensions, self.torques, self.ahat, self.s,
            self.passivity_integral, self.v1, self.v2,
        ])

    def to_csv(self, path, stride=1):
        """Write the fixed-header trajectory CSV (optionally decimated by
        ``stride``; the grid stays uniform)."""
        data = self.to_matrix()[::stride]
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in data:
                fh.write(",".join("%.17g" % v for v in row) + "\n")

    def write_summary(self, path):
        summary = {"scenario": self.scenario, "metrics": metrics(self),
                   "failure": self.failure}
        with open(path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")


class _Sim:
    """Precomputed constants and the RK4 right-hand sides of one scenario."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.geom = sc.geometry
        self.payload = sc.payload
        self.gains = sc.effective_gains()
        self.filt = ctl.SprFilter(self.gains.kd, self.gains.omega_c)
        self.alloc = sc.allocation
        self.radii = self.geom.winch_radius
        self.mass_matrix = self.payload.mass_matrix()
        self.a_true = self.payload.param_vector()
        self.inertia = self.payload.inertia
        self.inertia_inv = np.linalg.inv(self.payload.inertia)
        self.g = self.payload.gravity
        self.kind = sc.controller
        self.c0 = att.dcm_from_euler321(sc.initial_euler)
        self.l0_init = None
        self.damping = None
        self.fk_warm = None
        self._desired_cache = (None, None)

    # -- controller ---------------------------------------------------------

    def controller_eval(self, t, r_hat, c_hat, nu_hat, ahat, x_c):
        # RK4 evaluates the two middle stages at the same time
        if self._desired_cache[0] == t:
            desired = self._desired_cache[1]
        else:
            desired = desired_state(t)
            self._desired_cache = (t, desired)
        state = PayloadState(r_hat, c_hat, nu_hat)
        eb_ff, eb_fb = ctl.controller_blocks(self.kind, state, desired,
                                             self.gains.lam)
        w_mat = ctl.regressor(eb_ff.nu_r, eb_ff.nur_dot, nu_hat[3:], self.g)
        y_c = self.filt.output(x_c)
        f_fb = np.empty(6)
        f_fb[:3] = -y_c[:3]      # position block of P is the identity
        f_fb[3:] = -np.linalg.solve(eb_fb.p_mat[3:, 3:].T, y_c[3:])
        f_ff = w_mat @ ahat
        return f_ff + f_fb, f_ff, eb_ff, eb_fb, w_mat, y_c, desired

    def allocate_saturated(self, pi, f):
        """Sim policy: clamp-infeasible steps apply the best-effort clipped
        tensions from the last allocation iterate and are counted; rank
        deficiency of the full wrench matrix (payload left the workspace)
        aborts the run."""
        tau, tensions, clamped, iterations, status, _ = alloc_kernel(
            pi, f, self.radii, self.alloc.pretension,
            self.alloc.tension_min, self.alloc.tension_max,
            self.alloc.max_clamp_iterations)
        if status == 0:
            return tau, tensions, int(clamped.sum())
        if status == 2 and iterations == 0:
            raise RankDeficiencyError(
                "wrench matrix rank deficient, payload left the "
                "wrench-feasible workspace")
        return tau, tensions, 8

    # -- right-hand sides ---------------------------------------------------

    def rhs_rigid(self, t, y, want_outputs=False):
        r = y[_R]
        c = y[_C].reshape(3, 3)
        nu = y[_NU]
        ahat = y[_AH]
        x_c = y[_XC]
        w = nu[3:]

        f, f_ff, eb_ff, eb_fb, w_mat, y_c, desired = self.controller_eval(
            t, r, c, nu, ahat, x_c)
        pi = wrench_matrix(self.geom, r, c, check_rank=False)
        tau, tensions, n_clamped = self.allocate_saturated(pi, f)
        f_act = pi.T @ tau

        ydot = np.zeros(_N_RIGID)
        ydot[_R] = nu[:3]
        ydot[_C] = (-att.cross(w) @ c).ravel()
        ydot[12:15] = f_act[:3] / self.payload.mass
        ydot[14] -= self.g
        ydot[15:18] = self.inertia_inv @ (
            f_act[3:] - att.cross3(w, self.inertia @ w))
        ydot[_AH] = ctl.adaptation_rate(w_mat, eb_ff.nutil_r, self.gains.upsilon)
        ydot[_XC] = self.gains.omega_c * (eb_fb.s - x_c)
        # passivity port: the feedback wrench the payload actually received
        # (equals -y_c whenever the allocator is unclamped)
        f_fb_port = eb_fb.p_mat.T @ (f_act - f_ff)
        ydot[_PINT] = eb_fb.s @ f_fb_port

        if not want_outputs:
            return ydot, None
        return ydot, self._outputs(y, desired, r, c, eb_ff, eb_fb, ahat, x_c,
                                   tensions, tau, n_clamped, 0.0)

    def rhs_elastic(self, t, y, want_outputs=False):
        r = y[_R]
        c = y[_C].reshape(3, 3)
        nu = y[_NU]
        ahat = y[_AH]
        x_c = y[_XC]
        theta = y[_TH]
        thetadot = y[_THD]
        w = nu[3:]

        # true cable state and payload wrench
        lengths, units = cable_vectors(self.geom, r, c)
        pi_true = wrench_matrix(self.geom, r, c, check_rank=False,
                                cables=(lengths, units))
        ldot = -(pi_true @ nu) * self.radii
        l0 = self.l0_init - self.radii * theta
        l0dot = -self.radii * thetadot
        tensions_act = elastic_tensions(self.geom, lengths, ldot, l0, l0dot,
                                        self.damping)
        f_act = pi_true.T @ (self.radii * tensions_act)

        # controller runs on the winch-rotation estimate of the pose
        r_hat, c_hat, fk_rms, _ = forward_kinematics(
            self.geom, l0, self.fk_warm[0], self.fk_warm[1])
        self.fk_warm = (r_hat, c_hat)
        pi_hat = wrench_matrix(self.geom, r_hat, c_hat, check_rank=False)
        nu_hat = np.linalg.solve(pi_hat.T @ pi_hat, pi_hat.T @ thetadot)
        f, f_ff, eb_ff, eb_fb, w_mat, y_c, desired = self.controller_eval(
            t, r_hat, c_hat, nu_hat, ahat, x_c)
        tau, tensions_cmd, n_clamped = self.allocate_saturated(pi_hat, f)

        mass = self.payload.mass
        if self.sc.include_cable_mass:
            mass = mass + self.geom.cable_density * lengths.sum() / 3.0

        ydot = np.zeros(_N_ELASTIC)
        ydot[_R] = nu[:3]
        ydot[_C] = (-att.cross(w) @ c).ravel()
        ydot[12:15] = f_act[:3] / mass
        ydot[14] -= self.g
        ydot[15:18] = self.inertia_inv @ (
            f_act[3:] - att.cross3(w, self.inertia @ w))
        ydot[_AH] = ctl.adaptation_rate(w_mat, eb_ff.nutil_r, self.gains.upsilon)
        ydot[_XC] = self.gains.omega_c * (eb_fb.s - x_c)
        ydot[_PINT] = eb_fb.s @ (eb_fb.p_mat.T @ (f_act - f_ff))
        ydot[_TH] = thetadot
        ydot[_THD] = (tau - self.radii * tensions_act) / self.geom.winch_inertia

        if not want_outputs:
            return ydot, None
        return ydot, self._outputs(y, desired, r, c, eb_ff, eb_fb, ahat, x_c,
                                   tensions_act, tau, n_clamped, fk_rms)

    def _outputs(self, y, desired, r, c, eb_ff, eb_fb, ahat, x_c,
                 tensions, tau, n_clamped, fk_rms):
        v1 = ctl.v1_value(self.mass_matrix, self.gains.upsilon,
                          eb_ff.nutil_r, ahat - self.a_true)
        return {
            "r_d": desired.r_d,
            "quat": att.quat_from_dcm(c),
            "err_angle": att.error_angle(c @ desired.c_da.T),
            "rtil": r - desired.r_d,
            "tensions": tensions,
            "tau": tau,
            "s": eb_fb.s,
            "pint": y[_PINT],
            "v1": v1,
            "v2": ctl.v2_value(v1, x_c, self.filt.p_c),
            "clamp": n_clamped,
            "fk_rms": fk_rms,
        }


def _initial_state(sim):
    sc = sim.sc
    n = _N_RIGID if sc.cables == "rigid" else _N_ELASTIC
    y = np.zeros(n)
    y[_R] = sc.initial_position
    y[_C] = sim.c0.ravel()
    y[_NU] = sc.initial_velocity
    y[_AH] = sc.ahat0()
    if sc.cables == "elastic":
        lengths, _ = cable_vectors(sim.geom, sc.initial_position, sim.c0)
        if sc.elastic_equilibrium_init:
            pi = wrench_matrix(sim.geom, sc.initial_position, sim.c0)
            res = allocate(pi, gravity_wrench(sim.payload), sc.allocation,
                           sim.geom.winch_radius)
            sim.l0_init = lengths * sim.geom.axial_stiffness / (
                sim.geom.axial_stiffness + res.tensions)
        else:
            sim.l0_init = lengths.copy()     # zero initial strain
        sim.damping = critical_damping(sim.geom, sc.payload.mass, lengths,
                                       sc.damping_ratio)
        sim.fk_warm = (sc.initial_position.copy(), sim.c0.copy())
    return y


def run_scenario(sc: Scenario) -> SimLog:
    """Integrate one scenario and return its log.

    Runs are deterministic; simulation-time errors (singularities, rank
    loss, solver failures, non-finite states, estimate divergence) truncate
    the log and attach a machine-readable failure record instead of raising.
    """
    sim = _Sim(sc)
    h = sc.timestep
    n_steps = int(round(sc.duration / h)) if sc.duration > 0.0 else 0
    rhs = sim.rhs_rigid if sc.cables == "rigid" else sim.rhs_elastic
    y = _initial_state(sim)

    n_rows = n_steps + 1
    log = {
        "t": np.zeros(n_rows), "r": np.zeros((n_rows, 3)),
        "r_d": np.zeros((n_rows, 3)), "quat": np.zeros((n_rows, 4)),
        "err_angle": np.zeros(n_rows), "rtil": np.zeros((n_rows, 3)),
        "tensions": np.zeros((n_rows, 8)), "torques": np.zeros((n_rows, 8)),
        "ahat": np.zeros((n_rows, 7)), "s": np.zeros((n_rows, 6)),
        "passivity_integral": np.zeros(n_rows), "v1": np.zeros(n_rows),
        "v2": np.zeros(n_rows), "clamp_count": np.zeros(n_rows),
        "fk_rms": np.zeros(n_rows),
    }

    def record(k, t, yk, out):
        log["t"][k] = t
        log["r"][k] = yk[_R]
        log["r_d"][k] = out["r_d"]
        log["quat"][k] = out["quat"]
        log["err_angle"][k] = out["err_angle"]
        log["rtil"][k] = out["rtil"]
        log["tensions"][k] = out["tensions"]
        log["torques"][k] = out["tau"]
        log["ahat"][k] = yk[_AH]
        log["s"][k] = out["s"]
        log["passivity_integral"][k] = out["pint"]
        log["v1"][k] = out["v1"]
        log["v2"][k] = out["v2"]
        log["clamp_count"][k] = out["clamp"]
        log["fk_rms"][k] = out["fk_rms"]

    failure = None
    rows = 0
    try:
        for k in range(n_steps):
            t = k * h
            k1, out = rhs(t, y, True)
            record(k, t, y, out)
            rows = k + 1
            k2, _ = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
            k3, _ = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
            k4, _ = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            y[_C] = att.project_to_so3(y[_C].reshape(3, 3)).ravel()
            if not np.isfinite(y).all():
                raise CdprError("state became non-finite")
            if np.abs(y[_AH]).max() > sc.ahat_bound:
                raise CdprError(
                    f"parameter estimate left its sanity bound "
                    f"({np.abs(y[_AH]).max():.3e} > {sc.ahat_bound:g})")
        t_end = n_steps * h
        _, out = rhs(t_end, y, True)
        record(n_steps, t_end, y, out)
        rows = n_rows
    except CdprError as exc:
        failure = {"error": type(exc).__name__, "message": str(exc),
                   "time": rows * h}

    return SimLog(
        t=log["t"][:rows], r=log["r"][:rows], r_d=log["r_d"][:rows],
        quat=log["quat"][:rows], err_angle=log["err_angle"][:rows],
        rtil=log["rtil"][:rows], tensions=log["tensions"][:rows],
        torques=log["torques"][:rows], ahat=log["ahat"][:rows],
        s=log["s"][:rows], passivity_integral=log["passivity_integral"][:rows],
        v1=log["v1"][:rows], v2=log["v2"][:rows],
        clamp_count=log["clamp_count"][:rows], fk_rms=log["fk_rms"][:rows],
        scenario=scenario_summary(sc), failure=failure)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _rms(x):
    return float(np.sqrt(np.mean(np.square(x)))) if x.size else None


def metrics(log: SimLog, split=2.0):
    """Run summary: RMS error angles split at ``split`` seconds (the split
    sample belongs to the transient window), position RMS, tension extremes,
    clamp events, monitor margins and the filtered-error tail fraction."""
    t = log.t
    if t.size == 0:     # failed before the first row could be recorded
        return {"duration": 0.0, "failed": True}
    transient = t <= split + 1.0e-9
    steady = ~transient
    pos_err = np.linalg.norm(log.rtil, axis=1)
    cmd_tensions = log.torques / log.scenario.get("winch_radius", 0.0254)

    s_sq = np.einsum("ij,ij->i", log.s, log.s)
    total_s = float(np.trapezoid(s_sq, t)) if t.size > 1 else 0.0
    tail = t >= t[-1] - split if t.size > 1 else np.zeros(0, dtype=bool)
    tail_s = (float(np.trapezoid(s_sq[tail], t[tail]))
              if t.size > 1 and tail.sum() > 1 else 0.0)

    dv2 = np.diff(log.v2)
    v2_rel = (float(np.max(dv2 / np.maximum(1.0, log.v2[:-1])))
              if dv2.size else 0.0)

    return {
        "duration": float(t[-1]) if t.size else 0.0,
        "rms_error_angle_transient_rad": _rms(log.err_angle[transient]),
        "rms_error_angle_steady_rad": _rms(log.err_angle[steady]),
        "rms_position_error_transient_m": _rms(pos_err[transient]),
        "rms_position_error_steady_m": _rms(pos_err[steady]),
        "terminal_error_angle_rad": float(log.err_angle[-1]),
        "terminal_position_error_m": float(pos_err[-1]),
        "max_tension_n": float(log.tensions.max()),
        "min_tension_n": float(log.tensions.min()),
        "max_commanded_tension_n": float(cmd_tensions.max()),
        "min_commanded_tension_n": float(cmd_tensions.min()),
        "clamp_events": int(log.clamp_count.sum()),
        "final_ahat": log.ahat[-1].tolist(),
        "passivity_margin": float(np.min(log.passivity_integral + log.v1[0])),
        "v2_max_relative_increase": v2_rel,
        "s_tail_fraction": tail_s / total_s if total_s > 0.0 else 0.0,
        "fk_residual_rms_m": _rms(log.fk_rms),
        "fk_residual_max_m": float(log.fk_rms.max()) if log.fk_rms.size else 0.0,
        "failed": log.failure is not None,
    }
