"""Self-check batteries: the library's algebraic invariants evaluated on
random samples.  Each check returns ``(name, passed, detail)``; the CLI
``check`` subcommand prints one line per entry."""

import numpy as np

from . import attitude as att
from . import control as ctl
from .allocation import AllocationConfig, allocate, pseudo_inverse
from .config import default_geometry, default_payload
from .control import DesiredState
from .dynamics import PayloadState, wrench_matrix


def _random_dcm(rng, max_angle=np.pi * 0.9):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return att.dcm_from_rotvec(axis * rng.uniform(0.0, max_angle))


def _random_desired(rng):
    c_da = _random_dcm(rng, 0.4)
    return DesiredState(
        r_d=rng.normal(scale=0.1, size=3),
        rd_dot=rng.normal(scale=0.3, size=3),
        rd_ddot=rng.normal(scale=1.0, size=3),
        c_da=c_da,
        omega_da=rng.normal(scale=0.5, size=3),
        omegad_dot=rng.normal(scale=1.0, size=3),
    )


def _nearby_state(rng, desired, max_err=1.0):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    c = att.dcm_from_rotvec(axis * rng.uniform(0.0, max_err)) @ desired.c_da
    return PayloadState(
        r=desired.r_d + rng.normal(scale=0.05, size=3),
        c=c,
        nu=rng.normal(scale=0.5, size=6),
    )


def check_identities(n=10_000, seed=0):
    """Projection and cross-operator identities on random samples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        v = rng.normal(size=3)
        u = rng.normal(size=(3, 3))
        lhs = 0.5 * np.trace(att.cross(v) @ u)
        rhs = -v @ att.uncross(att.antisym_project(u), tol=np.inf)
        worst = max(worst, abs(lhs - rhs))
        a = rng.normal(size=(3, 3))
        res = (att.cross(v) @ a + a.T @ att.cross(v)
               - att.cross((np.trace(a) * np.eye(3) - a) @ v))
        worst = max(worst, np.abs(res).max())
    return "identity-suite", worst < 1.0e-12, f"max residual {worst:.3e}"


def check_round_trips(n=2_000, seed=1):
    """Attitude conversion round trips away from singularities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        c = _random_dcm(rng)
        for kind in (att.ROTVEC, att.MRP):
            c2 = att.dcm_from(kind, att.from_dcm(kind, c))
            worst = max(worst, np.abs(c2 - c).max())
        c2 = att.dcm_from_quat(att.quat_from_dcm(c))
        worst = max(worst, np.abs(c2 - c).max())
        c = _random_dcm(rng, 1.2)   # keep pitch clear of the lock
        try:
            c2 = att.dcm_from_euler321(att.euler321_from_dcm(c))
            worst = max(worst, np.abs(c2 - c).max())
        except att.SingularityError:
            pass
    return "round-trips", worst < 1.0e-9, f"max round-trip error {worst:.3e}"


def check_error_factorizations(n=1_000, seed=2):
    """``nutil_r == P s`` for every parameterization on random pairs."""
    rng = np.random.default_rng(seed)
    lam = 10.0 * np.eye(6)
    worst = 0.0
    kinds = [att.EULER321, att.ROTVEC, att.MRP, "quat", "so3"]
    for _ in range(n):
        desired = _random_desired(rng)
        state = _nearby_state(rng, desired)
        for kind in kinds:
            eb, _ = ctl.controller_blocks(kind, state, desired, lam)
            worst = max(worst, np.abs(eb.nutil_r - eb.p_mat @ eb.s).max())
    return "error-factorizations", worst < 1.0e-9, f"max |nutil_r - P s| {worst:.3e}"


def check_regressor(n=1_000, seed=3):
    """Linearity ``W a == f_d(a)`` against a direct evaluation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    g = 9.81
    for _ in range(n):
        nu_r = rng.normal(size=6)
        nur_dot = rng.normal(size=6)
        w = rng.normal(size=3)
        a = rng.normal(size=7)
        ip = np.array([[a[1], a[4], a[5]], [a[4], a[2], a[6]], [a[5], a[6], a[3]]])
        f_direct = np.concatenate([
            a[0] * nur_dot[:3] + a[0] * g * np.array([0.0, 0.0, 1.0]),
            ip @ nur_dot[3:] + np.cross(w, ip @ nu_r[3:]),
        ])
        f_reg = ctl.regressor(nu_r, nur_dot, w, g) @ a
        worst = max(worst, np.abs(f_reg - f_direct).max())
    return "regressor-linearity", worst < 1.0e-10, f"max |W a - f_d| {worst:.3e}"


def check_allocation(n=200, seed=4):
    """Unclamped exactness and limit respect of the tension distribution."""
    rng = np.random.default_rng(seed)
    geom = default_geometry()
    payload = default_payload()
    cfg = AllocationConfig()
    worst = 0.0
    t_lo, t_hi = np.inf, -np.inf
    for _ in range(n):
        r = np.array([rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1),
                      rng.uniform(0.3, 0.6)])
        c = _random_dcm(rng, 0.3)
        pi = wrench_matrix(geom, r, c)
        u = pseudo_inverse(pi)
        worst = max(worst, np.abs(u @ pi - np.eye(6)).max())
        f = np.concatenate([rng.normal(scale=30.0, size=3)
                            + payload.mass * payload.gravity * np.array([0, 0, 1.0]),
                            rng.normal(scale=2.0, size=3)])
        res = allocate(pi, f, cfg, geom.winch_radius)
        t_lo = min(t_lo, res.tensions.min())
        t_hi = max(t_hi, res.tensions.max())
        if not res.clamped.any():
            worst = max(worst, np.abs(pi.T @ res.tau - f).max())
    ok = (worst < 1.0e-9 and t_lo >= cfg.tension_min - 1.0e-9
          and t_hi <= cfg.tension_max + 1.0e-9)
    return "allocation", ok, (f"max wrench residual {worst:.3e}, "
                              f"tensions in [{t_lo:.2f}, {t_hi:.2f}] N")


def check_spr_certificate():
    """SPR conditions of the feedback filter at the nominal gains."""
    filt = ctl.SprFilter(ctl.reference_gains().kd, 2.0 * np.pi)
    res = np.abs(filt.p_c * filt.omega_c - filt.kd.T).max()
    eigs = np.linalg.eigvalsh(filt.q_c)
    ok = res <= 1.0e-12 * np.abs(filt.kd).max() and np.all(eigs > 0.0)
    return "spr-certificate", ok, f"PcBc-Cc^T {res:.1e}, min eig Qc {eigs.min():.2f}"


ALL_CHECKS = (
    check_identities,
    check_round_trips,
    check_error_factorizations,
    check_regressor,
    check_allocation,
    check_spr_certificate,
)


def run_all(seed=0):
    """Run every battery; returns the list of (name, passed, detail)."""
    results = []
    for fn in ALL_CHECKS:
        try:
            if "seed" in fn.__code__.co_varnames:
                results.append(fn(seed=seed + len(results)))
            else:
                results.append(fn())
        except Exception as exc:  # a crash is a failure, not an abort
            results.append((fn.__name__, False, f"raised {exc!r}"))
    return results
