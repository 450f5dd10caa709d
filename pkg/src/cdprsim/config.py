"""Scenario configuration: defaults for the desk-scale 8-cable robot and
YAML round-tripping.

The default numbers describe the benchmark plant: a 6.75 kg payload on
eight aramid cables in a crossed layout (four high winches, four at floor
level), 25.4 mm winches, 59 N pretension with 7.9/3937 N tension limits.
"""

import importlib.resources
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .allocation import AllocationConfig
from .control import CONTROLLER_KINDS, ControllerGains
from .dynamics import CdprGeometry, PayloadParams

CABLE_MODES = ("rigid", "elastic")

# Winch drums (inertial frame, m): four up high, four at floor level.
_WINCHES = [
    [0.71, 0.38, 0.93],
    [-0.71, 0.38, 0.93],
    [-0.71, -0.38, 0.93],
    [0.71, -0.38, 0.93],
    [-0.71, -0.38, 0.0],
    [0.71, 0.38, 0.0],
    [-0.71, 0.38, 0.0],
    [0.71, -0.38, 0.0],
]
# Attachment points (payload frame, m); crossed with the winch layout.
_ATTACHMENTS = [
    [0.03, 0.075, -0.0375],
    [-0.03, 0.075, -0.0375],
    [-0.03, -0.075, -0.0375],
    [0.03, -0.075, -0.0375],
    [-0.015, -0.075, 0.0375],
    [0.015, 0.075, 0.0375],
    [-0.015, 0.075, 0.0375],
    [0.015, -0.075, 0.0375],
]

ELASTIC_MODULUS = 127.0e9    # N/m^2, aramid
CABLE_RADIUS = 1.0e-3        # m


def default_geometry():
    return CdprGeometry(
        winch_positions=np.array(_WINCHES),
        attachment_points=np.array(_ATTACHMENTS),
        winch_radius=np.full(8, 0.0254),
        winch_inertia=np.full(8, 0.025e-3),
        cable_density=4.6e-3,
        axial_stiffness=ELASTIC_MODULUS * np.pi * CABLE_RADIUS ** 2,
        tension_min=7.9,
        tension_max=3937.0,
    )


def default_payload():
    return PayloadParams(
        mass=6.75,
        inertia=np.diag([15.8e-3, 5.2e-3, 14.7e-3]),
        gravity=9.81,
    )


@dataclass(frozen=True)
class Scenario:
    """One closed-loop simulation: plant, controller choice and options."""

    geometry: CdprGeometry = field(default_factory=default_geometry)
    payload: PayloadParams = field(default_factory=default_payload)
    allocation: AllocationConfig = field(default_factory=AllocationConfig)
    controller: str = "so3"
    cables: str = "rigid"
    lam_gain: float = 10.0                    # Lambda = lam_gain * I6 (rigid)
    upsilon_gain: float = 5.0                 # Upsilon = upsilon_gain * I7
    kd_linear: float = 125.0                  # rigid-mode Kd force block
    kd_angular: float = 50.0 / 3.0            # rigid-mode Kd torque block
    omega_c: float = 2.0 * np.pi              # SPR filter cutoff, rad/s
    dt: float | None = None                   # None: 1e-3 rigid / 1e-4 elastic
    duration: float = 10.0
    initial_position: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 0.465]))
    initial_euler: np.ndarray = field(
        default_factory=lambda: np.deg2rad([-15.0, -15.0, -15.0]))
    initial_velocity: np.ndarray = field(default_factory=lambda: np.zeros(6))
    seed: int = 0
    mass_estimate_factor: float = 0.8         # ahat(0) mass fraction
    quat_kd_factor: float = 2.0
    mrp_att_kd_factor: float = 16.0
    damping_ratio: float = 0.005              # elastic: fraction of critical
    include_cable_mass: bool = False
    elastic_equilibrium_init: bool = False    # pre-strain cables at t = 0
    ahat_bound: float = 1.0e3                 # sanity bound, aborts beyond

    def __post_init__(self):
        if self.controller not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller {self.controller!r}; "
                             f"choose from {CONTROLLER_KINDS}")
        if self.cables not in CABLE_MODES:
            raise ValueError(f"unknown cable mode {self.cables!r}")
        if self.duration < 0.0:
            raise ValueError("duration must be non-negative")
        ts = self.timestep
        if ts <= 0.0 or (self.duration > 0.0 and self.duration < ts):
            raise ValueError("need dt > 0 and duration >= dt")
        for name in ("initial_position", "initial_euler", "initial_velocity"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=float))

    @property
    def timestep(self):
        # defaults chosen for RK4 stability: the adaptation transient makes
        # the rigid loop stiff (pole ~ ||ahat_err|| * lam / min eig I_p), and
        # the elastic winch mode sits near 3.8e3 rad/s
        if self.dt is not None:
            return float(self.dt)
        return 1.0e-4 if self.cables == "elastic" else 2.0e-4

    def effective_gains(self):
        """Gains after the elastic-mode reductions (Kd/5, Lambda/2) and the
        per-parameterization Kd normalization factors."""
        lam = self.lam_gain * np.eye(6)
        kd = np.diag([self.kd_linear] * 3 + [self.kd_angular] * 3)
        if self.cables == "elastic":
            kd = kd / 5.0
            lam = lam / 2.0
        if self.controller == "quat":
            kd = self.quat_kd_factor * kd
        elif self.controller == "mrp":
            kd[3:, 3:] *= self.mrp_att_kd_factor
        return ControllerGains(lam=lam, upsilon=self.upsilon_gain * np.eye(7),
                               kd=kd, omega_c=self.omega_c)

    def ahat0(self):
        a0 = np.zeros(7)
        a0[0] = self.mass_estimate_factor * self.payload.mass
        return a0

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


# ---------------------------------------------------------------------------
# YAML config file
# ---------------------------------------------------------------------------

def scenario_from_config(cfg):
    """Build a :class:`Scenario` from a parsed config mapping."""
    geo = cfg.get("geometry", {})
    ea = geo.get("axial_stiffness")
    if ea is None:
        ea = (float(geo.get("elastic_modulus", ELASTIC_MODULUS))
              * np.pi * float(geo.get("cable_radius", CABLE_RADIUS)) ** 2)
    lim = cfg.get("allocation", {})
    geometry = CdprGeometry(
        winch_positions=np.array(geo.get("winch_positions", _WINCHES)),
        attachment_points=np.array(geo.get("attachment_points", _ATTACHMENTS)),
        winch_radius=np.full(8, float(geo.get("winch_radius", 0.0254))),
        winch_inertia=np.full(8, float(geo.get("winch_inertia", 0.025e-3))),
        cable_density=float(geo.get("cable_density", 4.6e-3)),
        axial_stiffness=float(ea),
        tension_min=float(lim.get("tension_min", 7.9)),
        tension_max=float(lim.get("tension_max", 3937.0)),
    )
    pay = cfg.get("payload", {})
    inertia = pay.get("inertia")
    if inertia is None:
        inertia = np.diag(pay.get("inertia_diag", [15.8e-3, 5.2e-3, 14.7e-3]))
    payload = PayloadParams(
        mass=float(pay.get("mass", 6.75)),
        inertia=np.array(inertia, dtype=float),
        gravity=float(pay.get("gravity", 9.81)),
    )
    allocation = AllocationConfig(
        pretension=float(lim.get("pretension", 59.0)),
        tension_min=geometry.tension_min,
        tension_max=geometry.tension_max,
        max_clamp_iterations=int(lim.get("max_clamp_iterations", 8)),
    )
    sc = cfg.get("scenario", {})
    ctl = cfg.get("controller", {})
    gns = cfg.get("gains", {})
    ela = cfg.get("elastic", {})
    init = cfg.get("initial", {})
    euler = init.get("euler_deg")
    euler = (np.deg2rad(np.array(euler, dtype=float)) if euler is not None
             else np.deg2rad([-15.0, -15.0, -15.0]))
    return Scenario(
        geometry=geometry,
        payload=payload,
        allocation=allocation,
        controller=str(sc.get("controller", "so3")),
        cables=str(sc.get("cables", "rigid")),
        lam_gain=float(gns.get("lambda", 10.0)),
        upsilon_gain=float(gns.get("upsilon", 5.0)),
        kd_linear=float(gns.get("kd_linear", 125.0)),
        kd_angular=float(gns.get("kd_angular", 50.0 / 3.0)),
        omega_c=float(gns.get("omega_c", 2.0 * np.pi)),
        dt=sc.get("dt"),
        duration=float(sc.get("duration", 10.0)),
        initial_position=np.array(init.get("position", [0.0, 0.0, 0.465]),
                                  dtype=float),
        initial_euler=euler,
        initial_velocity=np.array(init.get("velocity", [0.0] * 6), dtype=float),
        seed=int(sc.get("seed", 0)),
        mass_estimate_factor=float(ctl.get("mass_estimate_factor", 0.8)),
        quat_kd_factor=float(ctl.get("quat_kd_factor", 2.0)),
        mrp_att_kd_factor=float(ctl.get("mrp_att_kd_factor", 16.0)),
        damping_ratio=float(ela.get("damping_ratio", 0.005)),
        include_cable_mass=bool(ela.get("include_cable_mass", False)),
        elastic_equilibrium_init=bool(ela.get("equilibrium_init", False)),
    )


def load_scenario(path=None):
    """Scenario from a YAML file; with no path, the packaged defaults."""
    if path is None:
        ref = importlib.resources.files("cdprsim.data") / "default_scenario.yaml"
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    cfg = yaml.safe_load(text) or {}
    return scenario_from_config(cfg)


def scenario_summary(sc):
    """JSON-friendly echo of the scenario knobs (for run summaries)."""
    return {
        "controller": sc.controller,
        "cables": sc.cables,
        "dt": sc.timestep,
        "duration": sc.duration,
        "seed": sc.seed,
        "pretension": sc.allocation.pretension,
        "tension_limits": [sc.allocation.tension_min, sc.allocation.tension_max],
        "payload_mass": sc.payload.mass,
        "winch_radius": float(sc.geometry.winch_radius[0]),
        "mass_estimate_factor": sc.mass_estimate_factor,
        "initial_position": sc.initial_position.tolist(),
        "initial_euler_deg": np.rad2deg(sc.initial_euler).tolist(),
    }
