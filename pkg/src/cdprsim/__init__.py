"""Adaptive passivity-based pose tracking for an 8-cable, 6-DOF
cable-driven parallel robot: attitude kinematics, rigid/elastic plant
models, the multi-parameterization controller, tension allocation and a
deterministic fixed-step simulation harness."""

from .allocation import AllocationConfig, AllocationResult, allocate, pseudo_inverse
from .config import Scenario, default_geometry, default_payload, load_scenario
from .control import (ControllerGains, DesiredState, ErrorBlock, SprFilter,
                      reference_gains)
from .dynamics import CdprGeometry, PayloadParams, PayloadState
from .sim import SimLog, metrics, run_scenario
from .sweep import run_and_save, sweep

__all__ = [
    "AllocationConfig", "AllocationResult", "allocate", "pseudo_inverse",
    "Scenario", "default_geometry", "default_payload", "load_scenario",
    "ControllerGains", "DesiredState", "ErrorBlock", "SprFilter",
    "reference_gains", "CdprGeometry", "PayloadParams", "PayloadState",
    "SimLog", "metrics", "run_scenario", "run_and_save", "sweep",
]

__version__ = "0.1.0"
