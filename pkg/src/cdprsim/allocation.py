"""Tension distribution: 6-DOF wrench to 8 winch torques.

Implements the improved closed-form solution
``tau = tau_pt + U^T (f - Pi^T tau_pt)`` around a pretension torque
``tau_pt = diag(r_i) t_pt``, with limit clamping: a tension outside
``[t_min, t_max]`` is pinned at the violated limit, its row removed, and the
reduced system re-solved for the residual wrench.  When multiple cables
violate simultaneously the worst violator is clamped first, one per
iteration, and clamped cables stay pinned for the remainder of the step.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AllocationError, RankDeficiencyError
from .fastpath import alloc_kernel


@dataclass(frozen=True)
class AllocationConfig:
    """Pretension and tension limits (N) plus the clamp-iteration cap."""

    pretension: float = 59.0
    tension_min: float = 7.9
    tension_max: float = 3937.0
    max_clamp_iterations: int = 8

    def __post_init__(self):
        if not self.tension_min <= self.pretension <= self.tension_max:
            raise ValueError("pretension must lie within the tension limits")


@dataclass(frozen=True)
class AllocationResult:
    tau: np.ndarray        # (8,) winch torques, N m
    tensions: np.ndarray   # (8,) cable tensions, N
    clamped: np.ndarray    # (8,) bool, pinned at a limit
    iterations: int


def pseudo_inverse(pi, rcond=1.0e-10):
    """Left pseudo-inverse ``U`` with ``U Pi = 1`` via a reduced QR
    factorization; raises :class:`RankDeficiencyError` below rank 6."""
    q, r = np.linalg.qr(pi)
    diag = np.abs(np.diag(r))
    if diag.min() <= rcond * max(diag.max(), 1.0e-300):
        raise RankDeficiencyError(
            f"wrench matrix is rank deficient (pivot ratio "
            f"{diag.min() / diag.max():.3e})")
    return np.linalg.solve(r, q.T)


def allocate(pi, f, cfg, radii):
    """Distribute the wrench ``f`` over the cables.

    Returns an :class:`AllocationResult` whose torques reproduce ``f``
    exactly (``Pi^T tau = f``) whenever no limit is active; otherwise the
    clamped cables sit at their limits and the remaining ones reproduce the
    residual wrench.  Raises :class:`AllocationError` when the reduced
    system loses rank or violations persist at the iteration cap.
    """
    tau, tensions, clamped, iterations, status, worst = alloc_kernel(
        np.ascontiguousarray(pi, dtype=float),
        np.ascontiguousarray(f, dtype=float),
        np.ascontiguousarray(radii, dtype=float),
        cfg.pretension, cfg.tension_min, cfg.tension_max,
        cfg.max_clamp_iterations)
    if status == 1:
        raise AllocationError(
            "fewer than 6 unclamped cables left, wrench under-determined")
    if status == 2:
        raise AllocationError(
            f"reduced wrench matrix rank deficient with "
            f"{int(clamped.sum())} cable(s) clamped")
    if status == 3:
        raise AllocationError(
            f"tension limits infeasible (worst violation {worst:.3f} N "
            f"after {int(iterations)} clamp(s))",
            worst_violation=float(worst))
    return AllocationResult(tau, tensions, clamped, int(iterations))
