"""Desired payload trajectory with analytic derivatives.

The reference motion is a circular sweep,
``r_d = 0.1 [cos(0.6 pi t), sin(0.6 pi t), cos(0.6 pi t) + 4.65]`` m, with a
20-degree 3-2-1 Euler attitude weave
``q_da = 20 [cos(0.4 pi t - pi/2), cos(0.4 pi t - pi/4), cos(0.4 pi t)]`` deg.
The desired angular velocity and acceleration follow from the Euler-rate
mapping, resolved in the desired frame.
"""

import numpy as np

from . import attitude as att
from .control import DesiredState

_POS_FREQ = 0.6 * np.pi      # rad/s
_ATT_FREQ = 0.4 * np.pi      # rad/s
_POS_AMP = 0.1               # m
_ATT_AMP = np.deg2rad(20.0)  # rad
_PHASES = np.array([-np.pi / 2.0, -np.pi / 4.0, 0.0])


def desired_position(t):
    """Position, velocity, acceleration of the reference point."""
    a = _POS_FREQ * t
    c, s = np.cos(a), np.sin(a)
    r = _POS_AMP * np.array([c, s, c + 4.65])
    v = _POS_AMP * _POS_FREQ * np.array([-s, c, -s])
    acc = -_POS_AMP * _POS_FREQ ** 2 * np.array([c, s, c])
    return r, v, acc


def desired_euler(t):
    """3-2-1 Euler angles of the reference attitude with two derivatives."""
    a = _ATT_FREQ * t + _PHASES
    q = _ATT_AMP * np.cos(a)
    qdot = -_ATT_AMP * _ATT_FREQ * np.sin(a)
    qddot = -_ATT_AMP * _ATT_FREQ ** 2 * np.cos(a)
    return q, qdot, qddot


def desired_state(t):
    """Full :class:`DesiredState` sample at time ``t``."""
    r, v, acc = desired_position(t)
    q, qdot, qddot = desired_euler(t)
    c_da = att.dcm_from_euler321(q)
    s_map = att.mapping_matrix(att.EULER321, q)
    omega = s_map @ qdot
    omegadot = att.mapping_matrix_dot(att.EULER321, q, qdot) @ qdot + s_map @ qddot
    return DesiredState(r, v, acc, c_da, omega, omegadot)

