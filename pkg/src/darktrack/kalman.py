"""Constant-velocity Kalman filter over (cx, cy, aspect, height) box states.

State is 8-dimensional: the four box components plus their per-frame
velocities. Process and measurement noise scale with box height so behavior
is resolution-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure
from .geometry import BBox, bbox_to_state_vec, state_vec_to_bbox

STD_WEIGHT_POSITION = 1.0 / 20.0
STD_WEIGHT_VELOCITY = 1.0 / 160.0

_F = np.eye(8)
_F[:4, 4:] = np.eye(4)
_H = np.eye(4, 8)


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray = field(repr=False)
    covariance: np.ndarray = field(repr=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(8)
        cov = np.asarray(self.covariance, dtype=float).reshape(8, 8)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    def bbox(self) -> BBox:
        return state_vec_to_bbox(self.mean[:4])


def initiate(measurement: BBox) -> KalmanState:
    """State for a freshly observed box: measured position, zero velocity."""
    z = np.array(bbox_to_state_vec(measurement))
    mean = np.zeros(8)
    mean[:4] = z
    h = z[3]
    std = [
        2 * STD_WEIGHT_POSITION * h,
        2 * STD_WEIGHT_POSITION * h,
        1e-2,
        2 * STD_WEIGHT_POSITION * h,
        10 * STD_WEIGHT_VELOCITY * h,
        10 * STD_WEIGHT_VELOCITY * h,
        1e-5,
        10 * STD_WEIGHT_VELOCITY * h,
    ]
    return KalmanState(mean, np.diag(np.square(std)))


def predict(s: KalmanState) -> KalmanState:
    """Advance one frame under the constant-velocity model."""
    h = s.mean[3]
    std = [
        STD_WEIGHT_POSITION * h,
        STD_WEIGHT_POSITION * h,
        1e-2,
        STD_WEIGHT_POSITION * h,
        STD_WEIGHT_VELOCITY * h,
        STD_WEIGHT_VELOCITY * h,
        1e-5,
        STD_WEIGHT_VELOCITY * h,
    ]
    q = np.diag(np.square(std))
    mean = _F @ s.mean
    cov = _F @ s.covariance @ _F.T + q
    cov = 0.5 * (cov + cov.T)
    return KalmanState(mean, cov)


def update(s: KalmanState, z: BBox, r: np.ndarray | None = None) -> KalmanState:
    """Standard Kalman correction with a box measurement.

    The measurement observes the first four state components. ``r`` overrides
    the default height-scaled measurement covariance (used by tests probing
    limiting behavior).
    """
    if r is None:
        h = s.mean[3]
        std = [
            STD_WEIGHT_POSITION * h,
            STD_WEIGHT_POSITION * h,
            1e-1,
            STD_WEIGHT_POSITION * h,
        ]
        r = np.diag(np.square(std))
    zv = np.array(bbox_to_state_vec(z))
    innovation = zv - _H @ s.mean
    innovation_cov = _H @ s.covariance @ _H.T + r
    try:
        gain = np.linalg.solve(innovation_cov.T, (_H @ s.covariance)).T
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("innovation covariance not invertible") from exc
    if not np.all(np.isfinite(gain)):
        raise NumericalFailure("innovation covariance not invertible")
    mean = s.mean + gain @ innovation
    cov = s.covariance - gain @ innovation_cov @ gain.T
    cov = 0.5 * (cov + cov.T)
    return KalmanState(mean, cov)
