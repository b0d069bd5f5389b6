"""Finite-difference trajectory kinematics up to snap.

Derivatives are iterated central differences on a uniformly sampled 3-D
position series: each application maps x[i] -> (x[i+1] - x[i-1]) / (2 dt)
and trims one sample from each end, so order k output has length N - 2k.
An optional centred moving average can be applied first (off by default;
synthetic logs are noise-controlled, a window of 5 is a reasonable start
for human session logs).

Summaries are means of the Euclidean norms of each derivative series over
the landing stage, one scalar per order: speed, acceleration, jerk, snap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

MIN_POINTS_FOR_SNAP = 9  # 4th order needs N - 8 >= 1


@dataclass(frozen=True)
class Trajectory:
    dt: float
    points: np.ndarray  # (N, 3) metres

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must be an (N, d) array")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MotionSummary:
    mean_speed: float   # m/s
    mean_accel: float   # m/s^2
    mean_jerk: float    # m/s^3
    mean_snap: float    # m/s^4


def _smooth(points: np.ndarray, window: int) -> np.ndarray:
    if window % 2 != 1:
        raise ValueError("smoothing window must be odd")
    if window >= len(points):
        raise ValueError("smoothing window must be shorter than the series")
    if window == 1:
        return points
    kernel = np.full(window, 1.0 / window)
    return np.column_stack(
        [np.convolve(points[:, k], kernel, mode="valid") for k in range(points.shape[1])]
    )


def derivative_series(
    traj: Trajectory,
    order: int,
    smoothing_window: Optional[int] = None,
) -> np.ndarray:
    """Order-th time derivative samples over the valid interior."""
    if not 1 <= order <= 4:
        raise ValueError("order must be in 1..4")
    pts = traj.points
    if smoothing_window is not None:
        pts = _smooth(pts, smoothing_window)
    if len(pts) < 2 * order + 1:
        raise ValueError(
            f"need at least {2 * order + 1} samples for order {order}, have {len(pts)}"
        )
    two_dt = 2.0 * traj.dt
    for _ in range(order):
        pts = (pts[2:] - pts[:-2]) / two_dt
    return pts


def motion_summary(
    traj: Trajectory,
    smoothing_window: Optional[int] = None,
) -> MotionSummary:
    """Mean |velocity|, |acceleration|, |jerk|, |snap| over the trajectory."""
    if len(traj) < MIN_POINTS_FOR_SNAP:
        raise ValueError(f"need at least {MIN_POINTS_FOR_SNAP} samples, have {len(traj)}")
    means = []
    for order in range(1, 5):
        series = derivative_series(traj, order, smoothing_window)
        means.append(float(np.linalg.norm(series, axis=1).mean()))
    return MotionSummary(*means)


def mean_tracking_distance(
    drone_xy_series: Sequence,
    pad_xy_series: Sequence,
) -> float:
    """Mean horizontal drone-to-pad distance over aligned sample series."""
    drone = np.asarray(drone_xy_series, dtype=float)
    pad = np.asarray(pad_xy_series, dtype=float)
    if drone.shape != pad.shape:
        raise ValueError(f"series shapes differ: {drone.shape} vs {pad.shape}")
    if len(drone) == 0:
        raise ValueError("series are empty")
    return float(np.linalg.norm(drone - pad, axis=-1).mean())
