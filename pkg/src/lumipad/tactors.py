"""The seven-unit sensor-tactor pad.

Geometry: a 160 mm plate carrying seven sensor-tactor units, six on a 40 mm
ring spaced 60 degrees apart (unit 0 on the pad +X axis) plus one at the
centre (unit 6).  Each unit pairs a recessed photo-transistor with a
vibration motor; the vibration carrier is fixed at 150 Hz and the amplitude
fraction in [0, 1] is the information channel.

Per step the pad computes raw target amplitudes from the photometric model
(light from every LED-on drone sums at each sensor before saturation), then
relaxes the actual amplitudes toward the targets through a first-order lag
modelling the actuator response time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .photometry import PhotometricParams, SensorPose, illuminance, photocurrent

UNIT_COUNT = 7
CENTER_UNIT = 6
CARRIER_HZ = 150.0  # metadata only; amplitude is the signal

ACTIVATION_EPSILON = 1e-6  # below this total amplitude the pad reports "no signal"

_LED_AXIS = (0.0, 0.0, -1.0)


def _default_unit_positions(ring_radius: float) -> tuple[tuple[float, float], ...]:
    ring = tuple(
        (ring_radius * math.cos(math.radians(60.0 * i)),
         ring_radius * math.sin(math.radians(60.0 * i)))
        for i in range(6)
    )
    return ring + ((0.0, 0.0),)


@dataclass(frozen=True)
class PadGeometry:
    """Fixed plate and unit layout, pad frame, metres."""

    plate_radius: float = 0.080
    ring_radius: float = 0.040
    unit_positions: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.unit_positions:
            object.__setattr__(
                self, "unit_positions", _default_unit_positions(self.ring_radius)
            )
        pts = self.unit_positions
        if len(pts) != UNIT_COUNT:
            raise ValueError(f"expected {UNIT_COUNT} unit positions, got {len(pts)}")
        cx, cy = pts[CENTER_UNIT]
        if cx != 0.0 or cy != 0.0:
            raise ValueError("unit 6 must sit at the pad origin")
        for i in range(6):
            x, y = pts[i]
            r = math.hypot(x, y)
            if abs(r - self.ring_radius) > 1e-12:
                raise ValueError(f"unit {i} is off the ring: r={r!r}")
        min_gap = min(
            math.dist(pts[i], pts[j])
            for i in range(UNIT_COUNT)
            for j in range(i + 1, UNIT_COUNT)
        )
        if min_gap < 0.02:
            raise ValueError(f"unit spacing {min_gap!r} m is below the 2 cm minimum")


@dataclass(frozen=True)
class TactileFrame:
    """Seven vibration amplitude fractions at a timestamp (carrier 150 Hz)."""

    t: float
    amplitudes: tuple[float, ...]

    def __post_init__(self):
        if len(self.amplitudes) != UNIT_COUNT:
            raise ValueError(f"expected {UNIT_COUNT} amplitudes")
        for a in self.amplitudes:
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"amplitude {a!r} outside [0, 1]")

    def total_activation(self) -> float:
        return sum(self.amplitudes)


def zero_frame(t: float = 0.0) -> TactileFrame:
    return TactileFrame(t, (0.0,) * UNIT_COUNT)


@dataclass(frozen=True)
class ActuatorParams:
    lag_time_constant: float = 0.020  # LRA response time, seconds

    def __post_init__(self):
        if self.lag_time_constant < 0:
            raise ValueError("lag_time_constant must be >= 0")


def pad_rotation(tilt: tuple[float, float]) -> tuple[tuple[float, float, float], ...]:
    """Rows of Rx(roll) @ Ry(pitch) for a plate tilted by (roll, pitch)."""
    roll, pitch = tilt
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    return (
        (cp, 0.0, sp),
        (sr * sp, cr, -sr * cp),
        (-cr * sp, sr, cr * cp),
    )


def sensor_poses(
    pad_center: tuple[float, float, float],
    tilt: tuple[float, float],
    geometry: PadGeometry,
) -> tuple[SensorPose, ...]:
    """World poses of the seven sensors; tilt rotates the whole plate rigidly."""
    cx, cy, cz = pad_center
    if tilt[0] == 0.0 and tilt[1] == 0.0:
        normal = (0.0, 0.0, 1.0)
        return tuple(
            SensorPose((cx + px, cy + py, cz), normal)
            for px, py in geometry.unit_positions
        )
    r = pad_rotation(tilt)
    normal = (r[0][2], r[1][2], r[2][2])
    return tuple(
        SensorPose(
            (cx + r[0][0] * px + r[0][1] * py,
             cy + r[1][0] * px + r[1][1] * py,
             cz + r[2][0] * px + r[2][1] * py),
            normal,
        )
        for px, py in geometry.unit_positions
    )


def raw_frame(
    drones: Sequence,
    pad_center: tuple[float, float, float],
    tilt: tuple[float, float],
    geometry: PadGeometry,
    photo: PhotometricParams,
) -> tuple[float, ...]:
    """Target amplitudes: photocurrent of the summed illuminance per unit.

    ``drones`` is any sequence of objects exposing ``position`` (3-tuple) and
    ``led_on``.  Light from multiple LED-on drones superposes at each sensor
    before the saturation clamp.
    """
    sources = [d.position for d in drones if d.led_on]
    if not sources:
        return (0.0,) * UNIT_COUNT
    poses = sensor_poses(pad_center, tilt, geometry)
    return tuple(
        photocurrent(
            sum(illuminance(src, _LED_AXIS, pose, photo) for src in sources), photo
        )
        for pose in poses
    )


def step_frame(
    prev: TactileFrame,
    target: Sequence[float],
    dt: float,
    a: ActuatorParams,
) -> TactileFrame:
    """First-order low-pass of the amplitudes toward ``target`` over ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    tau = a.lag_time_constant
    if tau == 0.0:
        amps = tuple(min(1.0, max(0.0, x)) for x in target)
    else:
        alpha = 1.0 - math.exp(-dt / tau)
        amps = tuple(
            min(1.0, max(0.0, amp + (tgt - amp) * alpha))
            for amp, tgt in zip(prev.amplitudes, target)
        )
    return TactileFrame(prev.t + dt, amps)


def activation_centroid(
    frame: TactileFrame,
    geometry: PadGeometry,
    epsilon: float = ACTIVATION_EPSILON,
) -> Optional[tuple[float, float]]:
    """Amplitude-weighted mean of the unit positions, pad frame.

    Returns None when the total activation is at or below ``epsilon`` --
    the "no signal" answer that sends a tactile searcher into its random
    walk.  Scale-invariant in the amplitudes, always inside the unit hull.
    """
    total = sum(frame.amplitudes)
    if total <= epsilon:
        return None
    x = 0.0
    y = 0.0
    for a, (px, py) in zip(frame.amplitudes, geometry.unit_positions):
        x += a * px
        y += a * py
    return (x / total, y / total)
