"""Optical channel from a drone's belly LED to one recessed photo-transistor.

The sensing model has two stages:

  1. ``illuminance`` -- a downward-facing point source with an emission cone,
     seen by a sensor with an acceptance cone (the recessed 3 mm bore over a
     10 mm channel acts as a hard light shield).  Inside both cones the
     illuminance falls off as cos(angle)/D^2; outside either cone only the
     ambient floor remains.
  2. ``photocurrent`` -- linear in illuminance up to a saturation current,
     reported as a fraction of full drive in [0, 1].

All positions are metres in a shared frame; angles are radians.  Functions
are pure and safe to call from any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Acceptance cone of the recessed sensor: 3 mm bore opening over a 10 mm
# deep channel.  Emission cone is not dictated by the hardware; 60 deg is a
# typical wide-angle LED and is configurable.
ACCEPT_HALF_ANGLE_DEFAULT = math.atan(0.003 / 0.010)
EMIT_HALF_ANGLE_DEFAULT = math.radians(60.0)

_DOWN = (0.0, 0.0, -1.0)  # drones fly level; LED ring faces straight down


@dataclass(frozen=True)
class PhotometricParams:
    """Optical and electrical constants of one LED-to-sensor channel.

    ``source_intensity`` has units of illuminance x m^2 so that the on-axis
    illuminance at distance D is exactly source_intensity / D^2.  The
    photocurrent is responsivity x illuminance, clamped to
    saturation_current, and reported as a fraction of saturation.
    """

    source_intensity: float = 2.0
    emit_half_angle: float = EMIT_HALF_ANGLE_DEFAULT
    accept_half_angle: float = ACCEPT_HALF_ANGLE_DEFAULT
    ambient_floor: float = 0.0
    saturation_current: float = 100.0
    responsivity: float = 1.0
    # cached cone-gating cosines; illuminance() runs per sensor per step
    cos_emit_lim: float = field(init=False, repr=False, compare=False)
    cos_accept_lim: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.source_intensity <= 0:
            raise ValueError("source_intensity must be > 0")
        if not 0.0 < self.emit_half_angle < math.pi / 2:
            raise ValueError("emit_half_angle must be in (0, pi/2)")
        if not 0.0 < self.accept_half_angle < math.pi / 2:
            raise ValueError("accept_half_angle must be in (0, pi/2)")
        if self.ambient_floor < 0:
            raise ValueError("ambient_floor must be >= 0")
        if self.saturation_current <= 0:
            raise ValueError("saturation_current must be > 0")
        if self.responsivity <= 0:
            raise ValueError("responsivity must be > 0")
        object.__setattr__(self, "cos_emit_lim", math.cos(self.emit_half_angle))
        object.__setattr__(self, "cos_accept_lim", math.cos(self.accept_half_angle))


@dataclass(frozen=True)
class SensorPose:
    """World position of a photo-transistor and its unit sensing axis."""

    position: tuple[float, float, float]
    normal: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        nx, ny, nz = self.normal
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"sensor normal must be unit length, got |n|={norm!r}")


def illuminance(
    led_position: tuple[float, float, float],
    led_axis: tuple[float, float, float],
    sensor: SensorPose,
    p: PhotometricParams,
) -> float:
    """Illuminance at the sensor from one LED source.

    Returns ambient_floor + source_intensity * cos(theta_emit) / D^2 when the
    sensor sits inside the LED's emission cone AND the LED sits inside the
    sensor's acceptance cone; plain ambient_floor otherwise.  Raises
    ValueError for a coincident source and sensor (D = 0).
    """
    sx, sy, sz = sensor.position
    dx = sx - led_position[0]
    dy = sy - led_position[1]
    dz = sz - led_position[2]
    d2 = dx * dx + dy * dy + dz * dz
    if d2 == 0.0:
        raise ValueError("LED and sensor are coincident (D = 0)")
    d = math.sqrt(d2)

    # cos of angle between led_axis and the LED->sensor direction
    ax, ay, az = led_axis
    cos_emit = (ax * dx + ay * dy + az * dz) / d
    # cos of angle between sensor normal and the sensor->LED direction
    nx, ny, nz = sensor.normal
    cos_accept = -(nx * dx + ny * dy + nz * dz) / d

    if cos_emit < p.cos_emit_lim or cos_accept < p.cos_accept_lim:
        return p.ambient_floor
    return p.ambient_floor + p.source_intensity * cos_emit / d2


def photocurrent(e: float, p: PhotometricParams) -> float:
    """Saturating linear photocurrent as a fraction of full drive in [0, 1]."""
    if e < 0:
        raise ValueError("illuminance must be >= 0")
    i = p.responsivity * e
    if i >= p.saturation_current:
        return 1.0
    return i / p.saturation_current
