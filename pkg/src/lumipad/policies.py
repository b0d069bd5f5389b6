"""Synthetic hand controllers for the three feedback conditions.

These stand in for the human operator: a visual pursuit controller with
perception noise and a configurable depth bias toward the operator, a
tactile gradient-follower that steers the pad toward the activation
centroid (with a small exploratory dither and a random-walk search mode),
and a blend that hands over from vision to touch as the tactile signal
grows.  A fixed-dwell attention model supplies the two-drone head
trajectory.

Parameters are tuned for plausible closed-loop behaviour, not as claims
about any particular human.  All randomness flows from the trial RNG so
trials replay bit-identically.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .tactors import PadGeometry, TactileFrame, activation_centroid

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PadObservation:
    """What one pad's controller may see on one tick.

    Fields are masked before the policy is called: ``drone_xy`` is None
    under tactile-only feedback, ``frame`` is None under visual-only.
    ``attended`` is False when the operator's attention is on the other
    drone (two-drone trials).
    """

    t: float
    pad_xy: tuple[float, float]
    drone_xy: Optional[tuple[float, float]]
    attended: bool
    operator_xy: tuple[float, float]
    frame: Optional[TactileFrame]
    geometry: PadGeometry
    landed: bool = False


@dataclass(frozen=True)
class VisualPolicyParams:
    position_noise_sd: float = 0.01   # m, per-axis perception noise
    operator_bias_gain: float = 0.1   # pulls the percept toward the operator
    pursuit_gain: float = 2.0         # 1/s
    attention_dwell: float = 0.8      # s between attention switches (two drones)
    unattended_estimate_freeze: bool = True

    def __post_init__(self):
        if self.position_noise_sd < 0 or self.pursuit_gain < 0 or self.attention_dwell < 0:
            raise ValueError("visual policy parameters must be non-negative")
        if not 0.0 <= self.operator_bias_gain <= 1.0:
            raise ValueError("operator_bias_gain must be in [0, 1]")


@dataclass(frozen=True)
class TactilePolicyParams:
    centroid_gain: float = 3.0        # 1/s toward the activation centroid
    dither_amplitude: float = 0.015   # m, exploratory circle radius
    dither_frequency: float = 1.0     # Hz
    search_speed: float = 0.05        # m/s random walk when no signal

    def __post_init__(self):
        if min(self.centroid_gain, self.dither_amplitude, self.dither_frequency, self.search_speed) < 0:
            raise ValueError("tactile policy parameters must be non-negative")


@dataclass(frozen=True)
class CombinedPolicyParams:
    visual: VisualPolicyParams = field(default_factory=VisualPolicyParams)
    tactile: TactilePolicyParams = field(default_factory=TactilePolicyParams)
    handover_activation: float = 0.5  # total amplitude where touch takes over

    def __post_init__(self):
        if self.handover_activation <= 0:
            raise ValueError("handover_activation must be > 0")


def visual_step(
    true_drone_xy: tuple[float, float],
    operator_xy: tuple[float, float],
    pad_xy: tuple[float, float],
    params: VisualPolicyParams,
    rng: random.Random,
    dt: float,
) -> tuple[tuple[float, float], tuple[float, float]]:
    """One visual pursuit step for an attended drone.

    Returns (velocity command, perceived position).  The percept is the true
    position plus per-axis gaussian noise plus the operator-ward bias; the
    command chases the percept with the pursuit gain.
    """
    tx, ty = true_drone_xy
    ox, oy = operator_xy
    px = tx + rng.gauss(0.0, params.position_noise_sd) + params.operator_bias_gain * (ox - tx)
    py = ty + rng.gauss(0.0, params.position_noise_sd) + params.operator_bias_gain * (oy - ty)
    cmd = (params.pursuit_gain * (px - pad_xy[0]), params.pursuit_gain * (py - pad_xy[1]))
    return cmd, (px, py)


def tactile_step(
    frame: TactileFrame,
    geometry: PadGeometry,
    phase: float,
    params: TactilePolicyParams,
    rng: random.Random,
    dt: float,
    search_heading: float,
) -> tuple[tuple[float, float], float, float]:
    """One tactile gradient-following step.

    With a centroid available the command is centroid_gain * centroid plus a
    circular dither whose size shrinks as the total activation approaches 1;
    with no signal the pad random-walks at search_speed.  Returns
    (command, new oscillator phase, new search heading).
    """
    centroid = activation_centroid(frame, geometry)
    if centroid is None:
        search_heading += rng.gauss(0.0, math.sqrt(dt) * TWO_PI * 0.5)
        cmd = (
            params.search_speed * math.cos(search_heading),
            params.search_speed * math.sin(search_heading),
        )
        return cmd, phase, search_heading
    total = frame.total_activation()
    scale = min(1.0, max(0.0, 1.0 - total))
    omega = TWO_PI * params.dither_frequency
    phase += omega * dt
    # velocity of a circle of radius dither_amplitude traversed at dither_frequency
    dither_speed = scale * params.dither_amplitude * omega
    cmd = (
        params.centroid_gain * centroid[0] - dither_speed * math.sin(phase),
        params.centroid_gain * centroid[1] + dither_speed * math.cos(phase),
    )
    return cmd, phase, search_heading


def combined_step(
    visual_cmd: tuple[float, float],
    tactile_cmd: tuple[float, float],
    total_activation: float,
    params: CombinedPolicyParams,
) -> tuple[float, float]:
    """Blend vision and touch: touch weight ramps with total activation."""
    w = min(1.0, max(0.0, total_activation / params.handover_activation))
    return (
        (1.0 - w) * visual_cmd[0] + w * tactile_cmd[0],
        (1.0 - w) * visual_cmd[1] + w * tactile_cmd[1],
    )


class VisualPolicy:
    """Pursuit-by-sight controller for one pad (condition V)."""

    def __init__(self, params: Optional[VisualPolicyParams] = None):
        self.params = params or VisualPolicyParams()
        self._perceived: Optional[tuple[float, float]] = None

    def reset(self, rng: random.Random) -> None:
        self._perceived = None

    def command(self, obs: PadObservation, rng: random.Random, dt: float) -> tuple[float, float]:
        p = self.params
        if obs.drone_xy is not None and (obs.attended or not p.unattended_estimate_freeze):
            cmd, perceived = visual_step(obs.drone_xy, obs.operator_xy, obs.pad_xy, p, rng, dt)
            self._perceived = perceived
            return cmd
        if self._perceived is None:
            return (0.0, 0.0)  # nothing seen yet: hold still
        return (
            p.pursuit_gain * (self._perceived[0] - obs.pad_xy[0]),
            p.pursuit_gain * (self._perceived[1] - obs.pad_xy[1]),
        )


class TactilePolicy:
    """Gradient-of-vibration follower for one pad (condition T)."""

    def __init__(self, params: Optional[TactilePolicyParams] = None):
        self.params = params or TactilePolicyParams()
        self._phase = 0.0
        self._heading = 0.0
        self._heading_init = False

    def reset(self, rng: random.Random) -> None:
        self._phase = 0.0
        self._heading_init = False

    def command(self, obs: PadObservation, rng: random.Random, dt: float) -> tuple[float, float]:
        if obs.frame is None:
            return (0.0, 0.0)  # no tactile channel: nothing to act on
        if not self._heading_init:
            self._heading = rng.uniform(0.0, TWO_PI)
            self._heading_init = True
        cmd, self._phase, self._heading = tactile_step(
            obs.frame, obs.geometry, self._phase, self.params, rng, dt, self._heading
        )
        return cmd


class CombinedPolicy:
    """Vision first, touch as the drone closes in (condition VT)."""

    def __init__(self, params: Optional[CombinedPolicyParams] = None):
        self.params = params or CombinedPolicyParams()
        self._visual = VisualPolicy(self.params.visual)
        self._tactile = TactilePolicy(self.params.tactile)

    def reset(self, rng: random.Random) -> None:
        self._visual.reset(rng)
        self._tactile.reset(rng)

    def command(self, obs: PadObservation, rng: random.Random, dt: float) -> tuple[float, float]:
        visual_cmd = self._visual.command(obs, rng, dt)
        tactile_cmd = self._tactile.command(obs, rng, dt)
        total = obs.frame.total_activation() if obs.frame is not None else 0.0
        return combined_step(visual_cmd, tactile_cmd, total, self.params)


class StationaryPolicy:
    """Holds the pad still; the no-pursuit baseline."""

    def reset(self, rng: random.Random) -> None:
        pass

    def command(self, obs: PadObservation, rng: random.Random, dt: float) -> tuple[float, float]:
        return (0.0, 0.0)


@dataclass
class HeadPose:
    x: float
    y: float
    z: float
    yaw: float


class AttentionHeadModel:
    """Fixed-dwell gaze switching plus a lagged yaw and sway head trajectory.

    With two drones the attended index toggles every ``dwell`` seconds; the
    head yaw chases the bearing to the attended drone through a first-order
    lag, and the head position swings on a small lever arm coupled to yaw.
    With one drone the attended index never changes.
    """

    def __init__(
        self,
        dwell: float = 0.8,
        yaw_tau: float = 0.15,
        sway_lever: float = 0.05,
        pivot: tuple[float, float, float] = (0.0, 0.0, 1.65),
    ):
        if dwell <= 0 or yaw_tau < 0 or sway_lever < 0:
            raise ValueError("head model parameters must be positive")
        self.dwell = dwell
        self.yaw_tau = yaw_tau
        self.sway_lever = sway_lever
        self.pivot = pivot
        self.attended = 0
        self.yaw = math.pi / 2.0  # facing +Y, where the drones hover
        self._t = 0.0

    def step(self, drone_xys, dt: float) -> tuple[int, HeadPose]:
        if len(drone_xys) > 1:
            self._t += dt
            self.attended = int(self._t // self.dwell) % len(drone_xys)
        tx, ty = drone_xys[self.attended]
        bearing = math.atan2(ty - self.pivot[1], tx - self.pivot[0])
        err = math.atan2(math.sin(bearing - self.yaw), math.cos(bearing - self.yaw))
        if dt > 0.0:
            alpha = 1.0 - math.exp(-dt / self.yaw_tau) if self.yaw_tau > 0 else 1.0
            self.yaw += err * alpha
        pose = HeadPose(
            x=self.pivot[0] + self.sway_lever * math.cos(self.yaw),
            y=self.pivot[1] + self.sway_lever * math.sin(self.yaw),
            z=self.pivot[2],
            yaw=self.yaw,
        )
        return self.attended, pose


def attention_head_step(model: AttentionHeadModel, drone_xys, dt: float):
    """Functional alias over AttentionHeadModel.step."""
    return model.step(drone_xys, dt)
