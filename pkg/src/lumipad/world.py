"""Deterministic fixed-timestep landing world.

Drones spawn at the start height with seeded XY jitter, descend vertically
at a constant speed, and cut their motors when the leg-to-plate gap closes
below the shutdown gap.  Pads are velocity-commanded points with a
rate-limited hand plant (acceleration clamp then speed clamp).  A tilted
plate at shutdown adds a small downhill ground-effect drift to the
touchdown point.

Everything integrates with explicit Euler at a fixed dt in a fixed order,
so a (scenario, seed) pair reproduces the same trial to the bit.  One world
instance is single-threaded; run independent trials on separate workers.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .conditions import SPEED_CLASSES, SPEED_MPS, ConditionSpec
from .photometry import PhotometricParams
from .tactors import (
    ActuatorParams,
    PadGeometry,
    TactileFrame,
    raw_frame,
    step_frame,
    zero_frame,
)

MAX_TILT_RAD = 0.35
GROUND_EFFECT_TILT_THRESHOLD = 0.02  # rad; level-enough plates produce no drift


@dataclass
class DroneState:
    id: int
    position: tuple[float, float, float]
    descent_speed: float
    led_on: bool = True
    motors_on: bool = True
    leg_offset: float = 0.02  # body origin to leg tips; leg length is a placeholder

    def __post_init__(self):
        if self.descent_speed != 0.0 and not 0.01 <= self.descent_speed <= 1.0:
            raise ValueError("descent_speed must be 0 or in [0.01, 1.0]")
        if self.position[2] < 0:
            raise ValueError("drone z must be >= 0")


@dataclass
class PadState:
    id: int
    center: tuple[float, float, float]
    tilt: tuple[float, float] = (0.0, 0.0)  # (roll, pitch) of the plate normal
    velocity: tuple[float, float] = (0.0, 0.0)
    geometry: PadGeometry = field(default_factory=PadGeometry)

    def __post_init__(self):
        if abs(self.tilt[0]) > MAX_TILT_RAD or abs(self.tilt[1]) > MAX_TILT_RAD:
            raise ValueError(f"tilt components must stay within +-{MAX_TILT_RAD} rad")

    def surface_z(self, x: float, y: float) -> float:
        """Plate surface height at world (x, y); the plate is a tilted plane."""
        tr, tp = self.tilt
        if tr == 0.0 and tp == 0.0:
            return self.center[2]
        # plane normal for Rx(roll) @ Ry(pitch) applied to +Z
        nx = math.sin(tp)
        ny = -math.sin(tr) * math.cos(tp)
        nz = math.cos(tr) * math.cos(tp)
        return self.center[2] - (nx * (x - self.center[0]) + ny * (y - self.center[1])) / nz


@dataclass(frozen=True)
class ScenarioSpec:
    """World-level protocol constants for one trial family."""

    drone_count: int = 1
    speed_class: str = "slow"
    start_height: float = 2.0        # m above the floor
    spawn_jitter: float = 0.06       # uniform half-width per axis (0.12 m range)
    two_drone_separation: float = 1.0
    shutdown_gap: float = 0.005      # legs-to-plate gap that kills the motors
    nominal_offset: float = 0.5      # m in front of the operator
    pad_height: float = 1.1          # palm height; pads rest here
    dt: float = 0.01
    ground_effect_gain: float = 0.02  # m of drift per radian of tilt
    max_hand_speed: float = 0.5
    hand_accel_limit: float = 3.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.shutdown_gap <= 0:
            raise ValueError("shutdown_gap must be > 0")
        if self.speed_class not in SPEED_CLASSES:
            raise ValueError(f"speed_class must be one of {SPEED_CLASSES}")
        if self.drone_count not in (1, 2):
            raise ValueError("drone_count must be 1 or 2")
        if self.spawn_jitter < 0:
            raise ValueError("spawn_jitter must be >= 0")
        if self.start_height <= self.pad_height:
            raise ValueError("start_height must sit above pad_height")

    @property
    def descent_speed(self) -> float:
        return SPEED_MPS[self.speed_class]

    @property
    def timeout_s(self) -> float:
        # 3x the nominal full descent duration; bounds pathological policies
        return 3.0 * self.start_height / self.descent_speed

    def nominal_positions(self) -> tuple[tuple[float, float], ...]:
        """Home XY per drone/pad: operator at the origin facing +Y.

        One drone sits centred in front of the operator (right hand); two
        drones split the separation symmetrically, pad 0 on the +X (right
        hand) side.
        """
        if self.drone_count == 1:
            return ((0.0, self.nominal_offset),)
        half = self.two_drone_separation / 2.0
        return ((half, self.nominal_offset), (-half, self.nominal_offset))

    def to_dict(self) -> dict:
        return {
            "drone_count": self.drone_count,
            "speed_class": self.speed_class,
            "start_height": self.start_height,
            "spawn_jitter": self.spawn_jitter,
            "two_drone_separation": self.two_drone_separation,
            "shutdown_gap": self.shutdown_gap,
            "nominal_offset": self.nominal_offset,
            "pad_height": self.pad_height,
            "dt": self.dt,
            "ground_effect_gain": self.ground_effect_gain,
            "max_hand_speed": self.max_hand_speed,
            "hand_accel_limit": self.hand_accel_limit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(**d)


@dataclass(frozen=True)
class TouchdownOutcome:
    drone_id: int
    position: tuple[float, float, float]
    time: float
    displacement: tuple[float, float]  # pad frame, plate centre -> touchdown


@dataclass(frozen=True)
class TouchdownEvent:
    outcome: TouchdownOutcome


@dataclass(frozen=True)
class TimeoutEvent:
    t: float


@dataclass
class DroneSample:
    id: int
    x: float
    y: float
    z: float
    led: bool
    motors: bool


@dataclass
class PadSample:
    id: int
    x: float
    y: float
    tiltx: float
    tilty: float
    amps: tuple[float, ...]


@dataclass
class HeadSample:
    x: float
    y: float
    z: float
    yaw: float


@dataclass
class Sample:
    t: float
    drones: list
    pads: list
    head: Optional[HeadSample] = None


@dataclass
class TrialLog:
    """Uniformly sampled record of one trial plus its outcome."""

    condition: ConditionSpec
    seed: int
    dt: float
    scenario: ScenarioSpec
    samples: list
    outcomes: list  # TouchdownOutcome per landed drone, in landing order
    timed_out: bool = False

    def outcome_for(self, drone_id: int) -> Optional[TouchdownOutcome]:
        for o in self.outcomes:
            if o.drone_id == drone_id:
                return o
        return None


@dataclass
class World:
    """Mutable world state for one trial; never share across threads."""

    spec: ScenarioSpec
    drones: list
    pads: list
    frames: list  # TactileFrame per pad
    photo: PhotometricParams
    actuator: ActuatorParams
    rng: random.Random
    t: float = 0.0
    step_count: int = 0
    outcomes: list = field(default_factory=list)
    timed_out: bool = False

    @property
    def operator_xy(self) -> tuple[float, float]:
        return (0.0, 0.0)

    def all_landed(self) -> bool:
        return all(not d.motors_on for d in self.drones)

    def done(self) -> bool:
        return self.all_landed() or self.timed_out


def spawn_trial(
    spec: ScenarioSpec,
    seed: int,
    photo: Optional[PhotometricParams] = None,
    geometry: Optional[PadGeometry] = None,
    actuator: Optional[ActuatorParams] = None,
) -> World:
    """Build the initial world for (spec, seed): bit-identical on replay.

    Jitter draws come from a Mersenne Twister seeded with ``seed``, two
    uniforms per drone in id order, so placement is a pure function of the
    arguments.
    """
    photo = photo or PhotometricParams()
    geometry = geometry or PadGeometry()
    actuator = actuator or ActuatorParams()
    rng = random.Random(seed)
    j = spec.spawn_jitter
    drones = []
    pads = []
    frames = []
    for i, (nx, ny) in enumerate(spec.nominal_positions()):
        dx = rng.uniform(-j, j) if j > 0 else 0.0
        dy = rng.uniform(-j, j) if j > 0 else 0.0
        drones.append(
            DroneState(
                id=i,
                position=(nx + dx, ny + dy, spec.start_height),
                descent_speed=spec.descent_speed,
                led_on=True,
                motors_on=True,
            )
        )
        pads.append(PadState(id=i, center=(nx, ny, spec.pad_height), geometry=geometry))
        frames.append(zero_frame(0.0))
    return World(
        spec=spec,
        drones=drones,
        pads=pads,
        frames=frames,
        photo=photo,
        actuator=actuator,
        rng=rng,
    )


def _ground_effect_drift(pad: PadState, gain: float) -> tuple[float, float]:
    tr, tp = pad.tilt
    mag = math.hypot(tr, tp)
    if mag <= GROUND_EFFECT_TILT_THRESHOLD:
        return (0.0, 0.0)
    # downhill = horizontal direction in which the plate surface drops
    nx = math.sin(tp)
    ny = -math.sin(tr) * math.cos(tp)
    norm = math.hypot(nx, ny)
    if norm == 0.0:
        return (0.0, 0.0)
    d = gain * mag
    return (d * nx / norm, d * ny / norm)


def step(world: World, pad_velocity_commands: Sequence[tuple[float, float]], spec: ScenarioSpec) -> list:
    """Advance one dt; mutates ``world`` and returns the step's events.

    Fixed order: hand plants, then descent, then touchdown tests, then
    tactile frames, then the clock.
    """
    events = []
    if len(pad_velocity_commands) != len(world.pads):
        raise ValueError(
            f"need {len(world.pads)} pad commands, got {len(pad_velocity_commands)}"
        )
    dv_max = spec.hand_accel_limit * spec.dt
    for pad, cmd in zip(world.pads, pad_velocity_commands):
        cx, cy = cmd
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValueError(f"non-finite velocity command for pad {pad.id}: {cmd!r}")
        vx, vy = pad.velocity
        ex, ey = cx - vx, cy - vy
        emag = math.hypot(ex, ey)
        if emag > dv_max:
            scale = dv_max / emag
            ex *= scale
            ey *= scale
        vx += ex
        vy += ey
        vmag = math.hypot(vx, vy)
        if vmag > spec.max_hand_speed:
            scale = spec.max_hand_speed / vmag
            vx *= scale
            vy *= scale
        pad.velocity = (vx, vy)
        px, py, pz = pad.center
        pad.center = (px + vx * spec.dt, py + vy * spec.dt, pz)

    for drone in world.drones:
        if not drone.motors_on:
            continue
        x, y, z = drone.position
        z -= drone.descent_speed * spec.dt
        drone.position = (x, y, z)
        pad = world.pads[drone.id]
        gap = (z - drone.leg_offset) - pad.surface_z(x, y)
        if gap < spec.shutdown_gap:
            drift = _ground_effect_drift(pad, spec.ground_effect_gain)
            x += drift[0]
            y += drift[1]
            drone.position = (x, y, z)
            drone.motors_on = False
            drone.descent_speed = 0.0
            outcome = TouchdownOutcome(
                drone_id=drone.id,
                position=(x, y, z),
                time=world.t + spec.dt,
                displacement=(x - pad.center[0], y - pad.center[1]),
            )
            world.outcomes.append(outcome)
            events.append(TouchdownEvent(outcome))

    for i, pad in enumerate(world.pads):
        targets = raw_frame(world.drones, pad.center, pad.tilt, pad.geometry, world.photo)
        world.frames[i] = step_frame(world.frames[i], targets, spec.dt, world.actuator)

    world.step_count += 1
    world.t = world.step_count * spec.dt

    if not world.all_landed() and world.t >= spec.timeout_s:
        world.timed_out = True
        events.append(TimeoutEvent(world.t))
    return events


def _sample(world: World, head: Optional[HeadSample]) -> Sample:
    return Sample(
        t=world.t,
        drones=[
            DroneSample(d.id, d.position[0], d.position[1], d.position[2], d.led_on, d.motors_on)
            for d in world.drones
        ],
        pads=[
            PadSample(p.id, p.center[0], p.center[1], p.tilt[0], p.tilt[1], world.frames[i].amplitudes)
            for i, p in enumerate(world.pads)
        ],
        head=head,
    )


def run_trial(
    spec: ScenarioSpec,
    policies: Sequence,
    seed: int,
    condition: Optional[ConditionSpec] = None,
    photo: Optional[PhotometricParams] = None,
    geometry: Optional[PadGeometry] = None,
    actuator: Optional[ActuatorParams] = None,
    head_model=None,
    pad_tilts: Optional[Sequence[tuple[float, float]]] = None,
) -> TrialLog:
    """Closed-loop trial: spawn, then policy->step at dt until done.

    ``policies`` supplies one controller per pad; each is queried with a
    PadObservation masked for the condition's feedback type (T never sees
    drone XY, V never sees the tactile frame).  ``head_model``, when given,
    provides the attention schedule and the logged head trajectory.
    Timeouts end the trial with ``timed_out`` set; they are data, not errors.
    """
    from .policies import PadObservation  # late import; policies imports world types

    if condition is None:
        condition = ConditionSpec("VT", spec.speed_class, spec.drone_count)
    if condition.speed_class != spec.speed_class or condition.drone_count != spec.drone_count:
        raise ValueError("condition and scenario disagree on speed class or drone count")
    if len(policies) != spec.drone_count:
        raise ValueError("need exactly one policy per pad")

    world = spawn_trial(spec, seed, photo=photo, geometry=geometry, actuator=actuator)
    if pad_tilts is not None:
        for pad, tilt in zip(world.pads, pad_tilts):
            pad.tilt = (tilt[0], tilt[1])
    for policy in policies:
        reset = getattr(policy, "reset", None)
        if reset is not None:
            reset(world.rng)

    see_drone = condition.feedback in ("V", "VT")
    see_tactile = condition.feedback in ("T", "VT")

    head_sample = None
    attended_id = 0
    if head_model is not None:
        attended_id, pose = head_model.step(
            [(d.position[0], d.position[1]) for d in world.drones], 0.0
        )
        head_sample = HeadSample(pose.x, pose.y, pose.z, pose.yaw)

    samples = [_sample(world, head_sample)]
    commands = [(0.0, 0.0)] * spec.drone_count
    while not world.done():
        drone_xys = [(d.position[0], d.position[1]) for d in world.drones]
        if head_model is not None:
            attended_id, pose = head_model.step(drone_xys, spec.dt)
            head_sample = HeadSample(pose.x, pose.y, pose.z, pose.yaw)
        for i, policy in enumerate(policies):
            obs = PadObservation(
                t=world.t,
                pad_xy=(world.pads[i].center[0], world.pads[i].center[1]),
                drone_xy=drone_xys[i] if see_drone else None,
                attended=(attended_id == i) if head_model is not None else True,
                operator_xy=world.operator_xy,
                frame=world.frames[i] if see_tactile else None,
                geometry=world.pads[i].geometry,
                landed=not world.drones[i].motors_on,
            )
            commands[i] = policy.command(obs, world.rng, spec.dt)
        step(world, commands, spec)
        samples.append(_sample(world, head_sample))

    return TrialLog(
        condition=condition,
        seed=seed,
        dt=spec.dt,
        scenario=spec,
        samples=samples,
        outcomes=list(world.outcomes),
        timed_out=world.timed_out,
    )
