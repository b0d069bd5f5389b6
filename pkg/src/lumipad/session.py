"""Real-time interactive session endpoint.

One websocket connection = one session = one world at a time.  The server
runs the simulation at wall-clock rate (fixed dt per tick, so network
jitter never changes the physics), latches pad velocity commands between
ticks (last writer wins), and enforces the condition's information masking
on the wire: under T no drone horizontal coordinates ever leave the server
during descent, under V no tactile amplitudes do.  Finished trials are
recorded as standard trial logs, downloadable over HTTP and accepted
unchanged by the batch analyzer.

Wire protocol (JSON per frame):
  inbound   {"type":"start_trial","condition":"V|T|VT","speed":"slow|fast",
             "drones":1|2,"seed":int?}
            {"type":"pad_cmd","pad":int,"vx":float,"vy":float}
            {"type":"end_session"}
  outbound  {"type":"config",...}            once, on connect
            {"type":"state","t":...,"drones":[...],"pads":[...],
             "tactile":[[...]]?,"phase":...}
            {"type":"trial_result","outcomes":[{"drone":...,
             "displacement_mm":...,"dx":...,"dy":...}]}
            {"type":"error","code":...,"message":...}
"""

from __future__ import annotations

import asyncio
import math
import random
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .conditions import ConditionSpec
from .logio import dump_trial_log
from .photometry import PhotometricParams
from .tactors import ActuatorParams, PadGeometry
from .world import ScenarioSpec, Sample, TrialLog, World, spawn_trial, step
from .world import DroneSample, PadSample

PHASE_WAITING = "waiting"
PHASE_DESCENDING = "descending"
PHASE_FINISHED = "finished"


@dataclass(frozen=True)
class ServeConfig:
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    photometry: PhotometricParams = field(default_factory=PhotometricParams)
    actuator: ActuatorParams = field(default_factory=ActuatorParams)
    geometry: PadGeometry = field(default_factory=PadGeometry)
    stream_rate: float = 50.0          # outbound messages per second
    time_scale: float = 1.0            # >1 runs faster than wall clock (testing)
    expose_altitude_in_t: bool = False
    log_dir: Optional[str] = None

    def __post_init__(self):
        if self.stream_rate <= 0 or self.time_scale <= 0:
            raise ValueError("stream_rate and time_scale must be > 0")


def _err(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


class Session:
    """State machine for one connection; tick() is synchronous and testable."""

    def __init__(self, config: ServeConfig, session_id: Optional[str] = None):
        self.config = config
        self.id = session_id or uuid.uuid4().hex
        self.phase = PHASE_WAITING
        self.condition: Optional[ConditionSpec] = None
        self.scenario: Optional[ScenarioSpec] = None
        self.world: Optional[World] = None
        self.samples: list = []
        self.latched: dict = {}
        self.trial_index = -1
        self.seed = 0
        self.completed_logs: list = []
        base_dt = config.scenario.dt
        self.steps_per_tick = max(1, round(1.0 / (config.stream_rate * base_dt)))

    # -- protocol surface ---------------------------------------------------

    def config_message(self) -> dict:
        s = self.config.scenario
        return {
            "type": "config",
            "session": self.id,
            "stream_rate": self.config.stream_rate,
            "max_hand_speed": s.max_hand_speed,
            "plate_radius": self.config.geometry.plate_radius,
            "start_height": s.start_height,
            "pad_height": s.pad_height,
            "dt": s.dt,
        }

    def start_trial(self, condition: ConditionSpec, seed: Optional[int] = None) -> dict:
        if self.phase == PHASE_DESCENDING:
            return _err("busy", "a trial is already descending")
        if seed is None:
            seed = random.getrandbits(63)
        self.condition = condition
        self.scenario = replace(
            self.config.scenario,
            drone_count=condition.drone_count,
            speed_class=condition.speed_class,
        )
        self.world = spawn_trial(
            self.scenario,
            seed,
            photo=self.config.photometry,
            geometry=self.config.geometry,
            actuator=self.config.actuator,
        )
        self.seed = seed
        self.samples = [self._sample()]
        self.latched = {pad.id: (0.0, 0.0) for pad in self.world.pads}
        self.trial_index += 1
        self.phase = PHASE_DESCENDING
        return self.state_message()

    def handle_pad_command(self, pad_id, vx, vy) -> Optional[dict]:
        if self.phase != PHASE_DESCENDING:
            return _err("not_descending", "no trial in progress; command ignored")
        if self.world is None or pad_id not in self.latched:
            return _err("unknown_pad", f"no pad with id {pad_id!r}")
        try:
            vx = float(vx)
            vy = float(vy)
        except (TypeError, ValueError):
            return _err("non_finite", "velocity must be numeric")
        if not (math.isfinite(vx) and math.isfinite(vy)):
            return _err("non_finite", "velocity must be finite")
        self.latched[pad_id] = (vx, vy)  # last writer wins within a tick
        return None

    def tick(self) -> list:
        """Advance steps_per_tick sim steps; returns outbound messages."""
        if self.phase != PHASE_DESCENDING:
            return []
        commands = [self.latched[pad.id] for pad in self.world.pads]
        for _ in range(self.steps_per_tick):
            step(self.world, commands, self.scenario)
            self.samples.append(self._sample())
            if self.world.done():
                break
        finished = self.world.done()
        if finished:
            # flip phase before building the state message: the post-landing
            # frame is unmasked, mirroring subjects opening their eyes
            self.phase = PHASE_FINISHED
        messages = [self.state_message()]
        if finished:
            log = self._build_log()
            self.completed_logs.append(log)
            self._persist_log(log)
            messages.append(self._result_message())
        return messages

    # -- internals ----------------------------------------------------------

    def _sample(self) -> Sample:
        w = self.world
        return Sample(
            t=w.t,
            drones=[
                DroneSample(d.id, d.position[0], d.position[1], d.position[2],
                            d.led_on, d.motors_on)
                for d in w.drones
            ],
            pads=[
                PadSample(p.id, p.center[0], p.center[1], p.tilt[0], p.tilt[1],
                          w.frames[i].amplitudes)
                for i, p in enumerate(w.pads)
            ],
        )

    def state_message(self) -> dict:
        w = self.world
        feedback = self.condition.feedback
        descending = self.phase == PHASE_DESCENDING
        drones = []
        for d in w.drones:
            if feedback == "T" and descending:
                entry = {"id": d.id, "led": d.led_on}
                if self.config.expose_altitude_in_t:
                    entry["z"] = d.position[2]
            else:
                entry = {
                    "id": d.id,
                    "x": d.position[0],
                    "y": d.position[1],
                    "z": d.position[2],
                    "led": d.led_on,
                }
            drones.append(entry)
        msg = {
            "type": "state",
            "t": w.t,
            "drones": drones,
            "pads": [{"id": p.id, "x": p.center[0], "y": p.center[1]} for p in w.pads],
            "phase": self.phase,
        }
        if feedback in ("T", "VT") or not descending:
            msg["tactile"] = [list(f.amplitudes) for f in w.frames]
        return msg

    def _result_message(self) -> dict:
        return {
            "type": "trial_result",
            "trial": self.trial_index,
            "timed_out": self.world.timed_out,
            "outcomes": [
                {
                    "drone": o.drone_id,
                    "displacement_mm": 1000.0 * math.hypot(*o.displacement),
                    "dx": o.displacement[0],
                    "dy": o.displacement[1],
                }
                for o in self.world.outcomes
            ],
        }

    def _build_log(self) -> TrialLog:
        return TrialLog(
            condition=self.condition,
            seed=self.seed,
            dt=self.scenario.dt,
            scenario=self.scenario,
            samples=self.samples,
            outcomes=list(self.world.outcomes),
            timed_out=self.world.timed_out,
        )

    def _persist_log(self, log: TrialLog) -> Optional[Path]:
        if self.config.log_dir is None:
            return None
        d = Path(self.config.log_dir) / self.id
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"trial_{self.trial_index:03d}.jsonl"
        path.write_text(dump_trial_log(log), encoding="utf-8")
        return path

    def log_text(self, trial_index: int) -> Optional[str]:
        if 0 <= trial_index < len(self.completed_logs):
            return dump_trial_log(self.completed_logs[trial_index])
        return None


def _parse_start(msg: dict):
    try:
        condition = ConditionSpec(
            feedback=msg.get("condition", "VT"),
            speed_class=msg.get("speed", "slow"),
            drone_count=int(msg.get("drones", 1)),
        )
    except (ValueError, TypeError) as e:
        return None, _err("bad_condition", str(e))
    seed = msg.get("seed")
    if seed is not None:
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            return None, _err("bad_condition", "seed must be an integer")
    return (condition, seed), None


def create_app(config: Optional[ServeConfig] = None, ui_dir: Optional[str] = None) -> FastAPI:
    """FastAPI app exposing /ws, per-session log downloads, optional static UI."""
    config = config or ServeConfig()
    app = FastAPI(title="lumipad session service")
    sessions: dict = {}
    app.state.sessions = sessions
    app.state.config = config

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "sessions": len(sessions)}

    @app.get("/sessions/{session_id}/trials/{trial_index}/log")
    async def get_log(session_id: str, trial_index: int):
        session = sessions.get(session_id)
        if session is None:
            return PlainTextResponse("unknown session", status_code=404)
        text = session.log_text(trial_index)
        if text is None:
            return PlainTextResponse("no such trial", status_code=404)
        return PlainTextResponse(text, media_type="application/x-ndjson")

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        session = Session(config)
        sessions[session.id] = session
        send_lock = asyncio.Lock()

        async def send(msg: dict):
            async with send_lock:
                await websocket.send_json(msg)

        period = 1.0 / (config.stream_rate * config.time_scale)
        ticker: Optional[asyncio.Task] = None

        async def run_ticker():
            while session.phase == PHASE_DESCENDING:
                await asyncio.sleep(period)
                for msg in session.tick():
                    await send(msg)

        await send(session.config_message())
        try:
            while True:
                try:
                    msg = await websocket.receive_json()
                except ValueError:
                    await send(_err("bad_message", "frames must be JSON objects"))
                    continue
                kind = msg.get("type")
                if kind == "start_trial":
                    parsed, err = _parse_start(msg)
                    if err is not None:
                        await send(err)
                        continue
                    condition, seed = parsed
                    reply = session.start_trial(condition, seed)
                    await send(reply)
                    if reply.get("type") != "error" and session.phase == PHASE_DESCENDING:
                        ticker = asyncio.create_task(run_ticker())
                elif kind == "pad_cmd":
                    reply = session.handle_pad_command(
                        msg.get("pad"), msg.get("vx"), msg.get("vy")
                    )
                    if reply is not None:
                        await send(reply)
                elif kind == "end_session":
                    break
                else:
                    await send(_err("bad_message", f"unknown message type {kind!r}"))
        except WebSocketDisconnect:
            pass
        finally:
            if ticker is not None:
                ticker.cancel()
            # session stays in the registry so finished logs remain downloadable

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
