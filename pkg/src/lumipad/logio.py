"""Trial log serialization: one line-delimited JSON record stream per trial.

Layout per file: a header record (schema version, condition, seed, dt, full
scenario), then one sample record per step, then a trailing outcome record.
Appending and streaming-friendly; any language can parse it.  Units are SI
throughout (metres, seconds, radians); amplitudes are fractions in [0, 1].

Serialization is byte-deterministic for a given log: fixed key order, no
whitespace, floats via Python repr.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, Union

from .conditions import ConditionSpec
from .world import (
    DroneSample,
    HeadSample,
    PadSample,
    Sample,
    ScenarioSpec,
    TouchdownOutcome,
    TrialLog,
)

SCHEMA_VERSION = 1

_COMPACT = {"separators": (",", ":")}


def _header_record(log: TrialLog) -> dict:
    return {
        "record": "header",
        "schema": SCHEMA_VERSION,
        "condition": log.condition.to_dict(),
        "seed": log.seed,
        "dt": log.dt,
        "scenario": log.scenario.to_dict(),
    }


def _sample_record(s: Sample) -> dict:
    rec = {
        "record": "sample",
        "t": s.t,
        "drones": [
            {"id": d.id, "x": d.x, "y": d.y, "z": d.z, "led": d.led, "motors": d.motors}
            for d in s.drones
        ],
        "pads": [
            {"id": p.id, "x": p.x, "y": p.y, "tiltx": p.tiltx, "tilty": p.tilty,
             "amps": list(p.amps)}
            for p in s.pads
        ],
    }
    if s.head is not None:
        rec["head"] = {"x": s.head.x, "y": s.head.y, "z": s.head.z, "yaw": s.head.yaw}
    return rec


def _outcome_record(log: TrialLog) -> dict:
    return {
        "record": "outcome",
        "timed_out": log.timed_out,
        "outcomes": [
            {
                "drone": o.drone_id,
                "touchdown_x": o.position[0],
                "touchdown_y": o.position[1],
                "touchdown_z": o.position[2],
                "t": o.time,
                "disp_x": o.displacement[0],
                "disp_y": o.displacement[1],
            }
            for o in log.outcomes
        ],
    }


def dump_trial_log(log: TrialLog) -> str:
    lines = [json.dumps(_header_record(log), **_COMPACT)]
    lines.extend(json.dumps(_sample_record(s), **_COMPACT) for s in log.samples)
    lines.append(json.dumps(_outcome_record(log), **_COMPACT))
    return "\n".join(lines) + "\n"


def write_trial_log(log: TrialLog, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_trial_log(log), encoding="utf-8")


class LogFormatError(ValueError):
    pass


def _parse_sample(rec: dict) -> Sample:
    head = None
    if "head" in rec:
        h = rec["head"]
        head = HeadSample(h["x"], h["y"], h["z"], h["yaw"])
    return Sample(
        t=rec["t"],
        drones=[
            DroneSample(d["id"], d["x"], d["y"], d["z"], d["led"], d["motors"])
            for d in rec["drones"]
        ],
        pads=[
            PadSample(p["id"], p["x"], p["y"], p["tiltx"], p["tilty"], tuple(p["amps"]))
            for p in rec["pads"]
        ],
        head=head,
    )


def parse_trial_log(text: str, source: str = "<string>") -> TrialLog:
    header = None
    samples = []
    outcomes = []
    timed_out = False
    saw_outcome = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise LogFormatError(f"{source}:{lineno}: bad JSON: {e}") from e
        kind = rec.get("record")
        if kind == "header":
            if header is not None:
                raise LogFormatError(f"{source}:{lineno}: duplicate header")
            if rec.get("schema") != SCHEMA_VERSION:
                raise LogFormatError(
                    f"{source}:{lineno}: unsupported schema {rec.get('schema')!r}"
                )
            header = rec
        elif kind == "sample":
            samples.append(_parse_sample(rec))
        elif kind == "outcome":
            saw_outcome = True
            timed_out = bool(rec.get("timed_out", False))
            for o in rec["outcomes"]:
                outcomes.append(
                    TouchdownOutcome(
                        drone_id=o["drone"],
                        position=(o["touchdown_x"], o["touchdown_y"], o["touchdown_z"]),
                        time=o["t"],
                        displacement=(o["disp_x"], o["disp_y"]),
                    )
                )
        else:
            raise LogFormatError(f"{source}:{lineno}: unknown record kind {kind!r}")
    if header is None:
        raise LogFormatError(f"{source}: missing header record")
    if not saw_outcome:
        raise LogFormatError(f"{source}: missing outcome record")
    return TrialLog(
        condition=ConditionSpec.from_dict(header["condition"]),
        seed=header["seed"],
        dt=header["dt"],
        scenario=ScenarioSpec.from_dict(header["scenario"]),
        samples=samples,
        outcomes=outcomes,
        timed_out=timed_out,
    )


def read_trial_log(path: Union[str, Path]) -> TrialLog:
    p = Path(path)
    return parse_trial_log(p.read_text(encoding="utf-8"), source=str(p))


def iter_log_files(directory: Union[str, Path]) -> Iterator[Path]:
    """Trial log files under ``directory``, sorted for stable processing."""
    return iter(sorted(Path(directory).glob("*.jsonl")))
