"""Config-driven batch experiment runner.

A config file is a JSON document mirroring ExperimentConfig field for
field; unknown keys anywhere are errors.  Each (condition, trial index)
pair gets a seed derived as SHA-256(base_seed | feedback | speed | drones |
index) truncated to 64 bits -- a documented pure function, so a batch can
be reproduced from its config alone.  Logs are one JSONL file per trial
(see logio); the manifest lists every trial with its seed and outcome.

Trials are independent, so the runner can fan out over processes; outputs
are written by the parent in a fixed order, making worker count invisible
in the bytes.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence, Union

from .conditions import ConditionSpec
from .landing import CENTER_MODES
from .logio import dump_trial_log
from .photometry import PhotometricParams
from .policies import (
    AttentionHeadModel,
    CombinedPolicy,
    CombinedPolicyParams,
    TactilePolicy,
    TactilePolicyParams,
    VisualPolicy,
    VisualPolicyParams,
)
from .tactors import ActuatorParams, PadGeometry
from .world import ScenarioSpec, run_trial

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class PolicyParamSet:
    visual: VisualPolicyParams = field(default_factory=VisualPolicyParams)
    tactile: TactilePolicyParams = field(default_factory=TactilePolicyParams)
    handover_activation: float = 0.5


@dataclass(frozen=True)
class AnalysisOptions:
    smoothing_window: Optional[int] = None
    containment_quantile: float = 0.9
    center_mode: str = "plate_center"
    strict: bool = False

    def __post_init__(self):
        if not 0.0 < self.containment_quantile <= 1.0:
            raise ValueError("containment_quantile must be in (0, 1]")
        if self.center_mode not in CENTER_MODES:
            raise ValueError(f"center_mode must be one of {CENTER_MODES}")
        if self.smoothing_window is not None and (
            self.smoothing_window < 1 or self.smoothing_window % 2 == 0
        ):
            raise ValueError("smoothing_window must be an odd positive integer")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    conditions: tuple = (ConditionSpec(),)
    trials_per_condition: int = 5
    base_seed: int = 2024
    policies: PolicyParamSet = field(default_factory=PolicyParamSet)
    condition_policies: dict = field(default_factory=dict)  # ConditionSpec -> PolicyParamSet
    photometry: PhotometricParams = field(default_factory=PhotometricParams)
    actuator: ActuatorParams = field(default_factory=ActuatorParams)
    geometry: PadGeometry = field(default_factory=PadGeometry)
    output_dir: Optional[str] = None
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)

    def __post_init__(self):
        if self.trials_per_condition < 1:
            raise ValueError("trials_per_condition must be >= 1")
        if not self.conditions:
            raise ValueError("condition list must not be empty")
        if len(set(self.conditions)) != len(self.conditions):
            raise ValueError("conditions must be unique")

    def policy_params_for(self, condition: ConditionSpec) -> PolicyParamSet:
        return self.condition_policies.get(condition, self.policies)


def _check_keys(d: dict, allowed: Sequence[str], ctx: str) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ValueError(f"unknown key(s) in {ctx}: {sorted(unknown)}")


_SCENARIO_KEYS = (
    "start_height", "spawn_jitter", "two_drone_separation", "shutdown_gap",
    "nominal_offset", "pad_height", "dt", "ground_effect_gain",
    "max_hand_speed", "hand_accel_limit",
)
_VISUAL_KEYS = (
    "position_noise_sd", "operator_bias_gain", "pursuit_gain",
    "attention_dwell", "unattended_estimate_freeze",
)
_TACTILE_KEYS = ("centroid_gain", "dither_amplitude", "dither_frequency", "search_speed")
_PHOTO_KEYS = (
    "source_intensity", "emit_half_angle", "accept_half_angle",
    "ambient_floor", "saturation_current", "responsivity",
)
_ANALYSIS_KEYS = ("smoothing_window", "containment_quantile", "center_mode", "strict")
_CONDITION_KEYS = ("feedback", "speed_class", "drone_count")
_TOP_KEYS = (
    "scenario", "conditions", "trials_per_condition", "base_seed", "policies",
    "condition_policies", "photometry", "actuator", "geometry", "output_dir",
    "analysis",
)
_POLICY_SET_KEYS = ("visual", "tactile", "handover_activation")


def _parse_policy_set(d: dict, ctx: str) -> PolicyParamSet:
    _check_keys(d, _POLICY_SET_KEYS, ctx)
    visual = d.get("visual", {})
    tactile = d.get("tactile", {})
    _check_keys(visual, _VISUAL_KEYS, f"{ctx}.visual")
    _check_keys(tactile, _TACTILE_KEYS, f"{ctx}.tactile")
    return PolicyParamSet(
        visual=VisualPolicyParams(**visual),
        tactile=TactilePolicyParams(**tactile),
        handover_activation=d.get("handover_activation", 0.5),
    )


def parse_config(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed JSON document, strictly."""
    _check_keys(doc, _TOP_KEYS, "config")
    scenario_doc = dict(doc.get("scenario", {}))
    for k in ("drone_count", "speed_class"):
        if k in scenario_doc:
            raise ValueError(
                f"scenario.{k} is set per condition; remove it from the scenario block"
            )
    _check_keys(scenario_doc, _SCENARIO_KEYS, "scenario")
    scenario = ScenarioSpec(**scenario_doc)

    cond_docs = doc.get("conditions", [])
    conditions = []
    for i, cd in enumerate(cond_docs):
        _check_keys(cd, _CONDITION_KEYS, f"conditions[{i}]")
        conditions.append(ConditionSpec.from_dict(cd))

    policies = _parse_policy_set(doc.get("policies", {}), "policies")
    condition_policies = {}
    for i, cp in enumerate(doc.get("condition_policies", [])):
        _check_keys(
            cp, _CONDITION_KEYS + _POLICY_SET_KEYS, f"condition_policies[{i}]"
        )
        cond = ConditionSpec.from_dict({k: cp[k] for k in _CONDITION_KEYS})
        pset = _parse_policy_set(
            {k: cp[k] for k in _POLICY_SET_KEYS if k in cp}, f"condition_policies[{i}]"
        )
        condition_policies[cond] = pset

    photo_doc = doc.get("photometry", {})
    _check_keys(photo_doc, _PHOTO_KEYS, "photometry")
    actuator_doc = doc.get("actuator", {})
    _check_keys(actuator_doc, ("lag_time_constant",), "actuator")
    geometry_doc = doc.get("geometry", {})
    _check_keys(geometry_doc, ("plate_radius", "ring_radius"), "geometry")
    analysis_doc = doc.get("analysis", {})
    _check_keys(analysis_doc, _ANALYSIS_KEYS, "analysis")

    return ExperimentConfig(
        scenario=scenario,
        conditions=tuple(conditions) if conditions else (ConditionSpec(),),
        trials_per_condition=doc.get("trials_per_condition", 5),
        base_seed=doc.get("base_seed", 2024),
        policies=policies,
        condition_policies=condition_policies,
        photometry=PhotometricParams(**photo_doc),
        actuator=ActuatorParams(**actuator_doc),
        geometry=PadGeometry(**geometry_doc),
        output_dir=doc.get("output_dir"),
        analysis=AnalysisOptions(**analysis_doc),
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: not valid JSON: {e}") from e
    return parse_config(doc)


def derive_trial_seed(base_seed: int, condition: ConditionSpec, index: int) -> int:
    """Stable 64-bit trial seed from (base_seed, condition, index)."""
    msg = f"{base_seed}|{condition.feedback}|{condition.speed_class}|{condition.drone_count}|{index}"
    return int.from_bytes(hashlib.sha256(msg.encode("ascii")).digest()[:8], "big")


def build_policies(condition: ConditionSpec, params: PolicyParamSet) -> list:
    """One controller per pad mapped from the feedback type."""
    count = condition.drone_count
    if condition.feedback == "V":
        return [VisualPolicy(params.visual) for _ in range(count)]
    if condition.feedback == "T":
        return [TactilePolicy(params.tactile) for _ in range(count)]
    combined = CombinedPolicyParams(
        visual=params.visual,
        tactile=params.tactile,
        handover_activation=params.handover_activation,
    )
    return [CombinedPolicy(combined) for _ in range(count)]


def build_head_model(condition: ConditionSpec, params: PolicyParamSet):
    """Attention/head trajectory model; only visual conditions move the head."""
    if condition.drone_count == 2 and condition.feedback in ("V", "VT"):
        return AttentionHeadModel(dwell=params.visual.attention_dwell)
    return None


def scenario_for(config: ExperimentConfig, condition: ConditionSpec) -> ScenarioSpec:
    return replace(
        config.scenario,
        drone_count=condition.drone_count,
        speed_class=condition.speed_class,
    )


def run_single_trial(config: ExperimentConfig, condition: ConditionSpec, index: int):
    """Run one batch trial exactly as run_batch would."""
    params = config.policy_params_for(condition)
    seed = derive_trial_seed(config.base_seed, condition, index)
    return run_trial(
        scenario_for(config, condition),
        build_policies(condition, params),
        seed,
        condition=condition,
        photo=config.photometry,
        geometry=config.geometry,
        actuator=config.actuator,
        head_model=build_head_model(condition, params),
    )


def trial_filename(condition: ConditionSpec, index: int) -> str:
    return f"trial_{condition.key()}_{index:03d}.jsonl"


def _trial_task(args):
    config, condition, index = args
    log = run_single_trial(config, condition, index)
    entry = {
        "file": trial_filename(condition, index),
        "condition": condition.to_dict(),
        "index": index,
        "seed": log.seed,
        "timed_out": log.timed_out,
        "outcomes": [
            {
                "drone": o.drone_id,
                "disp_x": o.displacement[0],
                "disp_y": o.displacement[1],
                "touchdown_t": o.time,
            }
            for o in log.outcomes
        ],
    }
    return trial_filename(condition, index), dump_trial_log(log), entry


def run_batch(
    config: ExperimentConfig,
    out_dir: Union[str, Path],
    workers: int = 1,
) -> dict:
    """Run every condition x trial index, persist logs, write the manifest.

    Returns the manifest dict.  Timeouts are recorded per trial and do not
    stop the batch.  The manifest's created_at field is the only
    non-deterministic output byte.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        (config, condition, index)
        for condition in config.conditions
        for index in range(config.trials_per_condition)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_task, tasks))
    else:
        results = [_trial_task(t) for t in tasks]

    for filename, text, _entry in results:
        try:
            (out / filename).write_text(text, encoding="utf-8")
        except OSError as e:
            raise OSError(f"failed writing trial log {out / filename}: {e}") from e
    entries = [entry for _, _, entry in results]

    manifest = {
        "schema": 1,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "base_seed": config.base_seed,
        "trials_per_condition": config.trials_per_condition,
        "scenario": config.scenario.to_dict(),
        "trials": entries,
    }
    try:
        (out / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as e:
        raise OSError(f"failed writing manifest {out / MANIFEST_NAME}: {e}") from e
    return manifest


def default_config() -> ExperimentConfig:
    """Stock protocol: 3 feedback types x 2 speeds x 1-2 drones, 5 trials each."""
    conditions = tuple(
        ConditionSpec(feedback=f, speed_class=s, drone_count=n)
        for n in (1, 2)
        for f in ("V", "T", "VT")
        for s in ("slow", "fast")
    )
    return ExperimentConfig(conditions=conditions)
