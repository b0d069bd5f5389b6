import csv
import json
import math
from pathlib import Path

import pytest

from lumipad.conditions import ConditionSpec
from lumipad.harness import (
    AnalysisOptions,
    ExperimentConfig,
    PolicyParamSet,
    default_config,
    derive_trial_seed,
    load_config,
    parse_config,
    run_batch,
)
from lumipad.policies import VisualPolicyParams
from lumipad.reports import analyze
from lumipad.world import ScenarioSpec


def small_config(**overrides):
    base = dict(
        scenario=ScenarioSpec(start_height=1.3, pad_height=1.1),
        conditions=tuple(
            ConditionSpec(f, s, 1) for f in ("V", "T", "VT") for s in ("slow", "fast")
        ),
        trials_per_condition=3,
        base_seed=99,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def batch_bytes(out_dir):
    return {
        p.name: p.read_bytes() for p in sorted(Path(out_dir).glob("*.jsonl"))
    }


class TestConfigParsing:
    def test_defaults_round_trip_through_json(self, tmp_path):
        doc = {
            "scenario": {"start_height": 1.5, "pad_height": 1.0},
            "conditions": [
                {"feedback": "T", "speed_class": "slow", "drone_count": 1},
                {"feedback": "V", "speed_class": "fast", "drone_count": 2},
            ],
            "trials_per_condition": 2,
            "base_seed": 5,
            "policies": {"visual": {"position_noise_sd": 0.02}, "handover_activation": 0.7},
            "photometry": {"source_intensity": 3.0},
            "analysis": {"containment_quantile": 0.8},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        cfg = load_config(path)
        assert cfg.scenario.start_height == 1.5
        assert cfg.conditions[1].drone_count == 2
        assert cfg.policies.visual.position_noise_sd == 0.02
        assert cfg.policies.handover_activation == 0.7
        assert cfg.photometry.source_intensity == 3.0
        assert cfg.analysis.containment_quantile == 0.8

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_config({"scenari": {}})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_config({"policies": {"visual": {"noise": 1}}})

    def test_condition_fields_banned_from_scenario(self):
        with pytest.raises(ValueError, match="per condition"):
            parse_config({"scenario": {"drone_count": 2}})

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            small_config(trials_per_condition=0)

    def test_duplicate_conditions_rejected(self):
        c = ConditionSpec("V", "slow", 1)
        with pytest.raises(ValueError):
            small_config(conditions=(c, c))

    def test_condition_policy_overrides(self):
        cond = ConditionSpec("V", "slow", 1)
        override = PolicyParamSet(visual=VisualPolicyParams(position_noise_sd=0.5))
        cfg = small_config(condition_policies={cond: override})
        assert cfg.policy_params_for(cond).visual.position_noise_sd == 0.5
        other = ConditionSpec("V", "fast", 1)
        assert cfg.policy_params_for(other).visual.position_noise_sd == 0.01


class TestSeedDerivation:
    def test_documented_pure_function(self):
        # sha256("7|V|slow|1|0")[:8] big-endian, frozen
        cond = ConditionSpec("V", "slow", 1)
        assert derive_trial_seed(7, cond, 0) == derive_trial_seed(7, cond, 0)
        assert derive_trial_seed(7, cond, 0) == 15794773491306631112

    def test_distinct_across_inputs(self):
        cond = ConditionSpec("V", "slow", 1)
        seeds = {
            derive_trial_seed(7, cond, i) for i in range(50)
        } | {
            derive_trial_seed(base, cond, 0) for base in range(50)
        } | {
            derive_trial_seed(7, ConditionSpec(f, s, n), 0)
            for f in ("V", "T", "VT")
            for s in ("slow", "fast")
            for n in (1, 2)
        }
        assert len(seeds) == 50 + 50 + 12 - 2  # two overlaps by construction


class TestRunBatch:
    def test_file_count_and_manifest(self, tmp_path):
        cfg = small_config()
        manifest = run_batch(cfg, tmp_path / "out")
        files = sorted((tmp_path / "out").glob("*.jsonl"))
        assert len(files) == 18  # 6 conditions x 3 trials
        assert len(manifest["trials"]) == 18
        assert (tmp_path / "out" / "manifest.json").exists()
        for entry in manifest["trials"]:
            assert (tmp_path / "out" / entry["file"]).exists()
            assert not entry["timed_out"]
            assert len(entry["outcomes"]) == entry["condition"]["drone_count"]

    def test_rerun_byte_identical(self, tmp_path):
        cfg = small_config()
        run_batch(cfg, tmp_path / "a")
        run_batch(cfg, tmp_path / "b")
        assert batch_bytes(tmp_path / "a") == batch_bytes(tmp_path / "b")
        ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
        mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
        ma.pop("created_at")
        mb.pop("created_at")
        assert ma == mb

    def test_workers_do_not_change_bytes(self, tmp_path):
        cfg = small_config(trials_per_condition=2)
        run_batch(cfg, tmp_path / "serial", workers=1)
        run_batch(cfg, tmp_path / "parallel", workers=3)
        assert batch_bytes(tmp_path / "serial") == batch_bytes(tmp_path / "parallel")


@pytest.fixture(scope="module")
def analyzed(tmp_path_factory):
    root = tmp_path_factory.mktemp("batch")
    cfg = ExperimentConfig(
        scenario=ScenarioSpec(start_height=1.4, pad_height=1.1),
        conditions=tuple(
            ConditionSpec(f, s, n)
            for n in (1, 2)
            for f in ("V", "T", "VT")
            for s in ("slow", "fast")
        ),
        trials_per_condition=3,
        base_seed=31,
    )
    logs = root / "logs"
    manifest = run_batch(cfg, logs)
    reports = root / "reports"
    paths = analyze(logs, reports, AnalysisOptions())
    return cfg, logs, manifest, paths


class TestAnalyze:
    def test_all_reports_exist(self, analyzed):
        _, _, _, paths = analyzed
        for name in (
            "table1_hand_kinematics.csv", "table2_head_kinematics.csv",
            "table3_displacement.csv", "table4_diameters.csv",
            "tracking_distance.csv", "anova_report.csv", "anova_report.txt",
            "ttests.csv", "regression.csv",
        ):
            assert Path(paths[name]).exists(), name

    def test_purity_identical_reports(self, analyzed, tmp_path):
        _, logs, _, paths = analyzed
        again = analyze(logs, tmp_path / "again", AnalysisOptions())
        for name, path in paths.items():
            assert Path(path).read_bytes() == Path(again[name]).read_bytes()

    def test_table4_matches_manifest_brute_force(self, analyzed):
        # independent oracle: nearest-rank percentile from manifest outcomes
        _, _, manifest, paths = analyzed
        groups = {}
        for entry in manifest["trials"]:
            cond = entry["condition"]
            for o in entry["outcomes"]:
                key = (cond["feedback"], cond["drone_count"], o["drone"])
                groups.setdefault(key, []).append(math.hypot(o["disp_x"], o["disp_y"]))
        rows = read_rows(paths["table4_diameters.csv"])
        assert rows
        for row in rows:
            key = (row["feedback"], int(row["drone_count"]), int(row["pad"]))
            radii = sorted(groups[key])
            rank = math.ceil(0.9 * len(radii))
            assert float(row["diameter_m"]) == 2.0 * radii[rank - 1]

    def test_table3_matches_log_trailers(self, analyzed):
        from lumipad.logio import iter_log_files, read_trial_log

        _, logs, _, paths = analyzed
        sums = {}
        for p in iter_log_files(logs):
            trial = read_trial_log(p)
            c = trial.condition
            for o in trial.outcomes:
                key = (c.feedback, c.speed_class, c.drone_count, o.drone_id)
                sums.setdefault(key, []).append(
                    1000.0 * math.hypot(o.displacement[0], o.displacement[1])
                )
        rows = read_rows(paths["table3_displacement.csv"])
        assert rows
        for row in rows:
            key = (row["feedback"], row["speed_class"], int(row["drone_count"]), int(row["pad"]))
            mags = sums[key]
            assert float(row["mean_mm"]) == pytest.approx(sum(mags) / len(mags), abs=1e-9)
            assert float(row["max_mm"]) == pytest.approx(max(mags), abs=1e-9)

    def test_anova_two_way_present(self, analyzed):
        _, _, _, paths = analyzed
        rows = read_rows(paths["anova_report.csv"])
        effects = {r["effect"] for r in rows}
        assert effects == {"drone_count", "feedback_speed", "interaction"}
        for r in rows:
            assert 0.0 <= float(r["p"]) <= 1.0

    def test_table2_only_two_drone_visual_conditions(self, analyzed):
        _, _, _, paths = analyzed
        rows = read_rows(paths["table2_head_kinematics.csv"])
        assert rows
        assert {r["feedback"] for r in rows} <= {"V", "VT"}

    def test_ttests_pair_count(self, analyzed):
        _, _, _, paths = analyzed
        rows = read_rows(paths["ttests.csv"])
        # per drone count x hand: C(6,2) = 15 pairs
        assert len(rows) == 15 * (1 + 2)

    def test_tracking_distance_positive(self, analyzed):
        _, _, _, paths = analyzed
        rows = read_rows(paths["tracking_distance.csv"])
        assert rows
        for r in rows:
            assert float(r["mean_distance_mm"]) >= 0.0


class TestAnalyzeEdges:
    def test_zero_motion_centered_spawn_zero_displacement(self, tmp_path):
        cfg = ExperimentConfig(
            scenario=ScenarioSpec(start_height=1.3, pad_height=1.1, spawn_jitter=0.0),
            conditions=(ConditionSpec("V", "slow", 1),),
            trials_per_condition=2,
            base_seed=1,
            policies=PolicyParamSet(
                visual=VisualPolicyParams(position_noise_sd=0.0, operator_bias_gain=0.0)
            ),
        )
        logs = tmp_path / "logs"
        run_batch(cfg, logs)
        paths = analyze(logs, tmp_path / "reports", AnalysisOptions())
        rows = read_rows(paths["table3_displacement.csv"])
        assert len(rows) == 1
        assert float(rows[0]["mean_mm"]) == 0.0
        assert float(rows[0]["max_mm"]) == 0.0

    def test_corrupt_log_skipped_unless_strict(self, tmp_path):
        cfg = small_config(trials_per_condition=2, conditions=(ConditionSpec("T", "slow", 1),))
        logs = tmp_path / "logs"
        run_batch(cfg, logs)
        (logs / "trial_T-slow-1_000.jsonl").write_text("{garbage\n", encoding="utf-8")
        paths = analyze(logs, tmp_path / "lenient", AnalysisOptions())
        rows = read_rows(paths["table3_displacement.csv"])
        assert int(rows[0]["n"]) == 1  # one good log left
        with pytest.raises(Exception):
            analyze(logs, tmp_path / "strict", AnalysisOptions(strict=True))

    def test_one_way_anova_fallback_single_drone_count(self, tmp_path):
        cfg = small_config(trials_per_condition=2)
        logs = tmp_path / "logs"
        run_batch(cfg, logs)
        paths = analyze(logs, tmp_path / "reports", AnalysisOptions())
        rows = read_rows(paths["anova_report.csv"])
        assert len(rows) == 1
        assert rows[0]["effect"] == "feedback_speed"

    def test_empty_log_dir_rejected(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(ValueError):
            analyze(tmp_path / "empty", tmp_path / "r", AnalysisOptions())


def test_default_config_covers_full_protocol():
    cfg = default_config()
    assert len(cfg.conditions) == 12
    assert cfg.trials_per_condition == 5
    one_drone = [c for c in cfg.conditions if c.drone_count == 1]
    assert len(one_drone) == 6  # 3 feedback types x 2 speeds
