"""Log analysis: the experiment-table CSV reports.

``analyze`` consumes a directory of trial logs (the logs are the single
source of truth; the batch manifest is never read) and emits:

  table1_hand_kinematics.csv   mean |v|,|a|,|jerk|,|snap| of each hand (pad)
  table2_head_kinematics.csv   same for the head, two-drone visual conditions
  table3_displacement.csv      mean/std/max displacement (mm) per condition/hand
  table4_diameters.csv         nearest-rank containment diameters (m)
  tracking_distance.csv        mean drone-pad distance during landing (mm)
  anova_report.csv / .txt      repeated-measures ANOVA on displacement
  ttests.csv                   paired t-tests over all condition pairs
  regression.csv               landing-axis least-squares fits

Rows are keyed by feedback, speed class, drone count and hand.  Within a
condition the trial order (the "subject" index pairing ANOVA cells and
t-test samples) is the sorted log filename order, which matches the batch
runner's naming.  All numeric cells are full-precision reprs so reports
are byte-stable and machine-checkable.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .conditions import ConditionSpec
from .harness import AnalysisOptions
from .kinemetrics import (
    MIN_POINTS_FOR_SNAP,
    Trajectory,
    mean_tracking_distance,
    motion_summary,
)
from .landing import (
    LandingRecord,
    containment_diameter,
    group_stats,
    landing_axis_regression,
)
from .logio import LogFormatError, iter_log_files, read_trial_log
from .stats import RMDataset, paired_t_test, rm_anova_one_way, rm_anova_two_way
from .world import TrialLog

log = logging.getLogger(__name__)

REPORT_NAMES = (
    "table1_hand_kinematics.csv",
    "table2_head_kinematics.csv",
    "table3_displacement.csv",
    "table4_diameters.csv",
    "tracking_distance.csv",
    "anova_report.csv",
    "anova_report.txt",
    "ttests.csv",
    "regression.csv",
)


def hand_label(drone_count: int, pad_id: int) -> str:
    if drone_count == 1:
        return "right"
    return "right" if pad_id == 0 else "left"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) for c in row])


def load_logs(logs_dir: Union[str, Path], strict: bool = False):
    """Parsed logs in sorted-filename order; corrupt files skip or fail."""
    loaded = []
    for path in iter_log_files(logs_dir):
        try:
            loaded.append((path.name, read_trial_log(path)))
        except (LogFormatError, OSError) as e:
            if strict:
                raise
            log.warning("skipping unreadable log %s: %s", path, e)
    if not loaded:
        raise ValueError(f"no readable trial logs in {logs_dir}")
    return loaded


def _stage_samples(trial: TrialLog, pad_id: int):
    """Samples from descent start through the pad's own touchdown."""
    outcome = trial.outcome_for(pad_id)
    if outcome is None:
        return None
    cutoff = outcome.time + 1e-9
    return [s for s in trial.samples if s.t <= cutoff]


def _pad_trajectory(samples, pad_id: int, dt: float) -> Trajectory:
    pts = [(s.pads[pad_id].x, s.pads[pad_id].y, 0.0) for s in samples]
    return Trajectory(dt=dt, points=np.array(pts))


def _head_trajectory(samples, dt: float) -> Optional[Trajectory]:
    pts = [(s.head.x, s.head.y, s.head.z) for s in samples if s.head is not None]
    if len(pts) < MIN_POINTS_FOR_SNAP:
        return None
    return Trajectory(dt=dt, points=np.array(pts))


def _landing_records(logs):
    """LandingRecord per landed drone, grouped nothing; plus per-trial index."""
    records = []
    for order, (name, trial) in enumerate(logs):
        for outcome in trial.outcomes:
            records.append(
                (
                    name,
                    LandingRecord(
                        condition=trial.condition,
                        pad_id=outcome.drone_id,
                        displacement=outcome.displacement,
                    ),
                )
            )
    return records


def _group_by_condition(logs):
    groups = defaultdict(list)
    for name, trial in logs:
        groups[trial.condition].append((name, trial))
    for cond in groups:
        groups[cond].sort(key=lambda item: item[0])
    return groups


def _condition_sort_key(cond: ConditionSpec):
    return (cond.drone_count, ("V", "T", "VT").index(cond.feedback), cond.speed_class)


def analyze(
    logs_dir: Union[str, Path],
    out_dir: Union[str, Path],
    options: Optional[AnalysisOptions] = None,
) -> dict:
    """Run every report over a log directory; returns {report name: path}."""
    options = options or AnalysisOptions()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    logs = load_logs(logs_dir, strict=options.strict)
    by_condition = _group_by_condition(logs)
    conditions = sorted(by_condition, key=_condition_sort_key)

    paths = {}
    paths["table1_hand_kinematics.csv"] = _table1(out, by_condition, conditions, options)
    paths["table2_head_kinematics.csv"] = _table2(out, by_condition, conditions, options)
    paths["table3_displacement.csv"] = _table3(out, by_condition, conditions)
    paths["table4_diameters.csv"] = _table4(out, by_condition, conditions, options)
    paths["tracking_distance.csv"] = _tracking(out, by_condition, conditions)
    anova_csv, anova_txt = _anova(out, by_condition, conditions)
    paths["anova_report.csv"] = anova_csv
    paths["anova_report.txt"] = anova_txt
    paths["ttests.csv"] = _ttests(out, by_condition, conditions)
    paths["regression.csv"] = _regression(out, by_condition, conditions)
    return paths


def _table1(out, by_condition, conditions, options) -> Path:
    rows = []
    for cond in conditions:
        for pad_id in range(cond.drone_count):
            sums = []
            for _name, trial in by_condition[cond]:
                samples = _stage_samples(trial, pad_id)
                if samples is None or len(samples) < MIN_POINTS_FOR_SNAP:
                    continue
                traj = _pad_trajectory(samples, pad_id, trial.dt)
                sums.append(motion_summary(traj, options.smoothing_window))
            if not sums:
                continue
            rows.append(
                [
                    cond.feedback, cond.speed_class, cond.drone_count,
                    pad_id, hand_label(cond.drone_count, pad_id),
                    float(np.mean([m.mean_speed for m in sums])),
                    float(np.mean([m.mean_accel for m in sums])),
                    float(np.mean([m.mean_jerk for m in sums])),
                    float(np.mean([m.mean_snap for m in sums])),
                    len(sums),
                ]
            )
    path = out / "table1_hand_kinematics.csv"
    _write_csv(
        path,
        ["feedback", "speed_class", "drone_count", "pad", "hand",
         "mean_speed_mps", "mean_accel_mps2", "mean_jerk_mps3", "mean_snap_mps4",
         "n_trials"],
        rows,
    )
    return path


def _table2(out, by_condition, conditions, options) -> Path:
    rows = []
    for cond in conditions:
        if cond.drone_count != 2 or cond.feedback not in ("V", "VT"):
            continue
        sums = []
        for _name, trial in by_condition[cond]:
            traj = _head_trajectory(trial.samples, trial.dt)
            if traj is None:
                continue
            sums.append(motion_summary(traj, options.smoothing_window))
        if not sums:
            continue
        rows.append(
            [
                cond.feedback, cond.speed_class,
                float(np.mean([m.mean_speed for m in sums])),
                float(np.mean([m.mean_accel for m in sums])),
                float(np.mean([m.mean_jerk for m in sums])),
                float(np.mean([m.mean_snap for m in sums])),
                len(sums),
            ]
        )
    path = out / "table2_head_kinematics.csv"
    _write_csv(
        path,
        ["feedback", "speed_class", "mean_speed_mps", "mean_accel_mps2",
         "mean_jerk_mps3", "mean_snap_mps4", "n_trials"],
        rows,
    )
    return path


def _table3(out, by_condition, conditions) -> Path:
    rows = []
    for cond in conditions:
        for pad_id in range(cond.drone_count):
            records = [
                LandingRecord(cond, pad_id, o.displacement)
                for _name, trial in by_condition[cond]
                for o in trial.outcomes
                if o.drone_id == pad_id
            ]
            if not records:
                continue
            stats = group_stats(records)
            rows.append(
                [
                    cond.feedback, cond.speed_class, cond.drone_count,
                    pad_id, hand_label(cond.drone_count, pad_id),
                    stats.mean_mm, stats.std_mm, stats.max_mm, stats.n,
                ]
            )
    path = out / "table3_displacement.csv"
    _write_csv(
        path,
        ["feedback", "speed_class", "drone_count", "pad", "hand",
         "mean_mm", "std_mm", "max_mm", "n"],
        rows,
    )
    return path


def _table4(out, by_condition, conditions, options) -> Path:
    # pooled over speeds: pad sizing cares about all landings at a feedback type
    groups = defaultdict(list)
    for cond in conditions:
        for _name, trial in by_condition[cond]:
            for o in trial.outcomes:
                groups[(cond.feedback, cond.drone_count, o.drone_id)].append(
                    LandingRecord(cond, o.drone_id, o.displacement)
                )
    rows = []
    for (feedback, drone_count, pad_id) in sorted(
        groups, key=lambda k: (k[1], ("V", "T", "VT").index(k[0]), k[2])
    ):
        records = groups[(feedback, drone_count, pad_id)]
        d = containment_diameter(
            records, options.containment_quantile, options.center_mode
        )
        rows.append(
            [
                feedback, drone_count, pad_id, hand_label(drone_count, pad_id),
                options.containment_quantile, options.center_mode, d, len(records),
            ]
        )
    path = out / "table4_diameters.csv"
    _write_csv(
        path,
        ["feedback", "drone_count", "pad", "hand", "quantile", "center_mode",
         "diameter_m", "n"],
        rows,
    )
    return path


def _tracking(out, by_condition, conditions) -> Path:
    rows = []
    for cond in conditions:
        for pad_id in range(cond.drone_count):
            dists = []
            for _name, trial in by_condition[cond]:
                samples = _stage_samples(trial, pad_id)
                if not samples:
                    continue
                drone_xy = [(s.drones[pad_id].x, s.drones[pad_id].y) for s in samples]
                pad_xy = [(s.pads[pad_id].x, s.pads[pad_id].y) for s in samples]
                dists.append(mean_tracking_distance(drone_xy, pad_xy))
            if not dists:
                continue
            rows.append(
                [
                    cond.feedback, cond.speed_class, cond.drone_count,
                    pad_id, hand_label(cond.drone_count, pad_id),
                    float(np.mean(dists)) * 1000.0, len(dists),
                ]
            )
    path = out / "tracking_distance.csv"
    _write_csv(
        path,
        ["feedback", "speed_class", "drone_count", "pad", "hand",
         "mean_distance_mm", "n_trials"],
        rows,
    )
    return path


def _trial_mean_displacement_mm(trial: TrialLog) -> Optional[float]:
    mags = [
        1000.0 * float(np.hypot(o.displacement[0], o.displacement[1]))
        for o in trial.outcomes
    ]
    if len(mags) != trial.condition.drone_count:
        return None  # timeout left a drone unlanded; cell unusable
    return float(np.mean(mags))


def _anova(out, by_condition, conditions):
    """RM ANOVA on displacement: drone count x feedback/speed when both vary."""
    csv_path = out / "anova_report.csv"
    txt_path = out / "anova_report.txt"
    drone_counts = sorted({c.drone_count for c in conditions})
    fs_levels = sorted({(c.feedback, c.speed_class) for c in conditions})

    note = None
    table = None
    factor_names = {}
    cells = {}
    for cond in conditions:
        values = [
            _trial_mean_displacement_mm(trial) for _name, trial in by_condition[cond]
        ]
        cells[cond] = values
    n_per_cell = {len(v) for v in cells.values()}
    has_missing = any(v is None for vals in cells.values() for v in vals)

    if has_missing:
        note = "timeout trials left empty cells; ANOVA skipped"
    elif len(n_per_cell) != 1:
        note = "unequal trial counts across conditions; ANOVA skipped"
    elif next(iter(n_per_cell)) < 2:
        note = "need at least 2 trials per condition for the RM ANOVA"
    elif len(drone_counts) >= 2 and len(fs_levels) >= 2:
        missing = [
            (n, fs) for n in drone_counts for fs in fs_levels
            if ConditionSpec(fs[0], fs[1], n) not in cells
        ]
        if missing:
            note = f"non-crossed design (missing cells: {missing}); ANOVA skipped"
        else:
            data = RMDataset()
            for cond, values in cells.items():
                for subject, value in enumerate(values):
                    data.add(
                        subject,
                        cond.drone_count,
                        f"{cond.feedback}-{cond.speed_class}",
                        value,
                    )
            table = rm_anova_two_way(data)
            factor_names = {"A": "drone_count", "B": "feedback_speed", "AxB": "interaction"}
    elif len(fs_levels) >= 2:
        values = {}
        for fs in fs_levels:
            cond = ConditionSpec(fs[0], fs[1], drone_counts[0])
            if cond not in cells:
                values = None
                break
            values[f"{fs[0]}-{fs[1]}"] = cells[cond]
        if values is None:
            note = "non-crossed design; ANOVA skipped"
        else:
            table = rm_anova_one_way(values)
            factor_names = {"level": "feedback_speed"}
    else:
        note = "only one condition level present; nothing to compare"

    header = ["effect", "ss", "df", "ms", "F", "p", "error_ss", "error_df",
              "significant_at_0.05", "degenerate", "note"]
    rows = []
    lines = ["Repeated-measures ANOVA on displacement (mm)",
             "subject = trial index within condition", ""]
    if table is None:
        rows.append(["(skipped)", None, None, None, None, None, None, None, None, None, note])
        lines.append(f"skipped: {note}")
    else:
        for e in table.effects:
            rows.append(
                [factor_names.get(e.name, e.name), e.ss, e.df, e.ms, e.f, e.p,
                 e.error_ss, e.error_df, e.p < table.alpha, e.degenerate, ""]
            )
            lines.append(
                f"{factor_names.get(e.name, e.name)}: F({e.df}, {e.error_df}) = "
                f"{e.f:.4g}, p = {e.p:.4g}"
                + (" *" if e.p < table.alpha else "")
                + (" [degenerate]" if e.degenerate else "")
            )
        lines.append("")
        lines.append(f"subject SS = {table.subject_ss:.6g} (df {table.subject_df})")
        lines.append(f"alpha = {table.alpha}")
    _write_csv(csv_path, header, rows)
    txt_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return csv_path, txt_path


def _ttests(out, by_condition, conditions) -> Path:
    rows = []
    drone_counts = sorted({c.drone_count for c in conditions})
    for n in drone_counts:
        fs_conditions = sorted(
            [c for c in conditions if c.drone_count == n], key=_condition_sort_key
        )
        for pad_id in range(n):
            series = {}
            for cond in fs_conditions:
                vals = []
                for _name, trial in by_condition[cond]:
                    o = trial.outcome_for(pad_id)
                    vals.append(
                        None if o is None
                        else 1000.0 * float(np.hypot(o.displacement[0], o.displacement[1]))
                    )
                series[cond] = vals
            for i, ca in enumerate(fs_conditions):
                for cb in fs_conditions[i + 1:]:
                    a, b = series[ca], series[cb]
                    label_a = f"{ca.feedback}-{ca.speed_class}"
                    label_b = f"{cb.feedback}-{cb.speed_class}"
                    if len(a) != len(b) or any(v is None for v in a + b) or len(a) < 2:
                        rows.append([n, pad_id, hand_label(n, pad_id), label_a, label_b,
                                     len(a), None, None, None, None, "unbalanced or timeouts"])
                        continue
                    try:
                        res = paired_t_test(a, b)
                    except ZeroDivisionError as e:
                        rows.append([n, pad_id, hand_label(n, pad_id), label_a, label_b,
                                     len(a), None, None, None, None, str(e)])
                        continue
                    rows.append([n, pad_id, hand_label(n, pad_id), label_a, label_b,
                                 len(a), res.t, res.df, res.p, res.p < 0.05, ""])
    path = out / "ttests.csv"
    _write_csv(
        path,
        ["drone_count", "pad", "hand", "condition_a", "condition_b", "n",
         "t", "df", "p", "significant_at_0.05", "note"],
        rows,
    )
    return path


def _regression(out, by_condition, conditions) -> Path:
    # pooled over speeds per feedback x hand, mirroring the landing-axis figure
    groups = defaultdict(list)
    for cond in conditions:
        for _name, trial in by_condition[cond]:
            for o in trial.outcomes:
                groups[(cond.feedback, cond.drone_count, o.drone_id)].append(
                    LandingRecord(cond, o.drone_id, o.displacement)
                )
    rows = []
    for key in sorted(groups, key=lambda k: (k[1], ("V", "T", "VT").index(k[0]), k[2])):
        feedback, drone_count, pad_id = key
        records = groups[key]
        try:
            fit = landing_axis_regression(records)
        except ValueError as e:
            rows.append([feedback, drone_count, pad_id, hand_label(drone_count, pad_id),
                         len(records), None, None, None, str(e)])
            continue
        rows.append([feedback, drone_count, pad_id, hand_label(drone_count, pad_id),
                     fit.n, fit.intercept, fit.slope, fit.r_squared, ""])
    path = out / "regression.csv"
    _write_csv(
        path,
        ["feedback", "drone_count", "pad", "hand", "n", "intercept_m", "slope",
         "r_squared", "note"],
        rows,
    )
    return path
