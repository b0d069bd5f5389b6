"""Command-line entry points: simulate, analyze, serve."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .harness import AnalysisOptions, default_config, load_config, run_batch
from .reports import analyze


def _cmd_simulate(args) -> int:
    config = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    out = Path(args.out or config.output_dir or "runs")
    manifest = run_batch(config, out, workers=args.workers)
    n = len(manifest["trials"])
    timeouts = sum(1 for t in manifest["trials"] if t["timed_out"])
    print(f"wrote {n} trial logs to {out} ({timeouts} timeout(s))")
    return 0


def _cmd_analyze(args) -> int:
    base = AnalysisOptions()
    options = AnalysisOptions(
        smoothing_window=args.smooth if args.smooth is not None else base.smoothing_window,
        containment_quantile=args.quantile,
        center_mode={"plate": "plate_center", "mean": "mean_landing_point"}[args.center],
        strict=args.strict,
    )
    paths = analyze(args.logs, args.out, options)
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .harness import load_config as load_experiment_config
    from .session import ServeConfig, create_app

    if args.config:
        exp = load_experiment_config(args.config)
        serve_config = ServeConfig(
            scenario=exp.scenario,
            photometry=exp.photometry,
            actuator=exp.actuator,
            geometry=exp.geometry,
            time_scale=args.time_scale,
            log_dir=args.log_dir,
        )
    else:
        serve_config = ServeConfig(time_scale=args.time_scale, log_dir=args.log_dir)
    app = create_app(serve_config, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _cmd_init_config(args) -> int:
    config = default_config()
    doc = {
        "scenario": {k: v for k, v in config.scenario.to_dict().items()
                     if k not in ("drone_count", "speed_class")},
        "conditions": [c.to_dict() for c in config.conditions],
        "trials_per_condition": config.trials_per_condition,
        "base_seed": config.base_seed,
        "policies": {
            "visual": {
                "position_noise_sd": config.policies.visual.position_noise_sd,
                "operator_bias_gain": config.policies.visual.operator_bias_gain,
                "pursuit_gain": config.policies.visual.pursuit_gain,
                "attention_dwell": config.policies.visual.attention_dwell,
                "unattended_estimate_freeze": config.policies.visual.unattended_estimate_freeze,
            },
            "tactile": {
                "centroid_gain": config.policies.tactile.centroid_gain,
                "dither_amplitude": config.policies.tactile.dither_amplitude,
                "dither_frequency": config.policies.tactile.dither_frequency,
                "search_speed": config.policies.tactile.search_speed,
            },
            "handover_activation": config.policies.handover_activation,
        },
        "photometry": {
            "source_intensity": config.photometry.source_intensity,
            "emit_half_angle": config.photometry.emit_half_angle,
            "accept_half_angle": config.photometry.accept_half_angle,
            "ambient_floor": config.photometry.ambient_floor,
            "saturation_current": config.photometry.saturation_current,
            "responsivity": config.photometry.responsivity,
        },
        "analysis": {
            "smoothing_window": config.analysis.smoothing_window,
            "containment_quantile": config.analysis.containment_quantile,
            "center_mode": config.analysis.center_mode,
            "strict": config.analysis.strict,
        },
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lumipad",
        description="Simulate, analyze, and play light-guided tactile drone landings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a batch of trials from a config file")
    p.add_argument("--config", help="experiment config JSON (default: built-in protocol)")
    p.add_argument("--out", help="output directory for logs + manifest")
    p.add_argument("--seed", type=int, help="override the config base seed")
    p.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="build all reports from a log directory")
    p.add_argument("--logs", required=True, help="directory of trial .jsonl logs")
    p.add_argument("--out", required=True, help="directory for report CSVs")
    p.add_argument("--smooth", type=int, default=None,
                   help="odd moving-average window for kinematics (default off)")
    p.add_argument("--quantile", type=float, default=0.9,
                   help="containment quantile (default 0.9)")
    p.add_argument("--center", choices=("plate", "mean"), default="plate",
                   help="containment circle centre (default plate)")
    p.add_argument("--strict", action="store_true",
                   help="fail on corrupt log lines instead of skipping")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("serve", help="run the interactive session server")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help="experiment config JSON for scenario/photometry")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")
    p.add_argument("--log-dir", default="session_logs",
                   help="where per-session trial logs are written")
    p.add_argument("--time-scale", type=float, default=1.0,
                   help="simulation speed multiplier (testing aid)")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("init-config", help="print or write the default config JSON")
    p.add_argument("--out", help="path to write (default: stdout)")
    p.set_defaults(func=_cmd_init_config)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
