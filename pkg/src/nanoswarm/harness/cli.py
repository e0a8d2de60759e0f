"""Command-line interface: single runs, experiment batches, replay, presets."""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from ..world import PRESET_NAMES, build_preset
from .config import ConfigError, MODES, MissionConfig
from .events import EventLog
from .experiments import (
    DEFAULT_FPS_LIST,
    run_experiment1,
    run_experiment2,
    run_experiment3,
)
from .metrics import mission_report
from .mission import run_mission


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows, fieldnames) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in fieldnames})
    path.write_text(buf.getvalue())


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> MissionConfig:
    if args.config:
        config = MissionConfig.from_text(Path(args.config).read_text())
    else:
        config = MissionConfig()
    if args.seed is not None:
        config.master_seed = args.seed
    if getattr(args, "mode", None):
        config.mode = args.mode
    config.validate()
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    out = _out_dir(args)
    log, report = run_mission(config, run_tag=f"run:{config.master_seed}")
    log.save(out / "run000.log")
    (out / "config.txt").write_text(config.to_text())
    _write_json(out / "summary.json", {"format_version": 1, **report.to_dict()})
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_replay(args) -> int:
    log = EventLog.load(args.log)
    report = mission_report(log)
    payload = {"format_version": 1, **report.to_dict()}
    if args.out:
        _write_json(_out_dir(args) / "summary.json", payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_exp1(args) -> int:
    summary = run_experiment1(
        master_seed=args.seed or 0,
        runs_override=args.runs,
        duration=args.duration,
        jobs=args.jobs,
    )
    if args.mode:
        summary["cells"] = [c for c in summary["cells"] if c["mode"] == args.mode]
    out = _out_dir(args)
    _write_json(out / "summary.json", summary)
    _write_csv(
        out / "summary.csv",
        summary["cells"],
        ["env", "mode", "runs", "crash_free_rounds", "crash_free_rate",
         "avg_crash_per_min", "avg_coverage_per_min_pct"],
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_exp2(args) -> int:
    fps_list = [float(f) for f in args.fps.split(",")] if args.fps else list(DEFAULT_FPS_LIST)
    summary = run_experiment2(
        fps_list=fps_list, n_traces=args.runs or 64, seed=args.seed or 0
    )
    out = _out_dir(args)
    _write_json(out / "summary.json", summary)
    _write_csv(
        out / "summary.csv",
        summary["per_fps"],
        ["fps", "tof_detected", "vision_only_detected", "missed", "detected",
         "detection_rate"],
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_exp3(args) -> int:
    summary = run_experiment3(
        master_seed=args.seed or 0,
        runs=args.runs or 5,
        duration=args.duration,
        jobs=args.jobs,
    )
    out = _out_dir(args)
    _write_json(out / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_presets(args) -> int:
    out = {}
    for name in PRESET_NAMES:
        out[name] = build_preset(name, args.seed or 0).to_dict()
    default = MissionConfig()
    print(json.dumps({"arenas": out, "default_config": default.to_flat()},
                     indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nanoswarm",
        description="Deterministic nano-drone swarm exploration simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, duration=None):
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--runs", type=int, default=None, help="runs per cell/batch")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        p.add_argument("--mode", choices=MODES, default=None)
        if duration is not None:
            p.add_argument("--duration", type=float, default=duration)

    p_run = sub.add_parser("run", help="run a single mission from a config file")
    p_run.add_argument("--config", help="mission config file (dotted-key text)")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_exp1 = sub.add_parser("exp1", help="obstacle-avoidance benchmark batch")
    common(p_exp1, duration=240.0)
    p_exp1.set_defaults(func=_cmd_exp1)

    p_exp2 = sub.add_parser("exp2", help="vision frame-rate detection study")
    common(p_exp2)
    p_exp2.add_argument("--fps", help="comma-separated fps values, e.g. 1,2,5,10")
    p_exp2.set_defaults(func=_cmd_exp2)

    p_exp3 = sub.add_parser("exp3", help="intra-swarm collision avoidance scoring")
    common(p_exp3, duration=120.0)
    p_exp3.set_defaults(func=_cmd_exp3)

    p_replay = sub.add_parser("replay", help="recompute a report from a stored log")
    p_replay.add_argument("log", help="event log (JSON lines)")
    p_replay.add_argument("--out", default=None)
    p_replay.set_defaults(func=_cmd_replay)

    p_presets = sub.add_parser("presets", help="emit built-in arenas and defaults")
    p_presets.add_argument("--seed", type=int, default=None)
    p_presets.set_defaults(func=_cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
