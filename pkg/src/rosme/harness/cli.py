"""Command line front end.

Subcommands: run (seeded batch benchmark), serve (live session over the
wire protocol), replay (recheck a recorded event log), validate (load a
world and print a summary), list-worlds. A JSON config file mirrors the
flags of run/serve; explicit flags win over file values.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import RosmeError
from ..worldmodel import list_worlds, load_world
from .benchmark import run_benchmark
from .replay import recorded_series, replay
from .session import SessionConfig

RUN_DEFAULTS = {
    "world": "small_office",
    "policy": "frontier",
    "seed": 0,
    "runs": 5,
    "duration": 300.0,
    "out": None,
}

SERVE_DEFAULTS = {
    "world": "small_office",
    "policy": "external",
    "seed": 0,
    "duration": 300.0,
    "out": None,
    "bind": "127.0.0.1:8765",
    "rt_factor": 1.0,
}


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    merged = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise RosmeError(f"config {config_path}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise RosmeError(f"config {config_path}: expected a JSON object")
        merged.update(file_cfg)
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _session_config(merged: dict) -> SessionConfig:
    kwargs = {
        "world": merged["world"],
        "policy": merged["policy"],
        "seed": int(merged["seed"]),
        "duration": float(merged["duration"]),
        "out_dir": merged.get("out"),
    }
    if "runs" in merged:
        kwargs["runs"] = int(merged["runs"])
    # config-file-only knobs
    for key in ("dt", "sample_period", "threshold", "predicate_mode"):
        if key in merged:
            kwargs[key] = merged[key]
    if "policy_params" in merged:
        kwargs["policy_params"] = dict(merged["policy_params"])
    if "sensor" in merged:
        from ..simkernel import SensorConfig

        kwargs["sensor"] = SensorConfig(**merged["sensor"])
    if "detector" in merged:
        from ..simkernel import DetectorConfig

        kwargs["detector"] = DetectorConfig(**merged["detector"])
    return SessionConfig(**kwargs)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _session_config(_merged(args, RUN_DEFAULTS))
    report = run_benchmark(cfg)
    for meta in report.run_meta:
        finals = " ".join(
            f"{name}={report.finals[name][meta['run']]:.4f}"
            for name in cfg.metrics
        )
        state = "exhausted" if meta["exhausted"] else "timed out"
        print(
            f"run {meta['run']} (seed {meta['seed']}): {finals} "
            f"t_end={meta['t_end']:.1f}s {state}"
        )
    means = " ".join(
        f"{name}={sum(report.finals[name]) / len(report.finals[name]):.4f}"
        for name in cfg.metrics
    )
    print(f"final mean over {cfg.runs} runs: {means}")
    if cfg.out_dir:
        print(f"report: {cfg.out_dir}/report.json")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    merged = _merged(args, SERVE_DEFAULTS)
    cfg = _session_config(merged)
    cfg.runs = 1
    from .server import serve

    print(f"serving {cfg.world} ({cfg.policy}) on {merged['bind']}")
    serve(cfg, merged["bind"], rt_factor=float(merged["rt_factor"]))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    recomputed = replay(args.log)
    recorded = recorded_series(args.log)
    total = 0
    for name, samples in recorded.samples.items():
        redone = recomputed.samples.get(name, [])
        if len(redone) != len(samples):
            print(
                f"{name}: recorded {len(samples)} samples, "
                f"recomputed {len(redone)}",
                file=sys.stderr,
            )
            return 1
        for a, b in zip(samples, redone):
            if a.t != b.t or a.value != b.value:
                print(
                    f"{name} tampered at t={a.t:.6f}: "
                    f"recorded {a.value!r}, recomputed {b.value!r}",
                    file=sys.stderr,
                )
                return 1
        total += len(samples)
        final = samples[-1].value if samples else 0.0
        print(f"{name}: {len(samples)} samples, final {final:.6f}")
    print(f"ok: {total} recorded samples match recomputation")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    world = load_world(args.world)
    free = int((~world.walls).sum())
    print(f"{world.name}: {world.width}x{world.height} cells at {world.resolution} m")
    print(f"free cells: {free} of {world.width * world.height}")
    print(f"objects: {len(world.objects)}")
    classes = sorted({o.class_label for o in world.objects})
    print(f"classes: {', '.join(classes)}")
    print("ok")
    return 0


def cmd_list_worlds(_: argparse.Namespace) -> int:
    for name in list_worlds():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rosme", description="semantic mapping benchmark"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a seeded multi-run benchmark")
    run_p.add_argument("--world", help="bundled world name or path")
    run_p.add_argument("--policy", choices=["frontier", "random"])
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--runs", type=int)
    run_p.add_argument("--duration", type=float, help="sim seconds per run")
    run_p.add_argument("--out", help="artifact directory")
    run_p.add_argument("--config", help="JSON file mirroring the flags")
    run_p.set_defaults(func=cmd_run)

    serve_p = sub.add_parser("serve", help="serve one live session")
    serve_p.add_argument("--world")
    serve_p.add_argument("--policy", choices=["external", "frontier", "random"])
    serve_p.add_argument("--bind", help="HOST:PORT")
    serve_p.add_argument("--seed", type=int)
    serve_p.add_argument("--duration", type=float)
    serve_p.add_argument("--out")
    serve_p.add_argument("--rt-factor", dest="rt_factor", type=float)
    serve_p.add_argument("--config")
    serve_p.set_defaults(func=cmd_serve)

    replay_p = sub.add_parser("replay", help="recheck a recorded event log")
    replay_p.add_argument("--log", required=True)
    replay_p.set_defaults(func=cmd_replay)

    validate_p = sub.add_parser("validate", help="load and check a world")
    validate_p.add_argument("--world", required=True)
    validate_p.set_defaults(func=cmd_validate)

    list_p = sub.add_parser("list-worlds", help="bundled world names")
    list_p.set_defaults(func=cmd_list_worlds)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RosmeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
