"""Command-line entry point: ``actattr {gen,run,serve,episode,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from actattr.control.config import load_config
from actattr.errors import ActAttrError
from actattr.harness.methods import METHODS, MethodResult, run_method
from actattr.harness.report import FORMATS, report
from actattr.harness.suites import GENERATORS, Suite, generate
from actattr.sim.oracles import NoiseProfile

SEED_ENV = "ACTATTR_SEED"


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _noise(spec: Optional[str]) -> NoiseProfile:
    if spec is None or spec == "calibrated":
        return NoiseProfile.calibrated()
    if spec == "zero":
        return NoiseProfile.zero()
    return NoiseProfile.load(spec)


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    suite = generate(args.family, args.n, args.seed if args.seed is not None else _default_seed())
    if args.out:
        suite.save(args.out)
    else:
        json.dump(suite.to_dict(), sys.stdout, indent=1)
        sys.stdout.write("\n")
    print(f"{suite.name}: {len(suite)} episodes, sha256 {suite.content_hash()}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    suite = Suite.load(args.suite)
    result = run_method(args.method, suite, _noise(args.noise), load_config(args.config))
    _write(json.dumps(result.to_dict(), indent=1) + "\n", args.out)
    print(f"{args.method} on {suite.name}: {result.accuracy:.3f} ({result.successes}/{result.episodes})", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from actattr.bridge.protocol import BridgeConfig
    from actattr.bridge.server import empty_world, serve
    from actattr.sim.world import load_scene

    cfg = BridgeConfig.from_env()
    bind = args.bind or f"{cfg.host}:{cfg.port}"
    factory = (lambda: load_scene(args.scene)) if args.scene else empty_world
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    serve(bind, factory, noise=_noise(args.noise), config=load_config(args.config), delay=args.delay,
          max_sessions=args.max_sessions or cfg.max_sessions)
    return 0


def cmd_episode(args) -> int:
    from actattr.bridge.episode import run_bridged_episode, run_episode
    from actattr.lang.env import LocalEnv
    from actattr.sim.world import load_scene, world_to_dict

    noise = _noise(args.noise)
    world = load_scene(args.scene)
    if args.bridge:
        result = run_bridged_episode(args.query, args.bridge, world_to_dict(world), noise, args.planner_endpoint,
                                     timeout=args.timeout)
    else:
        env = LocalEnv(world, noise, config=load_config(args.config))
        result = run_episode(args.query, env, args.planner_endpoint)
    print("=== program ===")
    print(result.program, end="" if result.program.endswith("\n") else "\n")
    print("=== trace ===")
    for entry in result.trace:
        print(json.dumps(entry, separators=(",", ":")))
    print("=== answer ===")
    print(result.answer if result.failed is None else f"failed: {result.failed} ({result.detail})")
    if result.latency:
        print("=== latency ===")
        print(json.dumps(result.latency))
    return 0 if result.failed is None else 1


def cmd_report(args) -> int:
    results = [MethodResult.load(p) for p in args.inputs]
    _write(report(results, args.format), args.out)
    figure = args.figure
    if figure is None and args.out:
        figure = str(Path(args.out).with_suffix(".png"))
    if figure:
        from actattr.harness.figures import accuracy_figure

        accuracy_figure(results, figure)
        print(f"figure written to {figure}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="actattr", description="Active attribute detection with perception-action programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded suite")
    p.add_argument("--family", choices=sorted(GENERATORS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="score one method on a suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--noise", help="profile JSON, 'zero' or 'calibrated' (default)")
    p.add_argument("--config", help="controller config JSON (default: $ACTATTR_CONFIG or bundled)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="serve primitives over the bridge")
    p.add_argument("--bind", help="HOST:PORT (default: $ACTATTR_BIND or 127.0.0.1:8765)")
    p.add_argument("--scene", help="scene each new session starts from")
    p.add_argument("--noise", default="zero")
    p.add_argument("--config")
    p.add_argument("--delay", type=float, default=0.0, help="synthetic seconds added to every call")
    p.add_argument("--max-sessions", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("episode", help="plan and run one query on one scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--planner-endpoint")
    p.add_argument("--bridge", help="run primitives on a bridge server at HOST:PORT")
    p.add_argument("--noise", default="zero")
    p.add_argument("--config")
    p.add_argument("--timeout", type=float, default=5.0)
    p.set_defaults(func=cmd_episode)

    p = sub.add_parser("report", help="tabulate result files")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.add_argument("--out")
    p.add_argument("--figure", help="bar chart path (default: next to --out)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ActAttrError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
