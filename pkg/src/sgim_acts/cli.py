"""Command-line entry point: ``run``, ``eval`` and ``demo-cache`` subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import Config, ConfigError, EpisodicMemory
from .harness import EVAL_HEADER, OUT_ENV, Benchmark, default_out_dir, evaluate, run_experiment
from .learners import ALGORITHMS
from .teachers import teacher1_cache_key, teacher1_demoset

log = logging.getLogger("sgim_acts")


def _load_config(path: str | None) -> Config:
    return Config() if path is None else Config.from_json(path)


def _algorithms(text: str | None) -> tuple:
    if text is None:
        return ALGORITHMS
    names = tuple(a.strip() for a in text.split(",") if a.strip())
    unknown = [a for a in names if a not in ALGORITHMS]
    if unknown or not names:
        raise ConfigError(f"unknown algorithms {unknown}; choose from {', '.join(ALGORITHMS)}")
    return names


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        cfg = cfg.replace(n_seeds=args.seeds)
    out = Path(args.out) if args.out else default_out_dir()
    paths = run_experiment(cfg, _algorithms(args.algos), out_dir=out, jobs=args.jobs,
                           cache_dir=args.cache, save_memory=args.save_memory)
    for role, path in paths.items():
        print(f"{role}: {path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    memory = EpisodicMemory.load(args.memory, cfg)
    errs = evaluate(memory, Benchmark.default(cfg), cfg)
    print(",".join(EVAL_HEADER[3:]))
    print(",".join([str(len(memory))] + [f"{errs[k]:.10f}" for k in EVAL_HEADER[4:]]))
    return 0


def cmd_demo_cache(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    cache = Path(args.cache) if args.cache else default_out_dir() / "cache"
    thetas, outcomes = teacher1_demoset(cfg, cache, rebuild=args.rebuild)
    path = cache / f"teacher1_{teacher1_cache_key(cfg)}.json"
    print(f"teacher 1: {len(outcomes)} demonstrations in {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgim-acts",
        description="Simulated arm learning to throw and place by choosing among self-exploration and teachers.",
        epilog=f"The default output directory is ./runs, or ${OUT_ENV} when set.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the algorithm comparison and write CSVs")
    run.add_argument("--config", help="JSON config; missing keys take their defaults")
    run.add_argument("--seeds", type=int, help="number of seeds, starting at the config's seed")
    run.add_argument("--algos", help=f"comma-separated subset of: {','.join(ALGORITHMS)}")
    run.add_argument("--out", help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.add_argument("--cache", help="teacher-1 cache directory (default <out>/cache)")
    run.add_argument("--save-memory", action="store_true", help="also write each run's memory snapshot")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="evaluate a saved memory snapshot on the benchmark")
    ev.add_argument("--memory", required=True, help="memory snapshot JSON written by run --save-memory")
    ev.add_argument("--config", help="JSON config")
    ev.set_defaults(func=cmd_eval)

    dc = sub.add_parser("demo-cache", help="build or reuse the teacher-1 demonstration cache")
    dc.add_argument("--rebuild", action="store_true", help="rebuild even if a matching cache exists")
    dc.add_argument("--config", help="JSON config")
    dc.add_argument("--cache", help="cache directory (default <out>/cache)")
    dc.set_defaults(func=cmd_demo_cache)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TypeError) as exc:
        print(f"sgim-acts: config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"sgim-acts: malformed JSON: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sgim-acts: I/O error: {exc}", file=sys.stderr)
        return 3
    except (KeyError, ValueError) as exc:
        print(f"sgim-acts: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
