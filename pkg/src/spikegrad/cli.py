"""Command-line front end.

Subcommands: train, eval, gradcheck, mask-sweep, gradstats, synth-gen.
Exit codes: 0 success, 1 config error, 2 numeric abort, 3 gradcheck failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config as config_mod
from .config import ConfigError, RunConfig
from .numerics import NumericError
from . import runner

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_CHECK_FAILED = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="path to key = value config file")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--out", help="override output directory")
    p.add_argument("--precision", choices=("f32", "f64"),
                   help="override numeric precision")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikegrad",
        description="SNN training with masked surrogate gradients and "
                    "temporally weighted output decoding")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("train", "train a network and write metrics + checkpoint"),
        ("eval", "evaluate a checkpoint on the test split"),
        ("gradcheck", "finite-difference check of the backward pass"),
        ("mask-sweep", "train once per mask probability, tabulate accuracy"),
        ("gradstats", "gradient histograms per surrogate width"),
        ("synth-gen", "generate and save the synthetic temporal dataset"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "eval":
            p.add_argument("--checkpoint", help="checkpoint path "
                           "(default: <out_dir>/final.ckpt)")
        if name == "mask-sweep":
            p.add_argument("--p", type=float, nargs="+", required=True,
                           dest="p_list", help="mask probabilities to sweep")
        if name == "gradstats":
            p.add_argument("--alpha", type=float, nargs="+", required=True,
                           dest="alpha_list", help="surrogate widths")
    return parser


def _load_config(args) -> RunConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.precision is not None:
        overrides["precision"] = args.precision
    raw = config_mod.parse_file(args.config) if args.config else {}
    return RunConfig(config_mod.resolve(raw, **overrides))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "train":
            result = runner.run_train(cfg)
        elif args.command == "eval":
            result = runner.run_eval(cfg, args.checkpoint)
        elif args.command == "gradcheck":
            result = runner.run_gradcheck(cfg)
            print(json.dumps(result, sort_keys=True))
            return EXIT_OK if result["passed"] else EXIT_CHECK_FAILED
        elif args.command == "mask-sweep":
            rows = runner.run_mask_sweep(cfg, args.p_list)
            result = {"sweep": [{"p": p, "test_acc": acc} for p, acc in rows]}
        elif args.command == "gradstats":
            stats = runner.run_gradstats(cfg, args.alpha_list)
            result = {"gradstats": stats}
        else:
            result = {"path": str(runner.run_synth_gen(cfg))}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
