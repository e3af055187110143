"""Command-line entry point.

    gazelab simulate|saliency|evaluate|render --config <file> --dataset <dir>
            [--out <dir>] [--filter <glob>] [--seed <u64>] [--jobs <n>] [--json]
            [--key=value ...]

Exit codes: 0 success, 1 partial failure (some images failed or missing
inputs), 2 invalid configuration or usage.
"""

import argparse
import json
import logging
import sys

from .config import ConfigError, parse_config
from .dataset import DatasetError, DatasetLayout
from .runner import cmd_evaluate, cmd_render, cmd_saliency, cmd_simulate

COMMANDS = ("simulate", "saliency", "evaluate", "render")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazelab", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", default=None, help="key=value configuration file")
    parser.add_argument("--dataset", required=True, help="normalized dataset root")
    parser.add_argument("--out", default=None, help="output directory (config key: out)")
    parser.add_argument("--filter", default=None, help="glob over stimulus stems")
    parser.add_argument("--seed", default=None, help="master seed (config key: seed)")
    parser.add_argument("--jobs", default=None, help="parallel images (config key: jobs)")
    parser.add_argument("--json", action="store_true", help="evaluate: also emit report.json and print it")
    parser.add_argument("--image", default=None, help="render: stimulus stem")
    parser.add_argument("--run", type=int, default=0, help="render: simulated run index")
    parser.add_argument("--observer", default=None, help="render: human observer id")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="gazelab: %(levelname)s: %(message)s")
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)

    overrides = list(extra)
    for key, value in (("out", args.out), ("seed", args.seed), ("jobs", args.jobs)):
        if value is not None:
            overrides.append(f"--{key}={value}")
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"gazelab: configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        layout = DatasetLayout.discover(args.dataset)
    except DatasetError as exc:
        print(f"gazelab: dataset error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "simulate":
            result = cmd_simulate(cfg, layout, args.filter)
        elif args.command == "saliency":
            result = cmd_saliency(cfg, layout, args.filter)
        elif args.command == "evaluate":
            result, report = cmd_evaluate(cfg, layout, args.filter)
            doc = report.to_json_dict()
            if args.json:
                from pathlib import Path

                (Path(cfg.out) / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
                print(json.dumps(doc, indent=2, sort_keys=True))
            else:
                print(report.to_text(), end="")
        elif args.command == "render":
            if not args.image:
                print("gazelab: render needs --image <stem>", file=sys.stderr)
                return 2
            path = cmd_render(cfg, layout, args.image, args.run, args.observer)
            print(path)
            return 0
        else:  # pragma: no cover - argparse guards
            return 2
    except ValueError as exc:
        print(f"gazelab: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"gazelab: {exc}", file=sys.stderr)
        return 1

    if not result.ok:
        for stem, msg in result.failed.items():
            print(f"gazelab: failed {stem}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
