"""Command-line interface: ``willmore-lab run|check|list-scenarios``.

Exit status is 0 on success, 1 when a run violates one of its checks and
2 for invalid configs.
"""

import argparse
import json
import sys

from .exceptions import ConfigError
from .experiments import SCENARIOS, parse_config, run_experiment


def build_parser():
    p = argparse.ArgumentParser(prog="willmore-lab",
                                description="Area-preserving Willmore flow experiments.")
    p.add_argument("--output-dir", help="directory for trajectory and summary files")
    p.add_argument("--seed", type=int, help="seed for randomised suites (overrides the config)")
    p.add_argument("--quiet", action="store_true", help="print nothing but errors")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenario of a config file")
    run.add_argument("config")
    check = sub.add_parser("check", help="validate a config file without running it")
    check.add_argument("config")
    sub.add_parser("list-scenarios", help="list the available scenarios")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    say = (lambda *a: None) if args.quiet else print
    if args.command == "list-scenarios":
        for name, (_, doc) in SCENARIOS.items():
            print(f"{name:18s} {doc}")
        return 0
    overrides = {"seed": args.seed, "output_dir": args.output_dir}
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "check":
        say(json.dumps(cfg.resolved, indent=2, sort_keys=True))
        return 0
    status, summary = run_experiment(cfg, quiet=args.quiet)
    if summary.get("error"):
        print(f"error: {summary['error']}", file=sys.stderr)
    say(f"outputs in {cfg.output_dir}")
    return status


if __name__ == "__main__":
    sys.exit(main())
