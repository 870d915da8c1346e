"""Command line: ``homogenize run <config>``, ``list-builtins``, ``version``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="homogenize", description="Run homogenization rate experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a YAML config")
    run.add_argument("config")
    sub.add_parser("list-builtins", help="list built-in fields and experiment kinds")
    sub.add_parser("version", help="print the package version")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    if args.command == "list-builtins":
        from .config import KINDS
        from .field import describe_builtins

        print("fields:")
        for name, doc in describe_builtins():
            print(f"  {name:26s} {doc}")
        print("experiments:")
        print("  " + ", ".join(KINDS))
        return 0
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    from .config import ConfigError, load_config
    from .runner import EXIT_CONFIG, run_suite

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_suite(cfg)
    stream = sys.stdout if result.status == 0 else sys.stderr
    print(result.message, file=stream)
    if result.out_dir is not None:
        print(f"artifacts in {result.out_dir}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
