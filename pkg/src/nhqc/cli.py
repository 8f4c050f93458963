"""Command-line interface.

    nhqc <subcommand> [--config FILE] [--out DIR] [--key value ...]

Subcommands: spectrum, winding, winding-map, evolve-ct, evolve-qw, reproduce.
Any configuration key can be overridden on the command line as ``--key value``
(overrides win over the config file). Exit codes: 0 success, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import build_config, load_config_file
from .errors import ConfigError, NumericalError
from .experiments import reproduce_all, run

_SUBCOMMANDS = ("spectrum", "winding", "winding-map", "evolve-ct", "evolve-qw", "reproduce")


def _parse_overrides(tokens: list[str]) -> dict:
    overrides: dict = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise ConfigError(f"expected --key value pairs, got {token!r}")
        key = token[2:].replace("-", "_")
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for override --{key}")
            i += 1
            value = tokens[i]
        overrides[key] = value
        i += 1
    return overrides


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nhqc",
        description="Non-Hermitian quasicrystal spectra, winding numbers and transport.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        # allow_abbrev=False keeps model keys like --h out of --help's prefix match
        p = sub.add_parser(name, help=f"run the {name} experiment", allow_abbrev=False)
        p.add_argument("--config", default=None, help="TOML or JSON config file")
        p.add_argument("--out", default=None, help="output directory")
        if name == "reproduce":
            p.add_argument("--only", default=None, help="run a single figure: fig1..fig4")

    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _parse_overrides(extra)
        if args.command == "reproduce":
            if overrides:
                raise ConfigError("reproduce takes no overrides; figure parameters are canonical")
            results = reproduce_all(args.out or "out", only=args.only)
            for fig, result in sorted(results.items()):
                print(f"{fig}: {result['out']}")
            return 0
        data = load_config_file(args.config) if args.config else {}
        overrides["experiment"] = args.command
        if args.out is not None:
            overrides["out"] = args.out
        config = build_config(data, overrides)
        result = run(config)
        print(f"wrote {len(result['files'])} files to {result['out']}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
