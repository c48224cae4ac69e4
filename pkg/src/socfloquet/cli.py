"""Command-line entry point ``sim``.

Usage::

    sim evolve|spectrum|chi|effective|validity [--config FILE] [--out DIR] [--key value ...]
    sim figure <name> [--config FILE] [--out DIR] [--key value ...]

Overrides use the configuration-file keys (``--drive-ratio 2.405`` and
``--drive_ratio=2.405`` are equivalent) and win over the file.  Written
CSV paths go to stdout; failures print one JSON error record to stderr
and exit non-zero.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import RUNS, build_config, parse_config, parse_entries
from .errors import ConfigParseError, InvalidArgumentError, SimulationError
from .recipes import FIGURES, get_recipe, write_recipe
from .runner import run_and_write

EXIT_USAGE = 2
EXIT_FAILURE = 1


def _parse_overrides(extra):
    pairs, i = [], 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigParseError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigParseError(f"override {tok} needs a value")
            value = extra[i + 1]
            i += 2
        pairs.append((key.replace("-", "_"), value))
    return pairs


def _file_entries(path):
    if path is None:
        return ""
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _error(exc: Exception, code: int) -> int:
    record = {"error": type(exc).__name__, "message": str(exc)}
    line = getattr(exc, "line", None)
    if line is not None:
        record["line"] = line
    print(json.dumps(record), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sim", description="Driven spin-orbit-coupled lattice with an impurity.")
    ap.add_argument("command", choices=RUNS + ("figure",))
    ap.add_argument("name", nargs="?", help=f"figure recipe: {', '.join(FIGURES)}")
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--out", default=".", help="output directory for CSV files")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = _parse_overrides(extra)
        text = _file_entries(args.config)
        if args.command == "figure":
            if not args.name:
                raise InvalidArgumentError(f"figure needs a name: {', '.join(FIGURES)}")
            recipe = get_recipe(args.name)
            # file and command-line entries adjust every step (integrator, workers, ...)
            entries = parse_entries(text, overrides)
            if "run" in entries:
                raise ConfigParseError("figure recipes fix the run kind", entries["run"][1])
            steps = tuple((s, build_config(entries, base=c)) for s, c in recipe.steps)
            paths = write_recipe(type(recipe)(recipe.name, recipe.description, steps), args.out)
        else:
            if args.name:
                raise InvalidArgumentError(f"unexpected argument {args.name!r}")
            cfg = parse_config(text, overrides + [("run", args.command)])
            paths = run_and_write(cfg, args.out, prefix=f"{args.command}_")
    except (ConfigParseError, InvalidArgumentError) as exc:
        return _error(exc, EXIT_USAGE)
    except SimulationError as exc:
        return _error(exc, EXIT_FAILURE)
    except OSError as exc:
        return _error(exc, EXIT_FAILURE)
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
