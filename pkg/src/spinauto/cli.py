"""Command-line entry point.

    spinauto verify-fiber --seed 42 --count 1000
    spinauto decompose scenarios/conformal-metric.txt
    spinauto minimize scenarios/product-kahler.txt --grid-n 12
    spinauto detect scenarios/product-kahler.txt --out report.txt

Exit codes: 0 pass, 1 check failure, 2 usage or parse error, 3 degenerate input.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import suites
from .geometry import NotPositiveDefinite
from .minimization import DegenerateEverywhere
from .scenario import ScenarioError, load_scenario

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinauto", description=__doc__.split("\n")[0])
    parser.add_argument("--grid-n", type=int, default=None, help="override grid.n from the scenario file")
    parser.add_argument("--out", type=Path, default=None, help="also write the report to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-fiber", help="randomized single-fiber dictionary checks")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=_positive, default=1000)

    for name, text in (
        ("decompose", "split B into Alt, Sym0 and trace parts"),
        ("minimize", "minimize each part over the connection family"),
        ("detect", "compare closedness of sigma with minimizer coincidence"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenario", type=Path)
        p.add_argument("--grid-n", dest="sub_grid_n", type=int, default=None)
        p.add_argument("--out", dest="sub_out", type=Path, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    grid_n = getattr(args, "sub_grid_n", None) or args.grid_n
    out = getattr(args, "sub_out", None) or args.out
    try:
        if args.command == "verify-fiber":
            report = suites.verify_fiber(args.seed, args.count)
        else:
            scenario = load_scenario(args.scenario)
            if grid_n is not None:
                if grid_n < 4:
                    raise ScenarioError(f"--grid-n must be >= 4, got {grid_n}")
                scenario = scenario.with_n(grid_n)
            runner = {"decompose": suites.decompose, "minimize": suites.minimize, "detect": suites.detection}
            report = runner[args.command](scenario)
    except (ScenarioError, NotPositiveDefinite, OSError) as exc:
        print(f"spinauto: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateEverywhere as exc:
        print(f"spinauto: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    text = report.render()
    sys.stdout.write(text)
    if out is not None:
        out.write_text(text, encoding="utf-8")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
