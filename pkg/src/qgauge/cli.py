"""Command line entry point: ``qgauge run <scenario.yaml>``.

Exit codes: 0 all expectations hold, 1 an expectation failed, 2 the
scenario could not be read or validated, 3 an internal invariant broke.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .runner import SchemaError, load_scenario, run_scenario
from .sigma_models import InvariantBreach

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_INTERNAL = 0, 1, 2, 3


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def _summary(report: dict, verbose: bool) -> str:
    lines = [f"scenario {report['scenario']} ({report['workflow']}, seed {report['seed']})"]
    for key, val in sorted(report["result"].items()):
        if verbose or isinstance(val, (bool, int, str)) or val is None:
            shown = val if isinstance(val, str) else json.dumps(val, sort_keys=True)
            lines.append(f"  {key}: {shown}")
    for a in report["assertions"]:
        mark = "ok  " if a["ok"] else "FAIL"
        lines.append(f"  [{mark}] {a['path']} expected {a['expected']!r} got {a['actual']!r}")
    n_ok = sum(a["ok"] for a in report["assertions"])
    lines.append(f"{report['status']}: {n_ok}/{len(report['assertions'])} expectations hold")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgauge", description="Exact checks for gauged sigma models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to a YAML scenario")
    run.add_argument("--report", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--degree-bound", type=int, help="override params.degree_bound")
    run.add_argument("--timing", action="store_true", help="include wall time in the report")
    run.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args.scenario)
        report = run_scenario(sc, seed=args.seed, degree_bound=args.degree_bound,
                              timing=args.timing)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except InvariantBreach as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).debug("traceback", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = dumps(report)
    if args.report == "-":
        sys.stdout.write(text)
    else:
        if args.report:
            with open(args.report, "w") as fh:
                fh.write(text)
        print(_summary(report, args.verbose))
    return EXIT_OK if report["status"] == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
