"""Command line interface.

    richcont solve --config case.ini [--scheme tpfa|mfd] [--predictor 0|1] [--out DIR]
    richcont compare --scenario capillary|realistic [--scale S] [--out DIR] [--workers N]
    richcont verify
    richcont scenario capillary|realistic|linear [--scale S] > case.ini
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError, load_config, to_ini
from .run import compare, run
from .scenarios import SCENARIOS


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="richcont", description="Steady Richards solver with nonlinearity continuation")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one configuration file")
    s.add_argument("--config", required=True, help="scenario file (INI format)")
    s.add_argument("--scheme", choices=["tpfa", "mfd"], help="override the configured scheme")
    s.add_argument("--predictor", type=int, choices=[0, 1], help="override the predictor order")
    s.add_argument("--out", help="output directory (default from the config)")

    c = sub.add_parser("compare", help="run both schemes with both predictors")
    c.add_argument("--scenario", choices=["capillary", "realistic"], required=True)
    c.add_argument("--scale", type=float, default=None, help="resolution scale (scenario default if omitted)")
    c.add_argument("--schemes", default="tpfa,mfd", help="comma separated subset of tpfa,mfd")
    c.add_argument("--out", help="output directory")
    c.add_argument("--workers", type=int, default=1, help="run pairs in parallel worker processes")

    sub.add_parser("verify", help="analytic and patch-test checks")

    d = sub.add_parser("scenario", help="print a built-in scenario as a config file")
    d.add_argument("name", choices=sorted(SCENARIOS))
    d.add_argument("--scale", type=float, default=None)
    return ap


def _scenario(name, scale):
    factory = SCENARIOS[name]
    return factory() if scale is None else factory(scale)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            cfg = load_config(args.config)
            if args.scheme:
                cfg = cfg.with_(scheme=args.scheme)
            if args.predictor is not None:
                cfg = cfg.with_(continuation=dataclasses.replace(cfg.continuation, predictor_order=args.predictor))
            return run(cfg, args.out)
        if args.command == "compare":
            cfg = _scenario(args.scenario, args.scale)
            schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
            if not schemes or set(schemes) - {"tpfa", "mfd"}:
                raise ConfigError(f"--schemes must list tpfa and/or mfd, got {args.schemes!r}")
            table = compare(cfg, schemes, (0, 1), args.out, workers=args.workers)
            print(table.text(), end="")
            return 0 if all(r.status == "converged" for r in table.rows) else 1
        if args.command == "verify":
            from .verify import run_checks

            checks = run_checks()
            for chk in checks:
                print(chk.line())
            return 0 if all(c.passed for c in checks) else 1
        if args.command == "scenario":
            sys.stdout.write(to_ini(_scenario(args.name, args.scale)))
            return 0
    except (ConfigError, OSError) as exc:
        print(f"richcont: error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
