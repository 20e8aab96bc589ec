"""``vortexlab`` command line: ``run``, ``preset`` and ``boundary`` verbs."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from pathlib import Path

from . import __version__
from .conformal import ConformalMap
from .errors import VortexLabError
from .harness import (
    EXIT_INTERNAL,
    EXIT_VALIDATION,
    PRESETS,
    ExperimentConfig,
    _atomic_write,
    _csv,
    apply_overrides,
    preset,
    run,
    sample_boundary,
)

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-prefix", help="path prefix for output files")
    common.add_argument("--seed", type=int, help="rng seed (sets numeric.rng_seed)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads; affects wall time only")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted-path override into the config (repeatable)")

    ap = argparse.ArgumentParser(prog="vortexlab", description=__doc__)
    ap.add_argument("--version", action="version", version=f"vortexlab {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", parents=[common], help="run an experiment config")
    p_run.add_argument("config_path", nargs="?", help="config JSON file")
    p_run.add_argument("--config", dest="config_flag", help="config JSON file")

    p_pre = sub.add_parser("preset", parents=[common], help="run a named preset")
    p_pre.add_argument("name", help=f"one of: {', '.join(PRESETS)}")
    p_pre.add_argument("overrides", nargs="*", metavar="KEY=VALUE")
    p_pre.add_argument("--print-config", action="store_true",
                       help="print the resolved config and exit")

    p_bnd = sub.add_parser("boundary", help="export a boundary polyline as CSV")
    p_bnd.add_argument("domain", help="domain JSON file")
    p_bnd.add_argument("--samples", type=int, default=512)
    p_bnd.add_argument("--output-prefix", default=None)
    return ap


def _fail(status: int, kind: str, message: str) -> int:
    print(json.dumps({"status": status, "error": kind, "message": message}), file=sys.stderr)
    return status


def _resolve(args) -> ExperimentConfig:
    if args.verb == "run":
        path = args.config_flag or args.config_path
        if not path:
            raise VortexLabError("run needs a config path")
        cfg = ExperimentConfig.parse(Path(path).read_text())
        overrides = list(args.override)
    else:
        cfg = preset(args.name)
        overrides = list(args.overrides) + list(args.override)
    if args.seed is not None:
        overrides.append(f"numeric.rng_seed={args.seed}")
    return apply_overrides(cfg, overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("VORTEXLAB_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.verb == "boundary":
            raw = json.loads(Path(args.domain).read_text())
            fmap = ConformalMap.from_dict(raw.get("domain", raw))
            pts = sample_boundary(fmap, args.samples)
            out = Path(args.output_prefix or (fmap.label or "boundary")).with_suffix(".csv")
            cfg = ExperimentConfig(domain=fmap.to_dict(), experiment="boundary_export",
                                   params={"samples": args.samples})
            _atomic_write(out, _csv(cfg, ["k", "x", "y"],
                                    [[str(k), z.real, z.imag] for k, z in enumerate(pts)]))
            print(json.dumps({"status": 0, "files": [str(out)], "samples": args.samples}))
            return 0
        cfg = _resolve(args)
        if getattr(args, "print_config", False):
            sys.stdout.write(cfg.serialize())
            return 0
        outcome = run(cfg, threads=max(1, args.threads), output_prefix=args.output_prefix)
    except (VortexLabError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_VALIDATION, type(exc).__name__, str(exc))
    except Exception as exc:  # noqa: BLE001
        logging.getLogger("vortexlab").debug(traceback.format_exc())
        return _fail(EXIT_INTERNAL, type(exc).__name__, str(exc))
    print(json.dumps(outcome.summary, sort_keys=True, default=str))
    return outcome.status


if __name__ == "__main__":
    raise SystemExit(main())
