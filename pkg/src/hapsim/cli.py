"""Command-line entry point: ``hapsim {coverage,predisaster,disaster,validate,defaults}``."""

import argparse
import json
import logging
import sys
import time

from .config import build_coverage, build_timeline, default_document, load_config
from .coverage import run_coverage
from .disaster import EventKind, run_timeline
from .errors import ConfigError
from .output import emit_results

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
SCENARIOS = ("dense-urban", "urban", "suburban-rural")

log = logging.getLogger("hapsim")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON overrides merged over the shipped defaults")
    common.add_argument("--seed", type=int)
    common.add_argument("--users", type=int, help="simulated users (coverage) or total users (timeline)")
    common.add_argument("--haps", type=int, help="HAPS count (coverage) or fleet size (timeline)")
    common.add_argument("--band", choices=("s", "ka"))
    common.add_argument("--scenario", choices=SCENARIOS)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hapsim", description="HAPS-assisted disaster network co-simulator")
    sub = p.add_subparsers(dest="command", required=True)
    cov = sub.add_parser("coverage", parents=[common], help="received-power CDF over the region")
    cov.add_argument("--jobs", type=int, help="worker threads")
    sub.add_parser("predisaster", parents=[common], help="sleep/offload timeline with a healthy grid")
    dis = sub.add_parser("disaster", parents=[common], help="disaster timeline from the events array")
    dis.add_argument("--methodology", choices=("none", "predisaster", "indisaster"))
    sub.add_parser("validate", parents=[common], help="check a configuration and exit")
    sub.add_parser("defaults", help="print the shipped default configuration")
    return p


def _overrides(args):
    o = {"mode": args.command if args.command in ("coverage", "predisaster", "disaster") else "coverage"}
    if args.seed is not None:
        o["seed"] = args.seed
    cov, tl, haps = {}, {}, {}
    if args.band:
        cov["band"] = "S" if args.band == "s" else "Ka"
    if args.scenario:
        cov["scenario"] = args.scenario
    if args.command == "coverage":
        if args.users is not None:
            cov["n_users"] = args.users
        if args.haps is not None:
            haps["count"] = args.haps
        if args.jobs is not None:
            cov["n_jobs"] = args.jobs
    elif args.command in ("predisaster", "disaster"):
        if args.users is not None:
            tl["users_total"] = args.users
        if args.haps is not None:
            tl["haps_fleet"] = args.haps
        if getattr(args, "methodology", None):
            tl["methodology"] = args.methodology
    for key, part in (("coverage", cov), ("timeline", tl), ("haps", haps)):
        if part:
            o[key] = part
    return o


def _run(args):
    cfg = load_config(args.config, _overrides(args))
    if args.command == "validate":
        print("configuration OK")
        return EXIT_OK
    started = time.perf_counter()
    if cfg.mode == "coverage":
        result = run_coverage(build_coverage(cfg), n_jobs=cfg.coverage.n_jobs)
        meta = {
            "band": cfg.coverage.band,
            "scenario": cfg.coverage.scenario,
            "haps_count": cfg.haps.count,
            "seed": cfg.seed,
        }
        emit_results(result, args.out, meta)
        print(
            f"median {result.median_p_rx_dbm:.2f} dBm  p5 {result.p5_p_rx_dbm:.2f} dBm  "
            f"below-sensitivity {result.below_sensitivity_fraction:.6f}"
        )
    else:
        kw = build_timeline(cfg)
        fleet = len(kw["haps_fleet"])
        kept = [
            e for e in kw["events"]
            if e.kind not in (EventKind.HAPS_UP, EventKind.HAPS_DOWN) or all(j < fleet for j in e.payload.get("haps", [0]))
        ]
        if len(kept) != len(kw["events"]):
            log.warning("dropped %d HAPS event(s) referring to platforms beyond a fleet of %d",
                        len(kw["events"]) - len(kept), fleet)
            kw["events"] = kept
        result = run_timeline(**kw)
        emit_results(result, args.out, {"scenario_name": cfg.timeline.name, "seed": cfg.seed, "haps_fleet": fleet})
        cov = result.coverage
        print(f"min coverage {cov.min():.6f}  mean coverage {cov.mean():.6f}  ticks {len(cov)}")
    log.info("finished in %.2f s, outputs in %s", time.perf_counter() - started, args.out)
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "defaults":
        print(json.dumps(default_document(), indent=2))
        return EXIT_OK
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced as a runtime failure exit code
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
