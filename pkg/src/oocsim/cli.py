"""Command-line interface.

    oocsim run --config scenario.cfg [--scheme ooc3] [--seed 7] \
               [--out metrics.csv] [--trace trace.csv]
    oocsim compare --config scenario.cfg --out table.csv
    oocsim paper figure1|forced-timeouts|congestion|light-load

`run` executes one scenario, `compare` the same scenario under all four
schemes, and `paper` the built-in claim suites, printing PASS or FAIL per
claim and exiting 0 only if every claim holds.
"""

from __future__ import annotations

import argparse
import sys

from .engine import SimulationError
from .harness import ConfigError, build_config, compare_schemes, load_config_file, run_scenario
from .metrics import write_metrics_csv
from .scenarios import CHECKERS, check_congestion


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oocsim",
        description="Window flow control simulator with out-of-order caching policies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single scenario")
    run_p.add_argument("--config", required=True, help="key=value scenario file")
    run_p.add_argument("--scheme", choices=["ooc1", "ooc2", "ooc3", "ooc4"],
                       help="override the configured scheme")
    run_p.add_argument("--seed", type=int, help="override the configured seed")
    run_p.add_argument("--out", help="write the metrics CSV here")
    run_p.add_argument("--trace", help="write the per-event trace CSV here")

    cmp_p = sub.add_parser("compare", help="run all four schemes on one scenario")
    cmp_p.add_argument("--config", required=True, help="key=value scenario file")
    cmp_p.add_argument("--out", required=True, help="write one metrics row per scheme here")

    paper_p = sub.add_parser("paper", help="run a built-in claim suite")
    paper_p.add_argument("name", choices=sorted(CHECKERS))
    paper_p.add_argument("--seeds", type=int, default=None,
                         help="number of seeds for the congestion suite")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = build_config(load_config_file(args.config),
                               scheme=args.scheme, seed=args.seed)
            result = run_scenario(cfg, metrics_path=args.out, trace_path=args.trace)
            m = result.metrics
            print(f"{cfg.scheme} seed={cfg.seed}: delivered {m.delivered} "
                  f"in {m.sim_duration_us / 1000:.3f} ms, "
                  f"goodput {m.goodput_per_s:.2f}/s, "
                  f"{m.retransmissions} retransmissions, "
                  f"{m.timeout_events} timeouts")
            return 0
        if args.command == "compare":
            cfg = build_config(load_config_file(args.config))
            results = compare_schemes(cfg, out_path=args.out)
            for scheme, result in results.items():
                m = result.metrics
                print(f"{scheme}: delivered {m.delivered}, goodput {m.goodput_per_s:.2f}/s, "
                      f"injections {m.data_transmissions_total}")
            return 0
        if args.command == "paper":
            if args.name == "congestion" and args.seeds:
                claims = check_congestion(range(7001, 7001 + args.seeds))
            else:
                claims = CHECKERS[args.name]()
            failed = 0
            for claim in claims:
                status = "PASS" if claim.passed else "FAIL"
                failed += 0 if claim.passed else 1
                print(f"{status}: {claim.name} ({claim.detail})")
            return 0 if failed == 0 else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
