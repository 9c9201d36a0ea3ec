"""``eqobs`` command line: list, check, simulate.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .catalog import BUILDERS, CHECK_ONLY, get_system
from .checks import run_checks
from .errors import ConfigError, EqobsError, IntegrationError, UsageError
from .scenario import load_scenario, run_simulation, write_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _env_seed() -> int:
    raw = os.environ.get("EQOBS_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"EQOBS_SEED is not an integer: {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eqobs", description="Equivariant observer toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list", help="list catalog systems")

    c = sub.add_parser("check", help="run sampled property checks")
    c.add_argument("--system", default="all", help="system id or 'all' (default)")
    c.add_argument("--samples", type=int, default=100, help="samples per property (default 100)")
    c.add_argument("--tol", type=float, default=None, help="override every residual tolerance")
    c.add_argument("--seed", type=int, default=None, help="seed (default $EQOBS_SEED or 0)")
    c.add_argument("--workers", type=int, default=1, help="threads (results are identical)")

    s = sub.add_parser("simulate", help="run a scenario and write a CSV trajectory")
    s.add_argument("--scenario", required=True, help="TOML scenario file")
    s.add_argument("--out", required=True, help="output CSV path")
    return p


def _cmd_list() -> int:
    for sid in BUILDERS:
        sys_ = get_system(sid)
        print(f"{sid:<18} {sys_.group.name:<4} {sys_.description}")
    for sid, desc in CHECK_ONLY.items():
        print(f"{sid:<18} {'-':<4} {desc} [check only]")
    return 0


def _cmd_check(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    report = run_checks(args.system, args.samples, args.tol, seed, args.workers)
    for r in report.results:
        print(r.line())
        if not r.passed and r.witness is not None:
            print(f"      witness: {r.witness!r}".replace("\n", "\n      "))
    n_fail = sum(not r.passed for r in report.results)
    print(f"{len(report.results) - n_fail}/{len(report.results)} properties passed")
    return 0 if report.passed else 1


def _cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    record = run_simulation(scenario)
    write_csv(record, args.out)
    print(f"wrote {len(record.rows)} rows to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_simulate(args)
    except (UsageError, ConfigError) as exc:
        print(f"eqobs: error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"eqobs: integration failed: {exc}", file=sys.stderr)
        return 1
    except EqobsError as exc:
        print(f"eqobs: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
