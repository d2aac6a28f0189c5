"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure
(step, horizon or enumeration caps hit, failed consistency checks).
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import game
from .continuous import HorizonExceeded, check_feasibility, load_network
from .convergence import SweepConfig, run_sweep
from .coupling import couple, exit_identity_violations
from .discrete import NonTerminationError
from .piecewise import as_fraction
from .scenario import ScenarioError, dumps_scenario, load_scenario


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact number: {text!r}")


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load(args):
    sc = load_scenario(args.scenario)
    for note in sc.warnings():
        logging.getLogger("packetflow").warning("%s", note)
    return sc


def cmd_simulate_discrete(args) -> int:
    run = couple(_load(args), origin_priority=args.origin_priority)
    with _output(args.out) as fh:
        run.log.write_csv(fh)
    return 0


def cmd_simulate_continuous(args) -> int:
    sc = _load(args)
    flow = load_network(sc.network, sc.commodities, horizon_cap=args.cap)
    problems = check_feasibility(flow)
    with _output(args.out) as fh:
        flow.write_breakpoints_csv(fh, decimal=args.decimal)
    for p in problems:
        print(f"infeasible: {p}", file=sys.stderr)
    return 2 if problems else 0


def cmd_couple(args) -> int:
    run = couple(_load(args), origin_priority=args.origin_priority)
    problems = exit_identity_violations(run.flows)
    with _output(args.out) as fh:
        run.write_refined_csv(fh, decimal=args.decimal)
    for p in problems:
        print(f"exit-time mismatch: {p}", file=sys.stderr)
    return 2 if problems else 0


def cmd_converge(args) -> int:
    sc = _load(args)
    cfg = SweepConfig(alpha0=args.alpha0, levels=args.levels, ratio=args.ratio)
    report = run_sweep(sc, cfg)
    if args.records:
        with open(args.records, "w", newline="") as fh:
            report.write_records_csv(fh, decimal=args.decimal)
    with _output(args.out) as fh:
        report.write_summary_csv(fh, decimal=args.decimal)
    return 0


def cmd_check_equilibrium(args) -> int:
    sc = _load(args)
    report = game.epsilon_check(sc, None, args.epsilon, args.cap)
    with _output(args.out) as fh:
        report.write_csv(fh)
    verdict = "equilibrium" if report.is_equilibrium else "not an equilibrium"
    print(f"{verdict} at epsilon {report.epsilon} (max improvement {report.max_improvement})", file=sys.stderr)
    return 0


def cmd_search_pne(args) -> int:
    sc = _load(args)
    found = game.exhaustive_pne_search(sc, args.cap)
    with _output(args.out) as fh:
        if not found:
            print("no pure Nash equilibrium", file=fh)
        for profile in found:
            print("equilibrium: " + "; ".join(f"{p}={' '.join(path)}" for p, path in profile.items()), file=fh)
    return 0


BUILTINS = {"no-pne": game.builtin_no_pne}


def cmd_builtin(args) -> int:
    text = dumps_scenario(BUILTINS[args.name]())
    with _output(args.out) as fh:
        fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="packetflow", description="Packet routing and flows over time on fixed paths.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings about discretization preconditions")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_cmd(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("scenario", type=Path)
        p.add_argument("--out", help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = scenario_cmd("simulate-discrete", cmd_simulate_discrete, "run the packet model, write the event log")
    p.add_argument("--origin-priority", type=int, default=None)
    p = scenario_cmd("simulate-continuous", cmd_simulate_continuous, "load the flow over time, write breakpoints")
    p.add_argument("--decimal", action="store_true")
    p.add_argument("--cap", type=_fraction, default=None, help="time horizon cap")
    p = scenario_cmd("couple", cmd_couple, "write refined packet times")
    p.add_argument("--origin-priority", type=int, default=None)
    p.add_argument("--decimal", action="store_true")
    p = scenario_cmd("converge", cmd_converge, "sweep discretizations, write the summary")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--alpha0", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--ratio", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--records", help="also write per-packet error records here")
    p.add_argument("--decimal", action="store_true")
    p = scenario_cmd("check-equilibrium", cmd_check_equilibrium, "best responses of every player")
    p.add_argument("--epsilon", type=_fraction, default=Fraction(0))
    p.add_argument("--cap", type=int, default=1000, help="max simple paths per player")
    p = scenario_cmd("search-pne", cmd_search_pne, "check every path profile")
    p.add_argument("--cap", type=int, default=1000, help="max simple paths per player")
    p = sub.add_parser("builtin", help="emit a built-in scenario")
    p.add_argument("name", choices=sorted(BUILTINS))
    p.add_argument("--out")
    p.set_defaults(func=cmd_builtin)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        if getattr(args, "levels", 1) < 1:
            raise UsageError("--levels must be positive")
        return args.func(args)
    except ScenarioError as exc:
        for path, msg in exc.diagnostics:
            print(f"{args.scenario}: {path}: {msg}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NonTerminationError, HorizonExceeded, game.PathCapExceeded, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
