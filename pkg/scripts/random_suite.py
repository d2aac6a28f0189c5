"""Check the coupling and loader invariants over a range of random scenario seeds."""

import argparse

from packetflow.continuous import check_feasibility, load_network
from packetflow.convergence import WaitingBoundViolation, check_waiting_bound
from packetflow.coupling import couple, exit_identity_violations
from packetflow.instances import random_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--count", type=int, default=60)
    ap.add_argument("--full-grid", action="store_true", help="sample the waiting bound on every grid point")
    args = ap.parse_args()

    failures = 0
    for seed in range(args.start, args.start + args.count):
        sc = random_scenario(seed)
        run = couple(sc)
        notes = [f"exit identity: {v}" for v in exit_identity_violations(run.flows)]
        for c in sc.commodities:
            for arc_id in c.path:
                try:
                    check_waiting_bound(run.flows, arc_id, c.id, full_grid=args.full_grid)
                except WaitingBoundViolation as err:
                    notes.append(f"waiting bound: {err}")
        notes += [f"loader: {p}" for p in check_feasibility(load_network(sc.network, sc.commodities))]
        if notes:
            failures += 1
            print(f"seed {seed}:")
            for n in notes:
                print(f"  {n}")
    print(f"{args.count - failures}/{args.count} seeds clean")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
