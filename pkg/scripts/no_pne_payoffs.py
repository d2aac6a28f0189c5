"""Print the pursuer/evader payoff matrix of the built-in game and its best responses."""

from packetflow.game import EVADER, PURSUER, builtin_no_pne, epsilon_check, route


def main() -> None:
    sc = builtin_no_pne()
    print(f"{'pursuer':>8} {'evader':>8} {'costs':>8}  improvable by")
    for p in ("top", "bottom"):
        for e in ("top", "bottom"):
            profile = {PURSUER: route(sc, PURSUER, p), EVADER: route(sc, EVADER, e)}
            report = epsilon_check(sc, profile)
            cost = {v.player: v.current_cost for v in report.players}
            movers = [v.player for v in report.players if v.improvement > 0]
            pair = f"({cost[PURSUER]}, {cost[EVADER]})"
            print(f"{p:>8} {e:>8} {pair:>8}  {', '.join(movers) or '-'}")


if __name__ == "__main__":
    main()
