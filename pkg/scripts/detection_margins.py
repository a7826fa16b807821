"""Both detection verdicts with their margins for catalog and random scenarios.

A margin is measured / tolerance; verdicts flip where it crosses 1.

    python3 scripts/detection_margins.py --grid-n 16 --random 10
"""
import argparse

from spinauto.geometry import LCConnection
from spinauto.minimization import detect
from spinauto.scenario import catalog, random_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--grid-n", type=int, default=16)
    parser.add_argument("--random", type=int, default=10)
    args = parser.parse_args()

    scenarios = list(catalog(args.grid_n).values())
    scenarios += [random_scenario(seed, args.grid_n) for seed in range(args.random)]
    print(f"{'scenario':18s} {'dsigma/tol_d':>13s} {'discrep/tol_m':>14s}  direct criterion outcome")
    for s in scenarios:
        r = detect(s.spinor_field(), LCConnection.from_metric(s.metric()))
        print(f"{s.name:18s} {r.dsigma_max / r.tol_d:13.3e} {r.discrepancy / r.tol_m:14.3e}  "
              f"{str(r.symplectic):6s} {str(r.criterion):9s} {r.outcome}")


if __name__ == "__main__":
    main()
