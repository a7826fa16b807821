"""Observed convergence order of the eq-comp residual under grid refinement.

For each catalog geometry (carrying the catalog trig spinor) and a few smooth
vector fields v, prints the residual at each n and the observed order
log(r_a / r_b) / log(n_b / n_a) between consecutive grids.

    python3 scripts/eqcomp_convergence.py --sizes 8 12 16 24
"""
import argparse

import numpy as np

from spinauto.geometry import Grid, LCConnection
from spinauto.scenario import catalog
from spinauto.spinc import eqcomp_residual

TWO_PI = 2 * np.pi


def smooth_vector_field(grid, seed):
    rng = np.random.default_rng(seed)
    x = grid.coords()
    base = rng.normal(size=4)
    phase = rng.uniform(0, TWO_PI, size=(4, 4))
    amp = rng.uniform(-0.2, 0.2, size=(4, 4))
    return base + np.stack(
        [sum(amp[a, b] * np.sin(TWO_PI * x[..., b] + phase[a, b]) for b in range(4)) for a in range(4)], axis=-1)


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 12, 16])
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    parser.add_argument("--geometries", nargs="+", default=["flat-kahler", "conformal-metric", "product-kahler"])
    args = parser.parse_args()

    for name in args.geometries:
        residuals = {seed: [] for seed in args.seeds}
        for n in args.sizes:
            scen = catalog(n)
            lc = LCConnection.from_metric(scen[name].metric())
            q = scen["conformal-metric"].spinor_field()
            t = 0.3 * np.sin(TWO_PI * Grid(n).coords()[..., [1, 2, 3, 0]])
            for seed in args.seeds:
                residuals[seed].append(eqcomp_residual(q, lc, t, smooth_vector_field(Grid(n), seed)))
        for seed, r in residuals.items():
            orders = [np.log(r[i] / r[i + 1]) / np.log(args.sizes[i + 1] / args.sizes[i]) for i in range(len(r) - 1)]
            print(f"{name:18s} v-seed {seed}  residual " + " ".join(f"{x:.3e}" for x in r)
                  + "  order " + " ".join(f"{o:.2f}" for o in orders))


if __name__ == "__main__":
    main()
