"""Relative defect of the dilation norm identity as the grid is refined."""

import argparse

from convalg.grid import Grid, GridFunction
from convalg.operators import DilationEndo, check_dilation_norm_identity


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--T", type=float, default=64.0)
    args = ap.parse_args()
    phi = DilationEndo(args.c)

    print(f"{'h':>10} {'f':>5} " + " ".join(f"{'a=' + str(a):>10}" for a in (0.5, 1, 2)))
    for j in (8, 10, 12):
        grid = Grid(2.0**-j, args.T)
        for label, f in (("box", GridFunction.box(grid, 0, 1)),
                         ("bump", GridFunction.bump(grid, 2, 1))):
            errs = [check_dilation_norm_identity(a, f, phi=phi).extremum for a in (0.5, 1, 2)]
            print(f"{grid.h:>10.2e} {label:>5} " + " ".join(f"{e:>10.2e}" for e in errs))


if __name__ == "__main__":
    main()
