"""Sweep weco over the reference families and print which admit derivations.

usage: python scripts/derivation_dichotomy.py [--horizon 1024] [--m-max 8]
"""

import argparse

from convalg.family import builtin_families, check_weco_family


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=float, default=2.0**10)
    ap.add_argument("--m-max", type=int, default=8)
    ap.add_argument("--p", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = ap.parse_args()

    print(f"{'family':<14}" + "".join(f"{'p=' + str(p):>16}" for p in args.p))
    for name, fam in builtin_families().items():
        cells = []
        for p in args.p:
            rep = check_weco_family(fam, p, horizon=args.horizon, m_max=args.m_max)
            cells.append(rep.verdict.value)
        print(f"{name:<14}" + "".join(f"{c:>16}" for c in cells))


if __name__ == "__main__":
    main()
