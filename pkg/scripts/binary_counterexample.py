"""The family b^(n v(t)): ratios w_{n+1}/w_n reach any size, yet no ratio
tends to infinity because it returns to b at every power of two."""

import argparse

import numpy as np

from convalg.family import WeightFamily, check_condition_c, check_wein


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--b", type=float, default=2.0)
    ap.add_argument("--m-max", type=int, default=6)
    ap.add_argument("--horizon", type=float, default=2.0**10)
    args = ap.parse_args()
    fam = WeightFamily("binary_pow_n", n_max=args.m_max, b=args.b)

    for n in (1, 2):
        rep = check_condition_c(fam, n, args.horizon)
        print(f"sup w_{n + 1}/w_{n} reaches 2^10: {rep.verdict.value}, reached at {rep.witness}")

    rep = check_wein(fam, 1, args.horizon, m_max=args.m_max)
    print(f"ratio to infinity, n=1: {rep.verdict.value}")
    for m, entry in rep.details["per_m"].items():
        ts = [t for t, _ in entry["witness"]]
        ratios = sorted({r for _, r in entry["witness"]})
        print(f"  m={m}: ratio {ratios} at t in {ts[:4]}...{ts[-1:]}")

    k = np.arange(11)
    t = 2.0**k
    print("\n t     v(t)  v(t-1)")
    for tk in t:
        print(f" {tk:<6.0f}{fam.member(1).log(tk) / np.log(args.b):>5.0f}"
              f"{fam.member(1).log(tk - 1) / np.log(args.b):>7.0f}")


if __name__ == "__main__":
    main()
