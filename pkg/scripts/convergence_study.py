"""Grid-refinement study for Burgers with a sine profile, before the shock forms.

Prints the (points, h, L2, EOC) table for the scaled-omega schedule and, for
contrast, for omega held at 1.
"""

import argparse
import math

from kinlb.convergence import convergence_study


def table(rows):
    for r in rows:
        rate = "      -" if r.eoc is None else f"{r.eoc:7.4f}"
        print(f"{r.points:6d}  {r.h:10.6f}  {r.l2:.6e}  {rate}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ladder", default="40,80,160,320")
    ap.add_argument("--t-end", type=float, default=0.5 / (2 * math.pi))
    ap.add_argument("--scale", type=float, default=1.0, help="c in 1/omega - 1/2 = c dx")
    args = ap.parse_args()
    ladder = [int(n) for n in args.ladder.split(",")]

    print(f"scaled omega (c = {args.scale})")
    table(convergence_study("burgers-sine", ladder, t_end=args.t_end, diffusion_scale=args.scale))
    print("\nomega = 1")
    table(convergence_study("burgers-sine", ladder, t_end=args.t_end, omega=1.0))


if __name__ == "__main__":
    main()
