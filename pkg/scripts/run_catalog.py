"""Run every catalog problem on its default lattice and summarise the outcome."""

import argparse

from kinlb.lattice import make_config
from kinlb.problems import catalog
from kinlb.source import solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", type=float, default=1.0)
    args = ap.parse_args()
    print(f"{'problem':28s} {'lambda':>8s} {'steps':>6s} {'t':>9s} {'L2 err':>10s} {'wall':>6s}")
    for p in catalog():
        cfg = make_config(p, omega=args.omega)
        field, rep = solve(p, cfg)
        err = rep.l2[-1] if rep.l2 else float("nan")
        print(f"{p.id:28s} {cfg.lam:8.4f} {rep.n_steps:6d} {rep.t[-1]:9.4f} {err:10.3e} {rep.wall_time:6.2f}")


if __name__ == "__main__":
    main()
