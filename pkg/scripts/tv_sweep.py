"""Peak total variation relative to the initial one for the Burgers square
waves, over a sweep of relaxation frequencies and lattice-speed safety factors.
"""

import argparse

from kinlb.diagnostics import total_variation
from kinlb.lattice import make_config, run
from kinlb.problems import get_problem


def peak_ratio(problem, omega, safety):
    tv = []
    cfg = make_config(problem, omega=omega, safety=safety)
    run(problem, cfg, callback=lambda s, t, u: tv.append(total_variation(u)))
    return max(tv) / tv[0], cfg.lam


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omegas", default="1.0,1.2,1.5,1.8")
    ap.add_argument("--safeties", default="1.0,1.5,2.0")
    args = ap.parse_args()
    omegas = [float(v) for v in args.omegas.split(",")]
    safeties = [float(v) for v in args.safeties.split(",")]
    for pid in ("burgers-square", "burgers-square-sonic"):
        p = get_problem(pid)
        print(pid)
        for s in safeties:
            ratios = [peak_ratio(p, om, s) for om in omegas]
            lam = ratios[0][1]
            cells = "  ".join(f"w={om:.2f}: {r:.3f}" for om, (r, _) in zip(omegas, ratios))
            print(f"  safety {s:.2f} (lambda {lam:.3f})  {cells}")


if __name__ == "__main__":
    main()
