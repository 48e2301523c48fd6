"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines are echoed
in the terminal summary) or ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from kinlb import flux as fx
from kinlb.convergence import convergence_study
from kinlb.diagnostics import (
    EMBID_SHOCK,
    diffusion_matrix,
    is_psd,
    rotate_about_center,
    total_variation,
)
from kinlb.eo import eo_run
from kinlb.lattice import (
    build_velocity_set,
    equilibrium,
    make_config,
    moment0,
    moment1,
    problem_state_range,
    psd_holds,
    run,
)
from kinlb.problems import catalog, get_problem
from kinlb.source import solve, source_populations

RESULTS = {}


def record(number, title, ok, detail):
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def _trajectory(runner, problem, cfg):
    out = []
    runner(problem, cfg, callback=lambda s, t, u: out.append(u.copy()))
    return out


def check_equivalence():
    start = time.perf_counter()
    worst, mismatched = 0.0, []
    for problem in catalog():
        if problem.source is not None:
            continue
        cfg = make_config(problem, omega=1.0)
        lb = _trajectory(run, problem, cfg)
        eo = _trajectory(eo_run, problem, cfg)
        if len(lb) != len(eo):
            mismatched.append(problem.id)
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(lb, eo)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and not mismatched and elapsed < 10.0
    return record(1, "omega=1 LB/EO equivalence", ok,
                  f"max step diff {worst:.2e}, step-count mismatches {mismatched}, {elapsed:.1f}s")


def check_moments():
    rng = np.random.default_rng(2024)
    worst = 0.0
    models = catalog()
    for problem in models:
        dim = problem.dim
        u = rng.uniform(-2.0, 2.0, 1000)
        x = tuple(rng.uniform(lo, hi, 1000) for lo, hi in problem.domain)
        vs = build_velocity_set(dim, 4.0)
        feq = equilibrium(u, x, problem.flux, vs)
        worst = max(worst, float(np.max(np.abs(moment0(feq) - u))))
        for d in range(dim):
            worst = max(worst, float(np.max(np.abs(moment1(feq, d, vs) - problem.flux.flux(d, u, x)))))
        if problem.source is not None:
            dt = 0.01
            r = source_populations(u, x, problem.flux, problem.source, vs, dt)
            s = problem.source(u, x)
            worst = max(worst, float(np.max(np.abs(moment0(r) - dt * s))))
            a = problem.flux.speed(0, u, x)
            worst = max(worst, float(np.max(np.abs(moment1(r, 0, vs) - dt * a * s))))
    return record(2, "moment identities", worst <= 1e-12,
                  f"max residual {worst:.2e} over {len(models)} models")


def check_conservation():
    errs, drift = [], 0.0
    for n in (41, 81, 161):
        p = get_problem("linear-convection", points=n)
        field, report = run(p, make_config(p), track_error=True)
        mass = np.array(report.mass)
        drift = max(drift, float(np.max(np.abs(mass - mass[0])) / abs(mass[0])))
        errs.append(report.linf[-1])
    ok = drift <= 1e-12 and errs[0] > errs[1] > errs[2]
    return record(3, "conservation and refinement", ok,
                  f"relative mass drift {drift:.2e}, Linf after one period {[f'{e:.3g}' for e in errs]}")


def check_eoc():
    start = time.perf_counter()
    rows = convergence_study("burgers-sine", [40, 80, 160, 320], t_end=0.5 / (2 * math.pi))
    elapsed = time.perf_counter() - start
    rates = [r.eoc for r in rows[1:]]
    ok = (all(r >= 1.4 for r in rates) and all(b >= a for a, b in zip(rates, rates[1:]))
          and rates[-1] >= 1.8 and elapsed < 30.0)
    return record(4, "EOC on the Burgers sine ladder", ok,
                  f"EOC {[f'{r:.3f}' for r in rates]}, {elapsed:.1f}s")


def check_tv():
    parts, ok = [], True
    for pid in ("burgers-square", "burgers-square-sonic"):
        p = get_problem(pid)
        tv1 = [total_variation(u) for u in _trajectory(run, p, make_config(p, omega=1.0))]
        mono = all(b <= a + 1e-12 for a, b in zip(tv1, tv1[1:]))
        tv15 = [total_variation(u) for u in _trajectory(run, p, make_config(p, omega=1.5))]
        ratio = max(tv15) / tv15[0]
        ok &= mono and ratio <= 1.1
        parts.append(f"{pid}: omega=1 non-increasing={mono}, omega=1.5 max TV/TV0={ratio:.3f}")
    return record(5, "total variation", ok, "; ".join(parts))


def check_sonic():
    p = get_problem("burgers-square-sonic")
    field, _ = run(p, make_config(p))
    x, u = field.x[0], field.values
    t, third = p.t_end, 1.0 / 3.0
    fan = np.abs(x + third) < t
    uf = u[fan]
    increasing = bool(np.all(np.diff(uf) > 0))
    through_zero = uf[0] < 0 < uf[-1]
    fan_step = field.grid.dx / t  # per-cell increment of the exact fan u = (x + 1/3)/t
    biggest = float(np.max(np.diff(uf)))
    ok = increasing and through_zero and biggest <= 3 * fan_step
    return record(6, "sonic expansion fan", ok,
                  f"monotone={increasing}, crosses 0={through_zero}, largest jump {biggest:.3f} "
                  f"vs 3 x fan increment {3 * fan_step:.3f}")


def _crossing(x, u, level=0.5):
    i = np.nonzero((u[:-1] >= level) & (u[1:] < level))[0][-1]
    return x[i] + (u[i] - level) / (u[i] - u[i + 1]) * (x[i + 1] - x[i])


def check_stiff_front():
    where = {}
    for mu in (1.0, 10.0, 100.0, 1000.0):
        p = get_problem("leveque-yee", mu=mu)
        field, _ = solve(p, make_config(p))
        where[mu] = _crossing(field.x[0], field.values)
    ok = all(abs(c - 0.6) <= 0.02 for c in where.values())
    return record(7, "stiff source front location", ok,
                  ", ".join(f"mu={m:g}: {c:.4f}" for m, c in where.items()))


def check_embid():
    p = get_problem("embid")
    field, report = solve(p, make_config(p))
    x, u = field.x[0], field.values
    k = int(np.argmax(u[:-1] - u[1:]))  # jump between nodes k and k+1
    mid = 0.5 * (x[k] + x[k + 1])
    away = np.abs(x - mid) >= 1.5 * field.grid.dx
    branch = np.where(x < mid, 3 * x**2 - 3 * x + 1, 3 * x**2 - 3 * x - 0.1)
    dev = float(np.max(np.abs(u - branch)[away]))
    rh = abs(u[k - 1] + u[k + 2])
    ok = dev <= 0.05 and rh <= 0.05
    return record(8, "Embid steady state", ok,
                  f"branch Linf {dev:.4f}, |uL + uR| {rh:.4f}, jump at {mid:.4f} "
                  f"(RH root {EMBID_SHOCK:.4f}), {report.n_steps} steps")


def check_normal_shock():
    p = get_problem("spekreijse-normal-shock")
    field, report = run(p, make_config(p, steady_tol=1e-10))
    j = int(np.argmin(np.abs(field.grid.axes()[1] - 0.5)))
    x, u = field.grid.axes()[0], field.values[:, j]
    i = int(np.nonzero((u[:-1] > 0) & (u[1:] <= 0))[0][0])
    xz = x[i] + u[i] / (u[i] - u[i + 1]) * (x[i + 1] - x[i])
    ok = abs(xz - 0.5) <= field.grid.dx
    return record(9, "2D normal shock", ok,
                  f"converged in {report.n_steps} steps, u=0 at x1={xz:.4f} on x2=0.5")


def check_rotation():
    p = get_problem("solid-body-rotation", t_end=1.0)
    peaks = []
    field, _ = run(p, make_config(p), callback=lambda s, t, u: peaks.append(float(u.max())))
    i = np.unravel_index(int(np.argmax(field.values)), field.grid.shape)
    x1, x2 = (c[i] for c in field.x)
    cx, cy = rotate_about_center(0.5, 1.25, 1.0)
    dist = math.hypot(x1 - cx, x2 - cy)
    non_increasing = all(b <= a + 1e-14 for a, b in zip(peaks, peaks[1:]))
    ok = dist <= 2 * field.grid.dx and non_increasing
    return record(10, "solid-body rotation", ok,
                  f"peak at ({x1:.4f}, {x2:.4f}), {dist / field.grid.dx:.2f} cells from "
                  f"({cx:.4f}, {cy:.4f}); max non-increasing={non_increasing}")


def check_psd():
    bad = []
    for problem in catalog():
        if problem.dim != 2:
            continue
        cfg = make_config(problem)
        if not psd_holds(problem.flux, cfg.lam, problem_state_range(problem, problem.grid()), problem.domain):
            bad.append(problem.id)
    counter = diffusion_matrix(np.array(1.0), (np.array(0.0), np.array(0.0)), fx.linear_2d(1.0, 1.0), 1.0)
    rejected = not is_psd(counter)
    return record(11, "PSD guard", not bad and rejected,
                  f"failing 2D problems {bad}, counterexample rejected={rejected}")


CRITERIA = [check_equivalence, check_moments, check_conservation, check_eoc, check_tv,
            check_sonic, check_stiff_front, check_embid, check_normal_shock, check_rotation,
            check_psd]


@pytest.mark.parametrize("check", CRITERIA, ids=lambda c: c.__name__.removeprefix("check_"))
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    passed = sum(bool(c()) for c in CRITERIA)
    print(f"{passed}/{len(CRITERIA)} criteria pass")
