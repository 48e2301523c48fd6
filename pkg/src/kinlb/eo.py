"""Engquist-Osher finite-volume scheme, kept independent of the lattice code.

    u_i <- u_i - (dt/dx) sum_d [g_d+(u_i) - g_d+(u_{i-e_d})]
               + (dt/dx) sum_d [g_d-(u_{i+e_d}) - g_d-(u_i)]

Boundaries use one ghost layer per side, either the periodic image or a copy
of the boundary node; dirichlet nodes are then reset to their values after
every update. Only the FluxModel is shared with the lattice Boltzmann path.
"""

from __future__ import annotations

import numpy as np

from .diagnostics import RunReport, l2_error, linf_error
from .errors import CFLError, InstabilityError, SteadyStateError
from .grid import ScalarField, check_boundaries

STOP_EPS = 1e-8


def _padded(values, grid, bcs, axis):
    """``values`` plus one ghost layer on both ends of ``axis``; also the padded coordinates."""
    x = grid.coords()
    lo_bc = bcs[axis][0]
    take = lambda arr, i: np.take(arr, [i], axis=axis)
    if lo_bc.kind == "periodic":
        lo_ghost, hi_ghost = take(values, -1), take(values, 0)
    else:
        lo_ghost, hi_ghost = take(values, 0), take(values, -1)
    padded = np.concatenate([lo_ghost, values, hi_ghost], axis=axis)
    # ghost coordinates: those of the boundary row (used only by x-dependent fluxes)
    xs = tuple(np.concatenate([take(c, 0), c, take(c, -1)], axis=axis) for c in x)
    return padded, xs


def cfl_number(u, grid, model, dt):
    x = grid.coords()
    return max(float(np.max(np.abs(model.speed(d, u, x)))) for d in range(model.dim)) * dt / grid.dx


def eo_update(u, grid, model, bcs, dt, check_cfl=True):
    """One Engquist-Osher step of the field ``u`` (an array on ``grid``)."""
    u = np.asarray(u, dtype=float)
    if check_cfl:
        c = cfl_number(u, grid, model, dt)
        if c > 1.0 + 1e-12:
            raise CFLError(f"CFL number {c:.6g} exceeds 1")
    ratio = dt / grid.dx
    new = u.copy()
    for d in range(model.dim):
        up, xs = _padded(u, grid, bcs, d)
        gp, gm = model.split(d, up, xs)
        n = up.shape[d]
        centre = [slice(None)] * u.ndim
        left = [slice(None)] * u.ndim
        right = [slice(None)] * u.ndim
        centre[d], left[d], right[d] = slice(1, n - 1), slice(0, n - 2), slice(2, n)
        centre, left, right = tuple(centre), tuple(left), tuple(right)
        new -= ratio * (gp[centre] - gp[left])
        new += ratio * (gm[right] - gm[centre])
    return _pin(new, grid, bcs)


def _pin(u, grid, bcs):
    """Hold dirichlet nodes at their values; later axes win at corners."""
    x = grid.coords()
    for axis, (lo_bc, hi_bc) in enumerate(bcs):
        for index, bc in ((0, lo_bc), (-1, hi_bc)):
            if bc.kind != "dirichlet":
                continue
            sl = [slice(None)] * u.ndim
            sl[axis] = index
            sl = tuple(sl)
            u[sl] = bc.evaluate(tuple(c[sl] for c in x), u[sl].shape)
    return u


def eo_run(problem, config, points=None, track_error=False, callback=None):
    """Engquist-Osher counterpart of the lattice run with the same dt and stopping rule."""
    grid = problem.grid(points)
    check_boundaries(problem.bcs, grid.dim)
    dt = config.dt
    x = grid.coords()
    u = _pin(np.asarray(problem.initial(*x), dtype=float) * np.ones(grid.shape), grid, problem.bcs)
    report = RunReport()
    vol = grid.cell_volume

    def errors(vals, t):
        if problem.exact is None or not track_error:
            return None
        fld = ScalarField(grid, vals)
        ex = lambda *xx: problem.exact(xx, t)
        return l2_error(fld, ex), linf_error(fld, ex)

    step, t = 0, 0.0
    report.record(step, t, u, vol, errors(u, t))
    if callback is not None:
        callback(step, t, u)
    while True:
        if config.steady:
            if step >= config.max_steps:
                raise SteadyStateError(f"steady state not reached within {config.max_steps} steps")
        elif config.t_end - t <= STOP_EPS:
            break
        new = eo_update(u, grid, problem.flux, problem.bcs, dt)
        step += 1
        t = step * dt
        if not np.all(np.isfinite(new)):
            raise InstabilityError(step)
        change = float(np.max(np.abs(new - u)))
        u = new
        report.record(step, t, u, vol, errors(u, t))
        if callback is not None:
            callback(step, t, u)
        if config.steady and change < config.steady_tol:
            break
    report.finish()
    return ScalarField(grid, u), report
