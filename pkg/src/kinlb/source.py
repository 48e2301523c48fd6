"""Source-term extension: mesoscopic source populations and the
effective-population loop.

The scheme advances effective populations F_n = f_n - r_n / 2. After
streaming, sum_n F_n = u - dt/2 s(u), which is inverted cell by cell for u
(Newton from the previous value, bisection as fallback) before recovering
f_n = F_n + r_n(u) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InstabilityError, InvalidInputError, InversionError
from .grid import ScalarField
from .lattice import (
    LBState,
    Lattice,
    apply_bc,
    equilibrium,
    initial_state,
    moment0,
    relax,
    setup,
    stream,
    time_loop,
)
from .lattice import run as run_homogeneous

INVERT_TOL = 1e-12
NEWTON_MAX_ITER = 50
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class SourceModel:
    s: Callable  # s(u, x)
    ds: Callable  # ds/du(u, x)

    def __call__(self, u, x):
        return np.asarray(self.s(u, x), dtype=float)

    def derivative(self, u, x):
        return np.asarray(self.ds(u, x), dtype=float)


def zero_source() -> SourceModel:
    return SourceModel(lambda u, x: np.zeros_like(np.asarray(u, dtype=float)),
                       lambda u, x: np.zeros_like(np.asarray(u, dtype=float)))


def leveque_yee_source(mu: float) -> SourceModel:
    """s(u) = -mu u (u - 1) (u - 1/2)."""
    return SourceModel(
        lambda u, x: -mu * u * (u - 1.0) * (u - 0.5),
        lambda u, x: -mu * (3.0 * u * u - 3.0 * u + 0.5),
    )


def embid_source() -> SourceModel:
    """s(u; x) = (6x - 3) u."""
    return SourceModel(lambda u, x: (6.0 * x[0] - 3.0) * u,
                       lambda u, x: (6.0 * x[0] - 3.0) * np.ones_like(u))


def source_populations(u, x, model, source, vset, dt):
    """r_n with sum_n r_n = dt s and sum_n v_n r_n = dt a s in every direction."""
    u = np.asarray(u, dtype=float)
    D, lam = vset.dim, vset.lam
    s = dt * np.broadcast_to(source(u, x), u.shape)
    r = np.empty((vset.n_pop,) + u.shape)
    rest = np.ones(u.shape)
    for d in range(D):
        ap, am = model.speed_split(d, u, x)
        r[d] = s * ap / lam
        r[D + 1 + d] = s * am / lam
        rest = rest - (ap + am) / lam
    r[D] = s * rest
    return r


def collide_with_source(f, u, x, model, source, vset, omega, dt):
    """(1 - omega) f + omega f_eq(u) + r(u) / 2, as effective populations."""
    feq = equilibrium(u, x, model, vset)
    r = source_populations(u, x, model, source, vset, dt)
    return relax(f, feq, omega) + 0.5 * r


def _bisect_cell(h, guess):
    """Bracket a sign change of scalar ``h`` around ``guess`` and bisect it."""
    k = 1.0
    for _ in range(MAX_DOUBLINGS):
        lo, hi = guess - k, guess + k
        hlo, hhi = h(lo), h(hi)
        if np.sign(hlo) != np.sign(hhi) or hlo == 0 or hhi == 0:
            break
        k *= 2.0
    else:
        return None
    if hlo == 0:
        return lo
    if hhi == 0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        hm = h(mid)
        if hm == 0 or hi - lo <= 4e-16 * max(1.0, abs(mid)):
            return mid
        if np.sign(hm) == np.sign(hlo):
            lo, hlo = mid, hm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def moment_invert(F_sum, x, source, dt, u_guess):
    """Solve u - dt/2 s(u; x) = F_sum cellwise, starting Newton at ``u_guess``.

    Works on arrays (x a tuple of matching coordinate arrays) or scalars.
    Cells where 50 Newton steps do not reach |residual| < 1e-12 fall back to
    bisection on a bracket around the guess that doubles until it changes sign.
    """
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    F = np.asarray(F_sum, dtype=float)
    scalar = F.ndim == 0
    F = np.atleast_1d(F)
    u = np.broadcast_to(np.asarray(u_guess, dtype=float), F.shape).copy()
    xs = tuple(np.broadcast_to(np.asarray(c, dtype=float), F.shape) for c in x)
    half = 0.5 * dt

    def resid(v):
        return v - half * source(v, xs) - F

    r = resid(u)
    for _ in range(NEWTON_MAX_ITER):
        active = np.abs(r) >= INVERT_TOL
        if not active.any():
            break
        dr = 1.0 - half * source.derivative(u, xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            u_new = u - r / dr
        u = np.where(active & np.isfinite(u_new), u_new, u)
        r = resid(u)
    bad = ~(np.abs(r) < INVERT_TOL)
    guesses = np.broadcast_to(np.asarray(u_guess, dtype=float), F.shape)
    for idx in zip(*np.nonzero(bad)):
        xi = tuple(np.array([c[idx]]) for c in xs)
        Fi = F[idx]
        h = lambda v, xi=xi, Fi=Fi: float(v - half * source(np.array([v]), xi)[0] - Fi)
        root = _bisect_cell(h, float(guesses[idx]))
        res = abs(h(root)) if root is not None else float(abs(r[idx]))
        # bisection ends at the float resolution of the root
        if root is None or not res < max(INVERT_TOL, 64 * np.finfo(float).eps * abs(Fi)):
            raise InversionError(idx, res)
        u[idx] = root
    return float(u[0]) if scalar else u


@dataclass
class SourceLattice(Lattice):
    def sources(self, u, x=None):
        x = self.x if x is None else x
        return source_populations(u, x, self.model, self.source, self.vset, self.config.dt)

    def inflow(self, ub, xb):
        # effective populations F = f_eq - r/2 of a node held at ub
        return equilibrium(ub, xb, self.model, self.vset) - 0.5 * self.sources(ub, xb)


def step_with_source(state: LBState, lat: SourceLattice) -> LBState:
    u = state.u
    fstar = relax(state.f, lat.equilibrium(u), lat.config.omega) + 0.5 * lat.sources(u)
    F = stream(fstar, lat.vset, lat.grid.periodic)
    apply_bc(F, lat.x, lat.vset, lat.bcs, lat.inflow)
    u_new = moment_invert(moment0(F), lat.x, lat.source, lat.config.dt, u)
    n = state.step + 1
    if not np.all(np.isfinite(u_new)):
        raise InstabilityError(n)
    f = F + 0.5 * lat.sources(u_new)
    return LBState(f=f, u=u_new, step=n, t=n * lat.config.dt)


def setup_with_source(problem, config, points=None) -> SourceLattice:
    base = setup(problem, config, points)
    if base.source is None:
        raise InvalidInputError(f"problem {problem.id!r} has no source term")
    return SourceLattice(base.grid, base.vset, base.model, base.bcs, base.config, base.source)


def run_with_source(problem, config, points=None, track_error=False, callback=None):
    """Run a problem with a source term: returns (ScalarField, RunReport)."""
    lat = setup_with_source(problem, config, points)
    state = initial_state(problem, lat)
    state, report = time_loop(state, lat, step_with_source, problem.exact, track_error, callback)
    return ScalarField(lat.grid, state.u), report


def solve(problem, config, points=None, track_error=False, callback=None):
    """Dispatch to the source-aware loop when the problem carries a source."""
    if problem.source is not None:
        return run_with_source(problem, config, points, track_error, callback)
    return run_homogeneous(problem, config, points, track_error, callback)
