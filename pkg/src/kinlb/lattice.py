"""Flux-decomposed lattice Boltzmann scheme for scalar conservation laws.

Population layout along the leading axis of a distribution array
(D = 1 or 2, N = 2D + 1):

    0 .. D-1      move +lambda along axis d, carry g_d+ / lambda
    D             rest population, u - sum_d (g_d+ + g_d-) / lambda
    D+1 .. 2D     move -lambda along axis d, carry g_d- / lambda

With dt = dx / lambda every moving population hops exactly one cell per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import flux as fx
from .diagnostics import RunReport, diffusion_matrix, is_psd, l2_error, linf_error
from .errors import InstabilityError, InvalidInputError, SteadyStateError
from .grid import Grid, ScalarField, check_boundaries

STOP_EPS = 1e-8
DEFAULT_SAFETY = 1.05
PSD_RETRIES = 5


@dataclass(frozen=True)
class VelocitySet:
    dim: int
    lam: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidInputError(f"unsupported dimension {self.dim}")
        if not self.lam > 0:
            raise InvalidInputError("lattice speed must be positive")

    @property
    def n_pop(self) -> int:
        return 2 * self.dim + 1

    @cached_property
    def velocities(self) -> np.ndarray:
        v = np.zeros((self.n_pop, self.dim))
        for d in range(self.dim):
            v[d, d] = self.lam
            v[self.dim + 1 + d, d] = -self.lam
        return v

    def movement(self, n):
        """(axis, +1/-1) for a moving population, None for the rest one."""
        if n < self.dim:
            return n, 1
        if n == self.dim:
            return None
        return n - self.dim - 1, -1


def build_velocity_set(dim: int, lam: float) -> VelocitySet:
    return VelocitySet(dim, float(lam))


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    dx: float
    omega: float = 1.0
    t_end: float | None = None  # None means run to steady state
    steady_tol: float = 1e-10
    max_steps: int = 10**6

    def __post_init__(self):
        if not self.lam > 0 or not self.dx > 0:
            raise InvalidInputError("lambda and dx must be positive")
        if not 0.0 < self.omega < 2.0:
            raise InvalidInputError(f"omega must lie in (0, 2), got {self.omega}")
        if self.t_end is not None and self.t_end < 0:
            raise InvalidInputError("t_end must be non-negative")
        if self.max_steps < 1:
            raise InvalidInputError("max_steps must be positive")

    @property
    def dt(self) -> float:
        return self.dx / self.lam

    @property
    def steady(self) -> bool:
        return self.t_end is None


# equilibrium and moments --------------------------------------------------

def equilibrium(u, x, model, vset):
    """Flux-decomposed equilibrium populations, shape (N,) + shape(u)."""
    if vset.dim != model.dim:
        raise InvalidInputError("velocity set and flux model dimensions differ")
    u = np.asarray(u, dtype=float)
    D, lam = vset.dim, vset.lam
    feq = np.empty((vset.n_pop,) + u.shape)
    rest = u.copy()
    for d in range(D):
        gp, gm = model.split(d, u, x)
        feq[d] = gp / lam
        feq[D + 1 + d] = gm / lam
        rest = rest - (gp + gm) / lam
    feq[D] = rest
    return feq


def moment0(f):
    return np.asarray(f, dtype=float).sum(axis=0)


def moment1(f, d, vset):
    f = np.asarray(f, dtype=float)
    return vset.lam * (f[d] - f[vset.dim + 1 + d])


def collide(f, u, x, model, vset, omega, out=None):
    """BGK relaxation (1 - omega) f + omega f_eq(u); inputs are not modified."""
    feq = equilibrium(u, x, model, vset)
    return relax(f, feq, omega, out=out)


def relax(f, feq, omega, out=None):
    if out is None:
        return (1.0 - omega) * f + omega * feq
    np.multiply(f, 1.0 - omega, out=out)
    out += omega * feq
    return out


# streaming and boundaries -------------------------------------------------

def stream(f, vset, periodic):
    """Shift every moving population one cell along its velocity.

    ``periodic`` is a per-axis flag. On periodic axes the shift wraps around;
    otherwise the entering boundary slice keeps its pre-step value until
    :func:`apply_bc` overwrites it. Values are only moved, never combined.
    """
    out = np.empty_like(f)
    for n in range(vset.n_pop):
        mv = vset.movement(n)
        if mv is None:
            out[n] = f[n]
            continue
        axis, sign = mv
        if periodic[axis]:
            out[n] = np.roll(f[n], sign, axis=axis)
            continue
        src = [slice(None)] * f[n].ndim
        dst = [slice(None)] * f[n].ndim
        entry = [slice(None)] * f[n].ndim
        if sign > 0:
            src[axis], dst[axis], entry[axis] = slice(None, -1), slice(1, None), 0
        else:
            src[axis], dst[axis], entry[axis] = slice(1, None), slice(None, -1), -1
        out[n][tuple(dst)] = f[n][tuple(src)]
        out[n][tuple(entry)] = f[n][tuple(entry)]
    return out


def _boundary_slices(ndim, axis, side):
    """Index of the boundary row and of its inner neighbour on one side."""
    edge = [slice(None)] * ndim
    inner = [slice(None)] * ndim
    edge[axis], inner[axis] = (0, 1) if side == 0 else (-1, -2)
    return tuple(edge), tuple(inner)


def apply_bc(f, x, vset, bcs, inflow):
    """Boundary treatment after streaming (in place).

    Outflow sides copy the entering population from the inner neighbour.
    Dirichlet boundary nodes are pinned: all their populations are replaced
    by ``inflow(u_b, x_b)``, the population vector of a node held at the
    boundary value. Dirichlet wins over outflow at shared corners, and the
    later axis wins between two dirichlet sides.
    """
    ndim = f.ndim - 1
    for axis, pair in enumerate(bcs):
        for side, bc in enumerate(pair):
            if bc.kind == "outflow":
                n = axis if side == 0 else vset.dim + 1 + axis
                edge, inner = _boundary_slices(ndim, axis, side)
                f[n][edge] = f[n][inner]
    for axis, pair in enumerate(bcs):
        for side, bc in enumerate(pair):
            if bc.kind == "dirichlet":
                edge, _ = _boundary_slices(ndim, axis, side)
                xb = tuple(c[edge] for c in x)
                ub = bc.evaluate(xb, xb[0].shape)
                f[(slice(None),) + edge] = inflow(ub, xb)
    return f


def pin_dirichlet(u, x, bcs):
    """Copy of ``u`` with dirichlet boundary nodes set to their values."""
    u = np.array(u, dtype=float)
    for axis, pair in enumerate(bcs):
        for side, bc in enumerate(pair):
            if bc.kind == "dirichlet":
                edge, _ = _boundary_slices(u.ndim, axis, side)
                xb = tuple(c[edge] for c in x)
                u[edge] = bc.evaluate(xb, xb[0].shape)
    return u


# lattice speed selection ---------------------------------------------------

def problem_state_range(problem, grid):
    x = grid.coords()
    values = [np.ravel(problem.initial(*x))]
    for axis, pair in enumerate(problem.bcs):
        for side, bc in enumerate(pair):
            if bc.kind == "dirichlet":
                edge, _ = _boundary_slices(grid.dim, axis, side)
                xb = tuple(c[edge] for c in x)
                values.append(np.ravel(bc.evaluate(xb, xb[0].shape)))
    return fx.admissible_range(np.concatenate(values))


def psd_holds(model, lam, u_range, domain, samples=64):
    u, x = fx._sample_states(model, u_range, domain, samples)
    return bool(np.all(is_psd(diffusion_matrix(u, x, model, lam))))


def choose_lambda(problem, grid, safety=DEFAULT_SAFETY, t_end=None):
    """Lattice speed from the sampled wave-speed bound.

    lambda = safety * sup sum_d |a_d| over the admissible states and the domain.
    For transient runs lambda is then raised just enough that t_end is a
    whole number of steps. In 2D the diffusion-matrix PSD condition is
    checked and lambda raised by 10% per failure, at most five times.
    """
    u_range = problem_state_range(problem, grid)
    speed = fx.sup_total_speed(problem.flux, u_range, problem.domain)
    lam = safety * speed if speed > 0 else 1.0
    if problem.flux.dim == 2:
        for _ in range(PSD_RETRIES):
            if psd_holds(problem.flux, lam, u_range, problem.domain):
                break
            lam *= 1.1
        else:
            if not psd_holds(problem.flux, lam, u_range, problem.domain):
                raise InvalidInputError("no lattice speed satisfying the PSD condition found")
    if t_end:
        steps = math.ceil(t_end * lam / grid.dx - 1e-9)
        lam = max(lam, steps * grid.dx / t_end)
    return lam


def make_config(problem, points=None, omega=1.0, lam=None, safety=None,
                t_end=None, steady_tol=1e-10, max_steps=10**6):
    """SolverConfig for ``problem`` with lambda chosen unless given explicitly.

    ``safety`` defaults to the problem's own hint, else 1.05.
    """
    grid = problem.grid(points)
    if safety is None:
        safety = problem.hints.get("safety", DEFAULT_SAFETY)
    if safety < 1.0:
        raise InvalidInputError("the lambda safety factor must be >= 1")
    if t_end is None and not problem.steady:
        t_end = problem.t_end
    if lam is None:
        lam = choose_lambda(problem, grid, safety, t_end)
    else:
        bound = fx.sup_total_speed(problem.flux, problem_state_range(problem, grid), problem.domain)
        if lam < bound * (1 - 1e-12):
            raise InvalidInputError(f"lambda {lam} is below the wave-speed bound {bound:.6g}")
    return SolverConfig(lam=float(lam), dx=grid.dx, omega=omega, t_end=t_end,
                        steady_tol=steady_tol, max_steps=max_steps)


# time loop ----------------------------------------------------------------

@dataclass
class LBState:
    f: np.ndarray
    u: np.ndarray
    step: int = 0
    t: float = 0.0


@dataclass
class Lattice:
    """Everything a step needs besides the state."""

    grid: Grid
    vset: VelocitySet
    model: fx.FluxModel
    bcs: tuple
    config: SolverConfig
    source: object = None

    @cached_property
    def x(self):
        return self.grid.coords()

    def equilibrium(self, u):
        return equilibrium(u, self.x, self.model, self.vset)

    def inflow(self, ub, xb):
        return equilibrium(ub, xb, self.model, self.vset)


def setup(problem, config, points=None) -> Lattice:
    grid = problem.grid(points)
    if not math.isclose(grid.dx, config.dx, rel_tol=1e-12):
        raise InvalidInputError(f"config dx {config.dx} does not match lattice dx {grid.dx}")
    check_boundaries(problem.bcs, grid.dim)
    vset = build_velocity_set(grid.dim, config.lam)
    return Lattice(grid, vset, problem.flux, problem.bcs, config, problem.source)


def initial_state(problem, lat: Lattice) -> LBState:
    u0 = np.asarray(problem.initial(*lat.x), dtype=float) * np.ones(lat.grid.shape)
    u0 = pin_dirichlet(u0, lat.x, lat.bcs)
    return LBState(f=lat.equilibrium(u0), u=u0)


def step(state: LBState, lat: Lattice) -> LBState:
    """collide -> stream -> boundaries -> u = sum_n f_n."""
    fstar = relax(state.f, lat.equilibrium(state.u), lat.config.omega)
    f = stream(fstar, lat.vset, lat.grid.periodic)
    apply_bc(f, lat.x, lat.vset, lat.bcs, lat.inflow)
    u = moment0(f)
    n = state.step + 1
    if not np.all(np.isfinite(u)):
        raise InstabilityError(n)
    return LBState(f=f, u=u, step=n, t=n * lat.config.dt)


def time_loop(state, lat, advance, exact=None, track_error=False, callback=None):
    """Shared driver for transient and steady runs.

    Transient runs stop once t_end - t <= 1e-8. Steady runs stop when the
    max-norm change of u in one step drops below steady_tol.
    """
    cfg = lat.config
    report = RunReport()
    vol = lat.grid.cell_volume

    def errors(st):
        if exact is None:
            return None
        fld = ScalarField(lat.grid, st.u)
        ex = lambda *xx: exact(xx, st.t)
        return l2_error(fld, ex), linf_error(fld, ex)

    report.record(state.step, state.t, state.u, vol, errors(state) if track_error else None)
    if callback is not None:
        callback(state.step, state.t, state.u)
    while True:
        if cfg.steady:
            if state.step >= cfg.max_steps:
                raise SteadyStateError(
                    f"steady state not reached within {cfg.max_steps} steps")
        elif cfg.t_end - state.t <= STOP_EPS:
            break
        new = advance(state, lat)
        change = float(np.max(np.abs(new.u - state.u)))
        state = new
        report.record(state.step, state.t, state.u, vol, errors(state) if track_error else None)
        if callback is not None:
            callback(state.step, state.t, state.u)
        if cfg.steady and change < cfg.steady_tol:
            break
    if exact is not None and not track_error:
        # final-state errors only
        e = errors(state)
        report.l2 = [math.nan] * (len(report.steps) - 1) + [e[0]]
        report.linf = [math.nan] * (len(report.steps) - 1) + [e[1]]
    report.finish()
    return state, report


def run(problem, config, points=None, track_error=False, callback=None):
    """Collide-stream run of a homogeneous problem: returns (ScalarField, RunReport)."""
    lat = setup(problem, config, points)
    state = initial_state(problem, lat)
    state, report = time_loop(state, lat, step, problem.exact, track_error, callback)
    return ScalarField(lat.grid, state.u), report


def with_omega(config, omega):
    return replace(config, omega=omega)
