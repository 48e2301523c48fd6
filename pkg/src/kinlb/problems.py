"""Catalog of test problems.

Each :class:`Problem` bundles domain, default lattice, initial data,
boundary conditions, flux, optional source and end time (``None`` for
steady problems). Problem ids are the CLI contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import diagnostics as dg
from . import flux as fx
from .errors import InvalidInputError, UnknownProblemError
from .grid import Grid, dirichlet, outflow, periodic
from .source import SourceModel, embid_source, leveque_yee_source

ANGLES = (15, 30, 45, 60, 75)


@dataclass(frozen=True, eq=False)
class Problem:
    id: str
    domain: tuple
    points: tuple
    initial: Callable
    bcs: tuple
    flux: fx.FluxModel
    source: SourceModel | None = None
    t_end: float | None = None
    exact_id: str | None = None
    params: tuple = ()
    origin: str = ""
    description: str = ""
    hints: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.domain)

    @property
    def steady(self) -> bool:
        return self.t_end is None

    @property
    def periodic(self):
        return tuple(pair[0].kind == "periodic" for pair in self.bcs)

    def grid(self, points=None) -> Grid:
        pts = self.points if points is None else _as_points(points, self.dim)
        return Grid.from_domain(self.domain, pts, self.periodic)

    @property
    def exact(self):
        if self.exact_id is None:
            return None
        pid, params = self.exact_id, dict(self.params)
        return lambda x, t: dg.exact_solution(pid, x, t, **params)

    def _key(self):
        return (self.id, self.params, self.points, self.t_end)

    def __eq__(self, other):
        return isinstance(other, Problem) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def to_config(self) -> str:
        """Flat ``key = value`` text that :func:`problem_from_config` reads back."""
        lines = [f"problem = {self.id}", "points = " + "x".join(str(n) for n in self.points)]
        lines.append(f"t_end = {'steady' if self.t_end is None else repr(self.t_end)}")
        lines += [f"{k} = {v!r}" for k, v in self.params]
        return "\n".join(lines) + "\n"


def _as_points(points, dim):
    if isinstance(points, (int, np.integer)):
        return (int(points),) * dim
    pts = tuple(int(n) for n in points)
    if len(pts) != dim:
        raise InvalidInputError(f"need {dim} lattice extents, got {pts}")
    return pts


def parse_points(text: str):
    """'81' -> (81,), '65x33' -> (65, 33)."""
    try:
        pts = tuple(int(p) for p in str(text).lower().split("x"))
    except ValueError as exc:
        raise InvalidInputError(f"bad lattice size {text!r}") from exc
    if any(n < 3 for n in pts):
        raise InvalidInputError("lattice extents must be >= 3")
    return pts[0] if len(pts) == 1 else pts


# constructors ---------------------------------------------------------------

def linear_convection(points=41, t_end=2 * math.pi):
    return Problem(
        id="linear-convection",
        domain=((0.0, 2 * math.pi),),
        points=_as_points(points, 1),
        initial=dg.sin4,
        bcs=((periodic(), periodic()),),
        flux=fx.linear_1d(1.0),
        t_end=t_end,
        exact_id="linear-convection",
        origin="Chen & Shu (2017)",
        description="u_t + u_x = 0, u0 = sin^4 x, periodic on [0, 2 pi]",
    )


def spekreijse_angle(theta, points=65):
    theta = int(theta)
    if not 0 < theta < 90:
        raise InvalidInputError("theta must lie strictly between 0 and 90 degrees")
    return Problem(
        id=f"spekreijse-angle-{theta}",
        domain=((0.0, 1.0), (0.0, 1.0)),
        points=_as_points(points, 2),
        initial=lambda x1, x2: np.zeros_like(x1),
        bcs=((dirichlet(1.0), outflow()), (dirichlet(0.0), outflow())),
        flux=fx.angle_flux(theta),
        exact_id=f"spekreijse-angle-{theta}",
        origin="Spekreijse (1987)",
        description=f"steady linear advection along {theta} deg; u = 1 inflow on x1 = 0, 0 on x2 = 0",
    )


def _semicircle_inflow(x1, x2):
    return np.where((x1 >= -0.65) & (x1 <= -0.35), 1.0, 0.0)


def spekreijse_semicircle(points=(65, 33)):
    return Problem(
        id="spekreijse-semicircle",
        domain=((-1.0, 1.0), (0.0, 1.0)),
        points=_as_points(points, 2),
        initial=lambda x1, x2: np.zeros_like(x1),
        bcs=((dirichlet(0.0), dirichlet(0.0)), (dirichlet(_semicircle_inflow), dirichlet(0.0))),
        # clockwise circular transport about the origin
        flux=fx.linear_2d(lambda x1, x2: x2, lambda x1, x2: -x1),
        exact_id="spekreijse-semicircle",
        origin="Spekreijse (1987)",
        description="steady circular advection a = x2, b = -x1 of a band entering at the bottom",
    )


def solid_body_rotation(points=65, t_end=3.0):
    return Problem(
        id="solid-body-rotation",
        domain=((-1.0, 1.0), (-0.5, 1.5)),
        points=_as_points(points, 2),
        initial=dg.cosine_bell,
        bcs=((dirichlet(0.0), dirichlet(0.0)), (dirichlet(0.0), dirichlet(0.0))),
        flux=fx.linear_2d(lambda x1, x2: -(x2 - 0.5), lambda x1, x2: x1 - 0.5),
        t_end=t_end,
        exact_id="solid-body-rotation",
        origin="LeVeque (1996)",
        description="cosine bell rotating counter-clockwise about (0.5, 0.5)",
        hints={"contours": (0.1, 0.5, 10)},
    )


def burgers_sine(points=81, t_end=1.0):
    return Problem(
        id="burgers-sine",
        domain=((0.0, 1.0),),
        points=_as_points(points, 1),
        initial=lambda x: np.sin(2 * np.pi * x),
        bcs=((periodic(), periodic()),),
        flux=fx.burgers_1d(),
        t_end=t_end,
        exact_id="burgers-sine",
        origin="Ben-Artzi & Falcovitz (2003)",
        description="inviscid Burgers, u0 = sin(2 pi x), periodic; shock forms at t = 1/(2 pi)",
        # the refinement study stays on the smooth solution, before the shock forms
        hints={"ladder": (40, 80, 160, 320), "convergence_t_end": 0.5 / (2 * math.pi)},
    )


def burgers_square(points=41, t_end=0.6):
    return Problem(
        id="burgers-square",
        domain=((-1.0, 1.0),),
        points=_as_points(points, 1),
        initial=lambda x: np.where(np.abs(x) <= 1 / 3, 1.0, 0.0),
        bcs=((outflow(), outflow()),),
        flux=fx.burgers_1d(),
        t_end=t_end,
        exact_id="burgers-square",
        origin="Laney (1998)",
        description="Burgers square wave 1 on |x| <= 1/3, 0 elsewhere: fan plus shock",
    )


def burgers_square_sonic(points=41, t_end=0.3):
    return Problem(
        id="burgers-square-sonic",
        domain=((-1.0, 1.0),),
        points=_as_points(points, 1),
        initial=lambda x: np.where(np.abs(x) <= 1 / 3, 1.0, -1.0),
        bcs=((outflow(), outflow()),),
        flux=fx.burgers_1d(),
        t_end=t_end,
        exact_id="burgers-square-sonic",
        origin="Laney (1998)",
        description="Burgers square wave 1 on |x| <= 1/3, -1 elsewhere: sonic fan plus stationary shock",
    )


def _shock_problem(pid, left, right, points):
    return Problem(
        id=pid,
        domain=((0.0, 1.0), (0.0, 1.0)),
        points=_as_points(points, 2),
        initial=lambda x1, x2: left - 2.0 * x1,
        bcs=(
            (dirichlet(left), dirichlet(right)),
            (dirichlet(lambda x1, x2: left - 2.0 * x1), outflow()),
        ),
        flux=fx.FluxModel((fx.Burgers(), fx.Linear(1.0))),
        exact_id=pid,
        origin="Spekreijse (1987)",
        description=f"steady g1 = u^2/2, g2 = u; u = {left} left, {right} right, {left} - 2 x1 at the bottom",
    )


def normal_shock(points=65):
    return _shock_problem("spekreijse-normal-shock", 1.0, -1.0, points)


def oblique_shock(points=65):
    return _shock_problem("spekreijse-oblique-shock", 1.5, -0.5, points)


def leveque_yee(mu=1000.0, points=51, t_end=0.3):
    mu = float(mu)
    return Problem(
        id="leveque-yee",
        domain=((0.0, 1.0),),
        points=_as_points(points, 1),
        initial=lambda x: np.where(x <= 0.3, 1.0, 0.0),
        bcs=((dirichlet(1.0), outflow()),),
        flux=fx.linear_1d(1.0),
        source=leveque_yee_source(mu),
        t_end=t_end,
        exact_id="leveque-yee",
        params=(("mu", mu),),
        origin="LeVeque & Yee (1990)",
        description="u_t + u_x = -mu u (u - 1)(u - 1/2), step at x = 0.3",
        # lambda = a streams the front exactly; any lambda > a smears it into the
        # next cell, where the stiff source snaps it up to the lattice speed
        hints={"safety": 1.0},
    )


def embid(points=41):
    return Problem(
        id="embid",
        domain=((0.0, 1.0),),
        points=_as_points(points, 1),
        initial=lambda x: np.where(x <= 0.18, 1.0, -0.1),
        bcs=((dirichlet(1.0), dirichlet(-0.1)),),
        # u u_x written in conservative form
        flux=fx.burgers_1d(),
        source=embid_source(),
        exact_id="embid",
        origin="Embid, Goodman & Majda (1984)",
        description="steady u_t + (u^2/2)_x = (6x - 3) u, u(0) = 1, u(1) = -0.1",
    )


_BUILDERS = {
    "linear-convection": linear_convection,
    **{f"spekreijse-angle-{th}": (lambda th=th, **kw: spekreijse_angle(th, **kw)) for th in ANGLES},
    "spekreijse-semicircle": spekreijse_semicircle,
    "solid-body-rotation": solid_body_rotation,
    "burgers-sine": burgers_sine,
    "burgers-square": burgers_square,
    "burgers-square-sonic": burgers_square_sonic,
    "spekreijse-normal-shock": normal_shock,
    "spekreijse-oblique-shock": oblique_shock,
    "leveque-yee": leveque_yee,
    "embid": embid,
}


def problem_ids():
    return list(_BUILDERS)


def get_problem(pid: str, **params) -> Problem:
    try:
        builder = _BUILDERS[pid]
    except KeyError:
        raise UnknownProblemError(f"unknown problem {pid!r}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for {pid}: {exc}") from None


def catalog():
    return [get_problem(pid) for pid in _BUILDERS]


def problem_from_config(text: str) -> Problem:
    """Inverse of :meth:`Problem.to_config`."""
    kv = parse_kv(text)
    pid = kv.pop("problem")
    params = {}
    if "points" in kv:
        params["points"] = parse_points(kv.pop("points"))
    if "t_end" in kv:
        t = kv.pop("t_end")
        if t != "steady":
            params["t_end"] = float(t)
    for k, v in kv.items():
        params[k] = float(v)
    return get_problem(pid, **params)


def parse_kv(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out
