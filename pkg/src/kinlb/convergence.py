"""Grid-refinement studies.

The lattice speed is chosen once on the coarsest level and reused on the
finer ones, so every level runs at the same lambda and the same dt/dx. With
the default relaxation schedule, 1/omega - 1/2 = c * dx, the numerical
diffusion dt (1/omega - 1/2)(lambda - |a|)|a| shrinks like dx^2 and the
scheme is second-order consistent on smooth data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .diagnostics import eoc
from .errors import InvalidInputError
from .lattice import make_config
from .problems import get_problem
from .source import solve

DEFAULT_DIFFUSION_SCALE = 1.0


def scaled_omega(dx, length=1.0, scale=DEFAULT_DIFFUSION_SCALE):
    """omega with 1/omega - 1/2 = scale * dx / length."""
    return 1.0 / (0.5 + scale * dx / length)


@dataclass(frozen=True)
class ConvergenceRow:
    points: int
    h: float
    l2: float
    eoc: float | None


def _level_lambda(lam, t_end, dx):
    if not t_end:
        return lam
    steps = math.ceil(t_end * lam / dx - 1e-9)
    return max(lam, steps * dx / t_end)


def convergence_study(problem_id, ladder, t_end=None, omega=None,
                      diffusion_scale=DEFAULT_DIFFUSION_SCALE, safety=None, **params):
    """L2 errors and EOCs of a 1D problem on the lattice sizes in ``ladder``.

    ``omega=None`` uses :func:`scaled_omega`; a number holds omega fixed.
    """
    ladder = [int(n) for n in ladder]
    if len(ladder) < 2:
        raise InvalidInputError("a convergence ladder needs at least two grids")
    if len(set(ladder)) != len(ladder):
        raise InvalidInputError(f"ladder {ladder} repeats a grid")
    ladder.sort()
    probe = get_problem(problem_id, points=ladder[0], **params)
    if probe.dim != 1 or probe.exact is None:
        raise InvalidInputError("convergence studies need a 1D problem with an exact solution")
    if t_end is None:
        t_end = probe.t_end
    if t_end is None:
        raise InvalidInputError("convergence studies need a finite end time")
    length = probe.domain[0][1] - probe.domain[0][0]
    lam = make_config(probe, safety=safety, t_end=t_end).lam

    rows, prev = [], None
    for n in ladder:
        problem = get_problem(problem_id, points=n, t_end=t_end, **params)
        h = problem.grid().dx
        om = scaled_omega(h, length, diffusion_scale) if omega is None else omega
        cfg = make_config(problem, omega=om, lam=_level_lambda(lam, t_end, h), t_end=t_end)
        _, report = solve(problem, cfg, track_error=True)
        err = report.l2[-1]
        rate = None if prev is None else eoc(prev[1], err, prev[0] / h)
        rows.append(ConvergenceRow(n, h, err, rate))
        prev = (h, err)
    return rows
