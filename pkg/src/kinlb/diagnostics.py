"""Total variation, error norms, EOC, diffusion-matrix check and exact solutions."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, KinlbError, UnknownProblemError

PSD_DIAG_TOL = 1e-14
PSD_DET_TOL = 1e-12


def total_variation(u) -> float:
    """Sum of |u[i+1] - u[i]|; for 2D arrays the sum runs over both axes."""
    u = np.asarray(u, dtype=float)
    return float(sum(np.abs(np.diff(u, axis=ax)).sum() for ax in range(u.ndim)))


def _lattice_error(field, exact):
    x = field.grid.coords()
    return field.values - np.asarray(exact(*x), dtype=float)


def l2_error(field, exact) -> float:
    """sqrt(dx^D * sum (u - exact)^2)."""
    err = _lattice_error(field, exact)
    return float(math.sqrt(field.grid.cell_volume * np.sum(err * err)))


def linf_error(field, exact) -> float:
    return float(np.max(np.abs(_lattice_error(field, exact))))


def eoc(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    if e_coarse <= 0 or e_fine <= 0:
        raise InvalidInputError("EOC needs positive errors")
    return math.log(e_coarse / e_fine) / math.log(ratio)


def diffusion_matrix(u, x, model, lam):
    """Numerical-diffusion matrix of the 2D scheme, shape (..., 2, 2)."""
    if model.dim != 2:
        raise InvalidInputError("diffusion matrix is defined for 2D models")
    u = np.asarray(u, dtype=float)
    a1 = np.broadcast_to(model.speed(0, u, x), u.shape)
    a2 = np.broadcast_to(model.speed(1, u, x), u.shape)
    m = np.empty(u.shape + (2, 2))
    m[..., 0, 0] = (lam - np.abs(a1)) * np.abs(a1)
    m[..., 0, 1] = -a1 * a2
    m[..., 1, 0] = -a2 * a1
    m[..., 1, 1] = (lam - np.abs(a2)) * np.abs(a2)
    return m


def is_psd(m):
    """Elementwise PSD test of symmetric 2x2 matrices (diagonals and determinant)."""
    m = np.asarray(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    ok = (m[..., 0, 0] >= -PSD_DIAG_TOL) & (m[..., 1, 1] >= -PSD_DIAG_TOL) & (det >= -PSD_DET_TOL)
    return bool(ok) if ok.ndim == 0 else ok


@dataclass
class RunReport:
    steps: list = field(default_factory=list)
    t: list = field(default_factory=list)
    tv: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    wall_time: float = 0.0
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def record(self, step, t, u, cell_volume, errors=None):
        self.steps.append(step)
        self.t.append(t)
        self.tv.append(total_variation(u))
        self.mass.append(float(np.sum(u) * cell_volume))
        if errors is not None:
            self.l2.append(errors[0])
            self.linf.append(errors[1])

    def finish(self):
        self.wall_time = time.perf_counter() - self._start

    @property
    def n_steps(self) -> int:
        return self.steps[-1] if self.steps else 0

    @property
    def has_errors(self) -> bool:
        return len(self.l2) == len(self.steps) and bool(self.steps)

    def rows(self):
        cols = [self.steps, self.t, self.tv, self.mass]
        if self.has_errors:
            cols += [self.l2, self.linf]
        return list(zip(*cols))

    def header(self):
        names = ["step", "t", "tv", "mass"]
        return names + ["l2", "linf"] if self.has_errors else names


# exact solutions -----------------------------------------------------------

class ExactSolutionError(KinlbError):
    pass


def sin4(x):
    return np.sin(x) ** 4


def linear_convection_exact(x, t, length=2.0 * math.pi):
    return sin4(np.mod(np.asarray(x, dtype=float) - t, length))


def burgers_sine_exact(x, t, tol=1e-14, max_iter=200):
    """u = sin(2 pi (x - u t)) on the unit-periodic domain.

    Solves for the foot xi of the characteristic, x = xi + t sin(2 pi xi),
    inside [0, 1/2] for x < 1/2 and [1/2, 1] for x > 1/2. The shock that forms
    at t = 1/(2 pi) stays at x = 1/2 by symmetry, so this branch choice is the
    entropy solution at all times.
    """
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    shape = x.shape
    x = x.ravel()
    if t == 0:
        return np.sin(2 * np.pi * x).reshape(shape)
    right = x > 0.5
    lo = np.where(right, 0.5, 0.0)
    hi = np.where(right, 1.0, 0.5)
    xi = np.where(right, x, x)  # the foot lies near x for small t
    xi = np.clip(xi, lo, hi)
    w = 2 * np.pi

    def resid(s):
        return s + t * np.sin(w * s) - x

    # safeguarded Newton: keep a sign-change bracket, bisect when Newton leaves it
    r_lo = resid(lo)
    for _ in range(max_iter):
        r = resid(xi)
        done = np.abs(r) <= tol
        if np.all(done):
            break
        same = np.sign(r) == np.sign(r_lo)
        lo = np.where(same, xi, lo)
        r_lo = np.where(same, r, r_lo)
        hi = np.where(same, hi, xi)
        dr = 1 + w * t * np.cos(w * xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = xi - r / dr
        inside = np.isfinite(newton) & (newton > lo) & (newton < hi)
        xi = np.where(done, xi, np.where(inside, newton, 0.5 * (lo + hi)))
    else:
        raise ExactSolutionError("characteristic solver did not converge")
    at_node = (x == 0.0) | (x == 0.5)
    u = np.where(at_node, 0.0, np.sin(w * xi))
    return u.reshape(shape)


def square_wave_exact(x, t, outer=0.0):
    """Burgers square wave (1 on |x| <= 1/3, ``outer`` elsewhere) on [-1, 1].

    outer = 0: fan from -1/3 to -1/3 + t, shock at 1/3 + t/2 (t <= 4/3).
    outer = -1: fan from -1/3 - t to -1/3 + t through the sonic point,
    stationary shock at 1/3 (t <= 2/3).
    """
    x = np.asarray(x, dtype=float)
    third = 1.0 / 3.0
    if t == 0:
        return np.where(np.abs(x) <= third, 1.0, outer)
    if outer == 0.0:
        if t > 4.0 / 3.0:
            raise ExactSolutionError("fan meets shock after t = 4/3")
        shock = third + 0.5 * t
        fan = (x + third) / t
        u = np.where(x < -third, 0.0, np.where(x < -third + t, fan, np.where(x < shock, 1.0, 0.0)))
        return u
    if outer == -1.0:
        if t > 2.0 / 3.0:
            raise ExactSolutionError("fan leaves the domain after t = 2/3")
        fan = (x + third) / t
        u = np.where(x < -third - t, -1.0, np.where(x < -third + t, fan, np.where(x <= third, 1.0, -1.0)))
        return u
    raise ExactSolutionError(f"no square-wave solution for outer state {outer}")


def angle_exact(x1, x2, theta_deg):
    """1 above the line x2 = tan(theta) x1, 0 below, 1/2 on it."""
    th = math.radians(theta_deg)
    a, b = math.cos(th), math.sin(th)
    side = b * np.asarray(x1, dtype=float) - a * np.asarray(x2, dtype=float)
    return np.where(side < 0, 1.0, np.where(side > 0, 0.0, 0.5))


def semicircle_exact(x1, x2):
    r = np.hypot(x1, x2)
    return np.where((r >= 0.35) & (r <= 0.65), 1.0, 0.0)


ROTATION_CENTER = (0.5, 0.5)
BELL_CENTER = (0.5, 1.25)
BELL_RADIUS = 0.2


def cosine_bell(x1, x2):
    r = np.minimum(np.hypot(x1 - BELL_CENTER[0], x2 - BELL_CENTER[1]), BELL_RADIUS) / BELL_RADIUS
    return 0.25 * (1.0 + np.cos(np.pi * r))


def rotate_about_center(x1, x2, angle):
    cx, cy = ROTATION_CENTER
    c, s = math.cos(angle), math.sin(angle)
    dx, dy = x1 - cx, x2 - cy
    return cx + c * dx - s * dy, cy + s * dx + c * dy


def solid_body_exact(x1, x2, t):
    """The bell rotated counter-clockwise by ``t`` radians about (1/2, 1/2)."""
    y1, y2 = rotate_about_center(np.asarray(x1, float), np.asarray(x2, float), -t)
    return cosine_bell(y1, y2)


def shock_2d_exact(x1, x2, left=1.0, right=-1.0):
    """Steady g1 = u^2/2, g2 = u with inflow u(0,.)=left, u(1,.)=right, u(.,0)=left-2 x1.

    Characteristics from the bottom focus at x2 = 1/2, x1 = left/2; above it
    a shock runs with slope (left + right)/2.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    focus_x1 = 0.5 * left
    below = x2 < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        fan = (left - 2.0 * x1) / (1.0 - 2.0 * x2)
    fan_region = (x1 >= left * x2) & (x1 <= 1.0 + right * x2)
    u_below = np.where(x1 < left * x2, left, np.where(fan_region, fan, right))
    shock = focus_x1 + 0.5 * (left + right) * (x2 - 0.5)
    u_above = np.where(x1 < shock, left, np.where(x1 > shock, right, 0.5 * (left + right)))
    return np.where(below, u_below, u_above)


def leveque_yee_exact(x, t):
    return np.where(np.asarray(x, dtype=float) <= 0.3 + t, 1.0, 0.0)


EMBID_SHOCK = 0.5 * (1.0 - math.sqrt(0.4))


def embid_exact(x):
    """Steady state: u = 3x^2 - 3x + 1 left of the stable stationary shock,
    3x^2 - 3x - 0.1 right of it; the jump sits where u_L + u_R = 0."""
    x = np.asarray(x, dtype=float)
    base = 3 * x * x - 3 * x
    return np.where(x < EMBID_SHOCK, base + 1.0, base - 0.1)


def exact_solution(problem_id: str, x, t: float, **params):
    """Exact solution of a catalog problem at coordinates ``x`` (tuple) and time ``t``."""
    if problem_id == "linear-convection":
        return linear_convection_exact(x[0], t)
    if problem_id == "burgers-sine":
        return burgers_sine_exact(x[0], t)
    if problem_id == "burgers-square":
        return square_wave_exact(x[0], t, 0.0)
    if problem_id == "burgers-square-sonic":
        return square_wave_exact(x[0], t, -1.0)
    if problem_id.startswith("spekreijse-angle-"):
        return angle_exact(x[0], x[1], float(problem_id.rsplit("-", 1)[1]))
    if problem_id == "spekreijse-semicircle":
        return semicircle_exact(x[0], x[1])
    if problem_id == "solid-body-rotation":
        return solid_body_exact(x[0], x[1], t)
    if problem_id == "spekreijse-normal-shock":
        return shock_2d_exact(x[0], x[1], 1.0, -1.0)
    if problem_id == "spekreijse-oblique-shock":
        return shock_2d_exact(x[0], x[1], 1.5, -0.5)
    if problem_id == "leveque-yee":
        return leveque_yee_exact(x[0], t)
    if problem_id == "embid":
        return embid_exact(x[0])
    raise UnknownProblemError(f"no exact solution registered for {problem_id!r}")
