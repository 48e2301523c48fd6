"""Flux models and the sign-based wave-speed / flux splitting.

A flux in direction d is split as g = g+ - g-, where

    g+(u) = int_0^u max(a, 0) du',   g-(u) = int_0^u max(-a, 0) du'

and a = dg/du is the wave speed. Both halves vanish at u = 0 and are
non-decreasing in u. Note that g- is *negative* for u < 0 whenever a < 0
there (e.g. Burgers: g-(u) = -u**2/2 for u < 0).

Fluxes take a spatial argument ``x`` (a tuple of coordinate arrays, one per
dimension) so that variable-coefficient problems such as solid-body rotation
can be expressed. Constant-coefficient components ignore it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError, QuadratureError

Coeff = float | Callable[..., np.ndarray]

QUAD_ATOL = 1e-10
QUAD_MAX_DEPTH = 30


def wave_speed_split(a):
    """Return ``(a_plus, a_minus)`` with ``a = a_plus - a_minus``, both >= 0."""
    a_arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a_arr)):
        raise InvalidInputError(f"wave speed must be finite, got {a!r}")
    a_plus = np.maximum(a_arr, 0.0)
    a_minus = np.maximum(-a_arr, 0.0)
    if a_arr.ndim == 0:
        return float(a_plus), float(a_minus)
    return a_plus, a_minus


def _simpson(fn, lo, flo, hi, fhi):
    mid = 0.5 * (lo + hi)
    fmid = fn(mid)
    return mid, fmid, (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)


def _adaptive_simpson(fn, lo, hi, atol=QUAD_ATOL, max_depth=QUAD_MAX_DEPTH):
    """Adaptive Simpson quadrature with Richardson correction.

    Raises QuadratureError when an interval still misses its share of the
    tolerance at ``max_depth``.
    """
    if lo == hi:
        return 0.0
    flo, fhi = fn(lo), fn(hi)
    mid, fmid, whole = _simpson(fn, lo, flo, hi, fhi)
    worst = [0.0]

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, flm, left = _simpson(fn, a, fa, m, fm)
        rm, frm, right = _simpson(fn, m, fm, b, fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        if depth >= max_depth:
            worst[0] = max(worst[0], abs(delta) / 15.0)
            return left + right + delta / 15.0
        return recurse(a, fa, m, fm, lm, flm, left, tol / 2, depth + 1) + recurse(
            m, fm, b, fb, rm, frm, right, tol / 2, depth + 1
        )

    total = recurse(lo, flo, hi, fhi, mid, fmid, whole, atol, 0)
    if worst[0] > atol:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{lo}, {hi}]", achieved=worst[0]
        )
    return total


def quad_split_flux(a: Callable[[float], float], u: float, atol: float = QUAD_ATOL):
    """Split flux of a scalar wave-speed function by quadrature from 0 to ``u``.

    ``a`` must be continuous between 0 and ``u``. The kink of max(a, 0) at a
    sign change is resolved by the adaptive subdivision.
    """
    u = float(u)
    g_plus = _adaptive_simpson(lambda s: max(a(s), 0.0), 0.0, u, atol=atol)
    g_minus = _adaptive_simpson(lambda s: max(-a(s), 0.0), 0.0, u, atol=atol)
    return g_plus, g_minus


def _coeff_value(c: Coeff, x, shape):
    if callable(c):
        return np.broadcast_to(np.asarray(c(*x), dtype=float), shape)
    return np.full(shape, float(c))


class FluxComponent:
    """Flux in a single direction: g(u; x), a(u; x) and the split pair."""

    name = "custom"

    def flux(self, u, x):
        raise NotImplementedError

    def speed(self, u, x):
        raise NotImplementedError

    def split(self, u, x):
        """Vectorised quadrature fallback; subclasses override with closed forms."""
        u = np.asarray(u, dtype=float)
        xs = np.broadcast_arrays(u, *[np.asarray(xi, dtype=float) for xi in x])
        u_b, x_b = xs[0], xs[1:]
        gp = np.empty(u_b.shape)
        gm = np.empty(u_b.shape)
        for idx in np.ndindex(u_b.shape):
            xi = tuple(c[idx] for c in x_b)
            speed = lambda s, xi=xi: float(self.speed(np.float64(s), xi))
            gp[idx], gm[idx] = quad_split_flux(speed, u_b[idx])
        return gp, gm


@dataclass(frozen=True)
class Linear(FluxComponent):
    """g(u; x) = c(x) * u, with ``c`` a constant or a function of position."""

    coeff: Coeff = 1.0
    name = "linear"

    def flux(self, u, x):
        u = np.asarray(u, dtype=float)
        return _coeff_value(self.coeff, x, u.shape) * u

    def speed(self, u, x):
        return _coeff_value(self.coeff, x, np.shape(u))

    def split(self, u, x):
        u = np.asarray(u, dtype=float)
        c = _coeff_value(self.coeff, x, u.shape)
        return np.maximum(c, 0.0) * u, np.maximum(-c, 0.0) * u


@dataclass(frozen=True)
class Burgers(FluxComponent):
    """g(u) = u**2 / 2."""

    name = "burgers"

    def flux(self, u, x):
        u = np.asarray(u, dtype=float)
        return 0.5 * u * u

    def speed(self, u, x):
        return np.array(u, dtype=float)

    def split(self, u, x):
        u = np.asarray(u, dtype=float)
        pos = np.maximum(u, 0.0)
        neg = np.minimum(u, 0.0)
        return 0.5 * pos * pos, -0.5 * neg * neg


@dataclass(frozen=True)
class Custom(FluxComponent):
    """Arbitrary flux with a user-supplied wave speed; split by quadrature."""

    g: Callable = None
    a: Callable = None
    name = "custom"

    def flux(self, u, x):
        return np.asarray(self.g(u, x), dtype=float)

    def speed(self, u, x):
        return np.asarray(self.a(u, x), dtype=float)


@dataclass(frozen=True)
class FluxModel:
    components: tuple[FluxComponent, ...]

    def __post_init__(self):
        if len(self.components) not in (1, 2):
            raise InvalidInputError("flux models are 1D or 2D")

    @property
    def dim(self) -> int:
        return len(self.components)

    def flux(self, d, u, x):
        return self.components[d].flux(u, x)

    def speed(self, d, u, x):
        return self.components[d].speed(u, x)

    def split(self, d, u, x):
        return self.components[d].split(u, x)

    def speed_split(self, d, u, x):
        a = np.asarray(self.speed(d, u, x), dtype=float)
        return np.maximum(a, 0.0), np.maximum(-a, 0.0)


def split_fluxes(model: FluxModel, d: int, u, x=None):
    """``(g_plus, g_minus)`` for direction ``d`` (0-based) at state ``u``."""
    if x is None:
        x = (0.0,) * model.dim
    gp, gm = model.split(d, u, x)
    if np.ndim(gp) == 0:
        return float(gp), float(gm)
    return gp, gm


def sample_domain(domain: Sequence[tuple[float, float]], per_axis: int):
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in domain]
    return np.meshgrid(*axes, indexing="ij")


def sup_speed(
    model: FluxModel,
    d: int,
    u_range: tuple[float, float],
    domain: Sequence[tuple[float, float]],
    samples: int = 1024,
) -> float:
    """sup |a_d(u; x)| by dense sampling of the state range and the domain."""
    u, x = _sample_states(model, u_range, domain, samples)
    return float(np.max(np.abs(model.speed(d, u, x))))


def sup_total_speed(model, u_range, domain, samples: int = 1024) -> float:
    """sup over (u, x) of sum_d |a_d(u; x)|; equals sup|a| in 1D."""
    u, x = _sample_states(model, u_range, domain, samples)
    total = sum(np.abs(np.broadcast_to(model.speed(d, u, x), u.shape)) for d in range(model.dim))
    return float(np.max(total))


def _sample_states(model, u_range, domain, samples):
    lo, hi = u_range
    per_axis = 257 if model.dim == 1 else 33
    grids = sample_domain(domain, per_axis)
    u = np.linspace(lo, hi, samples).reshape((samples,) + (1,) * model.dim)
    u = np.broadcast_to(u, (samples,) + grids[0].shape)
    x = tuple(np.broadcast_to(g, u.shape) for g in grids)
    return u, x


def admissible_range(values, widen: float = 0.1) -> tuple[float, float]:
    """Closed interval spanned by ``values``, each end pushed out by ``widen`` of the span."""
    vals = np.asarray(values, dtype=float)
    lo, hi = float(vals.min()), float(vals.max())
    pad = widen * (hi - lo) if hi > lo else widen * max(1.0, abs(hi))
    return lo - pad, hi + pad


def burgers_1d() -> FluxModel:
    return FluxModel((Burgers(),))


def linear_1d(c: float = 1.0) -> FluxModel:
    return FluxModel((Linear(c),))


def linear_2d(a: Coeff, b: Coeff) -> FluxModel:
    return FluxModel((Linear(a), Linear(b)))


def angle_flux(theta_deg: float) -> FluxModel:
    theta = math.radians(theta_deg)
    return linear_2d(math.cos(theta), math.sin(theta))
