"""Uniform structured lattices, scalar fields and boundary conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str  # "periodic" | "dirichlet" | "outflow"
    value: float | Callable | None = None

    def __post_init__(self):
        if self.kind not in ("periodic", "dirichlet", "outflow"):
            raise InvalidInputError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and self.value is None:
            raise InvalidInputError("dirichlet boundary needs a value")

    def evaluate(self, x, shape):
        """Boundary value at the coordinates ``x`` of the boundary row."""
        if callable(self.value):
            return np.broadcast_to(np.asarray(self.value(*x), dtype=float), shape).copy()
        return np.full(shape, float(self.value))

    def describe(self) -> str:
        if self.kind == "dirichlet":
            return "dirichlet(fn)" if callable(self.value) else f"dirichlet({self.value!r})"
        return self.kind


def periodic() -> BoundaryCondition:
    return BoundaryCondition("periodic")


def dirichlet(value) -> BoundaryCondition:
    return BoundaryCondition("dirichlet", value)


def outflow() -> BoundaryCondition:
    return BoundaryCondition("outflow")


def check_boundaries(bcs, dim):
    """``bcs`` holds one (low, high) pair per axis; periodic must be paired."""
    if len(bcs) != dim:
        raise InvalidInputError(f"expected {dim} boundary pairs, got {len(bcs)}")
    for axis, (lo, hi) in enumerate(bcs):
        if (lo.kind == "periodic") != (hi.kind == "periodic"):
            raise InvalidInputError(f"periodic boundary on axis {axis} must be declared on both sides")


@dataclass(frozen=True)
class Grid:
    shape: tuple[int, ...]
    dx: float
    origin: tuple[float, ...]
    periodic: tuple[bool, ...]

    def __post_init__(self):
        if any(n < 3 for n in self.shape):
            raise InvalidInputError(f"every extent must be >= 3, got {self.shape}")
        if not self.dx > 0:
            raise InvalidInputError("lattice spacing must be positive")

    @classmethod
    def from_domain(cls, domain, points, periodic):
        """Uniform lattice on ``domain``.

        Non-periodic axes include both end points (spacing L/(n-1)); periodic
        axes omit the right end point, which is the image of the left one
        (spacing L/n).
        """
        points = tuple(int(n) for n in points)
        spacings = []
        for (lo, hi), n, per in zip(domain, points, periodic):
            spacings.append((hi - lo) / (n if per else n - 1))
        dx = spacings[0]
        for h in spacings[1:]:
            if not math.isclose(h, dx, rel_tol=1e-12):
                raise InvalidInputError(f"lattice spacing differs between axes: {spacings}")
        return cls(points, dx, tuple(float(lo) for lo, _ in domain), tuple(bool(p) for p in periodic))

    @property
    def dim(self) -> int:
        return len(self.shape)

    def axes(self):
        return tuple(o + self.dx * np.arange(n) for o, n in zip(self.origin, self.shape))

    def coords(self):
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise InvalidInputError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    @property
    def x(self):
        return self.grid.coords()

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)
