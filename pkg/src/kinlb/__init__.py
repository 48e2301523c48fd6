"""Flux-decomposition lattice Boltzmann solvers for scalar conservation laws."""

from .diagnostics import RunReport, eoc, exact_solution, l2_error, linf_error, total_variation
from .eo import eo_run, eo_update
from .errors import KinlbError
from .flux import FluxModel, split_fluxes, wave_speed_split
from .grid import BoundaryCondition, Grid, ScalarField
from .lattice import SolverConfig, VelocitySet, build_velocity_set, equilibrium, make_config, run
from .problems import Problem, catalog, get_problem
from .source import SourceModel, run_with_source, solve

__all__ = [
    "BoundaryCondition", "FluxModel", "Grid", "KinlbError", "Problem", "RunReport",
    "ScalarField", "SolverConfig", "SourceModel", "VelocitySet", "build_velocity_set",
    "catalog", "eo_run", "eo_update", "eoc", "equilibrium", "exact_solution",
    "get_problem", "l2_error", "linf_error", "make_config", "run", "run_with_source",
    "solve", "split_fluxes", "total_variation", "wave_speed_split",
]
