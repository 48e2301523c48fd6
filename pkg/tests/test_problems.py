import numpy as np
import pytest

from kinlb import flux as fx
from kinlb.errors import InvalidInputError, UnknownProblemError
from kinlb.lattice import make_config, problem_state_range
from kinlb.problems import (
    catalog,
    get_problem,
    parse_kv,
    parse_points,
    problem_from_config,
    problem_ids,
)
from kinlb.source import solve

DEFAULT_GRIDS = {
    "linear-convection": (41,),
    "spekreijse-angle-30": (65, 65),
    "spekreijse-semicircle": (65, 33),
    "solid-body-rotation": (65, 65),
    "burgers-sine": (81,),
    "burgers-square": (41,),
    "burgers-square-sonic": (41,),
    "spekreijse-normal-shock": (65, 65),
    "leveque-yee": (51,),
    "embid": (41,),
}


def test_catalog_ids():
    ids = problem_ids()
    assert len(ids) == 15 and len(set(ids)) == 15
    assert {f"spekreijse-angle-{t}" for t in (15, 30, 45, 60, 75)} <= set(ids)


@pytest.mark.parametrize("pid, shape", DEFAULT_GRIDS.items())
def test_default_grids(pid, shape):
    assert get_problem(pid).grid().shape == shape


@pytest.mark.parametrize("problem", catalog(), ids=lambda p: p.id)
def test_config_round_trip(problem):
    assert problem_from_config(problem.to_config()) == problem


def test_round_trip_keeps_params():
    p = get_problem("leveque-yee", mu=10.0, points=101)
    q = problem_from_config(p.to_config())
    assert q == p and dict(q.params)["mu"] == 10.0
    assert q != get_problem("leveque-yee", mu=100.0, points=101)


@pytest.mark.parametrize("problem", catalog(), ids=lambda p: p.id)
def test_initial_data_inside_admissible_range(problem):
    lo, hi = problem_state_range(problem, problem.grid())
    u0 = problem.initial(*problem.grid().coords())
    assert lo <= np.min(u0) and np.max(u0) <= hi


@pytest.mark.parametrize("problem", catalog(), ids=lambda p: p.id)
def test_runs_to_completion(problem):
    field, report = solve(problem, make_config(problem))
    assert np.all(np.isfinite(field.values))
    assert report.n_steps > 0


def test_semicircle_flux_turns_clockwise():
    p = get_problem("spekreijse-semicircle")
    x = (np.array([0.5]), np.array([0.5]))
    # at (0.5, 0.5) transport points right and down
    assert p.flux.speed(0, np.ones(1), x)[0] > 0 > p.flux.speed(1, np.ones(1), x)[0]


def test_unknown_problem():
    with pytest.raises(UnknownProblemError):
        get_problem("nosuch")
    with pytest.raises(InvalidInputError):
        get_problem("embid", mu=3.0)


def test_parse_helpers():
    assert parse_points("81") == 81
    assert parse_points("65x33") == (65, 33)
    with pytest.raises(InvalidInputError):
        parse_points("2")
    with pytest.raises(InvalidInputError):
        parse_points("abc")
    assert parse_kv("# note\nsteady-tol = 1e-9  # inline\n\nproblem=embid") == {
        "steady_tol": "1e-9", "problem": "embid"}
    with pytest.raises(InvalidInputError):
        parse_kv("no equals sign")


def test_angle_needs_open_range():
    from kinlb.problems import spekreijse_angle

    with pytest.raises(InvalidInputError):
        spekreijse_angle(90)
    assert isinstance(spekreijse_angle(20).flux, fx.FluxModel)
