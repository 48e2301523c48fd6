import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinlb import flux as fx
from kinlb.diagnostics import EMBID_SHOCK
from kinlb.errors import InversionError
from kinlb.grid import dirichlet
from kinlb.lattice import build_velocity_set, collide, make_config, moment0, moment1, run
from kinlb.problems import get_problem
from kinlb.source import (
    SourceModel,
    collide_with_source,
    embid_source,
    leveque_yee_source,
    moment_invert,
    run_with_source,
    solve,
    source_populations,
    zero_source,
)

X = (np.zeros(()),)


def bisect_oracle(h, lo, hi, tol=1e-15):
    """Textbook bisection; assumes h(lo), h(hi) differ in sign."""
    flo = h(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = h(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_zero_source_populations():
    vs = build_velocity_set(1, 1.5)
    r = source_populations(np.array(0.7), X, fx.burgers_1d(), zero_source(), vs, 0.1)
    assert np.all(r == 0)


@pytest.mark.parametrize("model, source, dim", [
    (fx.burgers_1d(), embid_source(), 1),
    (fx.linear_1d(1.0), leveque_yee_source(100.0), 1),
    (fx.linear_2d(lambda a, b: b, lambda a, b: -a),
     SourceModel(lambda u, x: np.sin(u) * x[0], lambda u, x: np.cos(u) * x[0]), 2),
])
def test_source_moment_identities(model, source, dim):
    rng = np.random.default_rng(3)
    u = rng.uniform(-1.5, 1.5, 1000)
    x = tuple(rng.uniform(0, 1, 1000) for _ in range(dim))
    vs = build_velocity_set(dim, 3.0)
    dt = 0.013
    r = source_populations(u, x, model, source, vs, dt)
    s = source(u, x)
    assert np.max(np.abs(moment0(r) - dt * s)) <= 1e-12
    for d in range(dim):
        assert np.max(np.abs(moment1(r, d, vs) - dt * model.speed(d, u, x) * s)) <= 1e-12


def test_collide_with_zero_source_reduces():
    vs = build_velocity_set(1, 2.0)
    f = np.array([[0.3, 0.1], [0.2, -0.4], [0.0, 0.05]])
    u = moment0(f)
    x = (np.array([0.1, 0.2]),)
    a = collide_with_source(f, u, x, fx.burgers_1d(), zero_source(), vs, 1.4, 0.05)
    b = collide(f, u, x, fx.burgers_1d(), vs, 1.4)
    np.testing.assert_array_equal(a, b)


def test_invert_identity_without_source():
    assert moment_invert(0.37, X, zero_source(), 0.1, 0.0) == 0.37


def test_invert_linear_source():
    c, dt, F = 3.0, 0.2, 1.1
    lin = SourceModel(lambda u, x: c * u, lambda u, x: c + 0 * u)
    assert moment_invert(F, X, lin, dt, 0.0) == pytest.approx(F / (1 - dt * c / 2), abs=1e-13)


def test_invert_stiff_cubic_matches_bisection():
    src = leveque_yee_source(1000.0)
    dt, F = 0.01, 0.4
    h = lambda v: v - 0.5 * dt * float(src(np.array(v), X)) - F
    expected = bisect_oracle(h, -1.0, 2.0)
    assert abs(moment_invert(F, X, src, dt, 0.4) - expected) <= 1e-10
    assert abs(moment_invert(F, X, src, dt, 1.0) - expected) <= 1e-10


def test_invert_vectorised_cells():
    src = leveque_yee_source(10.0)
    F = np.array([0.0, 0.3, 0.9, 1.2])
    x = (np.linspace(0, 1, 4),)
    u = moment_invert(F, x, src, 0.02, F)
    np.testing.assert_allclose(u - 0.01 * src(u, x), F, atol=1e-12)


def test_invert_reports_failure():
    # u - dt/2 s(u) = -u^2 has no root for F > 0
    dt = 0.1
    bad = SourceModel(lambda u, x: (2 / dt) * (u + u * u), lambda u, x: (2 / dt) * (1 + 2 * u))
    with pytest.raises(InversionError) as info:
        moment_invert(np.array([0.0, 0.5]), (np.zeros(2),), bad, dt, np.zeros(2))
    assert info.value.cell == (1,)


@settings(max_examples=200, deadline=None)
@given(u=st.floats(-0.5, 1.5), mu=st.sampled_from([1.0, 10.0, 100.0, 1000.0]))
def test_invert_round_trip(u, mu):
    src = leveque_yee_source(mu)
    dt = 0.02
    F = u - 0.5 * dt * float(src(np.array(u), X))
    got = moment_invert(F, X, src, dt, u)
    assert abs(got - 0.5 * dt * float(src(np.array(got), X)) - F) < 1e-12


def test_zero_source_run_matches_homogeneous():
    base = get_problem("burgers-square")
    p = dataclasses.replace(base, source=zero_source())
    cfg = make_config(base, omega=1.3)
    a, b = [], []
    run(base, cfg, callback=lambda s, t, u: a.append(u.copy()))
    run_with_source(p, cfg, callback=lambda s, t, u: b.append(u.copy()))
    assert len(a) == len(b)
    assert max(np.max(np.abs(x - y)) for x, y in zip(a, b)) <= 1e-14


def test_well_balanced_constant_root():
    base = get_problem("leveque-yee", mu=1000.0)
    p = dataclasses.replace(base, initial=lambda x: np.ones_like(x),
                            bcs=((dirichlet(1.0), dirichlet(1.0)),), t_end=None)
    cfg = make_config(base, t_end=1000 * 0.02)
    p = dataclasses.replace(p, t_end=cfg.t_end)
    field, report = run_with_source(p, cfg)
    assert report.n_steps == 1000
    assert np.max(np.abs(field.values - 1.0)) <= 1e-12


def _crossing(field):
    x, u = field.x[0], field.values
    i = np.nonzero((u[:-1] >= 0.5) & (u[1:] < 0.5))[0][-1]
    return x[i] + (u[i] - 0.5) / (u[i] - u[i + 1]) * (x[i + 1] - x[i])


@pytest.mark.parametrize("mu", [1.0, 10.0, 100.0, 1000.0])
def test_leveque_yee_front_position(mu):
    p = get_problem("leveque-yee", mu=mu)
    field, _ = solve(p, make_config(p))
    assert abs(_crossing(field) - 0.6) <= 0.02


def test_stiff_front_runs_at_lattice_speed_when_lambda_exceeds_a():
    # a known failure mode: with lambda > a the smeared front is snapped forward
    # one cell per step by the stiff source
    p = get_problem("leveque-yee", mu=1000.0)
    cfg = make_config(p, safety=1.05)
    field, _ = solve(p, cfg)
    assert cfg.lam > 1.0
    assert _crossing(field) > 0.3 + cfg.lam * 0.3 - 0.05


def test_embid_steady_state():
    p = get_problem("embid")
    field, report = solve(p, make_config(p))
    x, u = field.x[0], field.values
    k = int(np.argmax(u[:-1] - u[1:]))
    assert x[k] <= EMBID_SHOCK <= x[k + 1]
    assert abs(u[k - 1] + u[k + 2]) <= 0.05
    left = 3 * x**2 - 3 * x + 1
    right = 3 * x**2 - 3 * x - 0.1
    assert np.max(np.abs(u[: k] - left[: k])) <= 0.05
    assert np.max(np.abs(u[k + 2:] - right[k + 2:])) <= 0.05
