import dataclasses
import math

import numpy as np
import pytest

from hdual.concentration import (
    CSV_COLUMNS,
    SweepConfig,
    align_and_compare,
    barycenter,
    cutoff_profile,
    run_sweep,
    theorem_scaling_map,
    transplant_energy,
    truncation,
)
from hdual.errors import NotConverged, ZeroState
from hdual.field import ConstantCoefficient, GaussianBumps, ScalarField, make_coefficient
from hdual.groundstate import SolverConfig

pytestmark = pytest.mark.filterwarnings("ignore::hdual.errors.TruncationWarning")

FAST = SolverConfig(algorithm="fixed_point")


def gaussian_state(prob, center, width=1.5):
    coords = prob.grid.coords()
    g = np.exp(-sum((x - c) ** 2 for x, c in zip(coords, center)) / width**2) * np.ones(prob.grid.shape)
    return prob.pair(g, g)


def test_truncation_map():
    y = np.array([[0.5, 3.0, 0.0], [0.0, 4.0, 0.0]])
    out = truncation(y, 1.0)
    assert np.allclose(out[:, 0], [0.5, 0.0])
    assert np.allclose(out[:, 1], [0.6, 0.8])
    assert np.all(out[:, 2] == 0)


def test_barycenter_centered(variable_problem):
    b1, b2 = barycenter(gaussian_state(variable_problem, (0, 0, 0)), 0.5, 4.0)
    assert np.max(np.abs(b1)) <= 1e-12 and np.max(np.abs(b2)) <= 1e-12


def test_barycenter_off_center_bump(variable_problem):
    h = variable_problem.grid.h
    xc = np.array([4 * h, -2 * h, h])
    eps = 0.5
    b1, _ = barycenter(gaussian_state(variable_problem, xc), eps, 4.0)
    assert np.linalg.norm(b1 - eps * xc) <= 2 * h * eps


def test_barycenter_bounded_by_rho(variable_problem):
    h = variable_problem.grid.h
    b1, b2 = barycenter(gaussian_state(variable_problem, (12 * h, 12 * h, 0)), 1.0, 0.5)
    assert np.linalg.norm(b1) <= 0.5 + 1e-12 and np.linalg.norm(b2) <= 0.5 + 1e-12


def test_barycenter_equivariance(variable_problem):
    prob = variable_problem
    h, eps = prob.grid.h, 0.25
    z = gaussian_state(prob, (0, 0, 0))
    a = np.array([3, -2, 1])
    moved = prob.pair(np.roll(z.psi.values, tuple(a), axis=(0, 1, 2)), np.roll(z.phi.values, tuple(a), axis=(0, 1, 2)))
    b0, _ = barycenter(z, eps, 10.0)
    b1, _ = barycenter(moved, eps, 10.0)
    assert np.linalg.norm(b1 - (b0 + eps * a * h)) <= 2 * h * eps


def test_barycenter_zero_state(variable_problem):
    zero = np.zeros(variable_problem.grid.shape)
    with pytest.raises(ZeroState):
        barycenter(variable_problem.pair(zero, zero), 1.0, 1.0)


def test_scaling_map(exps, grid32, rng):
    u = ScalarField(grid32, rng.standard_normal(grid32.shape))
    same = theorem_scaling_map(u, 1.0, exps)
    assert np.array_equal(same.values, u.values) and same.grid == grid32
    up = theorem_scaling_map(u, 2.0, exps)
    assert up.grid.L == pytest.approx(grid32.L / 2)
    assert np.allclose(up.values, 2 ** (2 / 3) * u.values, rtol=1e-14, atol=0)
    back = theorem_scaling_map(up, 2.0, exps, inverse=True)
    assert back.grid == grid32
    assert np.max(np.abs(back.values - u.values)) <= 1e-12 * np.max(np.abs(u.values))
    with pytest.raises(ValueError):
        theorem_scaling_map(u, 0.0, exps)


def test_cutoff_profile_shape():
    t = np.linspace(0, 2, 201)
    eta = cutoff_profile(t, 1.0)
    assert np.all(eta[t <= 0.5] == 1.0) and np.all(eta[t >= 1.0] == 0.0)
    assert np.all(np.diff(eta) <= 0)


def test_sweep_config_validation():
    P = ConstantCoefficient(1.0)
    with pytest.raises(ValueError):
        SweepConfig((0.5, 1.0), P, P)
    with pytest.raises(ValueError):
        SweepConfig((1.0, -0.5), P, P)
    with pytest.raises(ValueError):
        SweepConfig((1.0,), P, P, multistart_count=0)
    spec = GaussianBumps(0.5, (1.0,), ((3.0, 4.0, 0.0),), (1.0,))
    assert SweepConfig((1.0,), spec, P).resolved_rho() == pytest.approx(10.0)
    assert SweepConfig((1.0,), P, P).resolved_rho() == 1.0


@pytest.fixture(scope="module")
def constant_sweep():
    P = ConstantCoefficient(1.0)
    return run_sweep(SweepConfig((1.0, 0.5), P, P, samples=32, solver=FAST))


def test_constant_sweep_matches_limit(constant_sweep):
    rep = constant_sweep
    assert rep.all_converged and rep.common_max
    for r in rep.records:
        assert r.c_eps == pytest.approx(rep.c_M, rel=1e-6)
        assert r.profile_distance_u <= 1e-4 and r.profile_distance_v <= 1e-4


def test_report_csv(constant_sweep):
    lines = constant_sweep.to_csv().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 3
    assert constant_sweep.to_dict()["records"][0]["eps"] == 1.0


def test_align_self_and_shift(constant_sweep):
    lim = constant_sweep.limit
    assert align_and_compare(lim, lim, 1.0, lim.state.problem.exponents) == (0.0, 0.0)
    prob = lim.state.problem
    steps = (2, -3, 1)
    moved_state = prob.pair(np.roll(lim.state.psi.values, steps, axis=(0, 1, 2)), np.roll(lim.state.phi.values, steps, axis=(0, 1, 2)))
    moved_primal = dataclasses.replace(
        lim.primal,
        u=ScalarField(prob.grid, np.roll(lim.primal.u.values, steps, axis=(0, 1, 2))),
        v=ScalarField(prob.grid, np.roll(lim.primal.v.values, steps, axis=(0, 1, 2))),
    )
    moved = dataclasses.replace(lim, state=moved_state, primal=moved_primal)
    du, dv = align_and_compare(moved, lim, 1.0, prob.exponents)
    assert du == 0.0 and dv == 0.0


def test_align_requires_convergence(constant_sweep):
    lim = constant_sweep.limit
    bad = dataclasses.replace(lim, converged=False)
    with pytest.raises(NotConverged):
        align_and_compare(bad, lim, 1.0, lim.state.problem.exponents)


def test_separated_peaks_flagged():
    P = GaussianBumps(0.5, (1.0,), ((2.0, 0.0, 0.0),), (1.0,))
    Q = GaussianBumps(0.5, (1.0,), ((-2.0, 0.0, 0.0),), (1.0,))
    rep = run_sweep(SweepConfig((1.0,), P, Q, samples=32, solver=FAST))
    assert not rep.common_max
    assert rep.records[0].converged
    for r in rep.records:
        assert np.all(np.isfinite(r.barycenter_psi)) and np.all(np.isfinite(r.barycenter_phi))


def test_transplant_bounds_ground_energy(grid32, exps):
    from hdual.dual import DualProblem
    from hdual.groundstate import limit_ground_energy, solve_ground_state
    from hdual.resolvent import make_plan

    plan = make_plan(grid32)
    spec = GaussianBumps(0.5, (1.0,), ((0.0, 0.0, 0.0),), (1.0,))
    eps = 0.5
    P = make_coefficient(spec, grid32, eps)
    prob = DualProblem(exps, P, P, plan)
    sol = solve_ground_state(prob, FAST)
    lim = limit_ground_energy(1.5, 1.5, exps, grid32, plan, FAST)
    assert lim.energy <= sol.energy * (1 + 1e-6)
    assert transplant_energy(prob, lim, eps, (0.0, 0.0, 0.0), radius=4.0) >= sol.energy * (1 - 1e-9)


def test_threaded_sweep_matches_serial():
    P = GaussianBumps(0.5, (1.0,), ((0.0, 0.0, 0.0),), (1.0,))
    a = run_sweep(SweepConfig((1.0, 0.5), P, P, samples=32, solver=FAST))
    b = run_sweep(SweepConfig((1.0, 0.5), P, P, samples=32, solver=FAST, threads=2))
    assert [r.c_eps for r in a.records] == [r.c_eps for r in b.records]
