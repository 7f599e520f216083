"""Invariant checks run by ``hdual selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dual import DualProblem, energy, gradient, nehari_project, nehari_tangency
from .exponents import check_admissible
from .field import ConstantCoefficient, GaussianBumps, make_coefficient, make_grid
from .resolvent import make_plan

# pinned tolerances
SYMMETRY_RTOL = 1e-10
MULTIPLIER_ATOL = 1e-15
EIGENMODE_RTOL = 1e-12
GRADIENT_RTOL = 1e-6
GRADIENT_STEP = 1e-5
NEHARI_GAP_RTOL = 1e-12
NEHARI_RTOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    bound: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (bound {self.bound:.1e})"


def random_bumps(grid, rng, count: int = 3, spread: float = 4.0) -> np.ndarray:
    """Sum of Gaussian bumps with random centers, widths and signed amplitudes."""
    coords = grid.coords()
    out = np.zeros(grid.shape)
    for _ in range(count):
        c = rng.uniform(-spread, spread, size=grid.N)
        w = rng.uniform(0.7, 2.0)
        a = rng.uniform(-1.0, 1.0)
        out = out + a * np.exp(-sum((x - x0) ** 2 for x, x0 in zip(coords, c)) / w**2)
    return out


def random_positive(grid, rng) -> np.ndarray:
    """Smooth field bounded below by a positive constant."""
    return rng.uniform(0.05, 0.2) + np.abs(random_bumps(grid, rng))


def benchmark_problem(samples: int = 64, variable: bool = True) -> DualProblem:
    grid = make_grid(3, 8 * math.pi, samples)
    exps = check_admissible(3, 5.0, 5.0)
    if variable:
        P = make_coefficient(GaussianBumps(0.5, (1.0,), ((0.0, 0.0, 0.0),), (1.0,)), grid)
        Q = make_coefficient(GaussianBumps(0.75, (0.5,), ((1.0, 0.0, 0.0),), (2.0,)), grid)
    else:
        P = Q = make_coefficient(ConstantCoefficient(1.0), grid)
    return DualProblem(exps, P, Q, make_plan(grid))


def check_multiplier_algebra(prob: DualProblem) -> CheckResult:
    plan = prob.plan
    s = plan.symbol
    d2 = plan.delta**2
    err = float(np.max(np.abs(s * plan.multiplier + d2 / (s**2 + d2) - 1.0)))
    return CheckResult("multiplier algebra", err <= MULTIPLIER_ATOL, err, MULTIPLIER_ATOL)


def check_eigenmode(prob: DualProblem) -> CheckResult:
    grid = prob.grid
    k = 3 * grid.frequency_spacing
    x1 = grid.coords()[0]
    mode = np.cos(k * x1) * np.ones(grid.shape)
    sym = k * k - 1.0
    expected = sym / (sym**2 + prob.plan.delta**2) * mode
    err = float(np.max(np.abs(prob.plan.apply(mode) - expected)) / np.max(np.abs(expected)))
    return CheckResult("resolvent eigenmode", err <= EIGENMODE_RTOL, err, EIGENMODE_RTOL)


def check_symmetry(prob: DualProblem, rng, pairs: int) -> CheckResult:
    dv = prob.grid.cell_volume
    worst = 0.0
    for _ in range(pairs):
        u = random_bumps(prob.grid, rng)
        v = random_bumps(prob.grid, rng)
        lhs = float(np.sum(u * prob.k_pq(v)) * dv)
        rhs = float(np.sum(v * prob.k_qp(u)) * dv)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return CheckResult("operator symmetry", worst <= SYMMETRY_RTOL, worst, SYMMETRY_RTOL)


def check_gradient(prob: DualProblem, rng, directions: int) -> CheckResult:
    dv = prob.grid.cell_volume
    # J is only C^1 where psi or phi vanish, so the base state stays away from zero
    z = prob.pair(random_positive(prob.grid, rng), random_positive(prob.grid, rng))
    g = gradient(prob, z)
    worst = 0.0
    for _ in range(directions):
        w1 = random_bumps(prob.grid, rng)
        w2 = random_bumps(prob.grid, rng)
        exact = float((np.sum(g.psi.values * w1) + np.sum(g.phi.values * w2)) * dv)
        hi = energy(prob, prob.pair(z.psi.values + GRADIENT_STEP * w1, z.phi.values + GRADIENT_STEP * w2))
        lo = energy(prob, prob.pair(z.psi.values - GRADIENT_STEP * w1, z.phi.values - GRADIENT_STEP * w2))
        fd = (hi - lo) / (2 * GRADIENT_STEP)
        worst = max(worst, abs(fd - exact) / abs(exact))
    return CheckResult("gradient vs central differences", worst <= GRADIENT_RTOL, worst, GRADIENT_RTOL)


def _positive_state(prob, rng):
    while True:
        z = prob.pair(random_bumps(prob.grid, rng), random_bumps(prob.grid, rng))
        if z.C > 0:
            return z


def check_nehari(prob: DualProblem, rng, states: int) -> list[CheckResult]:
    e = prob.exponents
    gap = idem = scal = ident = 0.0
    tangency_max = -math.inf
    for _ in range(states):
        z = _positive_state(prob, rng)
        t, zp = nehari_project(prob, z)
        gap = max(gap, abs(zp.A + zp.B - zp.C) / (zp.A + zp.B))
        t2, _ = nehari_project(prob, prob.pair(zp.psi, zp.phi))
        idem = max(idem, abs(t2 - 1.0))
        for lam in (0.5, 2.0, 10.0):
            tl, _ = nehari_project(prob, prob.pair(lam * z.psi.values, lam * z.phi.values))
            scal = max(scal, abs(tl * lam - t) / t)
        J = energy(prob, zp)
        ident = max(ident, abs(J - (1 / e.q_dual - 0.5) * zp.A - (1 / e.p_dual - 0.5) * zp.B) / abs(J))
        tangency_max = max(tangency_max, nehari_tangency(prob, zp))
    return [
        CheckResult("Nehari projection residual", gap <= NEHARI_GAP_RTOL, gap, NEHARI_GAP_RTOL),
        CheckResult("Nehari idempotence", idem <= NEHARI_RTOL, idem, NEHARI_RTOL),
        CheckResult("Nehari scaling law", scal <= NEHARI_RTOL, scal, NEHARI_RTOL),
        CheckResult("Nehari energy identity", ident <= NEHARI_RTOL, ident, NEHARI_RTOL),
        CheckResult("Nehari tangency sign", tangency_max < 0, tangency_max, 0.0),
    ]


def run_selftest(quick: bool = False, seed: int = 0) -> list[CheckResult]:
    """Run the invariant suite; ``quick`` uses a 32^3 grid and fewer samples."""
    rng = np.random.default_rng(seed)
    prob = benchmark_problem(32 if quick else 64)
    results = [check_multiplier_algebra(prob), check_eigenmode(prob)]
    results.append(check_symmetry(prob, rng, 10 if quick else 100))
    results.append(check_gradient(prob, rng, 5 if quick else 20))
    results.extend(check_nehari(prob, rng, 5 if quick else 20))
    return results
