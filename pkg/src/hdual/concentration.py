"""Semiclassical sweep: ground states of the dilated problem as eps decreases.

For each eps the coefficients are sampled as ``P(eps x)``, ``Q(eps x)`` on a
fixed grid. Energies, truncated barycenters and profile distances to the
limit ground state (coefficients frozen at their maxima) are collected in a
``ConcentrationReport``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dual import DualPair, DualProblem, energy, nehari_project
from .errors import HDualError, NotConverged, ZeroState
from .exponents import AdmissibleExponents, check_admissible
from .field import (
    CoefficientSpec,
    Grid,
    ScalarField,
    coefficient_sup,
    lp_norm,
    make_coefficient,
    make_grid,
)
from .groundstate import (
    Solution,
    SolverConfig,
    dedup_solutions,
    limit_ground_energy,
    solve_ground_state,
)
from .kernel import _smooth_step
from .resolvent import ResolventPlan, make_plan

CSV_COLUMNS = (
    "eps",
    "c_eps",
    "c_M",
    "barycenter_psi",
    "barycenter_phi",
    "profile_distance_u",
    "profile_distance_v",
    "iterations",
    "converged",
)


@dataclass(frozen=True)
class SweepConfig:
    """Settings of an eps-sweep.

    ``rho`` defaults to twice the largest argmax radius of the coefficients,
    and at least 1.
    """

    eps_list: tuple[float, ...]
    P: CoefficientSpec
    Q: CoefficientSpec
    N: int = 3
    p: float = 5.0
    q: float = 5.0
    half_width: float = 8 * math.pi
    samples: int = 64
    delta: float | None = None
    rho: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    multistart_count: int = 1
    dedup_energy_tol: float = 1e-8
    threads: int = 1

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        if any(not e > 0 for e in eps):
            raise ValueError("eps values must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if self.rho is not None and not self.rho > 0:
            raise ValueError("rho must be positive")
        if int(self.multistart_count) != self.multistart_count or self.multistart_count < 1:
            raise ValueError("multistart_count must be an integer >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolved_rho(self) -> float:
        if self.rho is not None:
            return float(self.rho)
        radii = [float(np.linalg.norm(c)) for spec in (self.P, self.Q) for c in spec.peak_points()]
        return max(2.0 * max(radii, default=0.0), 1.0)


@dataclass(frozen=True, eq=False)
class EpsRecord:
    eps: float
    c_eps: float
    barycenter_psi: np.ndarray
    barycenter_phi: np.ndarray
    profile_distance_u: float
    profile_distance_v: float
    iterations: int
    converged: bool
    distinct_solutions: int = 1
    solution: Solution | None = field(default=None, repr=False)
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "c_eps": self.c_eps,
            "barycenter_psi": [float(x) for x in self.barycenter_psi],
            "barycenter_phi": [float(x) for x in self.barycenter_phi],
            "profile_distance_u": self.profile_distance_u,
            "profile_distance_v": self.profile_distance_v,
            "iterations": self.iterations,
            "converged": self.converged,
            "distinct_solutions": self.distinct_solutions,
            "error": self.error,
        }


@dataclass(frozen=True, eq=False)
class ConcentrationReport:
    records: tuple[EpsRecord, ...]
    c_M: float
    limit: Solution | None
    common_max: bool
    rho: float

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.records) and (self.limit is None or self.limit.converged)

    def to_dict(self) -> dict:
        return {
            "c_M": self.c_M,
            "common_max": self.common_max,
            "rho": self.rho,
            "limit_converged": None if self.limit is None else self.limit.converged,
            "records": [r.to_dict() for r in self.records],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow(
                [
                    repr(r.eps),
                    repr(r.c_eps),
                    repr(self.c_M),
                    " ".join(repr(float(x)) for x in r.barycenter_psi),
                    " ".join(repr(float(x)) for x in r.barycenter_phi),
                    repr(r.profile_distance_u),
                    repr(r.profile_distance_v),
                    r.iterations,
                    int(r.converged),
                ]
            )
        return buf.getvalue()


# ---------------------------------------------------------------- barycenter


def truncation(y: np.ndarray, rho: float) -> np.ndarray:
    """``chi(y) = y`` inside the ball of radius rho, ``rho y/|y|`` outside; y has shape (N, ...)."""
    r = np.sqrt(np.sum(y**2, axis=0))
    scale = np.where(r <= rho, 1.0, rho / np.where(r > 0, r, 1.0))
    return y * scale


def _weighted_center(grid: Grid, weight: np.ndarray, eps: float, rho: float) -> np.ndarray:
    total = float(np.sum(weight))
    if total == 0:
        raise ZeroState("barycenter of a zero field")
    coords = np.stack(np.broadcast_arrays(*grid.coords()))
    chi = truncation(eps * coords, rho)
    return np.array([float(np.sum(chi[i] * weight)) / total for i in range(grid.N)])


def barycenter(state: DualPair, eps: float, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Truncated centers of mass of ``|psi|^{q'}`` and ``|phi|^{p'}`` in the ``eps x`` frame."""
    e = state.problem.exponents
    b1 = _weighted_center(state.grid, np.abs(state.psi.values) ** e.q_dual, eps, rho)
    b2 = _weighted_center(state.grid, np.abs(state.phi.values) ** e.p_dual, eps, rho)
    return b1, b2


# ---------------------------------------------------------------- profile comparison


def _center_index(grid: Grid, weight: np.ndarray) -> np.ndarray:
    c = _weighted_center(grid, weight, 1.0, math.inf)
    return np.rint(c / grid.h).astype(int)


def align_and_compare(
    solution: Solution, limit: Solution, eps: float, exps: AdmissibleExponents
) -> tuple[float, float]:
    """Relative L^q and L^p distances of (u, v) to the limit profile shifted onto its center.

    The shift is the lattice rounding of the plain psi-barycenter difference.
    """
    if not (solution.converged and limit.converged):
        raise NotConverged("profile comparison needs converged solutions")
    grid = solution.state.grid
    k_sol = _center_index(grid, np.abs(solution.state.psi.values) ** exps.q_dual)
    k_lim = _center_index(grid, np.abs(limit.state.psi.values) ** exps.q_dual)
    k = tuple(int(x) for x in k_sol - k_lim)
    axes = tuple(range(grid.N))
    U = np.roll(limit.primal.u.values, k, axis=axes)
    V = np.roll(limit.primal.v.values, k, axis=axes)
    du = lp_norm(ScalarField(grid, solution.primal.u.values - U), exps.q) / lp_norm(limit.primal.u, exps.q)
    dv = lp_norm(ScalarField(grid, solution.primal.v.values - V), exps.p) / lp_norm(limit.primal.v, exps.p)
    return du, dv


def theorem_scaling_map(
    u: ScalarField,
    k: float,
    exps: AdmissibleExponents,
    component: str = "u",
    inverse: bool = False,
) -> ScalarField:
    """Move a field between the dilated frame and the frequency-k frame.

    Forward: ``u_k(x) = k^(-beta) u(k x)``, i.e. the same samples scaled by
    ``k^(-beta)`` on a lattice shrunk by k. ``beta`` is beta1 for u and beta2
    for v. ``inverse=True`` undoes the map.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    beta = exps.beta1 if component == "u" else exps.beta2
    g = u.grid
    if inverse:
        return ScalarField(Grid(g.N, g.L * k, g.n), k**beta * u.values)
    return ScalarField(Grid(g.N, g.L / k, g.n), k ** (-beta) * u.values)


# ---------------------------------------------------------------- transplant diagnostic


def cutoff_profile(t: np.ndarray, radius: float) -> np.ndarray:
    """Smooth non-increasing cutoff: 1 on ``[0, radius/2]``, 0 beyond ``radius``."""
    return 1.0 - _smooth_step((np.asarray(t) - radius / 2.0) / (radius / 2.0))


def transplant_energy(
    prob: DualProblem, limit: Solution, eps: float, x0: Sequence[float], radius: float = 1.0
) -> float:
    """Energy of the cut-off limit state moved to ``x0/eps`` and projected to the Nehari set.

    The result bounds the ground energy of ``prob`` from above.
    """
    grid = prob.grid
    k = grid.nearest_index(np.asarray(x0, dtype=float) / eps)
    shift = tuple(int(i) - int(o) for i, o in zip(k, grid.origin_index))
    coords = grid.coords()
    dist = np.sqrt(sum((eps * c - x) ** 2 for c, x in zip(coords, x0)))
    eta = cutoff_profile(dist, radius)
    axes = tuple(range(grid.N))
    psi = eta * np.roll(limit.state.psi.values, shift, axis=axes)
    phi = eta * np.roll(limit.state.phi.values, shift, axis=axes)
    _, z = nehari_project(prob, prob.pair(psi, phi))
    return energy(prob, z)


# ---------------------------------------------------------------- sweep


def _common_max(cfg: SweepConfig, grid: Grid) -> bool:
    P = make_coefficient(cfg.P, grid)
    Q = make_coefficient(cfg.Q, grid)
    a = {tuple(np.round(x, 12)) for x in P.argmax_points}
    b = {tuple(np.round(x, 12)) for x in Q.argmax_points}
    return bool(a & b)


def _solve_eps(eps: float, cfg: SweepConfig, exps: AdmissibleExponents, plan: ResolventPlan) -> tuple[Solution, int]:
    grid = plan.grid
    prob = DualProblem(exps, make_coefficient(cfg.P, grid, eps), make_coefficient(cfg.Q, grid, eps), plan)
    sols = []
    for m in range(cfg.multistart_count):
        scfg = cfg.solver if m == 0 else replace(cfg.solver, seed="random", rng_seed=cfg.solver.rng_seed + m)
        sols.append(solve_ground_state(prob, scfg))
    converged = [s for s in sols if s.converged] or sols
    best = min(converged, key=lambda s: s.energy)
    distinct = len(dedup_solutions(converged, cfg.dedup_energy_tol)) if len(converged) > 1 else 1
    return best, distinct


def run_sweep(cfg: SweepConfig) -> ConcentrationReport:
    """Solve the dilated problem for every eps and compare with the limit ground state.

    Per-eps failures are recorded as non-converged entries. Entries run on
    ``cfg.threads`` worker threads; results are assembled in eps order.
    """
    exps = check_admissible(cfg.N, cfg.p, cfg.q)
    grid = make_grid(cfg.N, cfg.half_width, cfg.samples)
    plan = make_plan(grid, cfg.delta)
    rho = cfg.resolved_rho()
    limit = limit_ground_energy(coefficient_sup(cfg.P), coefficient_sup(cfg.Q), exps, grid, plan, cfg.solver)

    def task(eps):
        try:
            return _solve_eps(eps, cfg, exps, plan), None
        except HDualError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(task, cfg.eps_list))
    else:
        outcomes = [task(eps) for eps in cfg.eps_list]

    records = []
    nan3 = np.full(cfg.N, np.nan)
    for eps, (result, err) in zip(cfg.eps_list, outcomes):
        if result is None:
            records.append(EpsRecord(eps, math.nan, nan3, nan3, math.nan, math.nan, 0, False, 0, None, err))
            continue
        sol, distinct = result
        b1, b2 = barycenter(sol.state, eps, rho)
        if sol.converged and limit.converged:
            du, dv = align_and_compare(sol, limit, eps, exps)
        else:
            du = dv = math.nan
        records.append(EpsRecord(eps, sol.energy, b1, b2, du, dv, sol.iterations, sol.converged, distinct, sol))
    return ConcentrationReport(tuple(records), limit.energy, limit, _common_max(cfg, grid), rho)
