"""Dual ground states by projected gradient descent and by fixed-point sweeps.

Both solvers work on the Nehari set of the dual functional and stop when the
relative dual norm of the gradient field falls below ``tol_residual``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .dual import (
    DualPair,
    DualProblem,
    energy,
    gradient,
    nehari_balance,
    nehari_project,
    relative_residual,
)
from .errors import (
    MaxItersExceeded,
    NoDescentDirection,
    NotInPositiveCone,
    SeedOutsideCone,
    TruncationWarning,
)
from .exponents import AdmissibleExponents
from .field import (
    ConstantCoefficient,
    Grid,
    ScalarField,
    check_same_grid,
    lp_norm,
    make_coefficient,
    spow,
)
from .resolvent import ResolventPlan

ALGORITHMS = ("projected_gradient", "fixed_point")
SEED_KINDS = ("gaussian", "random", "user")
SWEEP_ORDERS = ("psi_first", "phi_first")
TAIL_RTOL = 1e-6
RANDOM_WIDTH_CAP = 1.5


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``seed_width`` defaults to one grid spacing; ``seed_center`` defaults to
    the argmax point of ``P`` nearest the origin. Random seeds draw their center and width
    from ``numpy.random.default_rng(rng_seed)``.
    """

    algorithm: str = "projected_gradient"
    max_iters: int = 2000
    tol_residual: float = 1e-9
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    min_step: float = 1e-14
    seed: str = "gaussian"
    seed_width: float | None = None
    seed_center: tuple[float, ...] | None = None
    rng_seed: int = 0
    sweep_order: str = "psi_first"
    max_reseeds: int = 10
    user_psi: ScalarField | None = field(default=None, repr=False, compare=False)
    user_phi: ScalarField | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.seed not in SEED_KINDS:
            raise ValueError(f"seed must be one of {SEED_KINDS}, got {self.seed!r}")
        if self.sweep_order not in SWEEP_ORDERS:
            raise ValueError(f"sweep_order must be one of {SWEEP_ORDERS}, got {self.sweep_order!r}")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be an integer >= 1")
        if not 0 < self.armijo_shrink < 1 or not 0 < self.armijo_slope < 1:
            raise ValueError("Armijo shrink and slope must lie in (0, 1)")
        if self.seed_width is not None and not self.seed_width > 0:
            raise ValueError("seed_width must be positive")
        if self.seed == "user" and (self.user_psi is None or self.user_phi is None):
            raise ValueError("user seed needs user_psi and user_phi")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "max_iters": self.max_iters,
            "tol_residual": self.tol_residual,
            "armijo": {"shrink": self.armijo_shrink, "slope": self.armijo_slope},
            "min_step": self.min_step,
            "seed": self.seed,
            "seed_width": self.seed_width,
            "seed_center": None if self.seed_center is None else list(self.seed_center),
            "rng_seed": self.rng_seed,
            "sweep_order": self.sweep_order,
            "max_reseeds": self.max_reseeds,
        }


@dataclass(frozen=True, eq=False)
class PrimalPair:
    """Primal fields ``u = R(P^(1/p) phi)``, ``v = R(Q^(1/q) psi)`` and their residuals.

    ``residual_u`` is the L2 norm of ``(-Δ-1)u - P|v|^{p-2}v``; ``integral_residual_u``
    is the L2 norm of ``u - R(P|v|^{p-2}v)``, the form the resolvent solves exactly.
    """

    u: ScalarField
    v: ScalarField
    residual_u: float
    residual_v: float
    source_u_norm: float
    source_v_norm: float
    integral_residual_u: float
    integral_residual_v: float

    @property
    def relative_residual_u(self) -> float:
        return self.residual_u / self.source_u_norm if self.source_u_norm > 0 else 0.0

    @property
    def relative_residual_v(self) -> float:
        return self.residual_v / self.source_v_norm if self.source_v_norm > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "residual_u": self.residual_u,
            "residual_v": self.residual_v,
            "relative_residual_u": self.relative_residual_u,
            "relative_residual_v": self.relative_residual_v,
            "integral_residual_u": self.integral_residual_u,
            "integral_residual_v": self.integral_residual_v,
        }


@dataclass(frozen=True, eq=False)
class Solution:
    state: DualPair
    energy: float
    primal: PrimalPair
    residual: float
    iterations: int
    algorithm: str
    converged: bool
    history: tuple[float, ...] = ()
    reseeds: int = 0
    tail_ratio: float = 0.0

    @property
    def residuals(self) -> dict:
        out = {"dual": self.residual}
        out.update(self.primal.to_dict())
        return out

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "iterations": self.iterations,
            "algorithm": self.algorithm,
            "converged": self.converged,
            "reseeds": self.reseeds,
            "tail_ratio": self.tail_ratio,
            "residuals": self.residuals,
        }


# ---------------------------------------------------------------- seeds


def _lattice_point(grid: Grid, x: Sequence[float]) -> np.ndarray:
    return grid.point(grid.nearest_index(x))


def _bump(grid: Grid, center: np.ndarray, width: float) -> np.ndarray:
    coords = grid.coords()
    d2 = sum((c - c0) ** 2 for c, c0 in zip(coords, center))
    return np.exp(-d2 / width**2) * np.ones(grid.shape)


def _normalized_seed(prob: DualProblem, psi: np.ndarray, phi: np.ndarray) -> DualPair:
    z = prob.pair(psi, phi)
    total = z.A + z.B
    if total == 0:
        return z
    # one common factor t with t^{q'} A + t^{p'} B = 1
    e = prob.exponents
    lo, hi = -50.0, 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = math.exp(e.q_dual * mid) * z.A + math.exp(e.p_dual * mid) * z.B
        if val > 1:
            hi = mid
        else:
            lo = mid
    return prob.scaled(z, math.exp(0.5 * (lo + hi)))


def initial_state(prob: DualProblem, cfg: SolverConfig, attempt: int = 0) -> DualPair:
    """Seed for attempt ``attempt``; attempt 0 honours ``cfg.seed``, later ones are random."""
    grid = prob.grid
    if cfg.seed == "user":
        check_same_grid(grid, cfg.user_psi.grid, cfg.user_phi.grid)
        return prob.pair(cfg.user_psi, cfg.user_phi)
    width = grid.h if cfg.seed_width is None else cfg.seed_width
    if cfg.seed == "gaussian" and attempt == 0:
        if cfg.seed_center is not None:
            center = _lattice_point(grid, cfg.seed_center)
        elif len(prob.P.argmax_points):
            pts = np.asarray(prob.P.argmax_points)
            center = _lattice_point(grid, pts[int(np.argmin(np.sum(pts**2, axis=1)))])
        else:
            center = np.zeros(grid.N)
        g = _bump(grid, center, width)
        return _normalized_seed(prob, g, g)
    rng = np.random.default_rng([cfg.rng_seed, attempt])
    center = _lattice_point(grid, rng.uniform(-grid.L / 2, grid.L / 2, size=grid.N))
    # bumps much wider than RANDOM_WIDTH_CAP live inside the unit sphere in frequency, where C < 0
    w = rng.uniform(0.5, 1.0) * max(width, RANDOM_WIDTH_CAP)
    g = _bump(grid, center, w)
    return _normalized_seed(prob, g, g)


def _seed_in_cone(prob: DualProblem, cfg: SolverConfig) -> tuple[DualPair, int]:
    attempts = 1 if cfg.seed == "user" else cfg.max_reseeds + 1
    for k in range(attempts):
        z = initial_state(prob, cfg, k)
        if z.C > 0:
            return z, k
    raise SeedOutsideCone(f"no seed with positive interaction after {attempts} attempt(s)")


# ---------------------------------------------------------------- solvers


def _projected_gradient(prob: DualProblem, z: DualPair, cfg: SolverConfig):
    e = prob.exponents
    dv = prob.grid.cell_volume
    _, z = nehari_project(prob, z)
    J = energy(prob, z)
    history = [J]
    best = (math.inf, z, J)
    s = 1.0
    g = gradient(prob, z)
    res = relative_residual(prob, z, g)
    for it in range(cfg.max_iters + 1):
        if res < best[0]:
            best = (res, z, J)
        if res <= cfg.tol_residual:
            return z, J, res, it, True, history
        if it == cfg.max_iters:
            break
        # descend in the power coordinates a = |psi|^{q'-2}psi, b = |phi|^{p'-2}phi
        a = spow(z.psi.values, e.q_dual - 1.0)
        b = spow(z.phi.values, e.p_dual - 1.0)
        g1, g2 = g.psi.values, g.phi.values
        slope = -float(
            ((e.q - 1.0) * np.sum(np.abs(a) ** (e.q - 2.0) * g1**2) + (e.p - 1.0) * np.sum(np.abs(b) ** (e.p - 2.0) * g2**2))
            * dv
        )
        # energy differences below this are roundoff
        slack = 1e-13 * abs(J)
        s = min(1.0, 2.0 * s)
        while True:
            trial = prob.pair(spow(a - s * g1, e.q - 1.0), spow(b - s * g2, e.p - 1.0))
            if trial.C > 0:
                _, trial = nehari_project(prob, trial)
                J_trial = energy(prob, trial)
                g_trial = None
                if J_trial <= J + cfg.armijo_slope * s * slope:
                    break
                if J_trial <= J + slack:
                    # energy cannot discriminate here; require residual decrease
                    g_trial = gradient(prob, trial)
                    res_trial = relative_residual(prob, trial, g_trial)
                    if res_trial < res:
                        break
            s *= cfg.armijo_shrink
            if s < cfg.min_step:
                raise NoDescentDirection(f"Armijo backtracking failed at iteration {it} (residual {res:.3e})")
        assert J_trial <= J + slack, "projected energy increased"
        z, J = trial, J_trial
        if g_trial is None:
            g = gradient(prob, z)
            res = relative_residual(prob, z, g)
        else:
            g, res = g_trial, res_trial
        history.append(J)
    res, z, J = best
    return z, J, res, cfg.max_iters, False, history


def _fixed_point(prob: DualProblem, z: DualPair, cfg: SolverConfig):
    e = prob.exponents
    _, _, z = nehari_balance(prob, z)
    J = energy(prob, z)
    history = [J]
    best = (math.inf, z, J)
    for it in range(cfg.max_iters + 1):
        res = relative_residual(prob, z)
        if res < best[0]:
            best = (res, z, J)
        if res <= cfg.tol_residual:
            return z, J, res, it, True, history
        if it == cfg.max_iters:
            break
        if cfg.sweep_order == "psi_first":
            psi = spow(z.k_phi, e.q - 1.0)
            phi = spow(prob.k_pq(psi), e.p - 1.0)
        else:
            phi = spow(prob.k_pq(z.psi.values), e.p - 1.0)
            psi = spow(prob.k_qp(phi), e.q - 1.0)
        z = prob.pair(psi, phi)
        if not z.C > 0:
            raise NotInPositiveCone(f"fixed-point sweep left the positive cone at iteration {it}")
        _, _, z = nehari_balance(prob, z)
        J = energy(prob, z)
        history.append(J)
    res, z, J = best
    return z, J, res, cfg.max_iters, False, history


def solve_ground_state(prob: DualProblem, cfg: SolverConfig | None = None) -> Solution:
    """Minimize the dual energy over the Nehari set.

    Raises
    ------
    SeedOutsideCone
        If no seed with ``C > 0`` is found within ``cfg.max_reseeds`` reseeds.
    NoDescentDirection
        If Armijo backtracking falls below ``cfg.min_step``.

    Non-convergence within ``cfg.max_iters`` emits ``MaxItersExceeded`` as a
    warning and returns the lowest-residual iterate with ``converged=False``.
    """
    cfg = SolverConfig() if cfg is None else cfg
    z0, reseeds = _seed_in_cone(prob, cfg)
    runner = _projected_gradient if cfg.algorithm == "projected_gradient" else _fixed_point
    z, J, res, iters, converged, history = runner(prob, z0, cfg)
    # land exactly on the Nehari set (t = 1 up to roundoff at convergence)
    _, z = nehari_project(prob, z)
    J = energy(prob, z)
    if not converged:
        warnings.warn(
            MaxItersExceeded(f"{cfg.algorithm} stopped after {iters} iterations at residual {res:.3e}"),
            stacklevel=2,
        )
    tail = tail_ratio(z)
    if tail > TAIL_RTOL:
        warnings.warn(
            TruncationWarning(f"state at half box width is {tail:.2e} of its maximum (bound {TAIL_RTOL:.0e})"),
            stacklevel=2,
        )
    return Solution(
        state=z,
        energy=J,
        primal=recover_primal(prob, z),
        residual=relative_residual(prob, z),
        iterations=iters,
        algorithm=cfg.algorithm,
        converged=converged,
        history=tuple(history),
        reseeds=reseeds,
        tail_ratio=tail,
    )


def tail_ratio(z: DualPair) -> float:
    """Max of |psi|, |phi| at distance >= L/2 from the psi center of mass, relative to their max."""
    grid = z.grid
    w = np.abs(z.psi.values)
    coords = grid.coords()
    center = [float(np.sum(c * w) / np.sum(w)) for c in np.broadcast_arrays(*coords)]
    shift = tuple(int(o) - int(i) for o, i in zip(grid.origin_index, grid.nearest_index(center)))
    far = grid.radius >= grid.L / 2
    axes = tuple(range(grid.N))
    out = 0.0
    for f in (z.psi.values, z.phi.values):
        a = np.abs(np.roll(f, shift, axis=axes))
        out = max(out, float(a[far].max() / a.max()))
    return out


# ---------------------------------------------------------------- primal recovery


def _l2(values: np.ndarray, dv: float) -> float:
    return float(np.sqrt(np.sum(values**2) * dv))


def recover_primal(prob: DualProblem, state: DualPair) -> PrimalPair:
    """Primal pair from a dual state, with differential and integral residuals."""
    check_same_grid(prob.grid, state.grid)
    e = prob.exponents
    grid = prob.grid
    plan = prob.plan
    dv = grid.cell_volume
    u = plan.apply(prob.p_weight * state.phi.values)
    v = plan.apply(prob.q_weight * state.psi.values)
    src_u = prob.P.values * spow(v, e.p - 1.0)
    src_v = prob.Q.values * spow(u, e.q - 1.0)
    hu = _helmholtz(plan, u)
    hv = _helmholtz(plan, v)
    return PrimalPair(
        u=ScalarField(grid, u),
        v=ScalarField(grid, v),
        residual_u=_l2(hu - src_u, dv),
        residual_v=_l2(hv - src_v, dv),
        source_u_norm=_l2(src_u, dv),
        source_v_norm=_l2(src_v, dv),
        integral_residual_u=_l2(u - plan.apply(src_u), dv),
        integral_residual_v=_l2(v - plan.apply(src_v), dv),
    )


def _helmholtz(plan: ResolventPlan, values: np.ndarray) -> np.ndarray:
    symbol = plan.grid.half_spectrum_k2 - 1.0
    return sfft.irfftn(symbol * sfft.rfftn(values), s=plan.grid.shape)


# ---------------------------------------------------------------- limit problem


def constant_problem(Pbar: float, Qbar: float, exps: AdmissibleExponents, plan: ResolventPlan) -> DualProblem:
    grid = plan.grid
    P = make_coefficient(ConstantCoefficient(float(Pbar)), grid)
    Q = make_coefficient(ConstantCoefficient(float(Qbar)), grid)
    return DualProblem(exps, P, Q, plan)


def limit_ground_energy(
    Pbar: float,
    Qbar: float,
    exps: AdmissibleExponents,
    grid: Grid,
    plan: ResolventPlan,
    cfg: SolverConfig | None = None,
) -> Solution:
    """Ground state of the constant-coefficient problem with ``P = Pbar``, ``Q = Qbar``."""
    if not (Pbar > 0 and Qbar > 0):
        raise ValueError("limit coefficients must be positive")
    check_same_grid(grid, plan.grid)
    return solve_ground_state(constant_problem(Pbar, Qbar, exps, plan), cfg)


# ---------------------------------------------------------------- dedup


def best_shift(ref: np.ndarray, other: np.ndarray) -> tuple[int, ...]:
    """Integer lattice shift ``a`` maximizing ``sum ref(x) * other(x - a)``."""
    corr = sfft.irfftn(sfft.rfftn(ref) * np.conj(sfft.rfftn(other)), s=ref.shape)
    idx = np.unravel_index(int(np.argmax(corr)), ref.shape)
    n = ref.shape[0]
    return tuple(int(i) if i <= n // 2 else int(i) - n for i in idx)


def state_distance(a: Solution, b: Solution, shift_search: bool = True) -> float:
    """Relative distance between two states after optional lattice-shift and sign alignment."""
    za, zb = a.state, b.state
    check_same_grid(za.grid, zb.grid)
    e = za.problem.exponents
    best = math.inf
    for sign in (1.0, -1.0):
        psi_b = sign * zb.psi.values
        phi_b = sign * zb.phi.values
        if shift_search:
            k = best_shift(za.psi.values, psi_b)
            axes = tuple(range(za.grid.N))
            psi_b = np.roll(psi_b, k, axis=axes)
            phi_b = np.roll(phi_b, k, axis=axes)
        g = za.grid
        d_psi = lp_norm(ScalarField(g, za.psi.values - psi_b), e.q_dual) / lp_norm(za.psi, e.q_dual)
        d_phi = lp_norm(ScalarField(g, za.phi.values - phi_b), e.p_dual) / lp_norm(za.phi, e.p_dual)
        best = min(best, max(d_psi, d_phi))
    return best


def dedup_solutions(
    solutions: Sequence[Solution],
    energy_tol: float,
    shift_search: bool = True,
    state_tol: float = 1e-3,
) -> list[Solution]:
    """Representatives of the classes of solutions equal up to lattice shift and sign."""
    reps: list[Solution] = []
    for sol in solutions:
        if reps:
            check_same_grid(reps[0].state.grid, sol.state.grid)
        duplicate = any(
            abs(sol.energy - r.energy) <= energy_tol and state_distance(r, sol, shift_search) <= state_tol for r in reps
        )
        if not duplicate:
            reps.append(sol)
    return reps


def with_algorithm(cfg: SolverConfig, algorithm: str) -> SolverConfig:
    return replace(cfg, algorithm=algorithm)


__all__ = [
    "PrimalPair",
    "Solution",
    "SolverConfig",
    "constant_problem",
    "dedup_solutions",
    "initial_state",
    "limit_ground_energy",
    "recover_primal",
    "solve_ground_state",
    "state_distance",
    "with_algorithm",
]
