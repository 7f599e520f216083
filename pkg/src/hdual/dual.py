"""Dual energy functional, its gradient, and the Nehari constraint.

A dual state is a pair z = (psi, phi) in L^{q'} x L^{p'}. With

    A = ||psi||_{q'}^{q'},  B = ||phi||_{p'}^{p'},  C = 2 <psi, K_{q,p}^{Q,P} phi>

the energy is J(z) = A/q' + B/p' - C/2 and the Nehari gap is
<J'(z), z> = A + B - C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch, NotInPositiveCone, ZeroState
from .exponents import AdmissibleExponents
from .field import CoefficientField, Grid, ScalarField, check_same_grid, spow
from .resolvent import ResolventPlan, coefficient_root


@dataclass(frozen=True, eq=False)
class DualProblem:
    """Dual problem with coefficients already dilated (samples of P(eps x), Q(eps x))."""

    exponents: AdmissibleExponents
    P: CoefficientField
    Q: CoefficientField
    plan: ResolventPlan

    def __post_init__(self):
        check_same_grid(self.plan.grid, self.P.grid, self.Q.grid)
        if self.plan.grid.N != self.exponents.N:
            raise GridMismatch(f"grid dimension {self.plan.grid.N} != exponent dimension {self.exponents.N}")

    @property
    def grid(self) -> Grid:
        return self.plan.grid

    @cached_property
    def p_weight(self) -> np.ndarray:
        return coefficient_root(self.P, self.exponents.p)

    @cached_property
    def q_weight(self) -> np.ndarray:
        return coefficient_root(self.Q, self.exponents.q)

    def k_qp(self, phi: np.ndarray) -> np.ndarray:
        """``K_{q,p}^{Q,P} phi = Q^(1/q) R(P^(1/p) phi)``, array level."""
        return self.q_weight * self.plan.apply(self.p_weight * phi)

    def k_pq(self, psi: np.ndarray) -> np.ndarray:
        return self.p_weight * self.plan.apply(self.q_weight * psi)

    def pair(self, psi, phi) -> DualPair:
        """Build a state and evaluate its cached A, B, C."""
        psi_f = psi if isinstance(psi, ScalarField) else ScalarField(self.grid, psi)
        phi_f = phi if isinstance(phi, ScalarField) else ScalarField(self.grid, phi)
        check_same_grid(self.grid, psi_f.grid, phi_f.grid)
        return self._pair_from_arrays(psi_f, phi_f)

    def _pair_from_arrays(self, psi_f: ScalarField, phi_f: ScalarField, k_phi: np.ndarray | None = None) -> DualPair:
        e = self.exponents
        dv = self.grid.cell_volume
        A = float(np.sum(np.abs(psi_f.values) ** e.q_dual) * dv)
        B = float(np.sum(np.abs(phi_f.values) ** e.p_dual) * dv)
        if k_phi is None:
            k_phi = self.k_qp(phi_f.values)
        C = 2.0 * float(np.sum(psi_f.values * k_phi) * dv)
        return DualPair(psi_f, phi_f, A, B, C, self, k_phi)

    def scaled(self, z: DualPair, alpha: float, beta: float | None = None) -> DualPair:
        """``(alpha psi, beta phi)`` with caches updated algebraically."""
        beta = alpha if beta is None else beta
        e = self.exponents
        psi = ScalarField(self.grid, alpha * z.psi.values)
        phi = ScalarField(self.grid, beta * z.phi.values)
        return DualPair(
            psi,
            phi,
            abs(alpha) ** e.q_dual * z.A,
            abs(beta) ** e.p_dual * z.B,
            alpha * beta * z.C,
            self,
            beta * z.k_phi,
        )


@dataclass(frozen=True, eq=False)
class DualPair:
    psi: ScalarField
    phi: ScalarField
    A: float
    B: float
    C: float
    problem: DualProblem
    k_phi: np.ndarray  # K_{q,p}^{Q,P} phi, reused by the gradient

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    @property
    def in_positive_cone(self) -> bool:
        return self.C > 0

    def norm(self) -> float:
        e = self.problem.exponents
        return math.hypot(self.A ** (1.0 / e.q_dual), self.B ** (1.0 / e.p_dual))


@dataclass(frozen=True, eq=False)
class Covector:
    """Element of L^q x L^p, paired with states by quadrature."""

    psi: ScalarField
    phi: ScalarField
    exponents: AdmissibleExponents

    def pair(self, w_psi: ScalarField, w_phi: ScalarField) -> float:
        dv = self.psi.grid.cell_volume
        return float((np.sum(self.psi.values * w_psi.values) + np.sum(self.phi.values * w_phi.values)) * dv)

    def dual_norm(self) -> float:
        """``sqrt(||g_psi||_q^2 + ||g_phi||_p^2)``."""
        e = self.exponents
        dv = self.psi.grid.cell_volume
        a = float(np.sum(np.abs(self.psi.values) ** e.q) * dv) ** (1.0 / e.q)
        b = float(np.sum(np.abs(self.phi.values) ** e.p) * dv) ** (1.0 / e.p)
        return math.hypot(a, b)


def _bind(prob: DualProblem, z: DualPair) -> DualPair:
    check_same_grid(prob.grid, z.grid)
    if z.problem is prob:
        return z
    return prob.pair(z.psi, z.phi)


def energy(prob: DualProblem, z: DualPair) -> float:
    z = _bind(prob, z)
    e = prob.exponents
    return z.A / e.q_dual + z.B / e.p_dual - 0.5 * z.C


def gradient(prob: DualProblem, z: DualPair) -> Covector:
    """Gradient field G(z), the Euler-Lagrange residual of the integral system."""
    z = _bind(prob, z)
    e = prob.exponents
    g_psi = spow(z.psi.values, e.q_dual - 1.0) - z.k_phi
    g_phi = spow(z.phi.values, e.p_dual - 1.0) - prob.k_pq(z.psi.values)
    return Covector(ScalarField(prob.grid, g_psi), ScalarField(prob.grid, g_phi), e)


def relative_residual(prob: DualProblem, z: DualPair, grad: Covector | None = None) -> float:
    """Dual norm of G(z) relative to that of the power terms ``(|psi|^{q'-2}psi, |phi|^{p'-2}phi)``."""
    z = _bind(prob, z)
    grad = gradient(prob, z) if grad is None else grad
    e = prob.exponents
    # || |psi|^{q'-1} ||_q = A^{1/q}
    scale = math.hypot(z.A ** (1.0 / e.q), z.B ** (1.0 / e.p))
    if scale == 0:
        raise ZeroState("residual of the zero state")
    return grad.dual_norm() / scale


def nehari_gap(prob: DualProblem, z: DualPair) -> float:
    z = _bind(prob, z)
    if z.A + z.B == 0:
        raise ZeroState("Nehari gap of the zero state")
    return z.A + z.B - z.C


def nehari_tangency(prob: DualProblem, z: DualPair) -> float:
    """``<g'(z), z>`` on the Nehari set: (q'-2)A + (p'-2)B."""
    z = _bind(prob, z)
    e = prob.exponents
    return (e.q_dual - 2.0) * z.A + (e.p_dual - 2.0) * z.B


def _projection_root(A: float, B: float, C: float, a: float, b: float) -> float:
    """Unique t > 0 with t^a A + t^b B = C for negative a, b."""

    def f(log_t):
        return math.exp(a * log_t) * A + math.exp(b * log_t) * B - C

    s = C / (A + B)
    ends = sorted((math.log(s) / a, math.log(s) / b))
    lo, hi = ends
    if lo == hi:
        lo, hi = lo - 1e-12, hi + 1e-12
    # f is decreasing in log t
    while f(lo) < 0:
        lo -= 1.0
    while f(hi) > 0:
        hi += 1.0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    t = math.exp(0.5 * (lo + hi))
    # one Newton polish in t
    val = t**a * A + t**b * B - C
    der = a * t ** (a - 1) * A + b * t ** (b - 1) * B
    if der != 0:
        t_new = t - val / der
        if t_new > 0 and abs(t_new**a * A + t_new**b * B - C) <= abs(val):
            t = t_new
    return t


def nehari_project(prob: DualProblem, z: DualPair) -> tuple[float, DualPair]:
    """Scale z onto the Nehari set along its ray.

    Raises ``NotInPositiveCone`` when ``C <= 0``.
    """
    z = _bind(prob, z)
    if not z.C > 0:
        raise NotInPositiveCone(f"interaction term C = {z.C:.6e} is not positive")
    e = prob.exponents
    t = _projection_root(z.A, z.B, z.C, e.q_dual - 2.0, e.p_dual - 2.0)
    return t, prob.scaled(z, t)


def nehari_balance(prob: DualProblem, z: DualPair) -> tuple[float, float, DualPair]:
    """Rescale psi and phi separately so that each equation is balanced.

    Solves ``alpha^{q'} A = alpha beta C/2`` and ``beta^{p'} B = alpha beta C/2``;
    the result lies on the Nehari set and is the critical point of J over
    the two-parameter family ``(alpha psi, beta phi)``.
    """
    z = _bind(prob, z)
    if not z.C > 0:
        raise NotInPositiveCone(f"interaction term C = {z.C:.6e} is not positive")
    e = prob.exponents
    half = 0.5 * z.C
    mat = np.array([[e.q_dual - 1.0, -1.0], [-1.0, e.p_dual - 1.0]])
    rhs = np.array([math.log(half / z.A), math.log(half / z.B)])
    la, lb = np.linalg.solve(mat, rhs)
    alpha, beta = math.exp(la), math.exp(lb)
    return alpha, beta, prob.scaled(z, alpha, beta)
