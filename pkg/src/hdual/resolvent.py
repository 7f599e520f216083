"""Real Helmholtz resolvent and generalized Birman-Schwinger operators on a periodic grid.

The resolvent is the Fourier multiplier

    m_delta(xi) = (|xi|^2 - 1) / ((|xi|^2 - 1)^2 + delta^2) = Re 1/(|xi|^2 - 1 - i delta),

the limiting-absorption regularization of convolution with Psi. Modes lying
exactly on the unit sphere get multiplier 0, the principal-value convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import FloorViolation, SingularGrid
from .field import CoefficientField, Grid, ScalarField, check_same_grid

DEFAULT_MIN_DELTA = 1e-3
# |xi|^2 - 1 below this counts as exactly on the sphere
ON_SPHERE_TOL = 64 * np.finfo(float).eps


def default_delta(grid: Grid) -> float:
    return max(DEFAULT_MIN_DELTA, grid.frequency_spacing**2)


@dataclass(frozen=True, eq=False)
class ResolventPlan:
    grid: Grid
    delta: float
    multiplier: np.ndarray
    symbol: np.ndarray
    min_gap: float
    on_sphere_modes: int

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Array-level resolvent; no grid checks."""
        return sfft.irfftn(self.multiplier * sfft.rfftn(values), s=self.grid.shape)


def make_plan(grid: Grid, delta: float | None = None) -> ResolventPlan:
    """Precompute the resolvent multiplier on ``grid``.

    Raises ``SingularGrid`` when a grid frequency lies off the unit sphere
    but closer to it than ``delta/10``: the regularized value there would
    stand for a huge unregularized one. Modes exactly on the sphere are fine.
    """
    delta = default_delta(grid) if delta is None else float(delta)
    if not delta > 0:
        raise ValueError(f"absorption parameter must be positive, got {delta}")
    symbol = grid.half_spectrum_k2 - 1.0
    gap = np.abs(symbol)
    on_sphere = gap <= ON_SPHERE_TOL
    off = gap[~on_sphere]
    min_gap = float(off.min()) if off.size else np.inf
    if min_gap < delta / 10.0:
        raise SingularGrid(f"grid frequency within {min_gap:.3e} of the unit sphere (delta/10 = {delta / 10:.3e})")
    symbol = np.where(on_sphere, 0.0, symbol)
    mult = symbol / (symbol**2 + delta**2)
    for arr in (mult, symbol):
        arr.flags.writeable = False
    return ResolventPlan(grid, delta, mult, symbol, min_gap, int(on_sphere.sum()))


def apply_resolvent(plan: ResolventPlan, f: ScalarField) -> ScalarField:
    """``R f``; the output is real because the multiplier is real and even."""
    check_same_grid(plan.grid, f.grid)
    return ScalarField(f.grid, plan.apply(f.values))


def apply_helmholtz(grid: Grid, u: ScalarField) -> ScalarField:
    """Spectral ``(-Δ - 1) u``."""
    check_same_grid(grid, u.grid)
    symbol = grid.half_spectrum_k2 - 1.0
    return ScalarField(grid, sfft.irfftn(symbol * sfft.rfftn(u.values), s=grid.shape))


def coefficient_root(c: CoefficientField, r: float) -> np.ndarray:
    vals = c.values
    if np.any(vals <= 0):
        raise FloorViolation("coefficient has non-positive samples")
    return vals ** (1.0 / r)


def birman_schwinger(
    plan: ResolventPlan,
    P: CoefficientField,
    p: float,
    Q: CoefficientField,
    q: float,
    v: ScalarField,
) -> ScalarField:
    """``K_{p,q}^{P,Q} v = P^(1/p) R(Q^(1/q) v)``."""
    check_same_grid(plan.grid, P.grid, Q.grid, v.grid)
    out = coefficient_root(P, p) * plan.apply(coefficient_root(Q, q) * v.values)
    return ScalarField(v.grid, out)


def point_source_response(plan: ResolventPlan) -> ScalarField:
    """``R`` applied to a unit mass in the origin cell."""
    grid = plan.grid
    f = np.zeros(grid.shape)
    f[grid.origin_index] = 1.0 / grid.cell_volume
    return ScalarField(grid, plan.apply(f))


@dataclass(frozen=True)
class DecayMeasurement:
    separations: np.ndarray
    pairings: np.ndarray
    slope: float


def measure_decay(plan: ResolventPlan, p: float, q: float, support_radius: float, separations) -> DecayMeasurement:
    """Largest far-field pairing ``|<u, R v>|`` as the supports separate.

    ``u = cos^2(pi r / 2R)`` on the ball of radius R. For each separation m
    the sup over unit ``v`` in L^{p'} supported outside the ball of radius
    R + m equals ``||R u||_{L^p(|x| >= R + m)} / ||u||_{q'}``. The slope is
    the least-squares fit of log pairing against log m.
    """
    grid = plan.grid
    seps = np.asarray(separations, dtype=float)
    if support_radius + seps.max() >= grid.L / 2:
        raise ValueError("need support_radius + max separation < L/2")
    r = grid.radius
    u = np.where(r < support_radius, np.cos(np.pi * r / (2 * support_radius)) ** 2, 0.0)
    q_dual = q / (q - 1.0)
    dv = grid.cell_volume
    u_norm = float(np.sum(np.abs(u) ** q_dual) * dv) ** (1.0 / q_dual)
    ru = np.abs(plan.apply(u)) ** p
    vals = np.array([float(np.sum(ru[r >= support_radius + m]) * dv) ** (1.0 / p) / u_norm for m in seps])
    slope = float(np.polyfit(np.log(seps), np.log(vals), 1)[0])
    return DecayMeasurement(seps, vals, slope)
