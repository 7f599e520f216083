"""Helmholtz fundamental solution, its real part, and the annulus band split.

The outgoing fundamental solution of ``-Δ - 1`` is

    Phi(x) = (i/4) (2 pi |x|)^((2-N)/2) H^(1)_{(N-2)/2}(|x|)

and the resolvent kernel used throughout is its real part ``Psi``. Hankel
functions are evaluated here directly: closed trigonometric forms for
half-integer orders, and for integer orders the ascending series when
x <= 4, the Bessel integral representations for 4 < x <= 12 (where the
series loses digits to cancellation), and the Hankel large-argument
expansion beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, ResolutionError, UnsupportedDimension, UnsupportedOrder
from .field import Grid

SERIES_CROSSOVER = 12.0
# below this the ascending series is free of cancellation
SERIES_EXACT_LIMIT = 4.0
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(96)
EULER_GAMMA = 0.57721566490153286061

# integral of 1/|y| over the unit cube centred at 0
UNIT_CUBE_INVERSE_DISTANCE = 2.3800773639795535


def _order_kind(nu: float) -> tuple[str, int]:
    twice = 2.0 * nu
    if nu < 0 or twice != round(twice):
        raise UnsupportedOrder(f"order {nu} is not a non-negative integer or half-integer")
    if round(twice) % 2 == 1:
        return "half", int(round(nu - 0.5))
    return "integer", int(round(nu))


def _half_integer_hankel(n: int, x: np.ndarray) -> np.ndarray:
    # H_{n+1/2} = sqrt(2x/pi) h_n, h_n(x) = (-i)^(n+1) e^{ix}/x * sum_k i^k (n+k)! / (k! (n-k)! (2x)^k)
    total = np.zeros_like(x, dtype=complex)
    for k in range(n + 1):
        coef = math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k))
        total = total + (1j**k) * coef / (2.0 * x) ** k
    h = (-1j) ** (n + 1) * np.exp(1j * x) / x * total
    return np.sqrt(2.0 * x / np.pi) * h


def _integer_series(n: int, x: np.ndarray, max_terms: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Ascending series for (J_n, Y_n)."""
    half = x / 2.0
    j = np.zeros_like(x)
    tail = np.zeros_like(x)
    harmonic_k = 0.0
    harmonic_nk = sum(1.0 / m for m in range(1, n + 1))
    term = half**n / math.factorial(n)  # (x/2)^(2k+n) / (k! (n+k)!) at k = 0
    for k in range(max_terms):
        signed = term if k % 2 == 0 else -term
        j = j + signed
        # psi(k+1) + psi(n+k+1) = -2 gamma + H_k + H_{n+k}
        tail = tail + signed * (-2.0 * EULER_GAMMA + harmonic_k + harmonic_nk)
        if k > 2 and np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(j), 1e-300)):
            break
        term = term * half**2 / ((k + 1) * (n + k + 1))
        harmonic_k += 1.0 / (k + 1)
        harmonic_nk += 1.0 / (n + k + 1)
    finite = np.zeros_like(x)
    for k in range(n):
        finite = finite + math.factorial(n - k - 1) / math.factorial(k) * half ** (2 * k - n)
    y = (2.0 / np.pi) * j * np.log(half) - finite / np.pi - tail / np.pi
    return j, y


def _gauss(f, a: float, b: np.ndarray) -> np.ndarray:
    """Gauss-Legendre rule for each upper limit in b; f takes (t, row)."""
    half = 0.5 * (b - a)
    t = a + half[:, None] * (_GAUSS_NODES[None, :] + 1.0)
    return half * np.sum(_GAUSS_WEIGHTS[None, :] * f(t), axis=1)


def _integer_integral(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(J_n, Y_n) from the Bessel and Schläfli integrals."""
    xc = x[:, None]
    pi_end = np.full(x.shape, np.pi)
    j = _gauss(lambda t: np.cos(n * t - xc * np.sin(t)), 0.0, pi_end) / np.pi
    y1 = _gauss(lambda t: np.sin(xc * np.sin(t) - n * t), 0.0, pi_end) / np.pi
    # the tail integrand is below e^-40 beyond x sinh t = 40
    upper = np.arcsinh(40.0 / x) + 1.0
    sign = -1.0 if n % 2 else 1.0
    y2 = _gauss(lambda t: (np.exp(n * t) + sign * np.exp(-n * t)) * np.exp(-xc * np.sinh(t)), 0.0, upper) / np.pi
    return j, y1 - y2


def _integer_asymptotic(n: int, x: np.ndarray, max_terms: int = 60) -> np.ndarray:
    mu = 4.0 * n * n
    total = np.ones_like(x, dtype=complex)
    a_k = 1.0
    prev = np.full(x.shape, np.inf)
    for k in range(1, max_terms):
        a_k = a_k * (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = (1j**k) * a_k / x**k
        mag = np.abs(term)
        # stop where the divergent expansion reaches its smallest term
        use = mag < prev
        total = total + np.where(use, term, 0.0)
        prev = np.where(use, mag, -1.0)
        if np.all((mag < 1e-17) | ~use) or a_k == 0.0:
            break
    omega = x - n * np.pi / 2.0 - np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * x)) * np.exp(1j * omega) * total


def hankel_first_kind(nu: float, x) -> np.ndarray | complex:
    """``H^(1)_nu(x) = J_nu(x) + i Y_nu(x)`` for x > 0.

    Supported orders are half-integers (closed form) and integers
    (series up to 4, integral representations up to ``SERIES_CROSSOVER``,
    asymptotic expansion above).
    """
    kind, n = _order_kind(nu)
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("Hankel function evaluated at non-positive argument")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if kind == "half":
        out = _half_integer_hankel(n, xa)
    else:
        out = np.empty(xa.shape, dtype=complex)
        small = xa <= SERIES_EXACT_LIMIT
        mid = (xa > SERIES_EXACT_LIMIT) & (xa <= SERIES_CROSSOVER)
        large = xa > SERIES_CROSSOVER
        if np.any(small):
            jv, yv = _integer_series(n, xa[small])
            out[small] = jv + 1j * yv
        if np.any(mid):
            jv, yv = _integer_integral(n, xa[mid])
            out[mid] = jv + 1j * yv
        if np.any(large):
            out[large] = _integer_asymptotic(n, xa[large])
    return complex(out[0]) if scalar else out


def psi_value(N: int, r):
    """Real part of the Helmholtz fundamental solution at radius r."""
    if N not in (3, 4, 5):
        raise UnsupportedDimension(f"kernel available for N in (3, 4, 5), got {N}")
    ra = np.asarray(r, dtype=float)
    if np.any(~(ra > 0)):
        raise DomainError("kernel evaluated at non-positive radius")
    # Re[(i/4) c H] = -(c/4) Y for real c
    y = np.imag(hankel_first_kind((N - 2) / 2.0, ra))
    out = -0.25 * (2.0 * np.pi * ra) ** ((2.0 - N) / 2.0) * y
    return float(out) if np.ndim(out) == 0 else out


def psi_closed_form_3d(r):
    r = np.asarray(r, dtype=float)
    return np.cos(r) / (4.0 * np.pi * r)


def sample_psi_3d(grid: Grid) -> np.ndarray:
    """Sample Psi on a 3-D grid; the origin cell gets its cell average."""
    if grid.N != 3:
        raise UnsupportedDimension("closed-form sampling is three-dimensional")
    r = grid.radius
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(r > 0, np.cos(r) / (4.0 * np.pi * np.where(r > 0, r, 1.0)), 0.0)
    vals[grid.origin_index] = UNIT_CUBE_INVERSE_DISTANCE / (4.0 * np.pi * grid.h)
    return vals


# ---------------------------------------------------------------- band split


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class SpectralCutoff:
    """Radial annulus cutoff in frequency.

    Equal to 1 where ``||xi| - 1| <= inner`` and 0 where ``||xi| - 1| >= outer``.
    """

    inner: float = 1.0 / 6.0
    outer: float = 1.0 / 4.0
    zero: bool = False

    def __call__(self, kmag: np.ndarray) -> np.ndarray:
        d = np.abs(np.asarray(kmag, dtype=float) - 1.0)
        if self.zero:
            return np.zeros_like(d)
        return 1.0 - _smooth_step((d - self.inner) / (self.outer - self.inner))

    def support(self, kmag: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(kmag) - 1.0) < self.outer


@dataclass(frozen=True)
class BoundReport:
    N: int
    half_width: float
    samples_per_axis: int
    region_radius: float
    annulus_modes: int
    phi1_constant: float
    phi2_constant: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def band_split(grid: Grid, cutoff: SpectralCutoff | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Psi, Phi1, Phi2) sampled on a 3-D grid."""
    cutoff = SpectralCutoff() if cutoff is None else cutoff
    psi = sample_psi_3d(grid)
    kmag = np.sqrt(grid.half_spectrum_k2)
    phi1 = sfft.irfftn(cutoff(kmag) * sfft.rfftn(psi), s=grid.shape)
    return psi, phi1, psi - phi1


def verify_band_split_bounds(N: int, grid: Grid, cutoff: SpectralCutoff | None = None) -> BoundReport:
    """Empirical constants in the far/near-field bounds of the annulus split.

    Phi1 keeps the frequency content of Psi inside the annulus around the
    unit sphere, Phi2 = Psi - Phi1. Constants are maxima over
    ``0 < |x| <= L/2``; beyond that the periodic wrap of the box dominates.
    """
    if N != 3 or grid.N != 3:
        raise UnsupportedDimension("band-split verification is implemented for N = 3")
    cutoff = SpectralCutoff() if cutoff is None else cutoff
    if grid.L / np.pi < 8:
        raise ResolutionError(f"need >= 8 frequencies per unit, grid has {grid.L / np.pi:.2f}")
    kmag = np.sqrt(grid.half_spectrum_k2)
    # full-spectrum count: interior rfft columns stand for two modes
    weights = np.full(kmag.shape[-1], 2)
    weights[0] = 1
    if grid.n % 2 == 0:
        weights[-1] = 1
    modes = int(np.sum(cutoff.support(kmag) * weights))
    if modes < 8:
        raise ResolutionError(f"annulus contains only {modes} grid frequencies")
    _, phi1, phi2 = band_split(grid, cutoff)
    r = grid.radius
    region = (r > 0) & (r <= grid.L / 2.0)
    rr = r[region]
    c1 = float(np.max(np.abs(phi1[region]) * (1.0 + rr) ** ((N - 1) / 2.0)))
    c2 = float(np.max(np.abs(phi2[region]) / np.minimum(rr ** (2.0 - N), rr ** (-float(N)))))
    return BoundReport(
        N=N,
        half_width=grid.L,
        samples_per_axis=grid.n,
        region_radius=grid.L / 2.0,
        annulus_modes=modes,
        phi1_constant=c1,
        phi2_constant=c2,
    )
