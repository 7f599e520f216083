"""Admissible exponent region and the exponents derived from (N, p, q).

Only finite exponents are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateScaling, RegionViolation

SUPPORTED_REASONS = ("below-lower-p", "below-lower-q", "hyperbola-low", "hyperbola-high")


@dataclass(frozen=True)
class AdmissibleExponents:
    N: int
    p: float
    q: float
    p_dual: float
    q_dual: float
    lam: float
    beta1: float
    beta2: float

    @property
    def u_power(self) -> float:
        """Positive amplitude power ``-beta1`` applied to u when rescaling by k."""
        return -self.beta1

    @property
    def v_power(self) -> float:
        return -self.beta2


def dual_exponent(r: float) -> float:
    """Hölder conjugate ``r/(r-1)``."""
    if not r > 1:
        raise ValueError(f"dual exponent needs r > 1, got {r}")
    return r / (r - 1.0)


def _validate_inputs(N: int, p: float, q: float) -> None:
    if int(N) != N or N < 3:
        raise ValueError(f"dimension must be an integer >= 3, got {N}")
    for name, val in (("p", p), ("q", q)):
        if not math.isfinite(val) or val <= 1:
            raise ValueError(f"{name} must be finite and > 1, got {val}")


def _region_check(N: int, p: float, q: float) -> None:
    lower = 2.0 * N / (N - 1)
    if not p > lower:
        raise RegionViolation("below-lower-p", f"p={p} must exceed 2N/(N-1)={lower}")
    if not q > lower:
        raise RegionViolation("below-lower-q", f"q={q} must exceed 2N/(N-1)={lower}")
    s = 1.0 / p + 1.0 / q
    lo = (N - 2) / N
    hi = (N - 1) / (N + 1)
    if not s > lo:
        raise RegionViolation("hyperbola-low", f"1/p+1/q={s} must exceed (N-2)/N={lo}")
    if not s < hi:
        raise RegionViolation("hyperbola-high", f"1/p+1/q={s} must be below (N-1)/(N+1)={hi}")


def decay_exponent(N: int, p: float, q: float) -> float:
    """Decay rate lambda(p, q) of the far-field interaction ``<u, R v>``."""
    _validate_inputs(N, p, q)
    _region_check(N, p, q)
    half = (1.0 - N) / 2.0
    return -max(N / p + half, N / q + half, half + (N + 1) / 2.0 * (1.0 / p + 1.0 / q))


def rescaling_exponents(p: float, q: float) -> tuple[float, float]:
    """Amplitude exponents (beta1, beta2) with u = eps**beta1 * u_hat, eps = 1/k."""
    if not (p > 2 and q > 2):
        raise ValueError(f"rescaling exponents need p, q > 2, got p={p}, q={q}")
    denom = 1.0 - (q - 1.0) * (p - 1.0)
    if denom == 0.0:
        raise DegenerateScaling("(q-1)(p-1) = 1")
    return 2.0 * p / denom, 2.0 * q / denom


def check_admissible(N: int, p: float, q: float) -> AdmissibleExponents:
    """Validate (N, p, q) against the strict admissible region and derive all exponents.

    Raises
    ------
    RegionViolation
        With ``reason`` set to the first violated inequality. Equality counts
        as a violation; no tolerance is applied.
    """
    _validate_inputs(N, p, q)
    _region_check(N, p, q)
    beta1, beta2 = rescaling_exponents(p, q)
    return AdmissibleExponents(
        N=int(N),
        p=float(p),
        q=float(q),
        p_dual=dual_exponent(p),
        q_dual=dual_exponent(q),
        lam=decay_exponent(N, p, q),
        beta1=beta1,
        beta2=beta2,
    )
