"""Periodic-box discretization.

The domain is ``[-L, L)^N`` sampled at ``x_j = -L + j*h`` with ``h = 2L/n``.
Arrays are indexed ``values[i1, i2, ..., iN]`` with axis 0 along x1. On disk
the samples are written with x1 varying fastest (Fortran order), headerless
little-endian float64, plus a JSON sidecar.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import (
    BadResolution,
    FloorViolation,
    GridMismatch,
    NonLatticeShift,
    UnsupportedDimension,
)

SUPPORTED_DIMENSIONS = (3, 4, 5)


@dataclass(frozen=True)
class Grid:
    N: int
    L: float
    n: int

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.N

    @property
    def cell_volume(self) -> float:
        return self.h**self.N

    @property
    def volume(self) -> float:
        return (2.0 * self.L) ** self.N

    @property
    def origin_index(self) -> tuple[int, ...]:
        return (self.n // 2,) * self.N

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Per-axis angular frequencies ``pi*m/L`` in FFT order, Nyquist at ``-n/2``."""
        return np.fft.fftfreq(self.n, d=self.h) * 2.0 * np.pi

    @property
    def frequency_spacing(self) -> float:
        return np.pi / self.L

    def coords(self) -> list[np.ndarray]:
        """Sparse broadcastable coordinate arrays, one per axis."""
        out = []
        for ax in range(self.N):
            sh = [1] * self.N
            sh[ax] = self.n
            out.append(self.axis.reshape(sh))
        return out

    @cached_property
    def radius(self) -> np.ndarray:
        r2 = sum(c**2 for c in self.coords())
        return np.sqrt(np.broadcast_to(r2, self.shape))

    @cached_property
    def half_spectrum_k2(self) -> np.ndarray:
        """|xi|^2 on the real-FFT layout (last axis halved)."""
        k = self.frequencies
        kr = np.fft.rfftfreq(self.n, d=self.h) * 2.0 * np.pi
        k2 = np.zeros((self.n,) * (self.N - 1) + (kr.size,))
        for ax in range(self.N):
            sh = [1] * self.N
            if ax == self.N - 1:
                sh[ax] = kr.size
                k2 = k2 + (kr**2).reshape(sh)
            else:
                sh[ax] = self.n
                k2 = k2 + (k**2).reshape(sh)
        return k2

    def point(self, index: Sequence[int]) -> np.ndarray:
        return self.axis[np.asarray(index, dtype=int)]

    def nearest_index(self, x: Sequence[float]) -> tuple[int, ...]:
        idx = np.rint((np.asarray(x, dtype=float) + self.L) / self.h).astype(int) % self.n
        return tuple(int(i) for i in idx)


def make_grid(N: int, L: float, n: int) -> Grid:
    if N not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimension(f"dimension {N} not in {SUPPORTED_DIMENSIONS}")
    if not (np.isfinite(L) and L > 0):
        raise BadResolution(f"half-width must be positive, got {L}")
    if int(n) != n or n < 16 or (int(n) & (int(n) - 1)) != 0:
        raise BadResolution(f"samples per axis must be a power of two >= 16, got {n}")
    return Grid(int(N), float(L), int(n))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            if vals.size == np.prod(self.grid.shape):
                vals = vals.reshape(self.grid.shape)
            else:
                raise GridMismatch(f"values of shape {vals.shape} on grid of shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains NaN or Inf")
        if vals is self.values or vals.base is not None:
            vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __neg__(self) -> ScalarField:
        return ScalarField(self.grid, -self.values)

    def __add__(self, other) -> ScalarField:
        return ScalarField(self.grid, self.values + _values_on(self.grid, other))

    def __sub__(self, other) -> ScalarField:
        return ScalarField(self.grid, self.values - _values_on(self.grid, other))

    def __mul__(self, other) -> ScalarField:
        return ScalarField(self.grid, self.values * _values_on(self.grid, other))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _values_on(grid: Grid, other) -> Union[np.ndarray, float]:
    if isinstance(other, ScalarField):
        check_same_grid(grid, other.grid)
        return other.values
    return other


def check_same_grid(*grids: Grid) -> None:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatch(f"grid {g} does not match {first}")


def field_from_function(grid: Grid, func) -> ScalarField:
    """Sample ``func(*coords)`` (broadcasting over sparse coordinates)."""
    vals = np.broadcast_to(func(*grid.coords()), grid.shape)
    return ScalarField(grid, np.array(vals, dtype=float))


def lp_norm(f: ScalarField, r: float) -> float:
    """Rectangle-rule Lebesgue norm ``(sum |f|^r h^N)^(1/r)``."""
    if r < 1:
        raise ValueError(f"norm exponent must be >= 1, got {r}")
    return float(np.sum(np.abs(f.values) ** r) * f.grid.cell_volume) ** (1.0 / r)


def inner(f: ScalarField, g: ScalarField) -> float:
    check_same_grid(f.grid, g.grid)
    return float(np.sum(f.values * g.values) * f.grid.cell_volume)


def shift(f: ScalarField, a: Sequence[float]) -> ScalarField:
    """Cyclic translation by ``a`` lattice steps: result(x) = f(x - a*h)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size != f.grid.N:
        raise NonLatticeShift(f"shift vector has {a.size} components, grid has {f.grid.N}")
    if not np.all(np.isfinite(a)) or np.any(a != np.rint(a)):
        raise NonLatticeShift(f"shift {a.tolist()} is not an integer lattice vector")
    steps = tuple(int(s) for s in np.rint(a).astype(int))
    return ScalarField(f.grid, np.roll(f.values, steps, axis=tuple(range(f.grid.N))))


def lattice_vector(grid: Grid, offset: Sequence[float], atol: float = 1e-9) -> tuple[int, ...]:
    """Convert a physical offset into lattice steps, refusing off-lattice offsets."""
    steps = np.asarray(offset, dtype=float) / grid.h
    rounded = np.rint(steps)
    if np.any(np.abs(steps - rounded) > atol):
        raise NonLatticeShift(f"offset {list(offset)} is not a multiple of h={grid.h}")
    return tuple(int(s) for s in rounded)


def spow(values: np.ndarray, s: float) -> np.ndarray:
    """Array kernel of :func:`signed_power`."""
    return np.sign(values) * np.abs(values) ** s


def signed_power(f: ScalarField, s: float) -> ScalarField:
    """Pointwise ``|f|^(s-1) f`` with 0 mapped to 0."""
    if not s > 0:
        raise ValueError(f"signed power needs s > 0, got {s}")
    return ScalarField(f.grid, spow(f.values, s))


# ---------------------------------------------------------------- coefficients


@dataclass(frozen=True)
class ConstantCoefficient:
    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise FloorViolation(f"constant coefficient must be positive, got {self.value}")

    @property
    def floor(self) -> float:
        return self.value

    def evaluate(self, *coords: np.ndarray) -> np.ndarray:
        return np.full(np.broadcast_shapes(*(c.shape for c in coords)), self.value)

    def peak_points(self) -> list[tuple[float, ...]]:
        return []

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class GaussianBumps:
    """``floor + sum_i A_i exp(-|x - c_i|^2 / sigma_i^2)``."""

    floor: float
    amplitudes: tuple[float, ...]
    centers: tuple[tuple[float, ...], ...]
    widths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        object.__setattr__(self, "centers", tuple(tuple(float(c) for c in cc) for cc in self.centers))
        if not self.floor > 0:
            raise FloorViolation(f"floor must be positive, got {self.floor}")
        if not (len(self.amplitudes) == len(self.centers) == len(self.widths)):
            raise ValueError("amplitudes, centers and widths must have equal length")
        if any(a <= 0 for a in self.amplitudes) or any(w <= 0 for w in self.widths):
            raise ValueError("bump amplitudes and widths must be positive")

    def evaluate(self, *coords: np.ndarray) -> np.ndarray:
        out = np.full(np.broadcast_shapes(*(c.shape for c in coords)), float(self.floor))
        for amp, center, width in zip(self.amplitudes, self.centers, self.widths):
            if len(center) != len(coords):
                raise ValueError(f"center {center} has wrong dimension for {len(coords)}-D grid")
            d2 = sum((c - c0) ** 2 for c, c0 in zip(coords, center))
            out = out + amp * np.exp(-d2 / width**2)
        return out

    def peak_points(self) -> list[tuple[float, ...]]:
        return list(self.centers)

    def to_dict(self) -> dict:
        return {
            "kind": "gaussians",
            "floor": self.floor,
            "bumps": [
                {"amplitude": a, "center": list(c), "width": w}
                for a, c, w in zip(self.amplitudes, self.centers, self.widths)
            ],
        }


CoefficientSpec = Union[ConstantCoefficient, GaussianBumps]


def coefficient_from_dict(d: dict) -> CoefficientSpec:
    kind = d.get("kind")
    if kind == "constant":
        return ConstantCoefficient(float(d["value"]))
    if kind == "gaussians":
        bumps = d.get("bumps", [])
        return GaussianBumps(
            floor=float(d["floor"]),
            amplitudes=tuple(b["amplitude"] for b in bumps),
            centers=tuple(tuple(b["center"]) for b in bumps),
            widths=tuple(b["width"] for b in bumps),
        )
    raise ValueError(f"unknown coefficient kind {kind!r}")


def coefficient_sup(spec: CoefficientSpec) -> float:
    """Supremum estimate: the exact value at the constant or at the bump centers."""
    if isinstance(spec, ConstantCoefficient):
        return spec.value
    pts = spec.peak_points()
    vals = [float(spec.evaluate(*(np.asarray([c]) for c in pt))[0]) for pt in pts]
    return max(vals + [spec.floor])


@dataclass(frozen=True, eq=False)
class CoefficientField:
    base: ScalarField
    floor: float
    sup_value: float
    argmax_points: np.ndarray = field(repr=False)

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def is_constant(self) -> bool:
        v = self.base.values
        return bool(np.all(v == v.flat[0]))


def make_coefficient(spec: CoefficientSpec, grid: Grid, eps: float = 1.0, rtol: float = 1e-12) -> CoefficientField:
    """Sample ``spec(eps * x)`` on the grid.

    Grid points within relative distance ``rtol`` of the maximum form the
    discrete argmax set.
    """
    if not eps > 0:
        raise ValueError(f"dilation must be positive, got {eps}")
    coords = [eps * c for c in grid.coords()]
    vals = np.array(np.broadcast_to(spec.evaluate(*coords), grid.shape), dtype=float)
    if np.any(vals < spec.floor):
        raise FloorViolation(f"coefficient sample {vals.min()} below floor {spec.floor}")
    base = ScalarField(grid, vals)
    top = float(vals.max())
    idx = np.argwhere(vals >= top * (1.0 - rtol))
    pts = grid.axis[idx]
    return CoefficientField(base, float(spec.floor), top, pts)


def coefficient_from_field(f: ScalarField, floor: float | None = None) -> CoefficientField:
    vals = f.values
    fl = float(vals.min()) if floor is None else float(floor)
    if not fl > 0 or np.any(vals < fl):
        raise FloorViolation(f"coefficient field minimum {vals.min()} violates floor {fl}")
    top = float(vals.max())
    idx = np.argwhere(vals >= top * (1.0 - 1e-12))
    return CoefficientField(f, fl, top, f.grid.axis[idx])


# ---------------------------------------------------------------- field I/O


def write_field(path: str | os.PathLike, f: ScalarField, role: str = "") -> tuple[str, str]:
    """Write the raw dump and its JSON sidecar; returns both paths."""
    path = os.fspath(path)
    data = np.asarray(f.values, dtype="<f8").ravel(order="F")
    with open(path, "wb") as fh:
        fh.write(data.tobytes())
    meta = {
        "dimension": f.grid.N,
        "half_width": f.grid.L,
        "samples_per_axis": f.grid.n,
        "role": role,
    }
    meta_path = path + ".json"
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2)
    return path, meta_path


def read_field(path: str | os.PathLike) -> tuple[ScalarField, str]:
    path = os.fspath(path)
    with open(path + ".json") as fh:
        meta = json.load(fh)
    grid = Grid(int(meta["dimension"]), float(meta["half_width"]), int(meta["samples_per_axis"]))
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != np.prod(grid.shape):
        raise GridMismatch(f"{path}: {raw.size} samples, expected {np.prod(grid.shape)}")
    return ScalarField(grid, raw.reshape(grid.shape, order="F").astype(float)), meta.get("role", "")
