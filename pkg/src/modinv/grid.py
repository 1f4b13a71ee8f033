"""Uniform grids, sampled fields, noise injection and interpolation."""

from __future__ import annotations

import csv
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import BarycentricInterpolator, CubicSpline

from .errors import (
    DomainNotCovered,
    DuplicateTimes,
    GridMismatch,
    InvalidDomain,
    InvalidSize,
    NonFinite,
    TooFewPoints,
    TooFewSlices,
    UnsortedPoints,
    ZeroField,
    ZeroReference,
)


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid1D:
    """Uniform sampling of ``[0, L]`` with ``N`` nodes."""

    L: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise InvalidDomain(f"grid length must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 3:
            raise InvalidSize(f"grid needs at least 3 nodes, got {self.N}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def dx(self) -> float:
        return self.L / (self.N - 1)

    @property
    def nodes(self) -> NDArray[np.float64]:
        return np.linspace(0.0, self.L, self.N)

    def index_of(self, x: float) -> int:
        """Index of the node nearest to ``x``."""
        return int(np.clip(round(x / self.dx), 0, self.N - 1))

    def head(self, n: int) -> Grid1D:
        """Grid made of the first ``n`` nodes (same spacing)."""
        if n == self.N:
            return self
        return Grid1D(float(self.nodes[n - 1]), n)


@dataclass(frozen=True)
class Field1D:
    grid: Grid1D
    values: NDArray[np.float64]

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.N,):
            raise GridMismatch(f"field has shape {values.shape}, grid has {self.grid.N} nodes")
        if not np.all(np.isfinite(values)):
            raise NonFinite("field contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, func) -> Field1D:
        x = grid.nodes
        return cls(grid, np.broadcast_to(func(x), x.shape))

    def head(self, n: int) -> Field1D:
        if n == self.grid.N:
            return self
        return Field1D(self.grid.head(n), self.values[:n])


@dataclass(frozen=True)
class Field2D:
    """Values on ``grid_t x grid_x``; row ``n`` is the slice at ``t_n``."""

    grid_x: Grid1D
    grid_t: Grid1D
    values: NDArray[np.float64]

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid_t.N, self.grid_x.N):
            raise GridMismatch(
                f"field has shape {values.shape}, grids give ({self.grid_t.N}, {self.grid_x.N})"
            )
        if not np.all(np.isfinite(values)):
            raise NonFinite("field contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def grid(self) -> tuple[Grid1D, Grid1D]:
        return (self.grid_t, self.grid_x)

    def slice(self, n: int) -> Field1D:
        return Field1D(self.grid_x, self.values[n])

    def time(self, n: int) -> float:
        return float(self.grid_t.nodes[n])


@dataclass(frozen=True)
class NoiseSpec:
    level_percent: float
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.level_percent) and self.level_percent >= 0):
            raise ValueError(f"noise level must be >= 0, got {self.level_percent}")


def noise_level(noisy: ArrayLike, exact: ArrayLike) -> float:
    """Percent level ``100 * ||noisy - exact||_2 / ||exact||_2``."""
    exact = np.asarray(exact, dtype=float)
    return 100.0 * np.linalg.norm(np.asarray(noisy) - exact) / np.linalg.norm(exact)


def add_noise(field: Field1D, spec: NoiseSpec) -> Field1D:
    """Add zero-mean Gaussian noise rescaled to hit ``spec.level_percent`` exactly.

    The draw comes from ``numpy.random.default_rng(spec.seed)`` and is rescaled
    so that ``noise_level(result, field)`` equals the requested level.
    """
    u = field.values
    if not np.all(np.isfinite(u)):
        raise NonFinite("cannot add noise to a non-finite field")
    if spec.level_percent == 0:
        return field
    norm_u = np.linalg.norm(u)
    if norm_u == 0:
        raise ZeroField("relative noise level is undefined for the zero field")
    h = np.random.default_rng(spec.seed).standard_normal(u.shape)
    h *= spec.level_percent / 100.0 * norm_u / np.linalg.norm(h)
    return Field1D(field.grid, u + h)


def _same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")


def relative_error(estimate: Field1D | Field2D, exact: Field1D | Field2D) -> float:
    """Percent error ``100 * ||exact - estimate||_2 / ||exact||_2``."""
    _same_grid(estimate, exact)
    ref = np.linalg.norm(exact.values)
    if ref == 0:
        raise ZeroReference("relative error against a zero reference")
    return float(100.0 * np.linalg.norm(exact.values - estimate.values) / ref)


def interpolate_spatial(points: Sequence[tuple[float, float]], target: Grid1D) -> Field1D:
    """Natural cubic spline through ``(x, value)`` pairs, sampled on ``target``."""
    if len(points) < 4:
        raise TooFewPoints(f"need at least 4 points, got {len(points)}")
    xs, ys = (np.asarray(col, dtype=float) for col in zip(*points))
    if np.any(np.diff(xs) <= 0):
        raise UnsortedPoints("x must be strictly increasing")
    tol = 1e-12 * target.L
    if abs(xs[0]) > tol or abs(xs[-1] - target.L) > tol:
        raise DomainNotCovered(f"points span [{xs[0]}, {xs[-1]}], target is [0, {target.L}]")
    spline = CubicSpline(xs, ys, bc_type="natural")
    return Field1D(target, spline(target.nodes))


def interpolate_time(slices: Sequence[tuple[float, Field1D]], target_t: Grid1D) -> Field2D:
    """Lagrange interpolation in time, node by node, through the given slices."""
    if len(slices) < 2:
        raise TooFewSlices(f"need at least 2 slices, got {len(slices)}")
    times = np.array([t for t, _ in slices], dtype=float)
    if len(np.unique(times)) != len(times):
        raise DuplicateTimes(f"slice times must be distinct: {times.tolist()}")
    grid_x = slices[0][1].grid
    for _, fld in slices[1:]:
        if fld.grid != grid_x:
            raise GridMismatch("all slices must share one spatial grid")
    stacked = np.stack([fld.values for _, fld in slices])
    interp = BarycentricInterpolator(times, stacked, axis=0)
    return Field2D(grid_x, target_t, interp(target_t.nodes))


# --- CSV ------------------------------------------------------------------


def write_field_csv(path: str | Path, field: Field1D) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for x, v in zip(field.grid.nodes, field.values):
            w.writerow([repr(float(x)), repr(float(v))])


def read_field_csv(path: str | Path) -> Field1D:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = data[:, 0]
    grid = Grid1D(float(x[-1]), len(x))
    if not np.allclose(x, grid.nodes, rtol=0, atol=1e-9 * grid.L):
        raise GridMismatch(f"{path}: nodes are not a uniform grid starting at 0")
    return Field1D(grid, data[:, 1])


def write_field2d_csv(path: str | Path, field: Field2D) -> None:
    x = field.grid_x.nodes
    with open(path, "w", newline="") as fh:
        fh.write("t,x,value\n")
        for t, row in zip(field.grid_t.nodes, field.values):
            np.savetxt(
                fh,
                np.column_stack([np.full_like(x, t), x, row]),
                delimiter=",",
                fmt="%.17g",
            )


def read_field2d_csv(path: str | Path) -> Field2D:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = np.unique(data[:, 0])
    x = data[: len(data) // len(t), 1]
    grid_x, grid_t = Grid1D(float(x[-1]), len(x)), Grid1D(float(t[-1]), len(t))
    return Field2D(grid_x, grid_t, data[:, 2].reshape(len(t), len(x)))
