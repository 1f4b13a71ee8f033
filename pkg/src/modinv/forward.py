"""Synthetic measurement generators.

``solve_wave`` integrates ``u_tt - c(x,t) u_xx = f(x,t)`` with the explicit
leapfrog scheme (second-order central differences in x and t) under
Dirichlet boundary data. The Kawahara helpers evaluate the exact sech^4
travelling wave of ``u_t + u u_x + u_xxx - u_xxxxx = 0``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import CflViolation
from .grid import Field1D, Field2D, Grid1D

SpaceTimeFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class WaveProblem:
    """Wave equation data on ``[0, L] x [0, T]``.

    ``c`` and ``f`` are callables ``(x, t) -> array`` (``c`` may also be a
    number); ``g1``/``g2`` give ``u(0, t)``/``u(L, t)``; ``r1``/``r2`` give the
    initial displacement and velocity.
    """

    grid_x: Grid1D
    grid_t: Grid1D
    c: float | SpaceTimeFn
    f: SpaceTimeFn
    g1: Callable[[float], float]
    g2: Callable[[float], float]
    r1: Callable[[np.ndarray], np.ndarray]
    r2: Callable[[np.ndarray], np.ndarray]

    def c_at(self, x: np.ndarray, t: float) -> np.ndarray:
        if callable(self.c):
            return np.broadcast_to(np.asarray(self.c(x, t), dtype=float), x.shape)
        return np.full(x.shape, float(self.c))

    def f_at(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.f(x, t), dtype=float), x.shape)

    def cfl(self) -> float:
        """Largest ``sqrt(c) dt/dx`` over interior nodes and all time levels used."""
        x = self.grid_x.nodes[1:-1]
        dt = self.grid_t.dx
        if not callable(self.c):
            cmax = float(self.c)
        else:
            times = np.append(self.grid_t.nodes, self.grid_t.L + dt)
            cmax = max(float(np.max(self.c_at(x, t))) for t in times)
        return math.sqrt(max(cmax, 0.0)) * dt / self.grid_x.dx


@dataclass(frozen=True)
class WaveSolution:
    u: Field2D
    u_tt: Field2D


def solve_wave(p: WaveProblem) -> WaveSolution:
    """Leapfrog solve returning ``u`` and a time-differenced ``u_tt``.

    The first step uses the Taylor start
    ``u1 = r1 + dt r2 + dt^2/2 (c D2 r1 + f0)``. ``u_tt`` at every stored
    level is the central second difference of ``u`` in time; a mirrored
    ghost level ``u_{-1} = u_1 - 2 dt r2`` and one extra step past ``T``
    make that possible at ``t = 0`` and ``t = T``. No PDE identity is
    substituted into ``u_tt``.
    """
    gx, gt = p.grid_x, p.grid_t
    courant = p.cfl()
    if courant > 1.0:
        raise CflViolation(f"CFL number {courant:.6f} exceeds 1")
    x = gx.nodes
    dt, dx = gt.dx, gx.dx
    lam = dt * dt / (dx * dx)
    nt = gt.N
    times = gt.nodes

    # levels -1 .. nt (inclusive) -> nt + 2 rows
    u = np.empty((nt + 2, gx.N))
    r1 = np.broadcast_to(np.asarray(p.r1(x), dtype=float), x.shape)
    r2 = np.broadcast_to(np.asarray(p.r2(x), dtype=float), x.shape)
    u[1] = r1
    u[1, 0], u[1, -1] = p.g1(0.0), p.g2(0.0)

    def accel(level: np.ndarray, t: float) -> np.ndarray:
        a = np.zeros_like(level)
        a[1:-1] = p.c_at(x[1:-1], t) * (level[2:] - 2 * level[1:-1] + level[:-2]) / (dx * dx)
        a[1:-1] += p.f_at(x[1:-1], t)
        return a

    a0 = accel(u[1], 0.0)
    u[2] = u[1] + dt * r2 + 0.5 * dt * dt * a0
    u[0] = u[2] - 2 * dt * r2
    u[2, 0], u[2, -1] = p.g1(dt), p.g2(dt)
    u[0, 0], u[0, -1] = p.g1(-dt), p.g2(-dt)

    for n in range(1, nt):
        t = times[n]
        row = n + 1
        nxt = u[row + 1]
        cur = u[row]
        nxt[1:-1] = (
            2 * cur[1:-1]
            - u[row - 1, 1:-1]
            + lam * p.c_at(x[1:-1], t) * (cur[2:] - 2 * cur[1:-1] + cur[:-2])
            + dt * dt * p.f_at(x[1:-1], t)
        )
        t_next = t + dt
        nxt[0], nxt[-1] = p.g1(t_next), p.g2(t_next)

    u_tt = (u[2:] - 2 * u[1:-1] + u[:-2]) / (dt * dt)
    return WaveSolution(Field2D(gx, gt, u[1:-1]), Field2D(gx, gt, u_tt))


# --- Kawahara soliton ------------------------------------------------------

KAWAHARA_AMPLITUDE = 105.0 / 169.0
KAWAHARA_SPEED = 36.0 / 169.0
KAWAHARA_WIDTH = 2.0 * math.sqrt(13.0)


def _kawahara_z(x: np.ndarray, t: float) -> np.ndarray:
    return (x - KAWAHARA_SPEED * t) / KAWAHARA_WIDTH


def kawahara_values(x: np.ndarray, t: float) -> np.ndarray:
    z = _kawahara_z(np.asarray(x, dtype=float), t)
    return KAWAHARA_AMPLITUDE / np.cosh(z) ** 4


def kawahara_time_derivative(x: np.ndarray, t: float) -> np.ndarray:
    z = _kawahara_z(np.asarray(x, dtype=float), t)
    # d/dt sech^4 z = -4 sech^4 z tanh z * dz/dt,  dz/dt = -speed/width
    return 4.0 * KAWAHARA_AMPLITUDE * KAWAHARA_SPEED / KAWAHARA_WIDTH * np.tanh(z) / np.cosh(z) ** 4


def kawahara_u(grid: Grid1D, t: float) -> Field1D:
    return Field1D(grid, kawahara_values(grid.nodes, t))


def kawahara_ut(grid: Grid1D, t: float) -> Field1D:
    return Field1D(grid, kawahara_time_derivative(grid.nodes, t))
