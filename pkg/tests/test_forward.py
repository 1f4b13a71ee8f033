import math

import numpy as np
import pytest

from modinv.errors import CflViolation
from modinv.forward import (
    KAWAHARA_SPEED,
    WaveProblem,
    kawahara_time_derivative,
    kawahara_u,
    kawahara_ut,
    kawahara_values,
    solve_wave,
)
from modinv.grid import Grid1D


def standing_wave(L, c, Nx, Nt, T):
    k = math.pi / L
    w = k * math.sqrt(c)
    prob = WaveProblem(
        Grid1D(L, Nx),
        Grid1D(T, Nt),
        c,
        lambda x, t: 0.0,
        lambda t: 0.0,
        lambda t: 0.0,
        lambda x: np.sin(k * x),
        lambda x: 0.0 * x,
    )
    exact = lambda x, t: np.sin(k * x) * np.cos(w * t)
    return prob, exact


def test_standing_wave():
    prob, exact = standing_wave(3.0, 0.5, 3001, 1001, 1.0)
    sol = solve_wave(prob)
    n = 500
    x, t = prob.grid_x.nodes, prob.grid_t.nodes[n]
    ref = exact(x, t)
    err = np.linalg.norm(sol.u.values[n] - ref) / np.linalg.norm(ref)
    assert err <= 1e-4


def test_second_order_convergence():
    errs = []
    for Nx, Nt in ((51, 51), (101, 101)):
        prob, exact = standing_wave(3.0, 0.5, Nx, Nt, 1.0)
        u = solve_wave(prob).u.values[-1]
        errs.append(np.max(np.abs(u - exact(prob.grid_x.nodes, 1.0))))
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_static_equilibrium():
    # u_tt = c u_xx + f vanishes for r1 = x (L - x) when f = -c r1''
    c, L = 0.5, 3.0
    prob = WaveProblem(
        Grid1D(L, 301),
        Grid1D(1.0, 201),
        c,
        lambda x, t: 2.0 * c + 0.0 * x,
        lambda t: 0.0,
        lambda t: 0.0,
        lambda x: x * (L - x),
        lambda x: 0.0 * x,
    )
    sol = solve_wave(prob)
    r1 = prob.grid_x.nodes * (L - prob.grid_x.nodes)
    np.testing.assert_allclose(sol.u.values, np.broadcast_to(r1, sol.u.values.shape), atol=1e-10)
    np.testing.assert_allclose(sol.u_tt.values, 0.0, atol=1e-8)


def test_residual_consistency():
    c = lambda x, t: 0.5 + 0.1 * x
    prob = WaveProblem(
        Grid1D(3.0, 301),
        Grid1D(1.0, 301),
        c,
        lambda x, t: np.sin(x) * t,
        lambda t: 0.0,
        lambda t: 0.0,
        lambda x: np.sin(math.pi * x / 3.0),
        lambda x: 0.0 * x,
    )
    sol = solve_wave(prob)
    x, dx = prob.grid_x.nodes, prob.grid_x.dx
    for n in (1, 150, 300):
        t = prob.grid_t.nodes[n]
        u = sol.u.values[n]
        uxx = (u[2:] - 2 * u[1:-1] + u[:-2]) / dx**2
        rhs = c(x[1:-1], t) * uxx + np.sin(x[1:-1]) * t
        np.testing.assert_allclose(sol.u_tt.values[n, 1:-1], rhs, atol=1e-8)


def test_cfl_violation():
    prob, _ = standing_wave(3.0, 4.0, 301, 11, 1.0)
    assert prob.cfl() > 1
    with pytest.raises(CflViolation):
        solve_wave(prob)


class TestKawahara:
    def test_peak_and_decay(self):
        g = Grid1D(60.0, 601)
        u = kawahara_u(g, 0.0)
        assert u.values[0] == pytest.approx(105 / 169)
        assert abs(u.values[-1]) < 1e-10
        assert np.all(u.values > 0)

    def test_time_derivative_matches_difference(self):
        x = np.linspace(0, 60, 601)
        h = 1e-4
        fd = (kawahara_values(x, 25 + h) - kawahara_values(x, 25 - h)) / (2 * h)
        np.testing.assert_allclose(kawahara_time_derivative(x, 25.0), fd, atol=1e-7)

    def test_travelling_wave_relation(self):
        x = np.linspace(0, 60, 601)
        h = 1e-5
        ux = (kawahara_values(x + h, 10) - kawahara_values(x - h, 10)) / (2 * h)
        np.testing.assert_allclose(
            kawahara_time_derivative(x, 10.0), -KAWAHARA_SPEED * ux, atol=1e-8
        )

    def test_fields(self):
        g = Grid1D(60.0, 601)
        np.testing.assert_array_equal(
            kawahara_ut(g, 3.0).values, kawahara_time_derivative(g.nodes, 3.0)
        )

    def test_pde_residual(self):
        sp = pytest.importorskip("sympy")
        X, T = sp.symbols("x t", real=True)
        z = (X - sp.Rational(36, 169) * T) / (2 * sp.sqrt(13))
        u = sp.Rational(105, 169) / sp.cosh(z) ** 4
        res = sp.diff(u, T) + u * sp.diff(u, X) + sp.diff(u, X, 3) - sp.diff(u, X, 5)
        f = sp.lambdify((X, T), res, "numpy")
        x = np.linspace(0, 60, 121)
        assert np.max(np.abs(f(x, 25.0))) <= 1e-5
        # our closed form agrees with the symbolic one
        fu = sp.lambdify((X, T), u, "numpy")
        np.testing.assert_allclose(kawahara_values(x, 25.0), fu(x, 25.0), rtol=1e-13)
