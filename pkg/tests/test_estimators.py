import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modinv.basis import make_monomial
from modinv.errors import (
    DegenerateDenominator,
    GridMismatch,
    GridTooSmall,
    OrderTooLow,
    UnderdeterminedShape,
    ZeroMeasurement,
)
from modinv.estimators import (
    LinearSystem,
    assemble_ip1,
    assemble_ip2,
    assemble_ip3,
    assemble_kawahara,
    error_bound,
    estimate_constant_c,
    integrate,
    literal_row_weights,
    noise_error_vector,
    simpson_weights,
    solve_least_squares,
)
from modinv.forward import kawahara_u, kawahara_ut
from modinv.grid import Field1D, Grid1D
from modinv.modulating import make_polynomial_family, make_sinusoidal_family, sup_norms


def system(A, rhs, **kw):
    A = np.asarray(A, dtype=float)
    labels = tuple(f"x{i}" for i in range(A.shape[1]))
    return LinearSystem(A, rhs, labels, np.ones(A.shape[0]), **kw)


class TestQuadrature:
    def test_constant_and_cubic(self):
        g = Grid1D(3.0, 31)
        assert integrate(Field1D(g, np.ones(31))) == pytest.approx(3.0, rel=1e-14)
        g1 = Grid1D(1.0, 11)
        assert integrate(Field1D(g1, g1.nodes**3)) == pytest.approx(0.25, abs=1e-12)

    def test_beta_integral(self):
        g = Grid1D(1.0, 3001)
        x = g.nodes
        assert integrate(Field1D(g, x**4 * (1 - x) ** 4)) == pytest.approx(1 / 630, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.integers(1, 20))
    def test_cubic_exactness(self, coeffs, half):
        g = Grid1D(2.0, 2 * half + 1)
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(2.0) - poly.integ()(0.0)
        assert integrate(Field1D(g, poly(g.nodes))) == pytest.approx(exact, abs=1e-10)

    def test_even_count_falls_back(self):
        w = simpson_weights(4, 1.0)
        assert w.sum() == pytest.approx(3.0)

    def test_too_small(self):
        with pytest.raises(GridTooSmall):
            simpson_weights(2, 0.1)


def sin_data(L=1.0, N=3001, c=0.5):
    g = Grid1D(L, N)
    k = math.pi / L
    u = Field1D(g, np.sin(k * g.nodes))
    u_tt = Field1D(g, -c * k * k * u.values)
    return g, u, u_tt


class TestSourceProblem:
    def test_matrix_entry(self):
        _g, u, u_tt = sin_data()
        fam = make_polynomial_family(1, 3, 1.0)
        sys = assemble_ip1(u, u_tt, 0.5, fam, make_monomial(1, 1.0))
        assert sys.A[0, 0] * fam.scale[0] == pytest.approx(1 / 630, abs=1e-9)

    def test_homogeneous_gives_zero_source(self):
        _g, u, u_tt = sin_data(L=3.0)
        fam = make_polynomial_family(12, 3, 3.0)
        res = solve_least_squares(assemble_ip1(u, u_tt, 0.5, fam, make_monomial(4, 3.0)))
        assert np.max(np.abs(res.coeffs)) < 1e-6

    def test_recovers_polynomial_source(self):
        # u = sin(k x) frozen in time, f = 1 + x, so u_tt = c u_xx + f
        L, c = 3.0, 0.5
        g = Grid1D(L, 3001)
        k = math.pi / L
        u = Field1D(g, np.sin(k * g.nodes))
        u_tt = Field1D(g, -c * k * k * u.values + 1 + g.nodes)
        fam = make_polynomial_family(10, 3, L)
        res = solve_least_squares(assemble_ip1(u, u_tt, c, fam, make_monomial(3, L)))
        np.testing.assert_allclose(res.coeffs, [1.0, L, 0.0], atol=1e-6)

    def test_space_varying_c_needs_derivatives(self):
        g, u, u_tt = sin_data()
        fam = make_polynomial_family(4, 3, 1.0)
        c = Field1D(g, 1 + g.nodes)
        with pytest.raises(ValueError):
            assemble_ip1(u, u_tt, c, fam, make_monomial(2, 1.0))

    def test_space_varying_c(self):
        g, u, _ = sin_data()
        k = math.pi
        c = 1 + g.nodes**2
        u_xx = -(k**2) * u.values
        f = 2 + g.nodes
        u_tt = Field1D(g, c * u_xx + f)
        fam = make_polynomial_family(8, 3, 1.0)
        sys = assemble_ip1(
            u,
            u_tt,
            Field1D(g, c),
            fam,
            make_monomial(3, 1.0),
            Field1D(g, 2 * g.nodes),
            Field1D(g, np.full(g.N, 2.0)),
        )
        res = solve_least_squares(sys)
        np.testing.assert_allclose(res.coeffs, [2, 1, 0], atol=1e-6)

    def test_grid_and_order_checks(self):
        _g, u, u_tt = sin_data()
        with pytest.raises(GridMismatch):
            assemble_ip1(u, u_tt, 0.5, make_polynomial_family(3, 3, 2.0), make_monomial(1, 1.0))
        with pytest.raises(OrderTooLow):
            assemble_ip1(u, u_tt, 0.5, make_polynomial_family(3, 0.5, 1.0), make_monomial(1, 1.0))
        with pytest.raises(UnderdeterminedShape):
            assemble_ip1(u, u_tt, 0.5, make_polynomial_family(2, 3, 1.0), make_monomial(3, 1.0))


class TestCoefficientProblems:
    def test_constant_c_closed_form(self):
        g, u, u_tt = sin_data(c=0.7)
        zero = Field1D(g, np.zeros(g.N))
        for fam in (make_polynomial_family(5, 3, 1.0), make_sinusoidal_family(5, 4, 1.0)):
            assert estimate_constant_c(u, u_tt, zero, fam) == pytest.approx(0.7, abs=1e-8)

    def test_constant_recovered_by_expansion(self):
        g, u, u_tt = sin_data(c=0.7)
        zero = Field1D(g, np.zeros(g.N))
        fam = make_polynomial_family(11, 3, 1.0)
        res = solve_least_squares(assemble_ip2(u, u_tt, zero, fam, make_monomial(3, 1.0)))
        np.testing.assert_allclose(res.coeffs, [0.7, 0, 0], atol=1e-6)

    def test_zero_measurement(self):
        g = Grid1D(1.0, 101)
        zero = Field1D(g, np.zeros(g.N))
        fam = make_polynomial_family(5, 3, 1.0)
        with pytest.raises(DegenerateDenominator):
            estimate_constant_c(zero, zero, zero, fam)
        with pytest.raises(ZeroMeasurement):
            assemble_ip2(zero, zero, zero, fam, make_monomial(2, 1.0))
        with pytest.raises(ZeroMeasurement):
            assemble_ip3(zero, zero, fam, make_monomial(1, 1.0), make_monomial(1, 1.0))

    def test_joint_column_order(self):
        _g, u, u_tt = sin_data()
        fam = make_polynomial_family(6, 3, 1.0)
        sys = assemble_ip3(u, u_tt, fam, make_monomial(2, 1.0), make_monomial(2, 1.0))
        assert [lab[0] for lab in sys.column_labels] == ["f", "f", "c", "c"]
        assert sys.A.shape == (6, 4)


class TestLeastSquares:
    def test_square_consistent(self):
        A = np.array([[2.0, 1.0], [1.0, 3.0]])
        x = np.array([1.5, -2.0])
        res = solve_least_squares(system(A, A @ x))
        np.testing.assert_allclose(res.coeffs, x, rtol=1e-13)
        assert res.residual_norm < 1e-13
        assert not res.rank_deficient

    def test_duplicate_column_flagged(self):
        A = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        res = solve_least_squares(system(A, [1.0, 2.0, 3.0]))
        assert res.rank_deficient

    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(5)
        A, b = rng.standard_normal((12, 4)), rng.standard_normal(12)
        res = solve_least_squares(system(A, b))
        ref = np.linalg.solve(A.T @ A, A.T @ b)
        np.testing.assert_allclose(res.coeffs, ref, rtol=1e-8)
        r = A @ res.coeffs - b
        assert np.max(np.abs(A.T @ r)) < 1e-10
        assert res.residual_norm == pytest.approx(np.linalg.norm(r))

    def test_column_scaling_invariance(self):
        rng = np.random.default_rng(7)
        A, b = rng.standard_normal((10, 3)), rng.standard_normal(10)
        d = np.array([1e-4, 1.0, 1e5])
        base = solve_least_squares(system(A, b)).coeffs
        scaled = solve_least_squares(system(A * d, b)).coeffs
        np.testing.assert_allclose(scaled * d, base, rtol=1e-10)

    def test_row_weights_keep_consistent_solution(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((8, 3))
        x = np.array([0.3, -1.0, 2.0])
        sys = system(A, A @ x)
        w = rng.uniform(0.1, 10, 8)
        np.testing.assert_allclose(solve_least_squares(sys, w).coeffs, x, rtol=1e-10)
        with pytest.raises(ValueError):
            solve_least_squares(sys, -w)

    def test_literal_weights(self):
        fam = make_polynomial_family(5, 3, 3.0)
        _g, u, u_tt = sin_data(L=3.0)
        sys = assemble_ip1(u, u_tt, 0.5, fam, make_monomial(2, 3.0))
        w = literal_row_weights(sys)
        assert np.max(w) == 1.0
        np.testing.assert_allclose(w, fam.scale / np.max(fam.scale))

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(3)
        A, b = rng.standard_normal((9, 3)), rng.standard_normal(9)
        perm = rng.permutation(9)
        a = solve_least_squares(system(A, b)).coeffs
        p = solve_least_squares(system(A[perm], b[perm])).coeffs
        np.testing.assert_allclose(a, p, rtol=1e-12)

    def test_underdetermined_rejected(self):
        with pytest.raises(UnderdeterminedShape):
            system(np.ones((2, 3)), np.ones(2))


class TestKawaharaSystem:
    def test_exact_data_recovers_unit_coefficients(self):
        g = Grid1D(60.0, 601)
        fam = make_polynomial_family(9, 8, 60.0)
        res = solve_least_squares(assemble_kawahara(kawahara_u(g, 25), kawahara_ut(g, 25), fam))
        np.testing.assert_allclose(res.coeffs, 1.0, atol=1e-6)
        assert not res.rank_deficient

    def test_constant_field_is_flagged(self):
        g = Grid1D(60.0, 601)
        fam = make_polynomial_family(9, 8, 60.0)
        u = Field1D(g, np.full(g.N, 0.3))
        res = solve_least_squares(assemble_kawahara(u, Field1D(g, np.zeros(g.N)), fam))
        assert res.rank_deficient

    def test_nonlinear_transfer_identity(self):
        # int u u_x phi = -1/2 int u^2 phi'
        g = Grid1D(60.0, 6001)
        x = g.nodes
        u = kawahara_u(g, 20).values
        h = 1e-5
        from modinv.forward import kawahara_values

        u_x = (kawahara_values(x + h, 20) - kawahara_values(x - h, 20)) / (2 * h)
        fam = make_polynomial_family(4, 8, 60.0)
        w = simpson_weights(g.N, g.dx)
        lhs = fam.derivatives(0, x) @ (w * u * u_x)
        rhs = -0.5 * fam.derivatives(1, x) @ (w * u * u)
        np.testing.assert_allclose(lhs, rhs, atol=1e-8)

    def test_low_order_family_rejected(self):
        g = Grid1D(60.0, 601)
        with pytest.raises(OrderTooLow):
            assemble_kawahara(
                kawahara_u(g, 0), kawahara_ut(g, 0), make_polynomial_family(9, 3, 60.0)
            )


class TestNoiseAnalysis:
    def test_zero_noise(self):
        g = Grid1D(3.0, 301)
        z = Field1D(g, np.zeros(g.N))
        fam = make_polynomial_family(5, 3, 3.0)
        np.testing.assert_array_equal(noise_error_vector(z, z, 0.5, fam), 0.0)

    def test_orthogonal_noise_is_invisible(self):
        g = Grid1D(3.0, 301)
        fam = make_polynomial_family(5, 3, 3.0)
        W = fam.derivatives(0, g.nodes) * simpson_weights(g.N, g.dx)
        h = np.random.default_rng(1).standard_normal(g.N)
        q, _ = np.linalg.qr(W.T)
        h -= q @ (q.T @ h)
        z = Field1D(g, np.zeros(g.N))
        e = noise_error_vector(z, Field1D(g, h), 0.5, fam)
        assert np.max(np.abs(e)) < 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_bound_holds(self, seed):
        g = Grid1D(3.0, 3001)
        fam = make_polynomial_family(10, 3, 3.0)
        rng = np.random.default_rng(seed)
        h1, h2 = rng.standard_normal(g.N), rng.standard_normal(g.N)
        e = noise_error_vector(Field1D(g, h1), Field1D(g, h2), 0.5, fam)
        nu = max(sup_norms(fam, g.nodes))
        delta = max(np.max(np.abs(h1)), np.max(np.abs(h2)))
        assert np.sum(np.abs(e)) <= error_bound(10, nu, delta, 0.5, 3.0)

    def test_bound_formula(self):
        assert error_bound(5, 2.0, 0.0, 0.5, 3.0) == 0.0
        assert error_bound(1, 1.0, 1.0, 0.0, 1.0) == 1.0
        assert error_bound(4, 1.0, 2.0, 1.0, 3.0) == pytest.approx(2 * error_bound(4, 1, 1, 1, 3))
        with pytest.raises(ValueError):
            error_bound(1, -1.0, 1.0, 0.0, 1.0)
