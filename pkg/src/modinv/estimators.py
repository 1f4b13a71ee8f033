"""Weak-form assembly and least-squares estimation.

Each inverse problem is reduced to an ``M x P`` linear system by integrating
the PDE at a fixed time against ``M`` modulating functions and moving every
spatial derivative onto them. Integrals are evaluated on the measurement
grid with composite Simpson weights; modulating-function and basis
derivatives are sampled analytically, so the data is never differentiated.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .basis import BasisSet, Expansion, eval_expansion
from .errors import (
    DegenerateDenominator,
    GridMismatch,
    GridTooSmall,
    NonFinite,
    OrderTooLow,
    UnderdeterminedShape,
    ZeroMeasurement,
)
from .grid import Field1D, Field2D, Grid1D, interpolate_time
from .modulating import ModulatingFamily

RANK_DEFICIENCY_THRESHOLD = 1e12
CANCELLATION_TOL = 1e-8


# --- quadrature -------------------------------------------------------------


def simpson_weights(n: int, dx: float) -> NDArray[np.float64]:
    """Composite Simpson weights for ``n`` equispaced nodes.

    With an even node count the last panel falls back to the trapezoid rule.
    """
    if n < 3:
        raise GridTooSmall(f"quadrature needs at least 3 nodes, got {n}")
    w = np.zeros(n)
    last = n if n % 2 == 1 else n - 1
    w[0:last:2] = 2.0
    w[1:last:2] = 4.0
    w[0] = w[last - 1] = 1.0
    w *= dx / 3.0
    if last != n:
        w[-2] += dx / 2.0
        w[-1] += dx / 2.0
    return w


def integrate(f: Field1D) -> float:
    return float(simpson_weights(f.grid.N, f.grid.dx) @ f.values)


# --- systems ----------------------------------------------------------------


@dataclass(frozen=True)
class LinearSystem:
    """``A @ coeffs ~= rhs`` with per-column provenance labels.

    ``row_scale`` holds the normalisation ``s_m`` already divided out of each
    modulating function (and hence out of row ``m`` of both ``A`` and
    ``rhs``). ``column_magnitude``, when given, is the size of each column
    before cancellation (its integrands taken in absolute value); a column
    that cancels to roundoff against it carries no information.
    """

    A: NDArray[np.float64]
    rhs: NDArray[np.float64]
    column_labels: tuple[str, ...]
    row_scale: NDArray[np.float64]
    problem: str = ""
    metadata: dict = field(default_factory=dict)
    column_magnitude: NDArray[np.float64] | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        rhs = np.array(self.rhs, dtype=float)
        if A.ndim != 2 or rhs.shape != (A.shape[0],):
            raise ValueError(f"incompatible shapes A{A.shape}, rhs{rhs.shape}")
        if len(self.column_labels) != A.shape[1]:
            raise ValueError("one label per column is required")
        if A.shape[0] < A.shape[1]:
            raise UnderdeterminedShape(f"{A.shape[0]} equations for {A.shape[1]} unknowns")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))):
            raise NonFinite("linear system has non-finite entries")
        for arr in (A, rhs):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))
        if self.column_magnitude is not None:
            mag = np.array(self.column_magnitude, dtype=float)
            if mag.shape != (A.shape[1],):
                raise ValueError("one column magnitude per column is required")
            mag.setflags(write=False)
            object.__setattr__(self, "column_magnitude", mag)


@dataclass(frozen=True)
class EstimateResult:
    coeffs: NDArray[np.float64]
    column_labels: tuple[str, ...]
    residual_norm: float
    condition_estimate: float
    rank_deficient: bool
    reconstructed: dict[str, Field1D] = field(default_factory=dict)
    relative_errors: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def block(self, prefix: str) -> NDArray[np.float64]:
        """Coefficients whose column label starts with ``prefix``."""
        idx = [i for i, lab in enumerate(self.column_labels) if lab.startswith(prefix)]
        return self.coeffs[idx]


# --- helpers ----------------------------------------------------------------


def _check_grids(*fields: Field1D) -> Grid1D:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatch(f"grids differ: {grid} vs {f.grid}")
    return grid


def _check_family(fam: ModulatingFamily, grid: Grid1D, needed: int) -> None:
    if abs(fam.L - grid.L) > 1e-12 * grid.L:
        raise GridMismatch(f"family lives on [0, {fam.L}], data on [0, {grid.L}]")
    if fam.order < needed:
        raise OrderTooLow(f"family order {fam.order} < required {needed}")


def _check_shape(M: int, unknowns: int) -> None:
    if M < unknowns:
        raise UnderdeterminedShape(f"M={M} modulating functions for {unknowns} unknowns")


def _check_nonzero(u: Field1D) -> None:
    if not np.any(u.values):
        raise ZeroMeasurement("measurement u(x, t*) is identically zero")


def _weighted_phi(fam: ModulatingFamily, grid: Grid1D, p: int) -> NDArray:
    """Rows ``w_k * phi_m^(p)(x_k)``: dotting with samples integrates."""
    return fam.derivatives(p, grid.nodes) * simpson_weights(grid.N, grid.dx)


def _coefficient_block(u: NDArray, fam: ModulatingFamily, grid: Grid1D, basis: BasisSet):
    """``int u (xi'' phi + 2 xi' phi' + xi phi'')`` for every (m, i), plus column magnitudes."""
    out = np.zeros((fam.M, basis.I))
    mag = np.zeros((fam.M, basis.I))
    for p in range(3):
        weight = 2.0 if p == 1 else 1.0
        wphi_u = _weighted_phi(fam, grid, p) * u
        xi = basis.evaluate(2 - p, grid.nodes).T
        out += weight * wphi_u @ xi
        mag += weight * np.abs(wphi_u) @ np.abs(xi)
    return out, np.linalg.norm(mag, axis=0)


# --- assembly ----------------------------------------------------------------


def assemble_ip1(
    u: Field1D,
    u_tt: Field1D,
    c_known: float | Field1D,
    fam: ModulatingFamily,
    basis: BasisSet,
    c_prime: Field1D | None = None,
    c_second: Field1D | None = None,
) -> LinearSystem:
    """Source estimation: ``A_mi = int phi_m xi_i``, ``K_m = int phi_m u_tt - int u (c phi_m)''``.

    For constant ``c`` the last term is ``c int phi_m'' u``. A space-varying
    known ``c`` needs its first and second derivatives.
    """
    grid = _check_grids(u, u_tt)
    _check_family(fam, grid, 2)
    _check_shape(fam.M, basis.I)
    w_phi0 = _weighted_phi(fam, grid, 0)
    w_phi2 = _weighted_phi(fam, grid, 2)
    A = w_phi0 @ basis.evaluate(0, grid.nodes).T
    rhs = w_phi0 @ u_tt.values
    meta = {"c_kind": "constant"}
    if isinstance(c_known, Field1D):
        if c_prime is None or c_second is None:
            raise ValueError("a space-varying c needs c_prime and c_second")
        _check_grids(u, c_known, c_prime, c_second)
        transferred = (
            w_phi0 * c_second.values
            + 2.0 * _weighted_phi(fam, grid, 1) * c_prime.values
            + w_phi2 * c_known.values
        )
        rhs = rhs - transferred @ u.values
        meta = {"c_kind": "space-varying (extension)"}
    else:
        rhs = rhs - float(c_known) * (w_phi2 @ u.values)
    return LinearSystem(A, rhs, basis.labels("f"), fam.scale, "ip1", meta)


def assemble_ip2(
    u: Field1D, u_tt: Field1D, f_known: Field1D, fam: ModulatingFamily, basis: BasisSet
) -> LinearSystem:
    """Coefficient estimation: ``A_mi = int u (xi_i'' phi_m + 2 xi_i' phi_m' + xi_i phi_m'')``,
    ``K_m = int (u_tt - f) phi_m``."""
    grid = _check_grids(u, u_tt, f_known)
    _check_family(fam, grid, 2)
    _check_shape(fam.M, basis.I)
    _check_nonzero(u)
    A, mag = _coefficient_block(u.values, fam, grid, basis)
    rhs = _weighted_phi(fam, grid, 0) @ (u_tt.values - f_known.values)
    return LinearSystem(A, rhs, basis.labels("c"), fam.scale, "ip2", column_magnitude=mag)


def constant_c_moments(
    u: Field1D, u_tt: Field1D, f_known: Field1D, fam: ModulatingFamily
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Moments ``a_m = int phi_m'' u`` and ``k_m = int (u_tt - f) phi_m``."""
    grid = _check_grids(u, u_tt, f_known)
    _check_family(fam, grid, 2)
    a = _weighted_phi(fam, grid, 2) @ u.values
    k = _weighted_phi(fam, grid, 0) @ (u_tt.values - f_known.values)
    return a, k


def estimate_constant_c(
    u: Field1D, u_tt: Field1D, f_known: Field1D, fam: ModulatingFamily
) -> float:
    """Closed-form constant velocity ``(a . k) / (a . a)`` with ``a_m = int phi_m'' u``."""
    a, k = constant_c_moments(u, u_tt, f_known, fam)
    denom = float(a @ a)
    if not denom > np.finfo(float).tiny:
        raise DegenerateDenominator("sum of squared moments int phi'' u is zero")
    return float(a @ k) / denom


def assemble_ip3(
    u: Field1D,
    u_tt: Field1D,
    fam: ModulatingFamily,
    basis_f: BasisSet,
    basis_c: BasisSet,
) -> LinearSystem:
    """Joint source/coefficient estimation with block matrix ``[Xi | Upsilon]``.

    Unknowns are ordered source coefficients first, then coefficient ones.
    """
    grid = _check_grids(u, u_tt)
    _check_family(fam, grid, 2)
    _check_shape(fam.M, basis_f.I + basis_c.I)
    _check_nonzero(u)
    w_phi0 = _weighted_phi(fam, grid, 0)
    xi = w_phi0 @ basis_f.evaluate(0, grid.nodes).T
    ups, mag = _coefficient_block(u.values, fam, grid, basis_c)
    A = np.hstack([xi, ups])
    rhs = w_phi0 @ u_tt.values
    labels = basis_f.labels("f") + basis_c.labels("c")
    xi_mag = np.linalg.norm(np.abs(w_phi0) @ np.abs(basis_f.evaluate(0, grid.nodes).T), axis=0)
    magnitude = np.concatenate([xi_mag, mag])
    return LinearSystem(A, rhs, labels, fam.scale, "ip3", column_magnitude=magnitude)


def assemble_kawahara(u: Field1D, u_t: Field1D, fam: ModulatingFamily) -> LinearSystem:
    """Rows ``[-1/2 int u^2 phi', -int u phi''', int u phi^(5)]``, ``K_m = -int u_t phi``."""
    grid = _check_grids(u, u_t)
    _check_family(fam, grid, 5)
    _check_shape(fam.M, 3)
    terms = [
        (-0.5, _weighted_phi(fam, grid, 1), u.values**2),
        (-1.0, _weighted_phi(fam, grid, 3), u.values),
        (1.0, _weighted_phi(fam, grid, 5), u.values),
    ]
    A = np.column_stack([k * (w @ v) for k, w, v in terms])
    mag = [np.linalg.norm(abs(k) * (np.abs(w) @ np.abs(v))) for k, w, v in terms]
    rhs = -_weighted_phi(fam, grid, 0) @ u_t.values
    return LinearSystem(
        A, rhs, ("alpha1", "alpha2", "alpha3"), fam.scale, "kawahara", column_magnitude=mag
    )


# --- solving ------------------------------------------------------------------


def solve_least_squares(
    sys: LinearSystem, row_weights: NDArray[np.float64] | None = None
) -> EstimateResult:
    """Minimise ``||W (A x - rhs)||_2`` by SVD of the column-equilibrated matrix.

    ``row_weights`` (default all ones) multiplies each equation before
    solving; it changes nothing for a consistent system but sets how noise
    is traded off between rows. The condition estimate is the
    singular-value ratio of the equilibrated weighted matrix. Above 1e12 the
    result is flagged ``rank_deficient``; the solution returned is then the
    minimum-norm one (in equilibrated coordinates). The residual norm is
    always that of the unweighted system.
    """
    A, rhs = sys.A, sys.rhs
    if row_weights is not None:
        w = np.asarray(row_weights, dtype=float)
        if w.shape != rhs.shape or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("row weights must be positive, finite and one per row")
        A, rhs = A * w[:, None], rhs * w
    col = np.linalg.norm(A, axis=0)
    col[col == 0] = 1.0
    scaled = A / col
    y, _, _, sv = np.linalg.lstsq(scaled, rhs, rcond=None)
    coeffs = y / col
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    # a column that cancelled down to roundoff is numerically zero
    if sys.column_magnitude is not None and np.any(
        np.linalg.norm(sys.A, axis=0) <= CANCELLATION_TOL * sys.column_magnitude
    ):
        cond = float("inf")
    residual = float(np.linalg.norm(sys.A @ coeffs - sys.rhs))
    return EstimateResult(
        coeffs=coeffs,
        column_labels=sys.column_labels,
        residual_norm=residual,
        condition_estimate=cond,
        rank_deficient=not cond <= RANK_DEFICIENCY_THRESHOLD,
        metadata={"problem": sys.problem, **sys.metadata},
    )


def literal_row_weights(sys: LinearSystem) -> NDArray[np.float64]:
    """Weights ``s_m / max(s)`` that undo the unit-max-norm scaling.

    Solving with these weights is the least-squares problem of the
    unnormalised polynomial formula, up to one global factor.
    """
    s = np.asarray(sys.row_scale, dtype=float)
    return s / np.max(s)


def expand_block(result: EstimateResult, prefix: str, basis: BasisSet, grid: Grid1D) -> Field1D:
    """Evaluate the expansion built from the ``prefix`` coefficient block."""
    return eval_expansion(Expansion(basis, result.block(prefix)), grid)


def reconstruct_spacetime(estimates: Sequence[tuple[float, Field1D]], grid_t: Grid1D) -> Field2D:
    """Interpolate per-slice estimates in time onto ``grid_t``."""
    return interpolate_time(estimates, grid_t)


# --- noise error analysis ------------------------------------------------------


def noise_error_vector(
    h1: Field1D, h2: Field1D, c: float, fam: ModulatingFamily
) -> NDArray[np.float64]:
    """``e_m = int (phi_m h2 - c phi_m'' h1)``: the noise term in the source-problem RHS."""
    grid = _check_grids(h1, h2)
    _check_family(fam, grid, 0)
    return _weighted_phi(fam, grid, 0) @ h2.values - c * (_weighted_phi(fam, grid, 2) @ h1.values)


def error_bound(M: int, nu: float, delta: float, c: float, L: float) -> float:
    """Upper bound ``M nu delta (1 + c) L`` on ``||e||_1``."""
    if min(M, nu, delta, c, L) < 0:
        raise ValueError("error_bound arguments must be nonnegative")
    return M * nu * delta * (1.0 + c) * L
