"""Polynomial bases for expanding unknown functions of ``x``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidCount, OrderUnsupported
from .grid import Field1D, Grid1D


@dataclass(frozen=True)
class BasisSet:
    """``I`` basis functions on ``[0, L]``.

    ``monomial``: ``(x/L)**(i-1)``. ``hermite``: physicists' ``H_{i-1}(2x/L - 1)``.
    """

    kind: str
    I: int
    L: float

    def __post_init__(self):
        if self.kind not in ("monomial", "hermite"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if int(self.I) != self.I or self.I < 1:
            raise InvalidCount(f"basis count must be >= 1, got {self.I}")

    def evaluate(self, p: int, x: ArrayLike) -> NDArray[np.float64]:
        """``p``-th derivative of every basis function at ``x``; shape ``(I, len(x))``."""
        if not 0 <= p <= 2:
            raise OrderUnsupported(f"basis derivatives are available for p <= 2, got {p}")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "monomial":
            return _monomials(self.I, p, x / self.L) / self.L**p
        return _hermite(self.I, p, 2.0 * x / self.L - 1.0) * (2.0 / self.L) ** p

    def labels(self, prefix: str) -> list[str]:
        return [f"{prefix}[{self.kind}:{i}]" for i in range(self.I)]


def _monomials(count: int, p: int, y: NDArray) -> NDArray:
    out = np.zeros((count, y.size))
    for k in range(p, count):
        coef = 1.0
        for j in range(p):
            coef *= k - j
        out[k] = coef * y ** (k - p)
    return out


def _hermite(count: int, p: int, y: NDArray) -> NDArray:
    # H_0..H_{count-1} by the three-term recurrence, then H_k' = 2k H_{k-1}
    top = count
    h = np.zeros((top, y.size))
    h[0] = 1.0
    if top > 1:
        h[1] = 2.0 * y
    for k in range(1, top - 1):
        h[k + 1] = 2.0 * y * h[k] - 2.0 * k * h[k - 1]
    out = np.zeros_like(h)
    for k in range(p, top):
        coef = 1.0
        for j in range(p):
            coef *= 2.0 * (k - j)
        out[k] = coef * h[k - p]
    return out


def make_monomial(I: int, L: float) -> BasisSet:
    return BasisSet("monomial", I, float(L))


def make_hermite(I: int, L: float) -> BasisSet:
    return BasisSet("hermite", I, float(L))


def make_basis(kind: str, I: int, L: float) -> BasisSet:
    return BasisSet(kind, I, float(L))


@dataclass(frozen=True)
class Expansion:
    basis: BasisSet
    coeffs: NDArray[np.float64]

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.basis.I,):
            raise InvalidCount(f"expected {self.basis.I} coefficients, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("expansion coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)


def eval_expansion(e: Expansion, grid: Grid1D, p: int = 0) -> Field1D:
    """Pointwise ``sum_i coeffs[i] * xi_i^(p)(x_k)`` on ``grid``."""
    return Field1D(grid, e.coeffs @ e.basis.evaluate(p, grid.nodes))
