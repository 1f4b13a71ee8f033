"""Modulating-function families with analytic derivatives.

A modulating function of order ``l`` on ``[0, L]`` is a smooth test function
whose derivatives of order ``0..l-1`` vanish at both ends, so integrating a
PDE against it moves every spatial derivative off the data without leaving
boundary terms behind.

Two families are provided:

* polynomial: ``phi_m(x) = (L - x)**(q + m) * x**(q + M + 1 - m)``
* sinusoidal: ``phi_m(x) = sin(m*pi*x/L)**n``

Polynomial members are divided by their maximum absolute value so every
member has unit max-norm; without this the raw values for ``L=60, q=8`` span
dozens of decades.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    IndexOutOfRange,
    InvalidDomain,
    InvalidSize,
    OrderTooLow,
    OrderUnsupported,
    PointOutsideDomain,
)

MAX_PUBLIC_ORDER = 5
BOUNDARY_TOL = 1e-10


def _falling(a: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= a - j
    return out


@cache
def _trig_terms(n: int, p: int) -> tuple[tuple[int, int, int], ...]:
    """Expand d^p/dy^p sin(y)**n as sum of coef * sin**i * cos**j."""
    terms = {(n, 0): 1}
    for _ in range(p):
        nxt: dict[tuple[int, int], int] = {}
        for (i, j), c in terms.items():
            if i:
                nxt[(i - 1, j + 1)] = nxt.get((i - 1, j + 1), 0) + c * i
            if j:
                nxt[(i + 1, j - 1)] = nxt.get((i + 1, j - 1), 0) - c * j
        terms = {k: v for k, v in nxt.items() if v}
    return tuple((i, j, c) for (i, j), c in sorted(terms.items()))


@dataclass(frozen=True)
class ModulatingFamily:
    """``M`` modulating functions on ``[0, L]``.

    Attributes:
        kind: ``"polynomial"`` or ``"sinusoidal"``.
        M: Number of functions.
        L: Domain length.
        q: Freedom degree (polynomial kind).
        n: Sine power (sinusoidal kind).
        order: Guaranteed vanishing order ``l``.
        scale: Per-member normalisation ``s_m``; ``phi_m = raw_m / s_m``.
    """

    kind: str
    M: int
    L: float
    order: int
    q: float | None = None
    n: int | None = None
    scale: NDArray[np.float64] = field(default=None, repr=False)

    @property
    def params(self) -> dict:
        """Parameters sufficient to rebuild the family."""
        out = {"kind": self.kind, "M": self.M, "L": self.L}
        if self.kind == "polynomial":
            out["q"] = self.q
        else:
            out["n"] = self.n
        return out

    def exponents(self, m: int) -> tuple[float, float]:
        """Exponents ``(a, b)`` of ``(L - x)**a * x**b`` for member ``m`` (1-based)."""
        return self.q + m, self.q + self.M + 1 - m

    def derivatives(self, p: int, x: ArrayLike) -> NDArray[np.float64]:
        """All members' ``p``-th derivatives at ``x``; shape ``(M, len(x))``.

        Any nonnegative ``p`` is accepted here. For non-integer ``q`` the
        derivatives of order above ``q + 1`` are unbounded at the endpoints
        and come back as ``inf``.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "polynomial":
            return np.stack([self._poly_member(m, p, x) for m in range(1, self.M + 1)])
        return np.stack([self._sin_member(m, p, x) for m in range(1, self.M + 1)])

    def _poly_member(self, m: int, p: int, x: NDArray) -> NDArray:
        a, b = self.exponents(m)
        # work in y = x/L, divided through by the value at the peak y* = b/(a+b)
        y = x / self.L
        ys = b / (a + b)
        left, right = (1.0 - y) / (1.0 - ys), y / ys
        out = np.zeros_like(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(p + 1):
                coef = math.comb(p, k) * (-1) ** k * _falling(a, k) * _falling(b, p - k)
                if coef == 0:
                    continue
                coef /= (1.0 - ys) ** k * ys ** (p - k)
                out += coef * np.power(left, a - k) * np.power(right, b - p + k)
        return out / self.L**p

    def _sin_member(self, m: int, p: int, x: NDArray) -> NDArray:
        k = m * math.pi / self.L
        s, c = np.sin(k * x), np.cos(k * x)
        out = np.zeros_like(x)
        for i, j, coef in _trig_terms(self.n, p):
            out += coef * s**i * c**j
        return out * k**p

    def raw(self, m: int, x: ArrayLike) -> NDArray[np.float64]:
        """Unnormalised member ``m`` evaluated straight from its formula."""
        x = np.asarray(x, dtype=float)
        if self.kind == "polynomial":
            a, b = self.exponents(m)
            return (self.L - x) ** a * x**b
        return np.sin(m * math.pi * x / self.L) ** self.n


def make_polynomial_family(M: int, q: float, L: float) -> ModulatingFamily:
    """Polynomial family ``(L-x)**(q+m) * x**(q+M+1-m)``, unit max-norm members.

    The vanishing order is ``floor(q) + 1``: the smallest exponent at either
    end is ``q + 1``, and for fractional ``q`` the derivative of order
    ``floor(q) + 2`` is already unbounded at the boundary.
    """
    if int(M) != M or M < 1:
        raise InvalidSize(f"M must be a positive integer, got {M}")
    if not (np.isfinite(q) and q >= 0):
        raise InvalidSize(f"q must be >= 0, got {q}")
    if not (np.isfinite(L) and L > 0):
        raise InvalidDomain(f"L must be positive, got {L}")
    M, q, L = int(M), float(q), float(L)
    scale = np.empty(M)
    for m in range(1, M + 1):
        a, b = q + m, q + M + 1 - m
        xs = L * b / (a + b)
        # log form: the raw peak overflows for large L
        scale[m - 1] = math.exp(a * math.log(L - xs) + b * math.log(xs))
    scale.setflags(write=False)
    return ModulatingFamily("polynomial", M, L, order=math.floor(q) + 1, q=q, scale=scale)


def make_sinusoidal_family(M: int, n: int, L: float, required_order: int = 2) -> ModulatingFamily:
    """Sinusoidal family ``sin(m*pi*x/L)**n``; vanishing order ``n``."""
    if int(M) != M or M < 1:
        raise InvalidSize(f"M must be a positive integer, got {M}")
    if not (np.isfinite(L) and L > 0):
        raise InvalidDomain(f"L must be positive, got {L}")
    if int(n) != n or n < max(2, required_order):
        raise OrderTooLow(f"sine power {n} is below required order {max(2, required_order)}")
    scale = np.ones(int(M))
    scale.setflags(write=False)
    return ModulatingFamily("sinusoidal", int(M), float(L), order=int(n), n=int(n), scale=scale)


def make_family(kind: str, M: int, L: float, q: float = 3.0, n: int = 4) -> ModulatingFamily:
    if kind == "polynomial":
        return make_polynomial_family(M, q, L)
    if kind == "sinusoidal":
        return make_sinusoidal_family(M, n, L)
    raise ValueError(f"unknown modulating family kind {kind!r}")


def eval_derivative(family: ModulatingFamily, m: int, p: int, x: float) -> float:
    """``p``-th derivative (``p <= 5``) of member ``m`` (1-based) at ``x``."""
    if not 1 <= m <= family.M:
        raise IndexOutOfRange(f"member {m} outside 1..{family.M}")
    if not 0 <= p <= MAX_PUBLIC_ORDER:
        raise OrderUnsupported(f"derivative order {p} outside 0..{MAX_PUBLIC_ORDER}")
    if not 0 <= x <= family.L:
        raise PointOutsideDomain(f"x={x} outside [0, {family.L}]")
    x_arr = np.array([float(x)])
    if family.kind == "polynomial":
        return float(family._poly_member(m, p, x_arr)[0])
    return float(family._sin_member(m, p, x_arr)[0])


@dataclass(frozen=True)
class OrderDiagnostics:
    passed: bool
    required: int
    residual: float
    worst_member: int
    worst_order: int


def verify_order(family: ModulatingFamily, l: int, samples: int = 4001) -> OrderDiagnostics:
    """Check that derivatives ``0..l-1`` of every member vanish at both ends.

    The residual is ``|phi_m^(p)(boundary)| / max_x |phi_m^(p)(x)|``, maximised
    over members and orders; the check passes when it is at most 1e-10.
    """
    if l < 1:
        raise ValueError(f"order must be >= 1, got {l}")
    x = np.linspace(0.0, family.L, samples)
    worst = (0.0, 1, 0)
    for p in range(l):
        d = family.derivatives(p, x)
        ends = np.maximum(np.abs(d[:, 0]), np.abs(d[:, -1]))
        norms = np.max(np.abs(d[:, 1:-1]), axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            res = np.where(ends == 0, 0.0, ends / norms)
        res = np.where(np.isfinite(res), res, np.inf)
        i = int(np.argmax(res))
        if res[i] > worst[0]:
            worst = (float(res[i]), i + 1, p)
    return OrderDiagnostics(worst[0] <= BOUNDARY_TOL, l, *worst)


def sup_norms(family: ModulatingFamily, x: ArrayLike) -> tuple[float, float]:
    """Sample max-norms ``(nu1, nu2)`` of ``phi_m`` and ``phi_m''`` over all members."""
    return (
        float(np.max(np.abs(family.derivatives(0, x)))),
        float(np.max(np.abs(family.derivatives(2, x)))),
    )
